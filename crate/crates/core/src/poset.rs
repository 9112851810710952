//! Finite partial orders on index prefixes `{0, .., M-1}`.
//!
//! A [`Poset`] stores the full relation as row bitmasks, so `leq` is a bit
//! test and transitivity checks are word-parallel subset tests. Orders come
//! in two ways: as the reflexive-transitive closure of explicit pairs
//! (rejected if the closure has a cycle), or from a predicate (rejected if
//! the predicate is not reflexive, antisymmetric, and transitive).
//!
//! Upward-closed subsets ("upsets") of a stated ground set are the other
//! half of this module: closures of a seed set, and exhaustive enumeration
//! with or without membership constraints. Enumeration is exponential in
//! the ground size by nature; callers that need minima over these families
//! at larger sizes use the min-cut route in `upset_opt` instead.

use crate::error::Error;
use crate::Result;

const WORD_BITS: usize = 64;

/// A validated partial order on `{0, .., size-1}`.
#[derive(Clone, PartialEq, Eq)]
pub struct Poset {
    size: usize,
    words: usize,
    rows: Vec<u64>,
}

impl std::fmt::Debug for Poset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let pairs: Vec<(usize, usize)> = self.comparable_pairs().collect();
        f.debug_struct("Poset").field("size", &self.size).field("strict_pairs", &pairs).finish()
    }
}

impl Poset {
    /// Reflexive-transitive closure of the given pairs, if that closure is
    /// antisymmetric.
    pub fn from_pairs(size: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); size];
        for &(a, b) in pairs {
            for index in [a, b] {
                if index >= size {
                    return Err(Error::IndexOutOfRange { index, size });
                }
            }
            adjacency[a].push(b);
        }
        let words = size.div_ceil(WORD_BITS).max(1);
        let mut rows = vec![0u64; size * words];
        let mut stack = Vec::new();
        for start in 0..size {
            let row = &mut rows[start * words..(start + 1) * words];
            row[start / WORD_BITS] |= 1 << (start % WORD_BITS);
            stack.push(start);
            while let Some(node) = stack.pop() {
                for &next in &adjacency[node] {
                    let (word, bit) = (next / WORD_BITS, 1u64 << (next % WORD_BITS));
                    if row[word] & bit == 0 {
                        row[word] |= bit;
                        stack.push(next);
                    }
                }
            }
        }
        let poset = Poset { size, words, rows };
        for a in 0..size {
            for b in a + 1..size {
                if poset.leq(a, b) && poset.leq(b, a) {
                    return Err(Error::Cycle { a, b });
                }
            }
        }
        Ok(poset)
    }

    /// Materializes `order` on `{0, .., size-1}` and validates that it is a
    /// partial order.
    pub fn from_predicate(size: usize, order: &(impl OrderPredicate + ?Sized)) -> Result<Self> {
        let words = size.div_ceil(WORD_BITS).max(1);
        let mut rows = vec![0u64; size * words];
        for a in 0..size {
            for b in 0..size {
                if order.leq(a, b) {
                    rows[a * words + b / WORD_BITS] |= 1 << (b % WORD_BITS);
                }
            }
        }
        let poset = Poset { size, words, rows };
        for a in 0..size {
            if !poset.leq(a, a) {
                return Err(Error::NotReflexive { index: a });
            }
        }
        for a in 0..size {
            for b in 0..size {
                if a != b && poset.leq(a, b) && poset.leq(b, a) {
                    return Err(Error::Cycle { a: a.min(b), b: a.max(b) });
                }
            }
        }
        // a <= b forces row(b) to be a subset of row(a)'s successors:
        // row(a) must cover row(b) word by word.
        for a in 0..size {
            for b in 0..size {
                if !poset.leq(a, b) {
                    continue;
                }
                let row_a = &poset.rows[a * poset.words..(a + 1) * poset.words];
                let row_b = &poset.rows[b * poset.words..(b + 1) * poset.words];
                for word in 0..poset.words {
                    let missing = row_b[word] & !row_a[word];
                    if missing != 0 {
                        let c = word * WORD_BITS + missing.trailing_zeros() as usize;
                        return Err(Error::NotTransitive { a, b, c });
                    }
                }
            }
        }
        Ok(poset)
    }

    pub fn total(size: usize) -> Self {
        Self::from_predicate(size, &|a: usize, b: usize| a <= b)
            .expect("total order is a partial order")
    }

    pub fn antichain(size: usize) -> Self {
        Self::from_predicate(size, &|a: usize, b: usize| a == b)
            .expect("equality is a partial order")
    }

    /// `n <= m` iff `n+1` divides `m+1`; the standard infinite test order,
    /// restricted to a prefix.
    pub fn divisibility(size: usize) -> Self {
        Self::from_predicate(size, &|a: usize, b: usize| (b + 1).is_multiple_of(a + 1))
            .expect("divisibility is a partial order")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        assert!(a < self.size && b < self.size, "index out of range");
        self.rows[a * self.words + b / WORD_BITS] >> (b % WORD_BITS) & 1 == 1
    }

    pub fn strictly_less(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    /// All strictly comparable ordered pairs, lexicographically.
    pub fn comparable_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.size).flat_map(move |a| {
            (0..self.size).filter(move |&b| self.strictly_less(a, b)).map(move |b| (a, b))
        })
    }

    /// Validates ground indices against the order's size and returns the
    /// ground as a sorted, deduplicated vector.
    pub(crate) fn check_ground(&self, ground: &[usize]) -> Result<Vec<usize>> {
        for &index in ground {
            if index >= self.size {
                return Err(Error::IndexOutOfRange { index, size: self.size });
            }
        }
        let mut sorted = ground.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Ok(sorted)
    }

    /// Smallest upward-closed subset of `ground` containing `seed`.
    pub fn upward_closure(&self, seed: &[usize], ground: &[usize]) -> Result<Upset> {
        let ground = self.check_ground(ground)?;
        for &index in seed {
            if index >= self.size {
                return Err(Error::IndexOutOfRange { index, size: self.size });
            }
            if ground.binary_search(&index).is_err() {
                return Err(Error::NotInGround { index });
            }
        }
        let members =
            ground.iter().copied().filter(|&l| seed.iter().any(|&s| self.leq(s, l))).collect();
        Ok(Upset { members })
    }

    /// Every upward-closed subset of `ground`, the empty set and `ground`
    /// included, sorted by size then lexicographically.
    pub fn enumerate_upsets(&self, ground: &[usize]) -> Result<Vec<Upset>> {
        let ground = self.check_ground(ground)?;
        let mut out = self.enumerate_forced(&ground, &[], &[]);
        Self::sort_family(&mut out);
        Ok(out)
    }

    /// Upward-closed subsets of `ground` that contain `m` and avoid `n`,
    /// for `n` strictly below `m`. This family is nonempty (it contains the
    /// closure of `m`) and is exactly the constraint set of the step-size
    /// infimum.
    pub fn enumerate_constrained_upsets(
        &self,
        ground: &[usize],
        n: usize,
        m: usize,
    ) -> Result<Vec<Upset>> {
        let ground = self.check_ground(ground)?;
        for index in [n, m] {
            if index >= self.size {
                return Err(Error::IndexOutOfRange { index, size: self.size });
            }
            if ground.binary_search(&index).is_err() {
                return Err(Error::NotInGround { index });
            }
        }
        if !self.strictly_less(n, m) {
            return Err(Error::NotStrictlyComparable { n, m });
        }
        let mut out = self.enumerate_forced(&ground, &[m], &[n]);
        Self::sort_family(&mut out);
        Ok(out)
    }

    fn sort_family(family: &mut [Upset]) {
        family.sort_by(|x, y| {
            x.members.len().cmp(&y.members.len()).then_with(|| x.members.cmp(&y.members))
        });
    }

    /// Backtracking over ground positions in order; choosing "in" forces
    /// everything above in, choosing "out" forces everything below out, so
    /// every leaf is upward-closed and none are missed.
    fn enumerate_forced(
        &self,
        ground: &[usize],
        seed_in: &[usize],
        seed_out: &[usize],
    ) -> Vec<Upset> {
        let g = ground.len();
        let above: Vec<Vec<usize>> =
            (0..g).map(|i| (0..g).filter(|&j| self.leq(ground[i], ground[j])).collect()).collect();
        let below: Vec<Vec<usize>> =
            (0..g).map(|i| (0..g).filter(|&j| self.leq(ground[j], ground[i])).collect()).collect();

        fn force(
            status: &mut [Option<bool>],
            positions: &[usize],
            value: bool,
            trail: &mut Vec<usize>,
        ) -> bool {
            for &p in positions {
                match status[p] {
                    Some(v) if v == value => {}
                    Some(_) => return false,
                    None => {
                        status[p] = Some(value);
                        trail.push(p);
                    }
                }
            }
            true
        }

        fn undo(status: &mut [Option<bool>], trail: &[usize]) {
            for &p in trail {
                status[p] = None;
            }
        }

        let mut status: Vec<Option<bool>> = vec![None; g];
        let mut trail = Vec::new();
        for &index in seed_in {
            let pos = ground.binary_search(&index).expect("seed checked against ground");
            if !force(&mut status, &above[pos], true, &mut trail) {
                return Vec::new();
            }
        }
        for &index in seed_out {
            let pos = ground.binary_search(&index).expect("seed checked against ground");
            if !force(&mut status, &below[pos], false, &mut trail) {
                return Vec::new();
            }
        }

        let mut out = Vec::new();
        let mut stack_status = status;
        fn recurse(
            i: usize,
            g: usize,
            ground: &[usize],
            above: &[Vec<usize>],
            below: &[Vec<usize>],
            status: &mut [Option<bool>],
            out: &mut Vec<Upset>,
        ) {
            if i == g {
                let members = (0..g).filter(|&p| status[p] == Some(true)).map(|p| ground[p]);
                out.push(Upset { members: members.collect() });
                return;
            }
            if status[i].is_some() {
                recurse(i + 1, g, ground, above, below, status, out);
                return;
            }
            let mut trail = Vec::new();
            if force(status, &above[i], true, &mut trail) {
                recurse(i + 1, g, ground, above, below, status, out);
            }
            undo(status, &trail);
            trail.clear();
            if force(status, &below[i], false, &mut trail) {
                recurse(i + 1, g, ground, above, below, status, out);
            }
            undo(status, &trail);
        }
        recurse(0, g, ground, &above, &below, &mut stack_status, &mut out);
        out
    }
}

/// An upward-closed subset of some ground set, stored as strictly
/// increasing indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Upset {
    members: Vec<usize>,
}

impl Upset {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// An order given as a rule rather than a finite table, so truncations of
/// any size can be materialized from it.
pub trait OrderPredicate {
    fn leq(&self, a: usize, b: usize) -> bool;
}

impl<F: Fn(usize, usize) -> bool> OrderPredicate for F {
    fn leq(&self, a: usize, b: usize) -> bool {
        self(a, b)
    }
}

/// The order part of a problem instance: the usual order on naturals,
/// divisibility shifted to start at 1, or the closure of finitely many
/// explicit pairs (indices beyond the explicit table are related only to
/// themselves).
#[derive(Clone, Debug)]
pub enum OrderSpec {
    Total,
    Divisibility,
    Explicit(Poset),
}

impl OrderSpec {
    pub fn explicit(size: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Ok(OrderSpec::Explicit(Poset::from_pairs(size, pairs)?))
    }
}

impl OrderPredicate for OrderSpec {
    fn leq(&self, a: usize, b: usize) -> bool {
        match self {
            OrderSpec::Total => a <= b,
            OrderSpec::Divisibility => (b + 1).is_multiple_of(a + 1),
            OrderSpec::Explicit(closure) => {
                a == b || (a < closure.size() && b < closure.size() && closure.leq(a, b))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn members(upsets: &[Upset]) -> Vec<Vec<usize>> {
        upsets.iter().map(|u| u.members().to_vec()).collect()
    }

    #[test]
    fn closure_of_pairs_is_transitive() {
        let p = Poset::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(p.leq(0, 2));
        assert!(p.leq(0, 0));
        assert!(!p.leq(2, 0));
        assert_eq!(p.comparable_pairs().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn cycle_is_rejected() {
        assert_eq!(Poset::from_pairs(2, &[(0, 1), (1, 0)]), Err(Error::Cycle { a: 0, b: 1 }));
        assert_eq!(
            Poset::from_pairs(3, &[(0, 1), (1, 2), (2, 0)]),
            Err(Error::Cycle { a: 0, b: 1 })
        );
    }

    #[test]
    fn out_of_range_pair_is_rejected() {
        assert_eq!(
            Poset::from_pairs(2, &[(0, 5)]),
            Err(Error::IndexOutOfRange { index: 5, size: 2 })
        );
    }

    #[test]
    fn predicate_validation_catches_each_axiom() {
        let missing_reflexive = |a: usize, b: usize| a == b && a != 1;
        assert_eq!(
            Poset::from_predicate(3, &missing_reflexive),
            Err(Error::NotReflexive { index: 1 })
        );

        let symmetric = |a: usize, b: usize| a == b || a + b == 1;
        assert_eq!(Poset::from_predicate(2, &symmetric), Err(Error::Cycle { a: 0, b: 1 }));

        let intransitive = |a: usize, b: usize| a == b || (a, b) == (0, 1) || (a, b) == (1, 2);
        assert_eq!(
            Poset::from_predicate(3, &intransitive),
            Err(Error::NotTransitive { a: 0, b: 1, c: 2 })
        );
    }

    #[test]
    fn divisibility_order_on_six_elements() {
        let p = Poset::divisibility(6);
        // Element k stands for the integer k+1.
        assert!(p.leq(0, 4)); // 1 | 5
        assert!(p.leq(1, 3)); // 2 | 4
        assert!(p.leq(2, 5)); // 3 | 6
        assert!(!p.leq(1, 2)); // 2 does not divide 3
        assert_eq!(p.comparable_pairs().count(), 8);
    }

    #[test]
    fn upward_closure_in_stated_ground() {
        let p = Poset::total(5);
        let closure = p.upward_closure(&[2], &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(closure.members(), &[2, 3, 4]);
        // Ground restriction really restricts.
        let closure = p.upward_closure(&[2], &[0, 2, 4]).unwrap();
        assert_eq!(closure.members(), &[2, 4]);
        assert_eq!(p.upward_closure(&[3], &[0, 1, 2]), Err(Error::NotInGround { index: 3 }));
    }

    #[test]
    fn enumerate_upsets_of_small_orders() {
        let chain = Poset::total(3);
        assert_eq!(
            members(&chain.enumerate_upsets(&[0, 1, 2]).unwrap()),
            vec![vec![], vec![2], vec![1, 2], vec![0, 1, 2]],
        );

        // 0 and 1 incomparable, both below 2.
        let vee = Poset::from_pairs(3, &[(0, 2), (1, 2)]).unwrap();
        assert_eq!(
            members(&vee.enumerate_upsets(&[0, 1, 2]).unwrap()),
            vec![vec![], vec![2], vec![0, 2], vec![1, 2], vec![0, 1, 2]],
        );

        let antichain = Poset::antichain(3);
        assert_eq!(antichain.enumerate_upsets(&[0, 1, 2]).unwrap().len(), 8);
    }

    #[test]
    fn constrained_enumeration_pins_m_in_and_n_out() {
        let chain = Poset::total(2);
        assert_eq!(
            members(&chain.enumerate_constrained_upsets(&[0, 1], 0, 1).unwrap()),
            vec![vec![1]],
        );

        let vee = Poset::from_pairs(3, &[(0, 2), (1, 2)]).unwrap();
        assert_eq!(
            members(&vee.enumerate_constrained_upsets(&[0, 1, 2], 0, 2).unwrap()),
            vec![vec![2], vec![1, 2]],
        );

        assert_eq!(
            vee.enumerate_constrained_upsets(&[0, 1, 2], 0, 1),
            Err(Error::NotStrictlyComparable { n: 0, m: 1 })
        );
    }

    #[test]
    fn enumeration_ground_is_a_set() {
        let chain = Poset::total(3);
        let family = chain.enumerate_upsets(&[2, 0, 1, 2]).unwrap();
        assert_eq!(family.len(), 4);
    }

    #[test]
    fn order_spec_agrees_with_materialized_posets() {
        for size in [1, 4, 7] {
            let total = Poset::from_predicate(size, &OrderSpec::Total).unwrap();
            assert_eq!(total, Poset::total(size));
            let div = Poset::from_predicate(size, &OrderSpec::Divisibility).unwrap();
            assert_eq!(div, Poset::divisibility(size));
        }
        let spec = OrderSpec::explicit(2, &[(0, 1)]).unwrap();
        assert!(spec.leq(0, 1));
        assert!(!spec.leq(1, 0));
        // Beyond the explicit table only the diagonal remains.
        assert!(spec.leq(9, 9));
        assert!(!spec.leq(0, 9));
        let p = Poset::from_predicate(4, &spec).unwrap();
        assert_eq!(p.comparable_pairs().collect::<Vec<_>>(), vec![(0, 1)]);
    }
}
