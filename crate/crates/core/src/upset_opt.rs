//! Minimum-weight upsets under membership constraints.
//!
//! The step size of the coupling construction is capped by an infimum of a
//! linear functional over all upsets of the ground set that contain `m`
//! and avoid `n`. Two independent implementations compute it:
//!
//! * brute force over the enumerated family, exponential but obviously
//!   correct, used at small ground sizes and as the reference in tests;
//! * a reduction to minimum cut, polynomial, used everywhere else.
//!
//! The reduction is the classic closure construction: a cut separating a
//! source from a sink in the network below corresponds to a choice of
//! upset `R` (the source side), with infinite arcs ruling out choices that
//! are not upward-closed or violate the pins, and finite arcs charging
//! `w_l` for taking a positively weighted `l` into `R` and `-w_l` for
//! leaving a negatively weighted `l` out. The minimum cut therefore equals
//! `min W(R) + C` with the constant `C` the total negative weight, and
//! "infinite" can be any value exceeding the sum of all finite arcs.

use std::collections::BTreeMap;

use num::{Signed, Zero};

use crate::error::Error;
use crate::flow::FlowNetwork;
use crate::poset::Poset;
use crate::rational::{one, zero, Int, Rational};
use crate::Result;

/// Ground sizes up to this default to enumeration in [`min_upset_weight`].
pub const ENUMERATION_LIMIT: usize = 16;

/// A finitely supported rational weight per index; absent means zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeightVector<T: Int> {
    entries: BTreeMap<usize, Rational<T>>,
}

impl<T: Int> WeightVector<T> {
    pub fn new() -> Self {
        WeightVector { entries: BTreeMap::new() }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (usize, Rational<T>)>) -> Self {
        let mut w = WeightVector::new();
        for (index, value) in entries {
            w.set(index, value);
        }
        w
    }

    /// Sets the weight at `index`; zero removes the entry.
    pub fn set(&mut self, index: usize, value: Rational<T>) {
        if value.is_zero() {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
    }

    pub fn get(&self, index: usize) -> Rational<T> {
        self.entries.get(&index).cloned().unwrap_or_else(zero)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &Rational<T>)> {
        self.entries.iter().map(|(&i, v)| (i, v))
    }

    pub fn check_support_in(&self, ground: &[usize]) -> Result<()> {
        for index in self.support() {
            if !ground.contains(&index) {
                return Err(Error::SupportOutsideGround { index });
            }
        }
        Ok(())
    }
}

/// Minimum of `sum_{l in R} w_l` over upsets `R` of `ground` with `m` in
/// and `n` out, by trying every member of the family.
pub fn min_upset_weight_bruteforce<T: Int>(
    weights: &WeightVector<T>,
    poset: &Poset,
    ground: &[usize],
    n: usize,
    m: usize,
) -> Result<Rational<T>> {
    weights.check_support_in(ground)?;
    let family = poset.enumerate_constrained_upsets(ground, n, m)?;
    let minimum = family
        .iter()
        .map(|upset| upset.members().iter().fold(zero::<T>(), |acc, &l| acc + weights.get(l)))
        .min()
        .expect("constrained family is nonempty when n is strictly below m");
    Ok(minimum)
}

/// Same minimum via the closure min-cut reduction; polynomial in the
/// ground size.
pub fn min_upset_weight_mincut<T: Int>(
    weights: &WeightVector<T>,
    poset: &Poset,
    ground: &[usize],
    n: usize,
    m: usize,
) -> Result<Rational<T>> {
    weights.check_support_in(ground)?;
    let ground = poset.check_ground(ground)?;
    for index in [n, m] {
        if ground.binary_search(&index).is_err() {
            if index >= poset.size() {
                return Err(Error::IndexOutOfRange { index, size: poset.size() });
            }
            return Err(Error::NotInGround { index });
        }
    }
    if !poset.strictly_less(n, m) {
        return Err(Error::NotStrictlyComparable { n, m });
    }
    let pin_in = ground.binary_search(&m).expect("m checked");
    let pin_out = ground.binary_search(&n).expect("n checked");
    Ok(pinned_mincut(weights, poset, &ground, pin_in, Some(pin_out)))
}

/// Minimum of `sum_{l in R} w_l` over all nonempty upsets of `ground`, or
/// `None` for an empty ground set. Every nonempty upset contains some
/// pinned element, so this is the minimum of the single-pin cuts.
pub fn min_nonempty_upset_weight_mincut<T: Int>(
    weights: &WeightVector<T>,
    poset: &Poset,
    ground: &[usize],
) -> Result<Option<Rational<T>>> {
    weights.check_support_in(ground)?;
    let ground = poset.check_ground(ground)?;
    let mut best: Option<Rational<T>> = None;
    for pin_in in 0..ground.len() {
        let value = pinned_mincut(weights, poset, &ground, pin_in, None);
        if best.as_ref().is_none_or(|b| &value < b) {
            best = Some(value);
        }
    }
    Ok(best)
}

/// Routes to brute force below [`ENUMERATION_LIMIT`] and to the min-cut
/// reduction above it. Both are exact; this only trades constant factors.
pub fn min_upset_weight<T: Int>(
    weights: &WeightVector<T>,
    poset: &Poset,
    ground: &[usize],
    n: usize,
    m: usize,
) -> Result<Rational<T>> {
    if ground.len() <= ENUMERATION_LIMIT {
        min_upset_weight_bruteforce(weights, poset, ground, n, m)
    } else {
        min_upset_weight_mincut(weights, poset, ground, n, m)
    }
}

fn pinned_mincut<T: Int>(
    weights: &WeightVector<T>,
    poset: &Poset,
    ground: &[usize],
    pin_in: usize,
    pin_out: Option<usize>,
) -> Rational<T> {
    let g = ground.len();
    let (source, sink) = (g, g + 1);
    let mut infinite = one::<T>();
    for (_, w) in weights.entries() {
        infinite += w.abs();
    }

    let mut net = FlowNetwork::new(g + 2);
    for i in 0..g {
        for j in 0..g {
            if i != j && poset.leq(ground[i], ground[j]) {
                net.add_edge(i, j, infinite.clone());
            }
        }
    }
    net.add_edge(source, pin_in, infinite.clone());
    if let Some(out) = pin_out {
        net.add_edge(out, sink, infinite.clone());
    }

    let mut negative_total = zero::<T>();
    for (l, w) in weights.entries() {
        let position = ground.binary_search(&l).expect("support checked against ground");
        if w > &zero() {
            net.add_edge(position, sink, w.clone());
        } else {
            net.add_edge(source, position, -w.clone());
            negative_total += -w.clone();
        }
    }

    net.max_flow(source, sink) - negative_total
}

/// Enumerated upsets of a fixed ground set, prepared once so that many
/// minimizations against changing weights stay cheap. Build cost and
/// memory are exponential in the ground size; the sweep driver only uses
/// this below [`ENUMERATION_LIMIT`].
#[derive(Clone, Debug)]
pub struct UpsetEvaluator {
    ground: Vec<usize>,
    upsets: Vec<Vec<usize>>,
    pair_families: BTreeMap<(usize, usize), Vec<usize>>,
}

impl UpsetEvaluator {
    pub fn build(poset: &Poset, ground: &[usize]) -> Result<Self> {
        let ground = poset.check_ground(ground)?;
        let family = poset.enumerate_upsets(&ground)?;
        let upsets: Vec<Vec<usize>> = family.iter().map(|u| u.members().to_vec()).collect();
        let mut pair_families = BTreeMap::new();
        for &n in &ground {
            for &m in &ground {
                if !poset.strictly_less(n, m) {
                    continue;
                }
                let indices: Vec<usize> = (0..upsets.len())
                    .filter(|&k| {
                        upsets[k].binary_search(&m).is_ok() && upsets[k].binary_search(&n).is_err()
                    })
                    .collect();
                pair_families.insert((n, m), indices);
            }
        }
        Ok(UpsetEvaluator { ground, upsets, pair_families })
    }

    pub fn ground(&self) -> &[usize] {
        &self.ground
    }

    /// Strictly comparable pairs within the ground set, ascending.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pair_families.keys().copied()
    }

    /// Minimum weight over the `(n, m)`-constrained family, or `None` when
    /// `n` is not strictly below `m` within the ground set.
    pub fn min_for_pair<T: Int>(
        &self,
        weight_at: impl Fn(usize) -> Rational<T>,
        n: usize,
        m: usize,
    ) -> Option<Rational<T>> {
        let family = self.pair_families.get(&(n, m))?;
        let minimum = family
            .iter()
            .map(|&k| self.upsets[k].iter().fold(zero::<T>(), |acc, &l| acc + weight_at(l)))
            .min()
            .expect("constrained families are nonempty");
        Some(minimum)
    }

    /// Weight of every upset under the given assignment, indexed like the
    /// internal family; feeds [`Self::min_for_pair_with_sums`] when many
    /// pairs share one weight vector.
    pub fn upset_sums<T: Int>(&self, weight_at: impl Fn(usize) -> Rational<T>) -> Vec<Rational<T>> {
        self.upsets
            .iter()
            .map(|members| members.iter().fold(zero::<T>(), |acc, &l| acc + weight_at(l)))
            .collect()
    }

    pub fn min_for_pair_with_sums<T: Int>(
        &self,
        sums: &[Rational<T>],
        n: usize,
        m: usize,
    ) -> Option<Rational<T>> {
        let family = self.pair_families.get(&(n, m))?;
        let minimum = family.iter().map(|&k| sums[k].clone()).min().expect("families are nonempty");
        Some(minimum)
    }
}
