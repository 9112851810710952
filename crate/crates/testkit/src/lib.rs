//! Shared test data generators: exhaustive poset enumeration up to
//! isomorphism, denominator-bounded mass vectors, and seeded random
//! dominated instances. Test-only support for the workspace; not part of
//! the library surface.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rand::Rng;

use domcoup_core::kernel::Coupling;
use domcoup_core::measure::{check_dominance, FiniteMeasure};
use domcoup_core::poset::Poset;
use domcoup_core::rational::Rational;

type Q = Rational<i64>;

fn permutations(size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..size).collect();
    fn recurse(k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == current.len() {
            out.push(current.clone());
            return;
        }
        for i in k..current.len() {
            current.swap(k, i);
            recurse(k + 1, current, out);
            current.swap(k, i);
        }
    }
    recurse(0, &mut current, &mut out);
    out
}

fn is_transitive(size: usize, strict: &[bool]) -> bool {
    for a in 0..size {
        for b in 0..size {
            if !strict[a * size + b] {
                continue;
            }
            for c in 0..size {
                if strict[b * size + c] && !strict[a * size + c] {
                    return false;
                }
            }
        }
    }
    true
}

fn canonical_key(size: usize, strict: &[bool], perms: &[Vec<usize>]) -> u64 {
    let mut best = u64::MAX;
    for perm in perms {
        let mut key = 0u64;
        for a in 0..size {
            for b in 0..size {
                if strict[a * size + b] {
                    key |= 1 << (perm[a] * size + perm[b]);
                }
            }
        }
        best = best.min(key);
    }
    best
}

/// All partial orders on `size` elements, one representative per
/// isomorphism class. Enumerates strict relations compatible with the
/// natural order 0 < 1 < ... (every finite poset has such a labeling via
/// a linear extension) and dedups by the minimal relation matrix over all
/// relabelings. Exhaustive only for sizes up to 6.
pub fn posets_up_to_isomorphism(size: usize) -> Vec<Poset> {
    assert!((1..=6).contains(&size), "exhaustive enumeration supports sizes 1..=6");
    let upper: Vec<(usize, usize)> =
        (0..size).flat_map(|a| (a + 1..size).map(move |b| (a, b))).collect();
    let perms = permutations(size);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1 << upper.len()) {
        let mut strict = vec![false; size * size];
        for (i, &(a, b)) in upper.iter().enumerate() {
            if mask >> i & 1 == 1 {
                strict[a * size + b] = true;
            }
        }
        if !is_transitive(size, &strict) {
            continue;
        }
        let key = canonical_key(size, &strict, &perms);
        if seen.insert(key) {
            let pairs: Vec<(usize, usize)> = (0..size)
                .flat_map(|a| (0..size).map(move |b| (a, b)))
                .filter(|&(a, b)| key >> (a * size + b) & 1 == 1)
                .collect();
            out.push(Poset::from_pairs(size, &pairs).expect("canonical relation is a poset"));
        }
    }
    out
}

/// Random partial order compatible with the natural order, with a
/// freshly drawn edge density per call.
pub fn random_natural_poset(rng: &mut impl Rng, size: usize) -> Poset {
    let density: f64 = rng.random_range(0.15..0.85);
    let mut pairs = Vec::new();
    for a in 0..size {
        for b in a + 1..size {
            if rng.random_bool(density) {
                pairs.push((a, b));
            }
        }
    }
    Poset::from_pairs(size, &pairs).expect("pairs follow the natural order, so acyclic")
}

fn compositions(len: usize, total: i64) -> Vec<Vec<i64>> {
    if len == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(len - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every probability vector of the given length whose entries share a
/// common denominator at most `max_denominator`. For `max_denominator`
/// up to 4 this is exactly the set of vectors with all reduced entry
/// denominators at most 4: a unit sum cannot mix third-grid and
/// quarter-grid entries.
pub fn unit_mass_vectors(len: usize, max_denominator: i64) -> Vec<FiniteMeasure<i64>> {
    let mut seen: BTreeSet<Vec<Q>> = BTreeSet::new();
    for den in 1..=max_denominator {
        for parts in compositions(len, den) {
            seen.insert(parts.iter().map(|&a| Rational::new(a, den)).collect());
        }
    }
    seen.into_iter()
        .map(|values| FiniteMeasure::new(values).expect("unit mass by construction"))
        .collect()
}

/// Uniform random composition of `total` into `len` nonnegative parts.
pub fn random_composition(rng: &mut impl Rng, len: usize, total: i64) -> Vec<i64> {
    assert!(len >= 1 && total >= 0);
    let mut cuts: Vec<i64> = (0..len - 1).map(|_| rng.random_range(0..=total)).collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(len);
    let mut previous = 0;
    for &cut in &cuts {
        parts.push(cut - previous);
        previous = cut;
    }
    parts.push(total - previous);
    parts
}

fn lattice_units(measure: &FiniteMeasure<i64>, grid: i64, len: usize) -> Vec<i64> {
    (0..len)
        .map(|n| {
            let scaled = measure.value(n) * Rational::from_integer(grid);
            assert!(scaled.is_integer(), "measure must be on the 1/grid lattice");
            scaled.to_integer()
        })
        .collect()
}

fn push_measure(
    rng: &mut impl Rng,
    measure: &FiniteMeasure<i64>,
    poset: &Poset,
    grid: i64,
    moves: usize,
    upward: bool,
) -> FiniteMeasure<i64> {
    let size = poset.size();
    assert!(measure.support().last().is_none_or(|last| last < size));
    let mut units = lattice_units(measure, grid, size);
    let targets: Vec<Vec<usize>> = (0..size)
        .map(|a| {
            (0..size)
                .filter(|&b| b != a && if upward { poset.leq(a, b) } else { poset.leq(b, a) })
                .collect()
        })
        .collect();
    for _ in 0..moves {
        let movable: Vec<usize> =
            (0..size).filter(|&a| units[a] > 0 && !targets[a].is_empty()).collect();
        if movable.is_empty() {
            break;
        }
        let a = movable[rng.random_range(0..movable.len())];
        let b = targets[a][rng.random_range(0..targets[a].len())];
        let delta = rng.random_range(1..=units[a]);
        units[a] -= delta;
        units[b] += delta;
    }
    FiniteMeasure::new(units.iter().map(|&u| Rational::new(u, grid)).collect())
        .expect("moves preserve unit mass")
}

/// Moves random mass chunks strictly upward: the result dominates the
/// input. Exact on the `1/grid` lattice.
pub fn push_up_measure(
    rng: &mut impl Rng,
    measure: &FiniteMeasure<i64>,
    poset: &Poset,
    grid: i64,
    moves: usize,
) -> FiniteMeasure<i64> {
    push_measure(rng, measure, poset, grid, moves, true)
}

/// Moves random mass chunks strictly downward: the result is dominated by
/// the input.
pub fn push_down_measure(
    rng: &mut impl Rng,
    measure: &FiniteMeasure<i64>,
    poset: &Poset,
    grid: i64,
    moves: usize,
) -> FiniteMeasure<i64> {
    push_measure(rng, measure, poset, grid, moves, false)
}

/// A dominated pair with its order and ground set. `nu` is built from
/// `mu` by finitely many upward mass moves, which proves domination move
/// by move; the generator asserts it anyway.
pub struct DominatedInstance {
    pub poset: Poset,
    pub ground: Vec<usize>,
    pub mu: FiniteMeasure<i64>,
    pub nu: FiniteMeasure<i64>,
}

/// Seeded random dominated instance on a random poset, with all masses on
/// the `1/grid` lattice so denominators stay bounded over a whole run.
pub fn random_dominated_instance(
    rng: &mut impl Rng,
    sizes: RangeInclusive<usize>,
    grid: i64,
) -> DominatedInstance {
    assert!(grid >= 1);
    let size = rng.random_range(sizes);
    let poset = random_natural_poset(rng, size);
    let mu = FiniteMeasure::new(
        random_composition(rng, size, grid).iter().map(|&u| Rational::new(u, grid)).collect(),
    )
    .expect("composition keeps unit mass");
    let moves = rng.random_range(0..=2 * size);
    let nu = push_up_measure(rng, &mu, &poset, grid, moves);
    let instance = DominatedInstance { ground: (0..size).collect(), mu, nu, poset };
    assert!(
        check_dominance(&instance.mu, &instance.nu, &instance.poset, &instance.ground).unwrap(),
        "upward moves must preserve domination"
    );
    instance
}

/// Mass-preserving random perturbation on the `1/grid` lattice. The input
/// must already live on that lattice.
pub fn perturb_measure(
    rng: &mut impl Rng,
    measure: &FiniteMeasure<i64>,
    grid: i64,
    moves: usize,
) -> FiniteMeasure<i64> {
    let len = measure.len();
    let mut units: Vec<i64> = (0..len)
        .map(|n| {
            let scaled = measure.value(n) * Rational::from_integer(grid);
            assert!(scaled.is_integer(), "measure must be on the 1/grid lattice");
            scaled.to_integer()
        })
        .collect();
    for _ in 0..moves {
        let sources: Vec<usize> = (0..len).filter(|&n| units[n] > 0).collect();
        let a = sources[rng.random_range(0..sources.len())];
        let b = rng.random_range(0..len);
        let delta = rng.random_range(1..=units[a]);
        units[a] -= delta;
        units[b] += delta;
    }
    FiniteMeasure::new(units.iter().map(|&u| Rational::new(u, grid)).collect())
        .expect("moves preserve unit mass")
}

/// Random nonnegative rewiring of a coupling on the `1/grid` lattice:
/// moves lattice chunks between arbitrary pairs inside the `size`-prefix
/// grid. Marginals are intentionally not preserved.
pub fn perturb_coupling(
    rng: &mut impl Rng,
    coupling: &Coupling<i64>,
    size: usize,
    grid: i64,
    moves: usize,
) -> Coupling<i64> {
    let mut units: BTreeMap<(usize, usize), i64> = coupling
        .entries()
        .map(|(pair, value)| {
            let scaled = value * Rational::from_integer(grid);
            assert!(scaled.is_integer(), "coupling must be on the 1/grid lattice");
            (pair, scaled.to_integer())
        })
        .collect();
    for _ in 0..moves {
        let sources: Vec<(usize, usize)> =
            units.iter().filter(|&(_, &u)| u > 0).map(|(&p, _)| p).collect();
        if sources.is_empty() {
            break;
        }
        let src = sources[rng.random_range(0..sources.len())];
        let dst = (rng.random_range(0..size), rng.random_range(0..size));
        let delta = rng.random_range(1..=units[&src]);
        *units.get_mut(&src).unwrap() -= delta;
        *units.entry(dst).or_insert(0) += delta;
    }
    Coupling::from_triples(
        units
            .into_iter()
            .filter(|&(_, u)| u != 0)
            .map(|((n, m), u)| (n, m, Rational::new(u, grid))),
    )
    .expect("one triple per grid cell")
}

#[cfg(test)]
mod tests {
    use super::*;
    use domcoup_core::kernel::diagonal_init;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn isomorphism_class_counts_match_the_known_sequence() {
        let expected = [1, 2, 5, 16, 63, 318];
        for (size, &count) in (1..=6).zip(&expected) {
            assert_eq!(posets_up_to_isomorphism(size).len(), count, "size {size}");
        }
    }

    #[test]
    fn representatives_are_pairwise_nonisomorphic() {
        let posets = posets_up_to_isomorphism(4);
        let perms = permutations(4);
        let keys: BTreeSet<u64> = posets
            .iter()
            .map(|p| {
                let mut strict = vec![false; 16];
                for a in 0..4 {
                    for b in 0..4 {
                        strict[a * 4 + b] = a != b && p.leq(a, b);
                    }
                }
                canonical_key(4, &strict, &perms)
            })
            .collect();
        assert_eq!(keys.len(), posets.len());
    }

    #[test]
    fn mass_vector_grids_have_frozen_sizes() {
        assert_eq!(unit_mass_vectors(1, 4).len(), 1);
        assert_eq!(unit_mass_vectors(2, 4).len(), 7);
        assert_eq!(unit_mass_vectors(3, 4).len(), 22);
        for measure in unit_mass_vectors(3, 4) {
            let total: Q = measure.values().iter().sum();
            assert_eq!(total, Rational::from_integer(1));
        }
    }

    #[test]
    fn random_compositions_sum_to_the_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let parts = random_composition(&mut rng, 5, 24);
            assert_eq!(parts.iter().sum::<i64>(), 24);
            assert!(parts.iter().all(|&p| p >= 0));
        }
    }

    #[test]
    fn dominated_instances_are_dominated() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let instance = random_dominated_instance(&mut rng, 2..=7, 24);
            assert!(check_dominance(&instance.mu, &instance.nu, &instance.poset, &instance.ground)
                .unwrap());
        }
    }

    #[test]
    fn perturbations_stay_on_the_lattice_and_keep_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let instance = random_dominated_instance(&mut rng, 4..=4, 12);
        let shaken = perturb_measure(&mut rng, &instance.nu, 12, 5);
        let total: Q = shaken.values().iter().sum();
        assert_eq!(total, Rational::from_integer(1));

        let coupling = diagonal_init(&instance.mu);
        let rewired = perturb_coupling(&mut rng, &coupling, 4, 12, 5);
        assert_eq!(rewired.total_mass(), Rational::from_integer(1));
    }
}
