//! The mass-shifting step and its iteration.
//!
//! State is a [`Coupling`]: a sparse nonnegative matrix whose rows are
//! pinned to the first marginal and whose columns are being pushed toward
//! the second. One step at a pair `(n, m)` with `n` strictly below `m`
//! moves `alpha` units of mass from entry `(n, n)` to entry `(n, m)`,
//! where `alpha` (the Nawrotzki step size) is the largest move that
//! neither overdraws column `n` below `nu_n`, nor overfills column `m`
//! above `nu_m`, nor pushes any upset's column mass above its `nu` mass:
//!
//! ```text
//! alpha = min{ col(n) - nu_n,  nu_m - col(m),
//!              min over upsets R with m in R, n not in R of
//!                  sum_{l in R} (nu_l - col(l)) }
//! ```
//!
//! clamped to 0 unless `n` is strictly below `m` and the minimum is
//! positive. Iterating the step along a fixed boustrophedon enumeration of
//! index pairs (filtered to comparable pairs) drives the column sums to
//! `nu` whenever the first marginal is dominated by `nu`; each visited
//! pair leaves the active set and never re-enters.
//!
//! The enumeration walks square shells of the quarter plane: shell `d`
//! covers all pairs with larger coordinate `d`, even shells go from
//! `(0, d)` over the corner `(d, d)` down to `(d, 0)`, odd shells walk the
//! reverse. Everything in shells below `d` precedes everything in shell
//! `d`, which is what aligns runs at different truncations: the filtered
//! sweep of a smaller prefix is literally a prefix of the filtered sweep
//! of a larger one.

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};

use crate::error::Error;
use crate::measure::FiniteMeasure;
use crate::poset::Poset;
use crate::rational::{zero, Int, Rational};
use crate::upset_opt::{min_upset_weight, UpsetEvaluator, WeightVector, ENUMERATION_LIMIT};
use crate::Result;

/// Sparse matrix of exact rationals with cached row and column sums. The
/// bound `M` states that the support lies in `{0, .., M-1}` squared; sums
/// and entries read as zero beyond it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coupling<T: Int> {
    bound: usize,
    entries: BTreeMap<(usize, usize), Rational<T>>,
    row_sums: Vec<Rational<T>>,
    col_sums: Vec<Rational<T>>,
}

impl<T: Int> Coupling<T> {
    pub fn empty(bound: usize) -> Self {
        Coupling {
            bound,
            entries: BTreeMap::new(),
            row_sums: vec![zero(); bound],
            col_sums: vec![zero(); bound],
        }
    }

    /// Builds a coupling from `(n, m, value)` triples, as read back from
    /// serialized output. Duplicate positions are rejected; negative
    /// values are allowed here so that a verifier can load and then report
    /// on an invalid claim instead of refusing to look at it.
    pub fn from_triples(
        triples: impl IntoIterator<Item = (usize, usize, Rational<T>)>,
    ) -> Result<Self> {
        let mut coupling = Coupling::empty(0);
        let mut seen = BTreeSet::new();
        for (n, m, value) in triples {
            if !seen.insert((n, m)) {
                return Err(Error::DuplicateEntry { n, m });
            }
            coupling.shift(n, m, &value);
        }
        Ok(coupling)
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn get(&self, n: usize, m: usize) -> Rational<T> {
        self.entries.get(&(n, m)).cloned().unwrap_or_else(zero)
    }

    pub fn row_sum(&self, n: usize) -> Rational<T> {
        self.row_sums.get(n).cloned().unwrap_or_else(zero)
    }

    pub fn col_sum(&self, m: usize) -> Rational<T> {
        self.col_sums.get(m).cloned().unwrap_or_else(zero)
    }

    pub fn total_mass(&self) -> Rational<T> {
        self.row_sums.iter().fold(zero(), |acc, v| acc + v)
    }

    /// Nonzero entries in lexicographic position order.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &Rational<T>)> {
        self.entries.iter().map(|(&k, v)| (k, v))
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.keys().copied()
    }

    pub fn l1_distance(&self, other: &Self) -> Rational<T> {
        let mut total = zero::<T>();
        for (key, value) in &self.entries {
            total += (value - other.get(key.0, key.1)).abs();
        }
        for (key, value) in &other.entries {
            if !self.entries.contains_key(key) {
                total += value.abs();
            }
        }
        total
    }

    pub fn check_support_in(&self, ground: &[usize]) -> Result<()> {
        for &(n, m) in self.entries.keys() {
            for index in [n, m] {
                if !ground.contains(&index) {
                    return Err(Error::SupportOutsideGround { index });
                }
            }
        }
        Ok(())
    }

    /// True when the cached row and column sums match sums recomputed from
    /// scratch. Hot paths maintain the caches incrementally; this is the
    /// debug-mode cross-check.
    pub fn sums_consistent(&self) -> bool {
        let mut rows = vec![zero::<T>(); self.bound];
        let mut cols = vec![zero::<T>(); self.bound];
        for (&(n, m), value) in &self.entries {
            rows[n] += value;
            cols[m] += value;
        }
        rows == self.row_sums && cols == self.col_sums
    }

    /// Adds `delta` to entry `(n, m)`, growing the bound as needed and
    /// keeping the cached sums in step.
    fn shift(&mut self, n: usize, m: usize, delta: &Rational<T>) {
        if delta.is_zero() {
            self.bound = self.bound.max(n.max(m) + 1);
            self.row_sums.resize(self.bound, zero());
            self.col_sums.resize(self.bound, zero());
            return;
        }
        self.bound = self.bound.max(n.max(m) + 1);
        self.row_sums.resize(self.bound, zero());
        self.col_sums.resize(self.bound, zero());
        let entry = self.entries.entry((n, m)).or_insert_with(zero);
        *entry += delta;
        if entry.is_zero() {
            self.entries.remove(&(n, m));
        }
        self.row_sums[n] += delta;
        self.col_sums[m] += delta;
    }
}

/// The coupling with `mu` on the diagonal and nothing else: the starting
/// point of every run. Its rows and columns both sum to `mu`.
pub fn diagonal_init<T: Int>(mu: &FiniteMeasure<T>) -> Coupling<T> {
    let mut coupling = Coupling::empty(mu.len());
    for n in mu.support() {
        coupling.shift(n, n, &mu.value(n));
    }
    coupling
}

/// Which of the three terms of the step-size minimum was smallest; ties go
/// to the earlier term. Diagnostic only: the step size itself does not
/// depend on the tie order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlphaTerm {
    FirstMarginalSlack,
    SecondMarginalSlack,
    UpsetInfimum,
}

/// One step's worth of diagnostics: the pair, the step size, which term
/// bound it (absent for zero steps), and the column sums it moved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepTrace<T: Int> {
    pub pair: (usize, usize),
    pub alpha: Rational<T>,
    pub attained: Option<AlphaTerm>,
    pub col_n_before: Rational<T>,
    pub col_n_after: Rational<T>,
    pub col_m_before: Rational<T>,
    pub col_m_after: Rational<T>,
}

/// The step size at `(n, m)`. Zero whenever `n` is not strictly below `m`
/// within the order's prefix, and zero whenever any term of the minimum
/// fails to be positive.
pub fn alpha<T: Int>(
    nu: &FiniteMeasure<T>,
    lam: &Coupling<T>,
    n: usize,
    m: usize,
    poset: &Poset,
    ground: &[usize],
) -> Result<Rational<T>> {
    let ground = check_supports(nu, lam, poset, ground)?;
    Ok(alpha_inner(nu, lam, n, m, poset, &ground, None).0)
}

/// Applies one step at `(n, m)` and reports what it did. The input is
/// unchanged; with a zero step size the returned coupling equals the
/// input.
pub fn phi_step<T: Int>(
    nu: &FiniteMeasure<T>,
    lam: &Coupling<T>,
    n: usize,
    m: usize,
    poset: &Poset,
    ground: &[usize],
) -> Result<(Coupling<T>, StepTrace<T>)> {
    let ground = check_supports(nu, lam, poset, ground)?;
    let mut next = lam.clone();
    let trace = phi_step_inner(nu, &mut next, n, m, poset, &ground, None)?;
    Ok((next, trace))
}

/// All pairs of the ground set with a positive step size. The result is
/// contained in the strict order relation, and its first and second
/// projections are disjoint.
pub fn active_set<T: Int>(
    nu: &FiniteMeasure<T>,
    lam: &Coupling<T>,
    poset: &Poset,
    ground: &[usize],
) -> Result<BTreeSet<(usize, usize)>> {
    let ground = check_supports(nu, lam, poset, ground)?;
    let mut active = BTreeSet::new();
    if ground.len() <= ENUMERATION_LIMIT {
        // One weight vector serves every pair, so share the per-upset sums.
        let evaluator = UpsetEvaluator::build(poset, &ground)?;
        let sums = evaluator.upset_sums(|l| nu.value(l) - lam.col_sum(l));
        for (n, m) in evaluator.pairs() {
            let surplus = lam.col_sum(n) - nu.value(n);
            if surplus <= zero() {
                continue;
            }
            let deficit = nu.value(m) - lam.col_sum(m);
            if deficit <= zero() {
                continue;
            }
            let headroom =
                evaluator.min_for_pair_with_sums(&sums, n, m).expect("pair from evaluator");
            if headroom > zero() {
                active.insert((n, m));
            }
        }
    } else {
        for &n in &ground {
            for &m in &ground {
                if !poset.strictly_less(n, m) {
                    continue;
                }
                let (value, _) = alpha_inner(nu, lam, n, m, poset, &ground, None);
                if value > zero() {
                    active.insert((n, m));
                }
            }
        }
    }
    debug_assert!(
        {
            let firsts: BTreeSet<usize> = active.iter().map(|&(n, _)| n).collect();
            let seconds: BTreeSet<usize> = active.iter().map(|&(_, m)| m).collect();
            firsts.is_disjoint(&seconds)
        },
        "active set projections overlap"
    );
    Ok(active)
}

/// The `index`-th point (0-based) of the unfiltered boustrophedon walk
/// over all of `N x N`.
pub fn boustrophedon_point(index: usize) -> (usize, usize) {
    let shell = index.isqrt();
    let offset = index - shell * shell;
    if shell % 2 == 1 {
        if offset <= shell {
            (shell, offset)
        } else {
            (2 * shell - offset, shell)
        }
    } else if offset <= shell {
        (offset, shell)
    } else {
        (shell, 2 * shell - offset)
    }
}

/// The full filtered sweep for a finite order: every strictly comparable
/// pair exactly once, in walk order.
pub fn sweep_pairs(poset: &Poset) -> Vec<(usize, usize)> {
    let size = poset.size();
    (0..size * size)
        .map(boustrophedon_point)
        .filter(|&(n, m)| n < size && m < size && poset.strictly_less(n, m))
        .collect()
}

/// The `k`-th term (1-based) of the filtered sweep, or `None` once the
/// finite order's comparable pairs are exhausted.
pub fn sweep_sequence(k: usize, poset: &Poset) -> Option<(usize, usize)> {
    assert!(k >= 1, "sweep positions are 1-based");
    let size = poset.size();
    (0..size * size)
        .map(boustrophedon_point)
        .filter(|&(n, m)| n < size && m < size && poset.strictly_less(n, m))
        .nth(k - 1)
}

/// Runs `steps` steps along the filtered sweep from `lam0`, returning the
/// final coupling and one trace per executed step. A sweep exhausted
/// before `steps` leaves the remaining steps as identities (and traces
/// stop with the sweep).
pub fn run<T: Int>(
    nu: &FiniteMeasure<T>,
    lam0: &Coupling<T>,
    poset: &Poset,
    ground: &[usize],
    steps: usize,
) -> Result<(Coupling<T>, Vec<StepTrace<T>>)> {
    let ground = check_supports(nu, lam0, poset, ground)?;
    let evaluator = if ground.len() <= ENUMERATION_LIMIT {
        Some(UpsetEvaluator::build(poset, &ground)?)
    } else {
        None
    };
    let mut lam = lam0.clone();
    let mut traces = Vec::new();
    for pair in sweep_pairs(poset).into_iter().take(steps) {
        let trace =
            phi_step_inner(nu, &mut lam, pair.0, pair.1, poset, &ground, evaluator.as_ref())?;
        traces.push(trace);
    }
    debug_assert!(lam.sums_consistent(), "cached sums drifted");
    Ok((lam, traces))
}

fn check_supports<T: Int>(
    nu: &FiniteMeasure<T>,
    lam: &Coupling<T>,
    poset: &Poset,
    ground: &[usize],
) -> Result<Vec<usize>> {
    let ground = poset.check_ground(ground)?;
    nu.check_support_in(&ground)?;
    lam.check_support_in(&ground)?;
    Ok(ground)
}

/// The step size plus which term attained it, assuming supports were
/// already validated. The upset infimum is only evaluated when both slack
/// terms are positive; in that case both `n` and `m` carry mass or target
/// mass and hence lie in the ground set.
fn alpha_inner<T: Int>(
    nu: &FiniteMeasure<T>,
    lam: &Coupling<T>,
    n: usize,
    m: usize,
    poset: &Poset,
    ground: &[usize],
    evaluator: Option<&UpsetEvaluator>,
) -> (Rational<T>, Option<AlphaTerm>) {
    if n >= poset.size() || m >= poset.size() || !poset.strictly_less(n, m) {
        return (zero(), None);
    }
    let surplus = lam.col_sum(n) - nu.value(n);
    if surplus <= zero() {
        return (zero(), None);
    }
    let deficit = nu.value(m) - lam.col_sum(m);
    if deficit <= zero() {
        return (zero(), None);
    }
    let headroom = match evaluator {
        Some(evaluator) => evaluator
            .min_for_pair(|l| nu.value(l) - lam.col_sum(l), n, m)
            .expect("comparable pair within evaluator ground"),
        None => {
            let weights = WeightVector::from_entries(
                ground.iter().map(|&l| (l, nu.value(l) - lam.col_sum(l))),
            );
            min_upset_weight(&weights, poset, ground, n, m)
                .expect("supports validated before alpha")
        }
    };
    if headroom <= zero() {
        return (zero(), None);
    }
    if surplus <= deficit && surplus <= headroom {
        (surplus, Some(AlphaTerm::FirstMarginalSlack))
    } else if deficit <= headroom {
        (deficit, Some(AlphaTerm::SecondMarginalSlack))
    } else {
        (headroom, Some(AlphaTerm::UpsetInfimum))
    }
}

fn phi_step_inner<T: Int>(
    nu: &FiniteMeasure<T>,
    lam: &mut Coupling<T>,
    n: usize,
    m: usize,
    poset: &Poset,
    ground: &[usize],
    evaluator: Option<&UpsetEvaluator>,
) -> Result<StepTrace<T>> {
    let (alpha, attained) = alpha_inner(nu, lam, n, m, poset, ground, evaluator);
    let col_n_before = lam.col_sum(n);
    let col_m_before = lam.col_sum(m);
    if alpha > zero() {
        if lam.get(n, n) < alpha {
            // The step would overdraw the diagonal entry, which cannot
            // happen when column n's mass sits entirely on the diagonal.
            return Err(Error::NegativeEntry {
                n,
                m: n,
                value: (lam.get(n, n) - &alpha).to_string(),
            });
        }
        lam.shift(n, n, &-alpha.clone());
        lam.shift(n, m, &alpha);
    }
    Ok(StepTrace {
        pair: (n, m),
        alpha,
        attained,
        col_n_before,
        col_n_after: lam.col_sum(n),
        col_m_before,
        col_m_after: lam.col_sum(m),
    })
}
