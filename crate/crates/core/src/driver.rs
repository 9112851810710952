//! Truncation schedules and computable error bounds around the sweep.
//!
//! Infinite instances are handled by running the sweep on truncated data.
//! The schedule picks, for a step count `k`, the smallest truncation whose
//! data loss `eps_N` satisfies `eps_N <= 1/(k*3^k)`; one sweep step at most
//! triples an input gap, so `k` steps blow `eps` up by at most `3^k`, and
//! the schedule keeps the accumulated divergence below `1/k`. Everything
//! here is exact rational arithmetic; the bounds are certificates, not
//! estimates.
//!
//! The sweep enumerates shells in increasing order, so the filtered sweep
//! of a truncation is a prefix of the sweep of any larger one, and pairs
//! outside a truncation are identity steps for its data. Running `k` steps
//! on the truncated instance therefore agrees exactly with running the
//! same `k` steps of the global enumeration, which is what makes paired
//! runs at different truncations comparable step by step.

use num::Signed;

use crate::error::Error;
use crate::kernel::{alpha, diagonal_init, run, Coupling, StepTrace};
use crate::measure::{epsilon_n, truncate, FiniteMeasure, MeasureSource};
use crate::poset::{OrderPredicate, Poset};
use crate::rational::{int, one, pow, Int, Rational};
use crate::Result;

/// Chosen truncation for a given step count, with the exact data loss and
/// the worst-case divergence it can cause over the run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule<T: Int> {
    /// Number of sweep steps the schedule is built for.
    pub steps: usize,
    /// Truncation index: data is lumped at this index, ground set is
    /// `0..=truncation`.
    pub truncation: usize,
    /// Exact l1 loss of truncating both measures, at most `1/(k*3^k)`.
    pub eps: Rational<T>,
    /// `3^k * eps`, at most `1/k`: how far the truncated run can drift
    /// from the untruncated one after `k` steps.
    pub divergence_bound: Rational<T>,
}

/// Smallest truncation whose loss fits the budget `1/(k*3^k)`. Scans
/// truncation indices upward, summing heads; terminates because the loss
/// tends to zero for any unit-mass source.
pub fn schedule_n<T: Int>(
    mu: &MeasureSource<T>,
    nu: &MeasureSource<T>,
    steps: usize,
) -> Result<Schedule<T>> {
    if steps == 0 {
        return Err(Error::ZeroSteps);
    }
    let growth = pow(&int::<T>(3), steps);
    let budget = one::<T>() / (int::<T>(steps as i64) * &growth);
    let mut truncation = 0;
    let mut eps = epsilon_n(mu, nu, truncation);
    while eps > budget {
        truncation += 1;
        eps = epsilon_n(mu, nu, truncation);
    }
    let divergence_bound = growth * &eps;
    Ok(Schedule { steps, truncation, eps, divergence_bound })
}

/// A scheduled approximant: the coupling after `k` steps on the scheduled
/// truncation, together with everything needed to audit it.
#[derive(Clone, Debug)]
pub struct DeltaRun<T: Int> {
    pub schedule: Schedule<T>,
    pub coupling: Coupling<T>,
    pub traces: Vec<StepTrace<T>>,
    /// The truncated first marginal the run started from.
    pub mu: FiniteMeasure<T>,
    /// The truncated target second marginal.
    pub nu: FiniteMeasure<T>,
    pub poset: Poset,
    pub ground: Vec<usize>,
}

/// Runs the full pipeline for step count `k`: schedule the truncation,
/// truncate both sources, build the order on the truncated prefix, start
/// from the diagonal of `mu`, and take `k` sweep steps.
pub fn delta_k<T: Int>(
    mu: &MeasureSource<T>,
    nu: &MeasureSource<T>,
    order: &(impl OrderPredicate + ?Sized),
    steps: usize,
) -> Result<DeltaRun<T>> {
    let schedule = schedule_n(mu, nu, steps)?;
    let mu_trunc = truncate(mu, schedule.truncation);
    let nu_trunc = truncate(nu, schedule.truncation);
    let poset = Poset::from_predicate(schedule.truncation + 1, order)?;
    let ground: Vec<usize> = (0..=schedule.truncation).collect();
    let start = diagonal_init(&mu_trunc);
    let (coupling, traces) = run(&nu_trunc, &start, &poset, &ground, steps)?;
    Ok(DeltaRun { schedule, coupling, traces, mu: mu_trunc, nu: nu_trunc, poset, ground })
}

/// `3^k * eps0`: the exact worst-case growth of an input gap over `k`
/// sweep steps (each step at most triples it).
pub fn divergence_bound<T: Int>(steps: usize, eps0: &Rational<T>) -> Rational<T> {
    debug_assert!(!eps0.is_negative());
    pow(&int::<T>(3), steps) * eps0
}

/// Step count after which the `(n, m)` entry of the approximants stays
/// within `eps` of its limit: the least integer at or above
/// `max(1/eps, max(n, m)^2)`. The square bounds the sweep position of the
/// pair; the reciprocal feeds the `1/k` tail bound.
pub fn pointwise_k0<T: Int>(n: usize, m: usize, eps: &Rational<T>) -> Result<usize> {
    if !eps.is_positive() {
        return Err(Error::NonpositiveEpsilon { value: eps.to_string() });
    }
    let position = int::<T>((n.max(m) as i64).pow(2));
    let needed = (one::<T>() / eps).max(position).ceil();
    Ok(needed.to_integer().to_usize().expect("certificate step count fits in usize"))
}

/// Evaluates both sides of the single-step stability inequality: the gap
/// between the step sizes of two instances at the same pair, and the total
/// l1 distance between the instances. The first never exceeds the second.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_gap<T: Int>(
    nu: &FiniteMeasure<T>,
    nu_alt: &FiniteMeasure<T>,
    lam: &Coupling<T>,
    lam_alt: &Coupling<T>,
    n: usize,
    m: usize,
    poset: &Poset,
    ground: &[usize],
) -> Result<(Rational<T>, Rational<T>)> {
    let step = alpha(nu, lam, n, m, poset, ground)?;
    let step_alt = alpha(nu_alt, lam_alt, n, m, poset, ground)?;
    let gap = (step - step_alt).abs();
    let distance = lam.l1_distance(lam_alt) + nu.l1_distance(nu_alt);
    Ok((gap, distance))
}

/// Accuracy certificate for one coupling entry: for every step count at or
/// past `k0`, the `(n, m)` entry is within `eps` of its limit value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointwiseCertificate<T: Int> {
    pub n: usize,
    pub m: usize,
    pub eps: Rational<T>,
    pub k0: usize,
}

/// Bundle of pointwise certificates plus the global l1 bound `1/k` between
/// the scheduled approximant and the untruncated `k`-step run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorReport<T: Int> {
    pub certificates: Vec<PointwiseCertificate<T>>,
    pub l1_bound: Rational<T>,
}

impl<T: Int> ErrorReport<T> {
    pub fn new(
        steps: usize,
        requests: impl IntoIterator<Item = (usize, usize, Rational<T>)>,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::ZeroSteps);
        }
        let mut certificates = Vec::new();
        for (n, m, eps) in requests {
            let k0 = pointwise_k0(n, m, &eps)?;
            certificates.push(PointwiseCertificate { n, m, eps, k0 });
        }
        Ok(ErrorReport { certificates, l1_bound: int::<T>(1) / int(steps as i64) })
    }
}
