//! An independent way to construct couplings, and the verifier of record.
//!
//! The sweep machinery in `kernel` is the object of study; this module
//! cross-checks it. [`maxflow_splitting`] solves finite instances directly
//! as a transportation problem on the order relation, sharing nothing with
//! the sweep beyond the low-level flow routine, and its feasibility is
//! equivalent to dominance (the finite Strassen equivalence, exercised in
//! tests). [`verify_solution`] takes any claimed coupling and reports
//! exactly which of the defining conditions hold: nonnegative unit mass,
//! support inside the order relation, row marginals equal to `mu`, column
//! marginals equal to `nu`. It never rejects input; invalid claims come
//! back as reports with witnesses.

use num::{Signed, Zero};

use crate::flow::FlowNetwork;
use crate::kernel::Coupling;
use crate::measure::FiniteMeasure;
use crate::poset::Poset;
use crate::rational::{one, zero, Int, Rational};
use crate::Result;

/// Outcome of the flow construction: a full coupling, or infeasibility
/// with the achieved flow value (strictly below 1) as the certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitOutcome<T: Int> {
    Feasible(Coupling<T>),
    Infeasible { max_flow: Rational<T> },
}

/// Builds a coupling for `(mu, nu)` on the given order by maximum flow:
/// a source feeding each `n` with capacity `mu_n`, an edge `n -> m` of
/// capacity 1 for every related pair `n <= m` in the ground set, and each
/// `m` draining into a sink with capacity `nu_m`. The instance is feasible
/// exactly when one unit flows, and then the middle-edge flows are the
/// coupling entries.
pub fn maxflow_splitting<T: Int>(
    mu: &FiniteMeasure<T>,
    nu: &FiniteMeasure<T>,
    poset: &Poset,
    ground: &[usize],
) -> Result<SplitOutcome<T>> {
    let ground = poset.check_ground(ground)?;
    mu.check_support_in(&ground)?;
    nu.check_support_in(&ground)?;

    let g = ground.len();
    let (source, sink) = (2 * g, 2 * g + 1);
    let mut net = FlowNetwork::new(2 * g + 2);
    for (i, &n) in ground.iter().enumerate() {
        let mass = mu.value(n);
        if !mass.is_zero() {
            net.add_edge(source, i, mass);
        }
    }
    let mut middle = Vec::new();
    for (i, &n) in ground.iter().enumerate() {
        for (j, &m) in ground.iter().enumerate() {
            if poset.leq(n, m) {
                middle.push((n, m, net.add_edge(i, g + j, one::<T>())));
            }
        }
    }
    for (j, &m) in ground.iter().enumerate() {
        let mass = nu.value(m);
        if !mass.is_zero() {
            net.add_edge(g + j, sink, mass);
        }
    }

    let value = net.max_flow(source, sink);
    if value != one() {
        return Ok(SplitOutcome::Infeasible { max_flow: value });
    }
    let triples = middle.into_iter().filter_map(|(n, m, edge)| {
        let flow = net.flow(edge);
        (!flow.is_zero()).then_some((n, m, flow))
    });
    let coupling = Coupling::from_triples(triples).expect("one triple per related pair");
    Ok(SplitOutcome::Feasible(coupling))
}

/// Exact audit of a claimed coupling. Four verdicts, each with a witness
/// and the worst violation when it fails; all four true means the claim
/// satisfies every defining condition of a coupling of `(mu, nu)` over the
/// stated ground set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport<T: Int> {
    /// All entries nonnegative and total mass exactly 1.
    pub mass_ok: bool,
    /// Most negative entry, when one exists.
    pub worst_negative_entry: Option<((usize, usize), Rational<T>)>,
    pub total_mass: Rational<T>,
    /// Every nonzero entry sits at a related pair inside the ground set.
    pub support_ok: bool,
    pub support_witness: Option<(usize, usize)>,
    /// Row sums equal `mu` everywhere.
    pub row_marginals_ok: bool,
    pub worst_row_gap: Option<(usize, Rational<T>)>,
    /// Column sums equal `nu` everywhere.
    pub col_marginals_ok: bool,
    pub worst_col_gap: Option<(usize, Rational<T>)>,
    /// Total column shortfall `sum_m |col(m) - nu_m|`: the distance still
    /// to travel for an approximant, zero for an exact solution.
    pub col_l1_deficit: Rational<T>,
}

impl<T: Int> VerificationReport<T> {
    pub fn all_ok(&self) -> bool {
        self.mass_ok && self.support_ok && self.row_marginals_ok && self.col_marginals_ok
    }
}

pub fn verify_solution<T: Int>(
    lam: &Coupling<T>,
    mu: &FiniteMeasure<T>,
    nu: &FiniteMeasure<T>,
    poset: &Poset,
    ground: &[usize],
) -> VerificationReport<T> {
    let mut ground_sorted = ground.to_vec();
    ground_sorted.sort_unstable();
    ground_sorted.dedup();
    let in_ground = |index: usize| ground_sorted.binary_search(&index).is_ok();

    let mut worst_negative_entry: Option<((usize, usize), Rational<T>)> = None;
    for (pair, value) in lam.entries() {
        if value < &zero() && worst_negative_entry.as_ref().is_none_or(|(_, worst)| value < worst) {
            worst_negative_entry = Some((pair, value.clone()));
        }
    }
    let total_mass = lam.total_mass();
    let mass_ok = worst_negative_entry.is_none() && total_mass == one();

    let mut support_witness = None;
    for ((n, m), _) in lam.entries() {
        let related = n < poset.size() && m < poset.size() && poset.leq(n, m);
        if !(related && in_ground(n) && in_ground(m)) {
            support_witness = Some((n, m));
            break;
        }
    }
    let support_ok = support_witness.is_none();

    let span =
        lam.bound().max(mu.len()).max(nu.len()).max(ground_sorted.last().map_or(0, |&l| l + 1));
    let mut worst_row_gap: Option<(usize, Rational<T>)> = None;
    let mut worst_col_gap: Option<(usize, Rational<T>)> = None;
    let mut col_l1_deficit = zero::<T>();
    for index in 0..span {
        let row_gap = (lam.row_sum(index) - mu.value(index)).abs();
        if !row_gap.is_zero() && worst_row_gap.as_ref().is_none_or(|(_, g)| &row_gap > g) {
            worst_row_gap = Some((index, row_gap));
        }
        let col_gap = (lam.col_sum(index) - nu.value(index)).abs();
        col_l1_deficit += &col_gap;
        if !col_gap.is_zero() && worst_col_gap.as_ref().is_none_or(|(_, g)| &col_gap > g) {
            worst_col_gap = Some((index, col_gap));
        }
    }

    VerificationReport {
        mass_ok,
        worst_negative_entry,
        total_mass,
        support_ok,
        support_witness,
        row_marginals_ok: worst_row_gap.is_none(),
        worst_row_gap,
        col_marginals_ok: worst_col_gap.is_none(),
        worst_col_gap,
        col_l1_deficit,
    }
}
