//! Acceptance gate: one test per criterion, each printing a PASS line
//! with its headline numbers (visible with `--nocapture`). Everything is
//! exact rational arithmetic; there are no tolerances anywhere, only
//! budgets that are themselves computed exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::time::Instant;

use num::{BigInt, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use domcoup_core::driver::{delta_k, divergence_bound, pointwise_k0, schedule_n};
use domcoup_core::kernel::{active_set, diagonal_init, phi_step, run, sweep_pairs, Coupling};
use domcoup_core::measure::{epsilon_n, truncate, FiniteMeasure, MeasureSource};
use domcoup_core::oracle::{maxflow_splitting, verify_solution, SplitOutcome};
use domcoup_core::poset::{OrderSpec, Poset};
use domcoup_core::rational::{int, ratio, BigRational, Rational};
use domcoup_core::upset_opt::{min_upset_weight_bruteforce, min_upset_weight_mincut, WeightVector};
use domcoup_testkit::{
    perturb_coupling, perturb_measure, posets_up_to_isomorphism, push_down_measure,
    push_up_measure, random_dominated_instance, random_natural_poset, unit_mass_vectors,
};

type Q = Rational<i64>;

/// Per-upset sums of every mass vector, so dominance between any two
/// vectors is a plain componentwise comparison.
fn upset_sum_table(poset: &Poset, ground: &[usize], vectors: &[FiniteMeasure<i64>]) -> Vec<Vec<Q>> {
    let upsets = poset.enumerate_upsets(ground).unwrap();
    vectors
        .iter()
        .map(|v| {
            upsets
                .iter()
                .map(|u| u.members().iter().fold(Q::zero(), |acc, &l| acc + v.value(l)))
                .collect()
        })
        .collect()
}

fn dominated(sums: &[Vec<Q>], mu: usize, nu: usize) -> bool {
    sums[mu].iter().zip(&sums[nu]).all(|(a, b)| a <= b)
}

/// The instance family of criteria 1 and 2: every poset on up to 4
/// elements (one per isomorphism class) and a seeded sample of 200
/// labeled posets on 5, paired with every unit-mass vector over
/// denominators up to 4.
fn family_posets() -> Vec<Poset> {
    let mut posets: Vec<Poset> = (1..=4).flat_map(posets_up_to_isomorphism).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    posets.extend((0..200).map(|_| random_natural_poset(&mut rng, 5)));
    posets
}

#[test]
fn criterion_1_finite_exactness() {
    let started = Instant::now();
    let mut sweeps = 0usize;
    let mut posets_seen = 0usize;
    for poset in family_posets() {
        posets_seen += 1;
        let size = poset.size();
        let ground: Vec<usize> = (0..size).collect();
        let vectors = unit_mass_vectors(size, 4);
        let sums = upset_sum_table(&poset, &ground, &vectors);
        let full_sweep = sweep_pairs(&poset).len();
        for (i, mu) in vectors.iter().enumerate() {
            for (j, nu) in vectors.iter().enumerate() {
                if !dominated(&sums, i, j) {
                    continue;
                }
                let (coupling, _) =
                    run(nu, &diagonal_init(mu), &poset, &ground, full_sweep).unwrap();
                let report = verify_solution(&coupling, mu, nu, &poset, &ground);
                assert!(
                    report.all_ok(),
                    "sweep output failed verification on {poset:?} with mu={mu:?} nu={nu:?}: {report:?}"
                );
                sweeps += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "criterion 1 took {elapsed:?}, budget is 60s");
    println!(
        "PASS criterion 1 (finite exactness): {sweeps} dominated pairs across {posets_seen} posets solved and verified exactly in {elapsed:?}"
    );
}

#[test]
fn criterion_2_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0usize;
    let mut feasible_count = 0usize;
    for poset in family_posets() {
        let size = poset.size();
        let ground: Vec<usize> = (0..size).collect();
        let vectors = unit_mass_vectors(size, 4);
        let sums = upset_sum_table(&poset, &ground, &vectors);
        let full_sweep = sweep_pairs(&poset).len();
        // Exhaustive on the small posets; seeded 100-pair sample on the
        // size-5 ones to stay inside the time budget.
        let pairs: Vec<(usize, usize)> = if size <= 4 {
            (0..vectors.len()).flat_map(|i| (0..vectors.len()).map(move |j| (i, j))).collect()
        } else {
            (0..100)
                .map(|_| (rng.random_range(0..vectors.len()), rng.random_range(0..vectors.len())))
                .collect()
        };
        for (i, j) in pairs {
            let (mu, nu) = (&vectors[i], &vectors[j]);
            let is_dominated = dominated(&sums, i, j);
            match maxflow_splitting(mu, nu, &poset, &ground).unwrap() {
                SplitOutcome::Feasible(coupling) => {
                    assert!(
                        is_dominated,
                        "flow feasible but not dominated on {poset:?}: mu={mu:?} nu={nu:?}"
                    );
                    assert!(verify_solution(&coupling, mu, nu, &poset, &ground).all_ok());
                    let (swept, _) =
                        run(nu, &diagonal_init(mu), &poset, &ground, full_sweep).unwrap();
                    assert!(verify_solution(&swept, mu, nu, &poset, &ground).all_ok());
                    feasible_count += 1;
                }
                SplitOutcome::Infeasible { max_flow } => {
                    assert!(
                        !is_dominated,
                        "dominated but flow stopped at {max_flow} on {poset:?}: mu={mu:?} nu={nu:?}"
                    );
                    assert!(max_flow < int(1));
                }
            }
            checked += 1;
        }
    }
    println!(
        "PASS criterion 2 (oracle agreement): feasibility matched dominance on {checked} instances ({feasible_count} feasible), both solvers verified"
    );
}

fn suite_instances(seed: u64) -> impl Iterator<Item = domcoup_testkit::DominatedInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..500).map(move |_| random_dominated_instance(&mut rng, 2..=8, 24))
}

#[test]
fn criterion_3_step_invariants() {
    let mut positive_steps = 0usize;
    for instance in suite_instances(43) {
        let (poset, ground) = (&instance.poset, &instance.ground[..]);
        let (mu, nu) = (&instance.mu, &instance.nu);
        let size = poset.size();
        let mut lam = diagonal_init(mu);
        for (n, m) in sweep_pairs(poset) {
            let (next, trace) = phi_step(nu, &lam, n, m, poset, ground).unwrap();
            if trace.alpha > Q::zero() {
                positive_steps += 1;
                let before = active_set(nu, &lam, poset, ground).unwrap();
                let after = active_set(nu, &next, poset, ground).unwrap();
                for pair in &after {
                    assert!(
                        before.contains(pair) && *pair != (n, m),
                        "active set gained {pair:?} after stepping at ({n}, {m})"
                    );
                }
                assert!(next.entries().all(|(_, v)| !v.is_negative()));
                assert_eq!(next.total_mass(), int(1));
                for l in 0..size {
                    assert_eq!(next.row_sum(l), lam.row_sum(l), "row {l} changed");
                }
                for &(a, _) in &after {
                    assert_eq!(
                        next.col_sum(a),
                        next.get(a, a),
                        "active first coordinate {a} lost its diagonal column identity"
                    );
                }
            }
            lam = next;
        }
    }
    assert!(positive_steps > 500, "suite too tame: only {positive_steps} real steps");
    println!(
        "PASS criterion 3 (step invariants): {positive_steps} positive steps over 500 runs kept mass, rows, activity shrinkage, and the diagonal column identity"
    );
}

#[test]
fn criterion_4_monotonicity() {
    let mut off_diagonal_changes = 0usize;
    for instance in suite_instances(43) {
        let (poset, ground) = (&instance.poset, &instance.ground[..]);
        let (mu, nu) = (&instance.mu, &instance.nu);
        let mut lam = diagonal_init(mu);
        let mut changes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (n, m) in sweep_pairs(poset) {
            let (next, _) = phi_step(nu, &lam, n, m, poset, ground).unwrap();
            let keys: BTreeSet<(usize, usize)> = lam.support().chain(next.support()).collect();
            for (a, b) in keys {
                let old = lam.get(a, b);
                let new = next.get(a, b);
                if a == b {
                    assert!(new <= old, "diagonal ({a}, {a}) grew");
                } else {
                    assert!(new >= old, "off-diagonal ({a}, {b}) shrank");
                    if new != old {
                        *changes.entry((a, b)).or_insert(0) += 1;
                        off_diagonal_changes += 1;
                    }
                }
            }
            lam = next;
        }
        for ((a, b), count) in changes {
            assert!(count <= 1, "off-diagonal ({a}, {b}) changed {count} times");
        }
    }
    println!(
        "PASS criterion 4 (monotonicity): diagonals never grew, {off_diagonal_changes} off-diagonal entries each changed exactly once"
    );
}

#[test]
fn criterion_5_perturbation_bounds() {
    use domcoup_core::driver::perturbation_gap;

    // Single-step stability: the alpha gap never exceeds the data gap.
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let mut nonzero_gaps = 0usize;
    for _ in 0..200 {
        let instance = random_dominated_instance(&mut rng, 2..=6, 12);
        let (poset, ground) = (&instance.poset, &instance.ground[..]);
        let size = poset.size();
        let warmup = rng.random_range(0..=4);
        let (lam, _) =
            run(&instance.nu, &diagonal_init(&instance.mu), poset, ground, warmup).unwrap();
        let coupling_moves = rng.random_range(1..=3);
        let measure_moves = rng.random_range(0..=3);
        let lam_alt = perturb_coupling(&mut rng, &lam, size, 12, coupling_moves);
        let nu_alt = perturb_measure(&mut rng, &instance.nu, 12, measure_moves);
        // Mostly strictly comparable pairs, where alpha is alive; the rest
        // arbitrary, where both alphas vanish and the bound is trivial.
        let comparable = sweep_pairs(poset);
        let (n, m) = if !comparable.is_empty() && rng.random_bool(0.75) {
            comparable[rng.random_range(0..comparable.len())]
        } else {
            let n = rng.random_range(0..size);
            (n, (n + rng.random_range(1..size)) % size)
        };
        let (gap, distance) =
            perturbation_gap(&instance.nu, &nu_alt, &lam, &lam_alt, n, m, poset, ground).unwrap();
        assert!(gap <= distance, "alpha moved {gap} on a data gap of {distance}");
        if gap > Q::zero() {
            nonzero_gaps += 1;
        }
    }
    assert!(nonzero_gaps > 20, "perturbations too tame: {nonzero_gaps} nonzero gaps");

    // Paired runs along the same sweep: divergence grows at most 3^k-fold.
    let mut paired = 0usize;
    for _ in 0..100 {
        let instance = random_dominated_instance(&mut rng, 2..=6, 12);
        let (poset, ground) = (&instance.poset, &instance.ground[..]);
        let down_moves = rng.random_range(0..=2);
        let up_moves = rng.random_range(0..=2);
        let mu_alt = push_down_measure(&mut rng, &instance.mu, poset, 12, down_moves);
        let nu_alt = push_up_measure(&mut rng, &instance.nu, poset, 12, up_moves);
        let eps = instance.mu.l1_distance(&mu_alt) + instance.nu.l1_distance(&nu_alt);
        let nu_gap = instance.nu.l1_distance(&nu_alt);
        for k in 0..=8 {
            let (a, _) = run(&instance.nu, &diagonal_init(&instance.mu), poset, ground, k).unwrap();
            let (b, _) = run(&nu_alt, &diagonal_init(&mu_alt), poset, ground, k).unwrap();
            assert!(
                a.l1_distance(&b) + nu_gap <= divergence_bound(k, &eps),
                "paired runs diverged past 3^{k} times the initial gap {eps}"
            );
        }
        paired += 1;
    }
    println!(
        "PASS criterion 5 (perturbation bounds): 200 single-step gaps ({nonzero_gaps} nonzero) and {paired} paired runs for k <= 8 stayed within their exact budgets"
    );
}

#[test]
fn criterion_6_closure_solver_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let mut comparisons = 0usize;
    for size in 1..=6 {
        for poset in posets_up_to_isomorphism(size) {
            let ground: Vec<usize> = (0..size).collect();
            let strict: Vec<(usize, usize)> = (0..size)
                .flat_map(|n| (0..size).map(move |m| (n, m)))
                .filter(|&(n, m)| poset.strictly_less(n, m))
                .collect();
            if strict.is_empty() {
                continue;
            }
            for _ in 0..50 {
                let weights = WeightVector::from_entries((0..size).map(|l| {
                    (l, ratio::<i64>(rng.random_range(-12..=12), rng.random_range(1..=6)))
                }));
                for &(n, m) in &strict {
                    let fast = min_upset_weight_mincut(&weights, &poset, &ground, n, m).unwrap();
                    let slow =
                        min_upset_weight_bruteforce(&weights, &poset, &ground, n, m).unwrap();
                    assert_eq!(fast, slow, "solver mismatch on {poset:?} at ({n}, {m})");
                    comparisons += 1;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 30, "criterion 6 took {elapsed:?}, budget is 30s");
    println!(
        "PASS criterion 6 (closure solver equivalence): min-cut matched brute force on {comparisons} constrained minima in {elapsed:?}"
    );
}

fn geometric_pair() -> (MeasureSource<BigInt>, MeasureSource<BigInt>) {
    (
        MeasureSource::geometric(ratio::<BigInt>(1, 2)).unwrap(),
        MeasureSource::geometric(ratio::<BigInt>(2, 3)).unwrap(),
    )
}

/// Reference run for criterion 7: same step count on a truncation 20
/// levels deeper, plus the exact error budget `3^k * eps_{N*} + 1/k`.
fn reference_run(
    mu: &MeasureSource<BigInt>,
    nu: &MeasureSource<BigInt>,
    truncation: usize,
    steps: usize,
) -> (Coupling<BigInt>, BigRational) {
    let deeper = truncation + 20;
    let mu_ref = truncate(mu, deeper);
    let nu_ref = truncate(nu, deeper);
    let poset = Poset::total(deeper + 1);
    let ground: Vec<usize> = (0..=deeper).collect();
    let (coupling, _) = run(&nu_ref, &diagonal_init(&mu_ref), &poset, &ground, steps).unwrap();
    let budget =
        divergence_bound(steps, &epsilon_n(mu, nu, deeper)) + int::<BigInt>(1) / int(steps as i64);
    (coupling, budget)
}

#[test]
fn criterion_7_constructive_driver() {
    let equal = MeasureSource::geometric(ratio::<BigInt>(1, 2)).unwrap();
    let s1 = schedule_n(&equal, &equal, 1).unwrap();
    assert_eq!((s1.truncation, s1.eps.clone()), (3, ratio(1, 4)));
    let s2 = schedule_n(&equal, &equal, 2).unwrap();
    assert_eq!((s2.truncation, s2.eps.clone()), (6, ratio(1, 32)));

    let (mu, nu) = geometric_pair();
    let mut max_k_checked = 0;
    for k in 1..=3 {
        for (mu, nu) in [(&equal, &equal), (&mu, &nu)] {
            let approx = delta_k(mu, nu, &OrderSpec::Total, k).unwrap();
            let budget_step = int::<BigInt>(1)
                / (int::<BigInt>(k as i64) * domcoup_core::rational::pow(&int(3), k));
            assert!(approx.schedule.eps <= budget_step);
            assert!(approx.schedule.divergence_bound <= int::<BigInt>(1) / int(k as i64));
            let (reference, budget) = reference_run(mu, nu, approx.schedule.truncation, k);
            let distance = approx.coupling.l1_distance(&reference);
            assert!(
                distance <= budget,
                "delta_{k} sits {distance} from the reference, budget {budget}"
            );
            max_k_checked = k;
        }
    }
    println!(
        "PASS criterion 7 (constructive driver): schedules hit N_1=3, N_2=6 and delta_k stayed within 3^k*eps_ref + 1/k of deep reference runs for k <= {max_k_checked}"
    );
}

#[test]
fn criterion_8_pointwise_certificate() {
    let eps = ratio::<BigInt>(1, 4);
    let k0 = pointwise_k0(0, 1, &eps).unwrap();
    assert_eq!(k0, 4);
    let equal = MeasureSource::geometric(ratio::<BigInt>(1, 2)).unwrap();
    let (mu, nu) = geometric_pair();
    for k in k0..=6 {
        for (mu, nu) in [(&equal, &equal), (&mu, &nu)] {
            let approx = delta_k(mu, nu, &OrderSpec::Total, k).unwrap();
            let (reference, budget) = reference_run(mu, nu, approx.schedule.truncation, k);
            let gap = (approx.coupling.get(0, 1) - reference.get(0, 1)).abs();
            assert!(gap <= budget, "entry (0,1) off by {gap} at k={k}, budget {budget}");
        }
    }
    println!(
        "PASS criterion 8 (pointwise certificate): entry (0,1) pinned within the exact budget for all k in {k0}..=6 on both geometric fixtures"
    );
}

#[test]
fn criterion_9_golden_cli() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/e1.json");
    let run_once = || {
        let output = Command::new(env!("CARGO_BIN_EXE_domcoup"))
            .args(["solve", "--steps", "1", fixture])
            .output()
            .expect("binary runs");
        assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
        output.stdout
    };
    let first = run_once();
    let second = run_once();
    assert_eq!(first, second, "output is not byte-identical across runs");
    let doc: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(doc["coupling"], json!([[0, 0, "1/4"], [0, 1, "1/4"], [1, 1, "1/2"]]));
    assert_eq!(doc["verification"]["all_ok"], json!(true));
    println!(
        "PASS criterion 9 (golden CLI): solve emitted the hand-derived coupling byte-identically across runs"
    );
}
