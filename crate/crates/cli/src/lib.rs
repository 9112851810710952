//! JSON instance format and command implementations behind the `domcoup`
//! binary. Everything is arbitrary-precision: rationals cross the wire as
//! `"p/q"` strings and only become floats on request, at the output
//! boundary.

use num::BigInt;
use serde::Deserialize;
use serde_json::{json, Value};

use domcoup_core::driver::{delta_k, pointwise_k0, schedule_n, DeltaRun, Schedule};
use domcoup_core::kernel::{AlphaTerm, Coupling, StepTrace};
use domcoup_core::measure::{truncate, FiniteMeasure, MeasureSource};
use domcoup_core::oracle::{maxflow_splitting, verify_solution, SplitOutcome, VerificationReport};
use domcoup_core::poset::{OrderPredicate, OrderSpec, Poset};
use domcoup_core::rational::{format_rational, int, parse_rational, to_f64, BigRational};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: malformed JSON, invalid rationals, masses, or orders.
    #[error("{0}")]
    Validation(String),
    /// A state the core library promises is unreachable on validated input.
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn internal(err: domcoup_core::Error) -> CliError {
    CliError::Internal(err.to_string())
}

/// A validated problem instance: the order, both measures, and an optional
/// prefix size fixing the ground set for the flow commands.
#[derive(Debug)]
pub struct Instance {
    pub order: OrderSpec,
    pub mu: MeasureSource<BigInt>,
    pub nu: MeasureSource<BigInt>,
    pub ground_hint: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    order: OrderDoc,
    mu: MeasureDoc,
    nu: MeasureDoc,
    #[serde(default)]
    ground_hint: Option<usize>,
}

#[derive(Deserialize)]
#[serde(tag = "kind")]
enum OrderDoc {
    #[serde(rename = "explicit-pairs")]
    ExplicitPairs { pairs: Vec<(usize, usize)> },
    #[serde(rename = "total")]
    Total,
    #[serde(rename = "divisibility")]
    Divisibility,
}

#[derive(Deserialize)]
#[serde(tag = "kind")]
enum MeasureDoc {
    #[serde(rename = "explicit")]
    Explicit { values: Vec<String> },
    #[serde(rename = "geometric")]
    Geometric { ratio: String },
}

pub fn parse_instance(text: &str) -> Result<Instance, CliError> {
    let doc: InstanceDoc = serde_json::from_str(text)
        .map_err(|err| CliError::Validation(format!("parse error: {err}")))?;
    let order = match doc.order {
        OrderDoc::Total => OrderSpec::Total,
        OrderDoc::Divisibility => OrderSpec::Divisibility,
        OrderDoc::ExplicitPairs { pairs } => {
            let extent = pairs.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
            let size = extent.max(doc.ground_hint.unwrap_or(0)).max(1);
            OrderSpec::explicit(size, &pairs)
                .map_err(|err| CliError::Validation(format!("order.pairs: {err}")))?
        }
    };
    Ok(Instance {
        order,
        mu: parse_measure(doc.mu, "mu")?,
        nu: parse_measure(doc.nu, "nu")?,
        ground_hint: doc.ground_hint,
    })
}

fn parse_measure(doc: MeasureDoc, field: &str) -> Result<MeasureSource<BigInt>, CliError> {
    match doc {
        MeasureDoc::Explicit { values } => {
            let mut parsed = Vec::with_capacity(values.len());
            for (i, text) in values.iter().enumerate() {
                parsed.push(
                    parse_rational(text).map_err(|err| {
                        CliError::Validation(format!("{field}.values[{i}]: {err}"))
                    })?,
                );
            }
            MeasureSource::explicit(parsed)
                .map_err(|err| CliError::Validation(format!("{field}.values: {err}")))
        }
        MeasureDoc::Geometric { ratio } => {
            let parsed = parse_rational(&ratio)
                .map_err(|err| CliError::Validation(format!("{field}.ratio: {err}")))?;
            MeasureSource::geometric(parsed)
                .map_err(|err| CliError::Validation(format!("{field}.ratio: {err}")))
        }
    }
}

/// Finite view of an instance for the flow commands: both measures
/// realized on an explicit ground set `0..prefix`.
pub struct Materialized {
    pub poset: Poset,
    pub ground: Vec<usize>,
    pub mu: FiniteMeasure<BigInt>,
    pub nu: FiniteMeasure<BigInt>,
}

pub fn materialize(instance: &Instance) -> Result<Materialized, CliError> {
    let prefix = match instance.ground_hint {
        Some(0) => return Err(CliError::Validation("ground_hint: must be at least 1".into())),
        Some(hint) => hint,
        None => match (&instance.mu, &instance.nu) {
            (MeasureSource::Explicit(mu), MeasureSource::Explicit(nu)) => {
                mu.len().max(nu.len()).max(1)
            }
            _ => {
                return Err(CliError::Validation(
                    "ground_hint: required when a measure is geometric".into(),
                ))
            }
        },
    };
    for (source, field) in [(&instance.mu, "mu"), (&instance.nu, "nu")] {
        if let MeasureSource::Explicit(measure) = source {
            if measure.support().last().is_some_and(|last| last >= prefix) {
                return Err(CliError::Validation(format!(
                    "ground_hint: {prefix} cuts into the support of {field}"
                )));
            }
        }
    }
    let poset = Poset::from_predicate(prefix, &instance.order).map_err(internal)?;
    Ok(Materialized {
        poset,
        ground: (0..prefix).collect(),
        mu: truncate(&instance.mu, prefix - 1),
        nu: truncate(&instance.nu, prefix - 1),
    })
}

/// Whether rationals render as exact strings or as floats.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum ValueMode {
    Exact,
    Float,
}

fn rational_value(value: &BigRational, mode: ValueMode) -> Value {
    match mode {
        ValueMode::Exact => json!(format_rational(value)),
        ValueMode::Float => json!(to_f64(value)),
    }
}

fn coupling_value(coupling: &Coupling<BigInt>, mode: ValueMode) -> Value {
    Value::Array(
        coupling
            .entries()
            .map(|((n, m), value)| json!([n, m, rational_value(value, mode)]))
            .collect(),
    )
}

fn report_value(report: &VerificationReport<BigInt>, mode: ValueMode) -> Value {
    json!({
        "all_ok": report.all_ok(),
        "mass_ok": report.mass_ok,
        "total_mass": rational_value(&report.total_mass, mode),
        "worst_negative_entry": report.worst_negative_entry.as_ref().map(
            |((n, m), value)| json!({"pair": [n, m], "value": rational_value(value, mode)}),
        ),
        "support_ok": report.support_ok,
        "support_witness": report.support_witness.map(|(n, m)| json!([n, m])),
        "row_marginals_ok": report.row_marginals_ok,
        "worst_row_gap": report.worst_row_gap.as_ref().map(
            |(index, gap)| json!({"index": index, "gap": rational_value(gap, mode)}),
        ),
        "col_marginals_ok": report.col_marginals_ok,
        "worst_col_gap": report.worst_col_gap.as_ref().map(
            |(index, gap)| json!({"index": index, "gap": rational_value(gap, mode)}),
        ),
        "col_l1_deficit": rational_value(&report.col_l1_deficit, mode),
    })
}

fn schedule_value(schedule: &Schedule<BigInt>, mode: ValueMode) -> Value {
    json!({
        "steps": schedule.steps,
        "N_k": schedule.truncation,
        "eps": rational_value(&schedule.eps, mode),
        "bound_3k_eps": rational_value(&schedule.divergence_bound, mode),
    })
}

fn trace_value(traces: &[StepTrace<BigInt>], mode: ValueMode) -> Value {
    let attained_name = |term: &AlphaTerm| match term {
        AlphaTerm::FirstMarginalSlack => "first-marginal-slack",
        AlphaTerm::SecondMarginalSlack => "second-marginal-slack",
        AlphaTerm::UpsetInfimum => "upset-infimum",
    };
    Value::Array(
        traces
            .iter()
            .map(|trace| {
                json!({
                    "pair": [trace.pair.0, trace.pair.1],
                    "alpha": rational_value(&trace.alpha, mode),
                    "attained": trace.attained.as_ref().map(attained_name),
                    "col_n_before": rational_value(&trace.col_n_before, mode),
                    "col_n_after": rational_value(&trace.col_n_after, mode),
                    "col_m_before": rational_value(&trace.col_m_before, mode),
                    "col_m_after": rational_value(&trace.col_m_after, mode),
                })
            })
            .collect(),
    )
}

pub struct SolveOptions {
    pub steps: usize,
    pub trace: bool,
    pub mode: ValueMode,
    pub oracle_check: bool,
}

pub fn cmd_solve(instance_text: &str, options: &SolveOptions) -> Result<Value, CliError> {
    if options.steps == 0 {
        return Err(CliError::Validation("--steps must be at least 1".into()));
    }
    let instance = parse_instance(instance_text)?;
    let run: DeltaRun<BigInt> =
        delta_k(&instance.mu, &instance.nu, &instance.order, options.steps).map_err(internal)?;
    let report = verify_solution(&run.coupling, &run.mu, &run.nu, &run.poset, &run.ground);
    let mut doc = json!({
        "coupling": coupling_value(&run.coupling, options.mode),
        "schedule": schedule_value(&run.schedule, options.mode),
        "verification": report_value(&report, options.mode),
    });
    if options.oracle_check {
        let outcome =
            maxflow_splitting(&run.mu, &run.nu, &run.poset, &run.ground).map_err(internal)?;
        doc["oracle"] = match outcome {
            SplitOutcome::Feasible(_) => {
                json!({"feasible": true, "max_flow": rational_value(&int(1), options.mode)})
            }
            SplitOutcome::Infeasible { max_flow } => {
                json!({"feasible": false, "max_flow": rational_value(&max_flow, options.mode)})
            }
        };
    }
    if options.trace {
        doc["trace"] = trace_value(&run.traces, options.mode);
    }
    Ok(doc)
}

pub fn parse_coupling(text: &str) -> Result<Coupling<BigInt>, CliError> {
    let triples: Vec<(usize, usize, String)> = serde_json::from_str(text)
        .map_err(|err| CliError::Validation(format!("parse error: {err}")))?;
    let mut parsed = Vec::with_capacity(triples.len());
    for (i, (n, m, value)) in triples.into_iter().enumerate() {
        let value = parse_rational(&value)
            .map_err(|err| CliError::Validation(format!("coupling[{i}]: {err}")))?;
        parsed.push((n, m, value));
    }
    Coupling::from_triples(parsed).map_err(|err| CliError::Validation(format!("coupling: {err}")))
}

/// Audits a claimed coupling. The boolean is the overall verdict; the
/// document always carries the full report.
pub fn cmd_verify(coupling_text: &str, instance_text: &str) -> Result<(Value, bool), CliError> {
    let claimed = parse_coupling(coupling_text)?;
    let instance = parse_instance(instance_text)?;
    let data = materialize(&instance)?;
    let report = verify_solution(&claimed, &data.mu, &data.nu, &data.poset, &data.ground);
    Ok((report_value(&report, ValueMode::Exact), report.all_ok()))
}

/// Solves by maximum flow. The boolean reports feasibility.
pub fn cmd_oracle(instance_text: &str) -> Result<(Value, bool), CliError> {
    let instance = parse_instance(instance_text)?;
    let data = materialize(&instance)?;
    match maxflow_splitting(&data.mu, &data.nu, &data.poset, &data.ground).map_err(internal)? {
        SplitOutcome::Feasible(coupling) => {
            let report = verify_solution(&coupling, &data.mu, &data.nu, &data.poset, &data.ground);
            let doc = json!({
                "feasible": true,
                "max_flow": rational_value(&int(1), ValueMode::Exact),
                "coupling": coupling_value(&coupling, ValueMode::Exact),
                "verification": report_value(&report, ValueMode::Exact),
            });
            Ok((doc, true))
        }
        SplitOutcome::Infeasible { max_flow } => {
            let doc = json!({
                "feasible": false,
                "max_flow": rational_value(&max_flow, ValueMode::Exact),
            });
            Ok((doc, false))
        }
    }
}

/// Pointwise certificate: the step count past which one entry is pinned
/// within `eps`, plus the truncation schedule for that step count.
pub fn cmd_bounds(instance_text: &str, n: usize, m: usize, eps: &str) -> Result<Value, CliError> {
    let instance = parse_instance(instance_text)?;
    let eps = parse_rational(eps).map_err(|err| CliError::Validation(format!("--eps: {err}")))?;
    if n == m || !instance.order.leq(n, m) {
        return Err(CliError::Validation(format!(
            "--pair: {n} is not strictly below {m} in the instance order"
        )));
    }
    let k0 =
        pointwise_k0(n, m, &eps).map_err(|err| CliError::Validation(format!("--eps: {err}")))?;
    let schedule = schedule_n(&instance.mu, &instance.nu, k0).map_err(internal)?;
    Ok(json!({
        "pair": [n, m],
        "eps": rational_value(&eps, ValueMode::Exact),
        "k0": k0,
        "schedule": schedule_value(&schedule, ValueMode::Exact),
    }))
}
