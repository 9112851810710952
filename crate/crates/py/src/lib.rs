//! Python bindings over the arbitrary-precision core. Rationals cross the
//! boundary as exact `"p/q"` strings in both directions; nothing is ever
//! rounded. Build with `cargo build -p domcoup-py`, then import the
//! produced cdylib as `domcoup` (see `python/smoke_test.py`).

use num::BigInt;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use domcoup_core::driver;
use domcoup_core::kernel;
use domcoup_core::measure::{self, FiniteMeasure, MeasureSource};
use domcoup_core::oracle::{self, SplitOutcome};
use domcoup_core::poset::{OrderPredicate, OrderSpec, Poset};
use domcoup_core::rational::{format_rational, parse_rational, to_f64, BigRational};

fn value_error(err: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn parse(text: &str) -> PyResult<BigRational> {
    parse_rational(text).map_err(value_error)
}

/// The order relation of an instance: total, divisibility (shifted so
/// index 0 divides everything), or the transitive closure of explicit
/// strict pairs.
#[pyclass(name = "Order", frozen)]
struct PyOrder {
    inner: OrderSpec,
}

#[pymethods]
impl PyOrder {
    #[staticmethod]
    fn total() -> Self {
        PyOrder { inner: OrderSpec::Total }
    }

    #[staticmethod]
    fn divisibility() -> Self {
        PyOrder { inner: OrderSpec::Divisibility }
    }

    #[staticmethod]
    fn explicit(size: usize, pairs: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyOrder { inner: OrderSpec::explicit(size, &pairs).map_err(value_error)? })
    }

    fn leq(&self, a: usize, b: usize) -> bool {
        self.inner.leq(a, b)
    }

    fn __repr__(&self) -> String {
        match &self.inner {
            OrderSpec::Total => "Order.total()".into(),
            OrderSpec::Divisibility => "Order.divisibility()".into(),
            OrderSpec::Explicit(closure) => format!("Order.explicit(size={})", closure.size()),
        }
    }
}

/// A unit-mass measure on the naturals: explicit rational values or a
/// geometric law, both exact.
#[pyclass(name = "Measure", frozen)]
struct PyMeasure {
    inner: MeasureSource<BigInt>,
}

#[pymethods]
impl PyMeasure {
    #[staticmethod]
    fn explicit(values: Vec<String>) -> PyResult<Self> {
        let parsed = values.iter().map(|v| parse(v)).collect::<PyResult<Vec<_>>>()?;
        Ok(PyMeasure { inner: MeasureSource::explicit(parsed).map_err(value_error)? })
    }

    #[staticmethod]
    fn geometric(ratio: &str) -> PyResult<Self> {
        Ok(PyMeasure { inner: MeasureSource::geometric(parse(ratio)?).map_err(value_error)? })
    }

    /// Mass at index `n`, as an exact rational string.
    fn value(&self, n: usize) -> String {
        format_rational(&self.inner.value(n))
    }

    /// Total mass on `0..=n`.
    fn head(&self, n: usize) -> String {
        format_rational(&self.inner.head(n))
    }

    fn __repr__(&self) -> String {
        match &self.inner {
            MeasureSource::Explicit(m) => format!("Measure.explicit({} values)", m.len()),
            MeasureSource::Geometric { ratio } => {
                format!("Measure.geometric({})", format_rational(ratio))
            }
        }
    }
}

/// A joint matrix with exact rational entries, indexed by pairs.
#[pyclass(name = "Coupling", frozen)]
struct PyCoupling {
    inner: kernel::Coupling<BigInt>,
}

#[pymethods]
impl PyCoupling {
    /// All nonzero entries as `(n, m, "p/q")`, lexicographically sorted.
    fn entries(&self) -> Vec<(usize, usize, String)> {
        self.inner.entries().map(|((n, m), v)| (n, m, format_rational(v))).collect()
    }

    fn get(&self, n: usize, m: usize) -> String {
        format_rational(&self.inner.get(n, m))
    }

    fn get_float(&self, n: usize, m: usize) -> f64 {
        to_f64(&self.inner.get(n, m))
    }

    fn row_sum(&self, n: usize) -> String {
        format_rational(&self.inner.row_sum(n))
    }

    fn col_sum(&self, m: usize) -> String {
        format_rational(&self.inner.col_sum(m))
    }

    fn total_mass(&self) -> String {
        format_rational(&self.inner.total_mass())
    }

    fn l1_distance(&self, other: &PyCoupling) -> String {
        format_rational(&self.inner.l1_distance(&other.inner))
    }

    fn __len__(&self) -> usize {
        self.inner.entries().count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Coupling({} entries, mass {})",
            self.inner.entries().count(),
            format_rational(&self.inner.total_mass())
        )
    }
}

/// Truncation schedule for a step count: where the data was cut, the
/// exact loss, and the worst-case divergence it can cause.
#[pyclass(name = "Schedule", frozen, get_all)]
struct PySchedule {
    steps: usize,
    truncation: usize,
    eps: String,
    divergence_bound: String,
}

impl PySchedule {
    fn from_core(schedule: &driver::Schedule<BigInt>) -> Self {
        PySchedule {
            steps: schedule.steps,
            truncation: schedule.truncation,
            eps: format_rational(&schedule.eps),
            divergence_bound: format_rational(&schedule.divergence_bound),
        }
    }
}

#[pymethods]
impl PySchedule {
    fn __repr__(&self) -> String {
        format!(
            "Schedule(steps={}, truncation={}, eps={}, divergence_bound={})",
            self.steps, self.truncation, self.eps, self.divergence_bound
        )
    }
}

type Instance = (FiniteMeasure<BigInt>, FiniteMeasure<BigInt>, Poset, Vec<usize>);

/// Materializes an instance on the ground set `0..prefix`, mirroring the
/// CLI: the tail is lumped at the last index.
fn materialize(
    mu: &PyMeasure,
    nu: &PyMeasure,
    order: &PyOrder,
    prefix: usize,
) -> PyResult<Instance> {
    if prefix == 0 {
        return Err(value_error("prefix must be at least 1"));
    }
    let poset = Poset::from_predicate(prefix, &order.inner).map_err(value_error)?;
    Ok((
        measure::truncate(&mu.inner, prefix - 1),
        measure::truncate(&nu.inner, prefix - 1),
        poset,
        (0..prefix).collect(),
    ))
}

/// Runs the scheduled sweep: picks the truncation for `steps`, starts from
/// the diagonal of the truncated first marginal, and takes `steps` sweep
/// steps. Returns the coupling and its schedule.
#[pyfunction]
fn solve(
    mu: &PyMeasure,
    nu: &PyMeasure,
    order: &PyOrder,
    steps: usize,
) -> PyResult<(PyCoupling, PySchedule)> {
    let run = driver::delta_k(&mu.inner, &nu.inner, &order.inner, steps).map_err(value_error)?;
    Ok((PyCoupling { inner: run.coupling }, PySchedule::from_core(&run.schedule)))
}

/// Exact audit of a claimed coupling against the instance materialized on
/// `0..prefix`. Returns a dict with the four verdicts, the witnesses, and
/// the exact column shortfall.
#[pyfunction]
fn verify<'py>(
    py: Python<'py>,
    coupling: &PyCoupling,
    mu: &PyMeasure,
    nu: &PyMeasure,
    order: &PyOrder,
    prefix: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let (mu, nu, poset, ground) = materialize(mu, nu, order, prefix)?;
    let report = oracle::verify_solution(&coupling.inner, &mu, &nu, &poset, &ground);
    let dict = PyDict::new(py);
    dict.set_item("all_ok", report.all_ok())?;
    dict.set_item("mass_ok", report.mass_ok)?;
    dict.set_item("total_mass", format_rational(&report.total_mass))?;
    dict.set_item(
        "worst_negative_entry",
        report.worst_negative_entry.as_ref().map(|((n, m), v)| (*n, *m, format_rational(v))),
    )?;
    dict.set_item("support_ok", report.support_ok)?;
    dict.set_item("support_witness", report.support_witness)?;
    dict.set_item("row_marginals_ok", report.row_marginals_ok)?;
    dict.set_item(
        "worst_row_gap",
        report.worst_row_gap.as_ref().map(|(i, g)| (*i, format_rational(g))),
    )?;
    dict.set_item("col_marginals_ok", report.col_marginals_ok)?;
    dict.set_item(
        "worst_col_gap",
        report.worst_col_gap.as_ref().map(|(i, g)| (*i, format_rational(g))),
    )?;
    dict.set_item("col_l1_deficit", format_rational(&report.col_l1_deficit))?;
    Ok(dict)
}

/// Solves the materialized instance by maximum flow. Returns
/// `(feasible, coupling_or_None, max_flow)`.
#[pyfunction]
fn oracle_split(
    mu: &PyMeasure,
    nu: &PyMeasure,
    order: &PyOrder,
    prefix: usize,
) -> PyResult<(bool, Option<PyCoupling>, String)> {
    let (mu, nu, poset, ground) = materialize(mu, nu, order, prefix)?;
    match oracle::maxflow_splitting(&mu, &nu, &poset, &ground).map_err(value_error)? {
        SplitOutcome::Feasible(coupling) => {
            Ok((true, Some(PyCoupling { inner: coupling }), "1".into()))
        }
        SplitOutcome::Infeasible { max_flow } => Ok((false, None, format_rational(&max_flow))),
    }
}

/// Whether the first measure is dominated by the second on the
/// materialized instance (every upward-closed set carries at least as
/// much `nu`-mass).
#[pyfunction]
fn dominance(mu: &PyMeasure, nu: &PyMeasure, order: &PyOrder, prefix: usize) -> PyResult<bool> {
    let (mu, nu, poset, ground) = materialize(mu, nu, order, prefix)?;
    measure::check_dominance(&mu, &nu, &poset, &ground).map_err(value_error)
}

/// The elementary step size at `(n, m)` for the given target marginal and
/// current coupling, on the ground set `0..prefix`.
#[pyfunction]
fn step_size(
    nu: &PyMeasure,
    coupling: &PyCoupling,
    n: usize,
    m: usize,
    order: &PyOrder,
    prefix: usize,
) -> PyResult<String> {
    if prefix == 0 {
        return Err(value_error("prefix must be at least 1"));
    }
    let poset = Poset::from_predicate(prefix, &order.inner).map_err(value_error)?;
    let ground: Vec<usize> = (0..prefix).collect();
    let nu = measure::truncate(&nu.inner, prefix - 1);
    let alpha = kernel::alpha(&nu, &coupling.inner, n, m, &poset, &ground).map_err(value_error)?;
    Ok(format_rational(&alpha))
}

/// Truncation schedule for a step count, without running anything.
#[pyfunction]
fn schedule(mu: &PyMeasure, nu: &PyMeasure, steps: usize) -> PyResult<PySchedule> {
    let schedule = driver::schedule_n(&mu.inner, &nu.inner, steps).map_err(value_error)?;
    Ok(PySchedule::from_core(&schedule))
}

/// Step count past which the `(n, m)` coupling entry stays within `eps`
/// of its limit.
#[pyfunction]
fn pointwise_k0(n: usize, m: usize, eps: &str) -> PyResult<usize> {
    driver::pointwise_k0(n, m, &parse(eps)?).map_err(value_error)
}

#[pymodule]
fn domcoup(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOrder>()?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PyCoupling>()?;
    m.add_class::<PySchedule>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_split, m)?)?;
    m.add_function(wrap_pyfunction!(dominance, m)?)?;
    m.add_function(wrap_pyfunction!(step_size, m)?)?;
    m.add_function(wrap_pyfunction!(schedule, m)?)?;
    m.add_function(wrap_pyfunction!(pointwise_k0, m)?)?;
    Ok(())
}
