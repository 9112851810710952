//! Constructive Strassen couplings for stochastic domination.
//!
//! A probability measure `mu` on a countable partial order is dominated by
//! `nu` when every upward-closed set gets at least as much mass under `nu`
//! as under `mu`. Strassen's theorem says this is equivalent to the
//! existence of a coupling supported on the order relation: a joint
//! distribution with first marginal `mu`, second marginal `nu`, and all
//! mass on pairs `(n, m)` with `n <= m`.
//!
//! The classical proof is non-constructive. This crate builds the coupling
//! explicitly: starting from the diagonal coupling of `mu` it repeatedly
//! applies a mass-shifting step (the Nawrotzki step) along a fixed
//! enumeration of index pairs, and for infinite-support inputs it couples a
//! truncation schedule to the step count so that the output carries a
//! computable error bound.
//!
//! Everything is exact: all arithmetic is over rationals with a pluggable
//! integer backing type (`i64` for small instances, `BigInt` when results
//! must be unconditionally correct). Floating point appears only as an
//! optional output rendering.
//!
//! Module map:
//!
//! * [`poset`]: finite partial orders, upward closures, upset enumeration.
//! * [`measure`]: finite-support rational measures, truncation of
//!   parametric measures, dominance checking.
//! * [`flow`]: exact-arithmetic max-flow (Edmonds-Karp), the engine behind
//!   the optimizer and the oracle.
//! * [`upset_opt`]: minimum-weight constrained upsets, by enumeration and
//!   by a min-cut reduction.
//! * [`kernel`]: couplings, the step size `alpha`, the single-pair update,
//!   the active set, and the sweep driver.
//! * [`driver`]: truncation schedule, finite-stage outputs, divergence and
//!   pointwise error bounds.
//! * [`oracle`]: an independent max-flow construction of couplings and an
//!   exact verifier for claimed solutions.

pub mod driver;
pub mod error;
pub mod flow;
pub mod kernel;
pub mod measure;
pub mod oracle;
pub mod poset;
pub mod rational;
pub mod upset_opt;

pub use error::Error;
pub use rational::{BigRational, Int, Rational};

pub type Result<T> = std::result::Result<T, Error>;
