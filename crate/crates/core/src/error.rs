use thiserror::Error;

/// Everything that can go wrong when validating inputs or running the
/// algorithms. Offending rational values are carried as strings so the
/// error type stays independent of the integer backing type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("relation has a cycle through {a} and {b}")]
    Cycle { a: usize, b: usize },

    #[error("relation is not reflexive at {index}")]
    NotReflexive { index: usize },

    #[error("relation is not transitive: {a} <= {b} <= {c} but not {a} <= {c}")]
    NotTransitive { a: usize, b: usize, c: usize },

    #[error("{n} is not strictly below {m}")]
    NotStrictlyComparable { n: usize, m: usize },

    #[error("index {index} lies outside the stated ground set")]
    NotInGround { index: usize },

    #[error("support contains {index}, which lies outside the stated ground set")]
    SupportOutsideGround { index: usize },

    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: usize, value: String },

    #[error("total mass is {total}, expected 1")]
    MassNotOne { total: String },

    #[error("negative coupling entry {value} at ({n}, {m})")]
    NegativeEntry { n: usize, m: usize, value: String },

    #[error("duplicate coupling entry at ({n}, {m})")]
    DuplicateEntry { n: usize, m: usize },

    #[error("geometric ratio {value} is not strictly between 0 and 1")]
    RatioOutOfRange { value: String },

    #[error("epsilon {value} is not strictly positive")]
    NonpositiveEpsilon { value: String },

    #[error("step count must be at least 1")]
    ZeroSteps,

    #[error("cannot parse {text:?} as a rational")]
    InvalidRational { text: String },
}
