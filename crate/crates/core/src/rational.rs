//! Exact rational scalars over a pluggable integer backing type.
//!
//! Small instances (tests, the acceptance sweeps) run on `Ratio<i64>`,
//! which is fast and panics on overflow in debug builds. The CLI and the
//! Python bindings run on `Ratio<BigInt>` so results are unconditionally
//! exact. Algorithms are written once, generic over [`Int`].

use num::bigint::BigInt;
use num::traits::NumAssign;
use num::{FromPrimitive, Integer, Signed, ToPrimitive};
use std::fmt::{Debug, Display};
use std::str::FromStr;

use crate::error::Error;

/// Integer backing type for exact rational arithmetic: `i64`, `i128`,
/// `BigInt`, or anything with the same shape.
pub trait Int:
    Integer
    + Signed
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + From<i32>
    + Clone
    + Debug
    + Display
    + 'static
{
}

impl<T> Int for T where
    T: Integer
        + Signed
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + FromStr
        + From<i32>
        + Clone
        + Debug
        + Display
        + 'static
{
}

pub type Rational<T> = num_rational::Ratio<T>;
pub type BigRational = Rational<BigInt>;

/// `n/d` as a rational. Panics if the backing type cannot hold the
/// arguments or if `d == 0`; intended for constants.
pub fn ratio<T: Int>(numer: i64, denom: i64) -> Rational<T> {
    Rational::new(
        T::from_i64(numer).expect("numerator out of range for backing type"),
        T::from_i64(denom).expect("denominator out of range for backing type"),
    )
}

pub fn int<T: Int>(value: i64) -> Rational<T> {
    Rational::from_integer(T::from_i64(value).expect("value out of range for backing type"))
}

pub fn zero<T: Int>() -> Rational<T> {
    Rational::from_integer(T::zero())
}

pub fn one<T: Int>() -> Rational<T> {
    Rational::from_integer(T::one())
}

/// `base^exp` by repeated squaring. Exponentiation shows up in geometric
/// tails and the `3^k` divergence factor, always with small exponents.
pub fn pow<T: Int>(base: &Rational<T>, exp: usize) -> Rational<T> {
    let mut result = one::<T>();
    let mut square = base.clone();
    let mut left = exp;
    while left > 0 {
        if left & 1 == 1 {
            result *= &square;
        }
        left >>= 1;
        if left > 0 {
            square = &square * &square;
        }
    }
    result
}

/// Parses `"p/q"` or `"p"` with `q > 0`, in lowest terms afterwards.
pub fn parse_rational(text: &str) -> Result<BigRational, Error> {
    let invalid = || Error::InvalidRational { text: text.to_string() };
    let (numer_text, denom_text) = match text.split_once('/') {
        Some((n, d)) => (n, d),
        None => (text, "1"),
    };
    let numer = BigInt::from_str(numer_text).map_err(|_| invalid())?;
    let denom = BigInt::from_str(denom_text).map_err(|_| invalid())?;
    if denom.is_positive() {
        Ok(BigRational::new(numer, denom))
    } else {
        Err(invalid())
    }
}

/// Renders as `"p/q"`, or `"p"` when the reduced denominator is 1. This is
/// the only output format the CLI emits and `parse_rational` accepts both
/// shapes, so values round-trip.
pub fn format_rational<T: Int>(value: &Rational<T>) -> String {
    value.to_string()
}

/// Nearest double, for the opt-in float rendering. Goes through `BigInt`
/// so huge numerators and denominators cancel exponents instead of
/// saturating to infinity.
pub fn to_f64<T: Int>(value: &Rational<T>) -> f64 {
    let numer = big(value.numer());
    let denom = big(value.denom());
    BigRational::new(numer, denom).to_f64().unwrap_or(f64::NAN)
}

fn big<T: Int>(value: &T) -> BigInt {
    if let Some(small) = value.to_i64() {
        return BigInt::from(small);
    }
    // Slow path for values beyond i64: decimal round-trip is exact.
    BigInt::from_str(&value.to_string()).expect("integer Display must round-trip")
}
