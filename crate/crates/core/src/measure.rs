//! Probability measures on `{0, 1, 2, ..}` with exact rational weights.
//!
//! [`FiniteMeasure`] is a validated finite-support measure given on an
//! index prefix. [`MeasureSource`] additionally admits geometric measures
//! with rational ratio, so instances with infinite support stay exactly
//! representable; the truncation operator lumps the tail of a source at
//! the cut index, and `epsilon_n` is twice the total tail mass the two
//! truncations discard, which is exactly the total-variation style error
//! the driver's schedule controls.

use num::{Signed, Zero};

use crate::error::Error;
use crate::poset::Poset;
use crate::rational::{one, pow, zero, Int, Rational};
use crate::upset_opt::{min_nonempty_upset_weight_mincut, WeightVector};
use crate::Result;

/// Ground sizes up to this use exhaustive upset enumeration for dominance
/// checks (with the min-cut route cross-checked in debug builds); beyond
/// it, only the min-cut route runs.
const ENUMERATION_LIMIT: usize = 16;

/// A probability measure with all mass on `{0, .., len-1}`: entries are
/// nonnegative and sum to exactly 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMeasure<T: Int> {
    values: Vec<Rational<T>>,
}

impl<T: Int> FiniteMeasure<T> {
    pub fn new(values: Vec<Rational<T>>) -> Result<Self> {
        let mut total = zero::<T>();
        for (index, value) in values.iter().enumerate() {
            if value < &zero() {
                return Err(Error::NegativeMass { index, value: value.to_string() });
            }
            total += value;
        }
        if total != one() {
            return Err(Error::MassNotOne { total: total.to_string() });
        }
        Ok(FiniteMeasure { values })
    }

    /// Length of the stored prefix (indices at or beyond it carry no mass).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, n: usize) -> Rational<T> {
        self.values.get(n).cloned().unwrap_or_else(zero)
    }

    pub fn values(&self) -> &[Rational<T>] {
        &self.values
    }

    /// Indices with strictly positive mass, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(n, _)| n)
    }

    pub fn check_support_in(&self, ground: &[usize]) -> Result<()> {
        for index in self.support() {
            if !ground.contains(&index) {
                return Err(Error::SupportOutsideGround { index });
            }
        }
        Ok(())
    }

    pub fn l1_distance(&self, other: &Self) -> Rational<T> {
        let len = self.len().max(other.len());
        let mut total = zero::<T>();
        for n in 0..len {
            let diff = self.value(n) - other.value(n);
            total += diff.abs();
        }
        total
    }
}

/// A measure the driver can truncate at any index: either explicit, or
/// geometric with weight `(1-q) q^n` at `n` for a ratio `0 < q < 1`.
#[derive(Clone, Debug)]
pub enum MeasureSource<T: Int> {
    Explicit(FiniteMeasure<T>),
    Geometric { ratio: Rational<T> },
}

impl<T: Int> MeasureSource<T> {
    pub fn explicit(values: Vec<Rational<T>>) -> Result<Self> {
        Ok(MeasureSource::Explicit(FiniteMeasure::new(values)?))
    }

    pub fn geometric(ratio: Rational<T>) -> Result<Self> {
        if ratio <= zero() || ratio >= one() {
            return Err(Error::RatioOutOfRange { value: ratio.to_string() });
        }
        Ok(MeasureSource::Geometric { ratio })
    }

    pub fn value(&self, n: usize) -> Rational<T> {
        match self {
            MeasureSource::Explicit(measure) => measure.value(n),
            MeasureSource::Geometric { ratio } => (one::<T>() - ratio) * pow(ratio, n),
        }
    }

    /// Mass of `{0, .., n}`. Closed form for the geometric case keeps this
    /// cheap for the large cut indices the schedule search probes.
    pub fn head(&self, n: usize) -> Rational<T> {
        match self {
            MeasureSource::Explicit(measure) => {
                let mut total = zero::<T>();
                for value in measure.values().iter().take(n + 1) {
                    total += value;
                }
                total
            }
            MeasureSource::Geometric { ratio } => one::<T>() - pow(ratio, n + 1),
        }
    }
}

/// Lumps all mass from `n` upward at index `n`, leaving lower indices
/// untouched. The result is a genuine probability measure on `{0, .., n}`.
pub fn truncate<T: Int>(source: &MeasureSource<T>, n: usize) -> FiniteMeasure<T> {
    let mut values: Vec<Rational<T>> = (0..n).map(|i| source.value(i)).collect();
    let head_below = values.iter().fold(zero::<T>(), |acc, v| acc + v);
    values.push(one::<T>() - head_below);
    FiniteMeasure::new(values).expect("truncation preserves total mass")
}

/// `2 (2 - mu[0..=n] - nu[0..=n])`: the sum of the two truncation errors
/// in total variation distance, each of which is twice a tail mass.
pub fn epsilon_n<T: Int>(mu: &MeasureSource<T>, nu: &MeasureSource<T>, n: usize) -> Rational<T> {
    let two = Rational::from_integer(T::from(2));
    let tails = (one::<T>() - mu.head(n)) + (one::<T>() - nu.head(n));
    two * tails
}

/// Whether `nu` gives every upward-closed subset of `ground` at least as
/// much mass as `mu`. Small grounds check all upsets directly; larger ones
/// minimize `nu - mu` over nonempty upsets with the min-cut optimizer, and
/// in debug builds the two routes are compared whenever both ran.
pub fn check_dominance<T: Int>(
    mu: &FiniteMeasure<T>,
    nu: &FiniteMeasure<T>,
    poset: &Poset,
    ground: &[usize],
) -> Result<bool> {
    mu.check_support_in(ground)?;
    nu.check_support_in(ground)?;
    if ground.len() <= ENUMERATION_LIMIT {
        let by_enumeration = dominance_by_enumeration(mu, nu, poset, ground)?;
        debug_assert_eq!(
            by_enumeration,
            dominance_by_mincut(mu, nu, poset, ground)?,
            "dominance routes disagree"
        );
        Ok(by_enumeration)
    } else {
        dominance_by_mincut(mu, nu, poset, ground)
    }
}

fn dominance_by_enumeration<T: Int>(
    mu: &FiniteMeasure<T>,
    nu: &FiniteMeasure<T>,
    poset: &Poset,
    ground: &[usize],
) -> Result<bool> {
    for upset in poset.enumerate_upsets(ground)? {
        let mut gap = zero::<T>();
        for &l in upset.members() {
            gap += nu.value(l) - mu.value(l);
        }
        if gap < zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn dominance_by_mincut<T: Int>(
    mu: &FiniteMeasure<T>,
    nu: &FiniteMeasure<T>,
    poset: &Poset,
    ground: &[usize],
) -> Result<bool> {
    let mut weights = WeightVector::new();
    for &l in ground {
        let w = nu.value(l) - mu.value(l);
        if !w.is_zero() {
            weights.set(l, w);
        }
    }
    match min_nonempty_upset_weight_mincut(&weights, poset, ground)? {
        Some(minimum) => Ok(minimum >= zero()),
        // No ground, no nonempty upsets, nothing to violate.
        None => Ok(true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn measure(values: &[(i64, i64)]) -> FiniteMeasure<i64> {
        FiniteMeasure::new(values.iter().map(|&(n, d)| ratio(n, d)).collect()).unwrap()
    }

    #[test]
    fn validation_rejects_bad_mass() {
        assert_eq!(
            FiniteMeasure::<i64>::new(vec![ratio(1, 2), ratio(-1, 2), ratio(1, 1)]),
            Err(Error::NegativeMass { index: 1, value: "-1/2".into() })
        );
        assert_eq!(
            FiniteMeasure::<i64>::new(vec![ratio(1, 2), ratio(1, 4)]),
            Err(Error::MassNotOne { total: "3/4".into() })
        );
        assert_eq!(FiniteMeasure::<i64>::new(vec![]), Err(Error::MassNotOne { total: "0".into() }));
    }

    #[test]
    fn value_beyond_prefix_is_zero() {
        let m = measure(&[(1, 2), (1, 2)]);
        assert_eq!(m.value(0), ratio(1, 2));
        assert_eq!(m.value(7), ratio(0, 1));
        assert_eq!(m.support().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn geometric_ratio_must_be_in_open_unit_interval() {
        for (n, d) in [(0, 1), (1, 1), (3, 2), (-1, 2)] {
            assert!(
                matches!(
                    MeasureSource::<i64>::geometric(ratio(n, d)),
                    Err(Error::RatioOutOfRange { .. })
                ),
                "accepted ratio {n}/{d}"
            );
        }
    }

    #[test]
    fn geometric_values_and_heads() {
        let geo = MeasureSource::<i64>::geometric(ratio(1, 2)).unwrap();
        assert_eq!(geo.value(0), ratio(1, 2));
        assert_eq!(geo.value(2), ratio(1, 8));
        assert_eq!(geo.head(2), ratio(7, 8));

        // Head agrees with direct summation for a non-dyadic ratio too.
        let geo = MeasureSource::<i64>::geometric(ratio(1, 3)).unwrap();
        let mut direct = zero::<i64>();
        for n in 0..6 {
            direct += geo.value(n);
            assert_eq!(geo.head(n), direct);
        }
    }

    #[test]
    fn truncation_lumps_the_tail() {
        let geo = MeasureSource::<i64>::geometric(ratio(1, 2)).unwrap();
        let t = truncate(&geo, 3);
        assert_eq!(t.values(), &[ratio(1, 2), ratio(1, 4), ratio(1, 8), ratio(1, 8)]);

        let t = truncate(&geo, 0);
        assert_eq!(t.values(), &[ratio(1, 1)]);

        let explicit = MeasureSource::<i64>::explicit(vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let t = truncate(&explicit, 3);
        assert_eq!(t.values(), &[ratio(1, 2), ratio(1, 2), ratio(0, 1), ratio(0, 1)]);
    }

    #[test]
    fn epsilon_matches_hand_computation() {
        let mu = MeasureSource::<i64>::geometric(ratio(1, 2)).unwrap();
        let nu = MeasureSource::<i64>::geometric(ratio(1, 2)).unwrap();
        assert_eq!(epsilon_n(&mu, &nu, 0), ratio(2, 1));
        assert_eq!(epsilon_n(&mu, &nu, 3), ratio(1, 4));

        let mu = MeasureSource::<i64>::explicit(vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let nu = MeasureSource::<i64>::explicit(vec![ratio(1, 4), ratio(3, 4)]).unwrap();
        assert_eq!(epsilon_n(&mu, &nu, 0), ratio(5, 2));
        assert_eq!(epsilon_n(&mu, &nu, 1), ratio(0, 1));
    }

    #[test]
    fn epsilon_is_exactly_the_l1_truncation_error() {
        // BigInt backing: the far truncation pushes denominators past i64.
        use num::BigInt;
        let mu = MeasureSource::<BigInt>::geometric(ratio(1, 3)).unwrap();
        let nu = MeasureSource::<BigInt>::geometric(ratio(1, 2)).unwrap();
        for n in 0..8 {
            // Compare against truncation at a far larger cut standing in
            // for the untruncated measure.
            let far = 40;
            let mu_full = truncate(&mu, far);
            let nu_full = truncate(&nu, far);
            let err = mu_full.l1_distance(&truncate_padded(&mu, n, far))
                + nu_full.l1_distance(&truncate_padded(&nu, n, far));
            // The far truncation itself perturbs each measure by its tail,
            // so the identity holds up to that tail; with n <= 8 and far =
            // 40 the slack is far smaller than any value we compare.
            let slack = epsilon_n(&mu, &nu, far);
            let eps = epsilon_n(&mu, &nu, n);
            assert!(err <= eps);
            assert!(eps <= err + slack);
        }
    }

    fn truncate_padded(
        source: &MeasureSource<num::BigInt>,
        n: usize,
        len: usize,
    ) -> FiniteMeasure<num::BigInt> {
        let t = truncate(source, n);
        let mut values = t.values().to_vec();
        values.resize(len + 1, zero());
        FiniteMeasure::new(values).unwrap()
    }

    #[test]
    fn dominance_on_the_two_element_chain() {
        let chain = Poset::total(2);
        let mu = measure(&[(1, 2), (1, 2)]);
        let nu = measure(&[(1, 4), (3, 4)]);
        assert!(check_dominance(&mu, &nu, &chain, &[0, 1]).unwrap());
        assert!(!check_dominance(&nu, &mu, &chain, &[0, 1]).unwrap());
        assert!(check_dominance(&mu, &mu, &chain, &[0, 1]).unwrap());
    }

    #[test]
    fn dominance_on_an_antichain_is_equality() {
        let antichain = Poset::antichain(2);
        let mu = measure(&[(1, 2), (1, 2)]);
        let nu = measure(&[(1, 4), (3, 4)]);
        assert!(!check_dominance(&mu, &nu, &antichain, &[0, 1]).unwrap());
        assert!(check_dominance(&mu, &mu, &antichain, &[0, 1]).unwrap());
    }

    #[test]
    fn dominance_requires_support_in_ground() {
        let chain = Poset::total(3);
        let mu = measure(&[(1, 2), (1, 2)]);
        assert_eq!(
            check_dominance(&mu, &mu, &chain, &[0, 2]),
            Err(Error::SupportOutsideGround { index: 1 })
        );
    }
}
