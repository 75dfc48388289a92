//! Numeric abstraction shared by the LP engine and the statistics helpers.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, Signed};

/// An exact ordered field element.
///
/// Only exact types implement this trait. Floating point is deliberately
/// excluded: pivot selection and feasibility decisions compare against zero.
pub trait Scalar: Clone + Debug + Display + Ord + Num + Signed + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;
    /// Converts from a big rational; `None` if the value does not fit.
    fn from_rational(q: &BigRational) -> Option<Self>;
    fn to_rational(&self) -> BigRational;
}

impl<T> Scalar for Ratio<T>
where
    T: Clone + Debug + Display + Integer + Signed + Send + Sync + 'static + From<i64> + Into<BigInt> + TryFrom<BigInt>,
{
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(T::from(v))
    }

    fn from_rational(q: &BigRational) -> Option<Self> {
        let n = T::try_from(q.numer().clone()).ok()?;
        let d = T::try_from(q.denom().clone()).ok()?;
        Some(Ratio::new(n, d))
    }

    fn to_rational(&self) -> BigRational {
        BigRational::new(self.numer().clone().into(), self.denom().clone().into())
    }
}

/// Least common multiple of the denominators of `values` (1 for an empty slice).
pub fn denominator_lcm<S: Scalar>(values: &[S]) -> BigInt {
    values.iter().fold(BigInt::from(1), |acc, v| acc.lcm(v.to_rational().denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Rational, Rational64};

    #[test]
    fn round_trips_through_big_rational() {
        let q = Rational64::new(-6, 8);
        let big = q.to_rational();
        assert_eq!(big, Rational::new((-3).into(), 4.into()));
        assert_eq!(Rational64::from_rational(&big), Some(q));
    }

    #[test]
    fn narrow_conversion_fails_on_overflow() {
        let huge = Rational::from_integer(BigInt::from(i64::MAX) * 4);
        assert_eq!(Rational64::from_rational(&huge), None);
    }

    #[test]
    fn lcm_of_denominators() {
        let v = [Rational64::new(2, 3), Rational64::new(1, 6), Rational64::from_i64(0)];
        assert_eq!(denominator_lcm(&v), BigInt::from(6));
    }
}
