//! Scalar abstractions.
//!
//! [`Scalar`] is the minimal ordered-field interface needed by the purely
//! combinatorial parts of the crate (rearrangements, medians, discrete
//! perimeters). It is implemented by `f32`, `f64` and exact rationals such as
//! `num_rational::Ratio<i64>`. [`Real`] adds the transcendental functions
//! needed by measures, profiles and norms.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// Ordered field element usable for weights, values and distances.
pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Conversion to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Copy
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Send
        + Sync
        + 'static
{
}

/// Floating point scalar (`f32` or `f64`).
pub trait Real: Scalar + Float + FloatConst + Display + Default + Sum {
    /// Machine epsilon scaled to something usable as a convergence target.
    fn tol() -> Self {
        Self::epsilon() * Self::lit(8.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise summation, exact for rationals and with `O(log n)` rounding
/// growth for floats.
pub fn pairwise_sum<T: Scalar>(terms: &[T]) -> T {
    if terms.len() <= 64 {
        return terms.iter().fold(T::zero(), |acc, &x| acc + x);
    }
    let (left, right) = terms.split_at(terms.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

/// Kahan-compensated sum; the checkers add up to millions of small terms.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(terms: I) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for x in terms {
        let y = x - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
