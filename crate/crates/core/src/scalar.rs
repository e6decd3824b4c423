//! Scalar abstractions.
//!
//! Matrix and kernel code is written against [`Real`] (implemented for `f32`
//! and `f64`). The closed-form dimension formulas only need field operations,
//! so they are written against [`Field`], which additionally covers exact
//! rationals.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// IEEE floating point scalar.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; used for literals.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("literal fits")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field used by the closed-form formulas.
pub trait Field: Copy + PartialOrd + NumAssign + Debug + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;

    fn to_f64(self) -> f64;

    /// Equality used at the discontinuities of the existence criteria.
    /// Exact for rationals; `|a - b| < 1e-12` for floats.
    fn boundary_eq(self, other: Self) -> bool;

    fn recip(self) -> Self {
        Self::one() / self
    }
}

macro_rules! float_field {
    ($t:ty) => {
        impl Field for $t {
            #[inline]
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn boundary_eq(self, other: Self) -> bool {
                ((self - other) as f64).abs() < 1e-12
            }
        }
    };
}

float_field!(f32);
float_field!(f64);

impl Field for Ratio<i64> {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v)
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn boundary_eq(self, other: Self) -> bool {
        self == other
    }
}

impl Field for Ratio<i128> {
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn boundary_eq(self, other: Self) -> bool {
        self == other
    }
}

/// Max of two partially ordered values (first wins on ties/NaN).
#[inline]
pub fn pmax<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

/// Min of two partially ordered values (first wins on ties/NaN).
#[inline]
pub fn pmin<T: PartialOrd>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}
