//! Scalar abstraction shared by the `f64` and double-double backends.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::dd::DoubleDouble;

pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    /// Unit roundoff of the representation.
    const EPSILON: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn ln2() -> Self;
    fn exp(self) -> Self;
    fn expm1(self) -> Self;
    fn ln(self) -> Self;
    fn ln1p(self) -> Self;
    fn abs(self) -> Self;
    fn ldexp(self, k: i32) -> Self;
}

impl Real for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const EPSILON: f64 = f64::EPSILON;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn ln2() -> Self {
        std::f64::consts::LN_2
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn expm1(self) -> Self {
        f64::exp_m1(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn ln1p(self) -> Self {
        f64::ln_1p(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn ldexp(self, k: i32) -> Self {
        self * 2f64.powi(k)
    }
}

impl Real for DoubleDouble {
    const ZERO: Self = DoubleDouble::ZERO;
    const ONE: Self = DoubleDouble::ONE;
    const EPSILON: f64 = 4.93e-32;

    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn ln2() -> Self {
        DoubleDouble::LN2
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn expm1(self) -> Self {
        DoubleDouble::expm1(self)
    }
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    fn ln1p(self) -> Self {
        DoubleDouble::ln1p(self)
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn ldexp(self, k: i32) -> Self {
        DoubleDouble::ldexp(self, k)
    }
}
