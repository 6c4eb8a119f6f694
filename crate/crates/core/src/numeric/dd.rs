//! Software double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` of two `f64`s with
//! `|lo| <= ulp(hi) / 2`, giving roughly 106 bits of significand. The
//! elementary functions here (`exp`, `expm1`, `ln`, `ln1p`) are accurate to a
//! few units of 2^-104 relative over the ranges used by this crate.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

#[derive(Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const LN2: Self = Self {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };
    /// Euler–Mascheroni constant.
    pub const EULER_GAMMA: Self = Self {
        hi: 0.5772156649015329,
        lo: -4.942915152430645e-18,
    };

    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact conversion for every `u64`.
    pub fn from_u64(n: u64) -> Self {
        let hi = n as f64;
        let lo = (n as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    /// Multiplies by `2^k`; exact unless the result leaves the normal range.
    pub fn ldexp(self, k: i32) -> Self {
        let s = pow2(k);
        Self {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            Self { hi, lo }
        } else {
            Self { hi, lo: 0.0 }
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, mut e) = two_prod(self.hi, b);
        e = self.lo.mul_add(b, e);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    pub fn add_f64(self, b: f64) -> Self {
        let (s, mut e) = two_sum(self.hi, b);
        e += self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Self::from_f64(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Self::from_f64(b).mul_f64(q2);
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }.add_f64(q3)
    }

    pub fn square(self) -> Self {
        self * self
    }

    /// `e^x - 1` for `|x| <= 0.35`, after scaling the argument by `2^-10`.
    fn expm1_reduced(self) -> Self {
        let s = self.ldexp(-10);
        let mut term = s;
        let mut sum = s;
        for i in 2..=10 {
            term = (term * s).div_f64(i as f64);
            sum += term;
        }
        // e^{2r} - 1 = m (m + 2) with m = e^r - 1
        for _ in 0..10 {
            sum = sum * sum.add_f64(2.0);
        }
        sum
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.7 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        if self.hi == 0.0 {
            return Self::ONE;
        }
        let k = (self.hi / Self::LN2.hi).round();
        let r = self - Self::LN2.mul_f64(k);
        let m = r.expm1_reduced();
        m.add_f64(1.0).ldexp(k as i32)
    }

    pub fn expm1(self) -> Self {
        if self.hi.abs() < 0.35 {
            self.expm1_reduced()
        } else {
            self.exp().add_f64(-1.0)
        }
    }

    /// Natural logarithm; NaN for negative input, -inf at zero.
    pub fn ln(self) -> Self {
        if self.hi < 0.0 || self.hi.is_nan() {
            return Self::from_f64(f64::NAN);
        }
        if self.hi == 0.0 {
            return Self::from_f64(f64::NEG_INFINITY);
        }
        if self.hi.is_infinite() {
            return self;
        }
        // one Newton step on e^y = x doubles the f64 starting accuracy
        let y = Self::from_f64(self.hi.ln());
        y + self * (-y).exp() - Self::ONE
    }

    /// `ln(1 + z)`, relatively accurate for small `z`.
    pub fn ln1p(self) -> Self {
        if self.hi.abs() >= 0.3 {
            return self.add_f64(1.0).ln();
        }
        if self.hi == 0.0 {
            return self;
        }
        let y = Self::from_f64(self.hi.ln_1p());
        let e = y.expm1();
        y - (e - self) / e.add_f64(1.0)
    }
}

#[inline]
fn pow2(k: i32) -> f64 {
    if (-1022..=1023).contains(&k) {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        2f64.powi(k)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Debug for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoubleDouble({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p, mut e) = two_prod(self.hi, b.hi);
        e += self.hi * b.lo + self.lo * b.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }.add_f64(q3)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}
