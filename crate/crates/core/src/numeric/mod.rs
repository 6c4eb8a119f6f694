//! Floating-point building blocks: a double-double scalar, a scalar trait
//! over both backends, compensated summation and fixed-format output.

pub mod dd;
pub mod format;
pub mod real;
pub mod sum;

pub use dd::DoubleDouble;
pub use real::Real;
pub use sum::CompensatedSum;

use serde::{Deserialize, Serialize};

/// Arithmetic backend used by the series evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    Double,
    #[default]
    DoubleDouble,
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "double" | "f64" => Ok(Precision::Double),
            "double-double" | "dd" => Ok(Precision::DoubleDouble),
            other => Err(format!("unknown precision backend `{other}`")),
        }
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Precision::Double => "double",
            Precision::DoubleDouble => "double-double",
        })
    }
}

/// Fractional part `x - floor(x)`, always in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    // x slightly below an integer can round up to exactly 1
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Fractional parts of `log2 n` and `ln n`, evaluated in double-double so
/// that the result keeps full `f64` accuracy for `n` up to `2^62` and beyond.
pub fn log_fractions(n: u64) -> (f64, f64) {
    assert!(n >= 1, "log of zero");
    let ln_n = DoubleDouble::from_u64(n).ln();
    let frac_ln = (ln_n - ln_n.floor()).to_f64();
    let frac_log2 = if n.is_power_of_two() {
        0.0
    } else {
        let l2 = ln_n / DoubleDouble::LN2;
        (l2 - l2.floor()).to_f64()
    };
    (frac_log2.min(1.0 - f64::EPSILON / 2.0), frac_ln.min(1.0 - f64::EPSILON / 2.0))
}

/// `(⌊log2 n⌋, ⌊ln n⌋)`, the second in double-double.
pub fn log_floors(n: u64) -> (u64, u64) {
    assert!(n >= 1, "log of zero");
    let ln_n = DoubleDouble::from_u64(n).ln();
    (n.ilog2() as u64, ln_n.floor().to_f64() as u64)
}
