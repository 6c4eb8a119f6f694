//! One-round mean-field maps of the push protocol on the complete graph.
//!
//! `f(x) = 1 - e^{-x}(1 - x)` maps the informed fraction at the start of a
//! round to its expected value at the end of the round; its dual
//! `g(x) = x e^{x - 1} = 1 - f(1 - x)` does the same for the uninformed
//! fraction. Both maps fix 0 and 1.

use crate::error::{Error, Result};
use crate::numeric::Real;

/// `f` without the domain check, for any scalar backend.
///
/// For small `x` the naive form loses about half of its digits to
/// cancellation, so below 1/2 it is evaluated as `-expm1(-x) + x e^{-x}`
/// where both summands are positive.
#[inline]
pub fn mean_field_step<R: Real>(x: R) -> R {
    if x < R::from_f64(0.5) {
        -(-x).expm1() + x * (-x).exp()
    } else {
        R::ONE - (-x).exp() * (R::ONE - x)
    }
}

/// `g` without the domain check, for any scalar backend.
#[inline]
pub fn uninformed_step<R: Real>(x: R) -> R {
    x * (x - R::ONE).exp()
}

fn check_unit(name: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(name, x, "[0, 1]"))
    }
}

/// The mean-field map `f(x) = 1 - e^{-x}(1 - x)` on `[0, 1]`.
pub fn f(x: f64) -> Result<f64> {
    check_unit("f", x)?;
    Ok(mean_field_step(x))
}

/// The dual map `g(x) = x e^{x-1}` on `[0, 1]`.
pub fn g(x: f64) -> Result<f64> {
    check_unit("g", x)?;
    Ok(uninformed_step(x))
}

/// Deterministic informed fractions `values[t] = f^(t)(start_fraction)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldTrajectory {
    pub start_fraction: f64,
    pub values: Vec<f64>,
}

impl MeanFieldTrajectory {
    /// Number of stored values (iterations + 1).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("trajectory holds its start value")
    }

    /// Bound certificate for step `t`: the interval from
    /// [`iterate_f_bounds`] and whether `values[t]` lies inside it.
    pub fn certificate(&self, t: usize) -> (f64, f64, bool) {
        let (lo, hi) = bounds(self.start_fraction, t as u32);
        let v = self.values[t];
        (lo, hi, lo <= v && v <= hi)
    }
}

/// `f^(t)(x)` for `t = 0..=iterations`.
pub fn iterate_f(x: f64, iterations: usize) -> Result<MeanFieldTrajectory> {
    check_unit("iterate_f", x)?;
    let mut values = Vec::with_capacity(iterations + 1);
    let mut cur = x;
    values.push(cur);
    for _ in 0..iterations {
        cur = mean_field_step(cur);
        values.push(cur);
    }
    Ok(MeanFieldTrajectory {
        start_fraction: x,
        values,
    })
}

/// Uninformed fractions `values[j] = g^(j)(start)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GIterateSequence {
    pub start: f64,
    pub values: Vec<f64>,
}

pub fn iterate_g(x: f64, iterations: usize) -> Result<GIterateSequence> {
    check_unit("iterate_g", x)?;
    let mut values = Vec::with_capacity(iterations + 1);
    let mut cur = x;
    values.push(cur);
    for _ in 0..iterations {
        cur = uninformed_step(cur);
        values.push(cur);
    }
    Ok(GIterateSequence { start: x, values })
}

fn bounds(x: f64, i: u32) -> (f64, f64) {
    let scaled = x * 2f64.powi(i as i32);
    let lower = (scaled * (1.0 - scaled - scaled * scaled)).max(0.0);
    (lower, scaled.min(1.0))
}

/// Analytic bracket `2^i x (1 - 2^i x - 4^i x^2) <= f^(i)(x) <= 2^i x`,
/// with the lower end clamped at 0 and the upper end at 1.
pub fn iterate_f_bounds(x: f64, i: u32) -> Result<(f64, f64)> {
    check_unit("iterate_f_bounds", x)?;
    Ok(bounds(x, i))
}

/// Exact `E[|I_{t+1}| | |I_t| = i] = n - (n - i)(1 - 1/(n-1))^i`.
pub fn expected_next_informed(n: u64, i: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "expected_next_informed needs n >= 2, got {n}"
        )));
    }
    if i == 0 || i > n {
        return Err(Error::InvalidArgument(format!(
            "informed count {i} outside [1, {n}]"
        )));
    }
    let nf = n as f64;
    // (1 - 1/(n-1))^i via log1p keeps full accuracy for large n
    let miss = (i as f64 * (-1.0 / (nf - 1.0)).ln_1p()).exp();
    Ok(nf - (n - i) as f64 * miss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = f64::EPSILON;

    #[test]
    fn fixed_points() {
        assert_eq!(f(0.0).unwrap(), 0.0);
        assert_eq!(f(1.0).unwrap(), 1.0);
        assert_eq!(g(0.0).unwrap(), 0.0);
        assert_eq!(g(1.0).unwrap(), 1.0);
    }

    #[test]
    fn half_matches_high_precision_values() {
        // 1 - e^{-1/2}/2 and e^{-1/2}/2 to 20 digits (mpmath, 50 digits)
        assert!((f(0.5).unwrap() - 0.69673467014368328819).abs() <= 2.0 * EPS);
        assert!((g(0.5).unwrap() - 0.30326532985631671181).abs() <= 2.0 * EPS);
    }

    #[test]
    fn domain_is_enforced() {
        assert!(matches!(f(-1e-9), Err(Error::Domain { .. })));
        assert!(matches!(g(1.5), Err(Error::Domain { .. })));
        assert!(iterate_f(f64::NAN, 3).is_err());
    }

    #[test]
    fn zero_iterations() {
        let t = iterate_f(0.3, 0).unwrap();
        assert_eq!(t.values, vec![0.3]);
    }

    #[test]
    fn three_iterations_from_a_tenth() {
        // repeated single steps in 50-digit arithmetic from the f64 value of 0.1
        let want = [
            0.1,
            0.1856463237676363937,
            0.32362446999655277601,
            0.51062749442852565097,
        ];
        let t = iterate_f(0.1, 3).unwrap();
        for (got, want) in t.values.iter().zip(want) {
            assert!((got - want).abs() <= 4.0 * EPS, "{got} vs {want}");
        }
    }

    #[test]
    fn single_step_from_small_start_obeys_basic_bounds() {
        let x = 2f64.powi(-10);
        let v = iterate_f(x, 1).unwrap().last();
        assert!(2.0 * x * (1.0 - x) <= v && v <= 2.0 * x);
    }

    #[test]
    fn bound_examples() {
        let (lo, hi) = iterate_f_bounds(0.2, 0).unwrap();
        assert_eq!(hi, 0.2);
        assert!((lo - 0.2 * (1.0 - 0.2 - 0.04)).abs() < 1e-16);

        let x = 2f64.powi(-20);
        let (lo, hi) = iterate_f_bounds(x, 10).unwrap();
        let s = 2f64.powi(-10);
        assert_eq!(hi, s);
        assert!((lo - s * (1.0 - s - s * s)).abs() < 1e-18);

        assert_eq!(iterate_f_bounds(0.25, 3).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn trajectory_certificates_hold() {
        let t = iterate_f(1e-6, 30).unwrap();
        for step in 0..t.len() {
            assert!(t.certificate(step).2, "step {step}");
        }
    }

    #[test]
    fn expected_next_informed_examples() {
        assert_eq!(expected_next_informed(2, 1).unwrap(), 2.0);
        assert_eq!(expected_next_informed(17, 17).unwrap(), 17.0);
        // two informed nodes out of three: the last node stays uninformed
        // only if both push to each other, probability 1/4
        assert!((expected_next_informed(3, 2).unwrap() - 2.75).abs() < 1e-15);
        assert!(expected_next_informed(1, 1).is_err());
        assert!(expected_next_informed(5, 0).is_err());
    }

    #[test]
    fn finite_difference_derivative_positive_and_decreasing() {
        let h = 1e-6;
        let mut prev = f64::INFINITY;
        for k in 0..1000 {
            let x = 0.001 + 0.998 * k as f64 / 999.0;
            let d = (f(x + h).unwrap() - f(x - h).unwrap()) / (2.0 * h);
            assert!(d > 0.0);
            assert!(d < prev + 1e-8, "derivative not decreasing at {x}");
            prev = d;
        }
    }

    proptest! {
        #[test]
        fn duality(x in 0.0f64..=1.0) {
            let lhs = g(x).unwrap();
            let rhs = 1.0 - f(1.0 - x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 4.0 * EPS);
        }

        #[test]
        fn sandwich(x in 0.0f64..=1.0) {
            let v = f(x).unwrap();
            let tol = 4.0 * EPS;
            prop_assert!(2.0 * x * (1.0 - x) - tol <= v);
            prop_assert!(v <= 2.0 * x + tol);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn iterate_bounds_hold(x in 0.0f64..=1.0, i in 0u32..=20) {
            let v = iterate_f(x, i as usize).unwrap().last();
            let (lo, hi) = iterate_f_bounds(x, i).unwrap();
            let tol = 1e-13 * hi.max(1e-300);
            prop_assert!(lo - tol <= v && v <= hi + tol, "{lo} <= {v} <= {hi}");
        }

        #[test]
        fn subadditivity(r in 0.0f64..=0.5, s in 0.0f64..=0.5, i in 1usize..=20) {
            let lhs = iterate_f(r + s, i).unwrap().last();
            let rhs = iterate_f(r, i).unwrap().last() + 2f64.powi(i as i32) * s;
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn trajectory_monotone_and_in_unit_interval(x in 0.0f64..=1.0, len in 0usize..60) {
            let t = iterate_f(x, len).unwrap();
            prop_assert_eq!(t.values[0], x);
            for w in t.values.windows(2) {
                prop_assert!(w[0] <= w[1]);
                prop_assert!((0.0..=1.0).contains(&w[1]));
            }
        }

        #[test]
        fn g_sequence_dual_to_f(x in 0.0f64..=1.0, len in 0usize..30) {
            let gs = iterate_g(x, len).unwrap();
            let fs = iterate_f(1.0 - x, len).unwrap();
            for (j, (a, b)) in gs.values.iter().zip(&fs.values).enumerate() {
                prop_assert!((a - (1.0 - b)).abs() <= 1e-14 * (j + 1) as f64);
            }
            for w in gs.values.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
        }

        #[test]
        fn expectation_bracketed_by_mean_field(n in 3u64..=10_000, frac in 0.0f64..=1.0) {
            let i = ((frac * (n - 1) as f64) as u64 + 1).min(n);
            let e = expected_next_informed(n, i).unwrap();
            let base = f(i as f64 / n as f64).unwrap() * n as f64;
            prop_assert!(base * (1.0 - 1e-13) <= e && e <= base + 5.0);
        }
    }
}
