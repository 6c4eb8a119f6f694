//! The periodic correction `c(x)` that enters the limiting runtime law.
//!
//! `c(x) = -x + lim_a lim_b ( -a + b + ln g^(b)(1 - 2^{-a-x}) )`. Telescoping
//! the inner limit gives
//!
//! ```text
//! b + ln g^(b)(y) = 1 + ln(1 - 2^{-a-x}) - 2^{-a-x} + sum_{j=1}^{b-1} g^(j)(y),
//! y = 1 - 2^{-a-x},
//! ```
//!
//! whose terms decay geometrically once the orbit drops below 1/2. The first
//! `~a` terms sit within `2^{-a}` of 1, so the orbit is tracked through its
//! complement `1 - g^(j)(y) = f^(j)(2^{-a-x})` until that complement reaches
//! 1/2. The oscillation of `c` is about `6e-10` while the individual terms
//! are O(1); every sum below is compensated.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{format::sig17, frac, CompensatedSum, DoubleDouble, Precision, Real};
use crate::recursions::{mean_field_step, uninformed_step};

/// Known eventual bound on successive-term ratios: `g'(x) <= (3/2) e^{-1/2}`
/// for `x <= 1/2`.
const RATIO_FLOOR: f64 = 0.909_795_989_568_950_1;

/// Smallest admissible tolerance for [`c_of_x`].
pub const MIN_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitConfig {
    /// First outer truncation tried.
    pub a_min: u32,
    /// Largest outer truncation before giving up.
    pub a_cap: u32,
    /// Maximum number of inner-series terms.
    pub term_cap: usize,
    pub precision: Precision,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            a_min: 20,
            a_cap: 45,
            term_cap: 100_000,
            precision: Precision::DoubleDouble,
        }
    }
}

/// Orbit `g^(j)(1 - 2^{-a-x})`, `j = 1, 2, ...`.
///
/// While the orbit is above 1/2 the iterator carries the complement
/// `f^(j)(2^{-a-x})`; after that it iterates `g` directly.
#[derive(Debug, Clone)]
pub struct SeriesTerms<R: Real> {
    complement: R,
    value: R,
    tracking_complement: bool,
}

impl<R: Real> SeriesTerms<R> {
    pub fn new(x: f64, a: u32) -> Self {
        let eps = offset::<R>(x, a);
        Self {
            complement: eps,
            value: R::ONE - eps,
            tracking_complement: true,
        }
    }
}

impl<R: Real> Iterator for SeriesTerms<R> {
    type Item = R;

    fn next(&mut self) -> Option<R> {
        if self.tracking_complement {
            self.complement = mean_field_step(self.complement);
            // complement >= 1/2 makes 1 - complement exact
            self.value = R::ONE - self.complement;
            if self.complement >= R::from_f64(0.5) {
                self.tracking_complement = false;
            }
        } else {
            self.value = uninformed_step(self.value);
        }
        Some(self.value)
    }
}

/// `2^{-a-x}` in the requested backend.
fn offset<R: Real>(x: f64, a: u32) -> R {
    (-(R::from_f64(x) * R::ln2())).exp().ldexp(-(a as i32))
}

/// Result of summing the telescoped inner series.
#[derive(Debug, Clone, Copy)]
pub struct InnerSeries<R: Real = f64> {
    /// `1 + ln(1 - 2^{-a-x}) - 2^{-a-x} + sum_{j=1}^{J} g^(j)(1 - 2^{-a-x})`.
    pub partial_sum: R,
    /// Geometric bound on the omitted tail `sum_{j>J}`.
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// Generic inner series with an explicit cap on the number of terms.
pub fn inner_series_with<R: Real>(
    x: f64,
    a: u32,
    tail_tol: f64,
    term_cap: usize,
) -> Result<InnerSeries<R>> {
    if a == 0 {
        return Err(Error::InvalidArgument("outer truncation a must be >= 1".into()));
    }
    if !(0.0..2.0).contains(&x) {
        return Err(Error::domain("inner_series", x, "[0, 2)"));
    }
    if !(tail_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tail tolerance must be positive, got {tail_tol}"
        )));
    }
    let eps = offset::<R>(x, a);
    let mut sum = CompensatedSum::<R>::new();
    sum.add(R::ONE);
    sum.add((-eps).ln1p());
    sum.add(-eps);

    let half = R::from_f64(0.5);
    let mut prev: Option<R> = None;
    for (j, term) in SeriesTerms::<R>::new(x, a).enumerate() {
        sum.add(term);
        let terms_used = j + 1;
        if term < half {
            if let Some(p) = prev.filter(|p| *p < half) {
                let observed = (term / p).to_f64();
                let ratio = observed.max(RATIO_FLOOR);
                let tail_bound = term.to_f64() * ratio / (1.0 - ratio);
                if tail_bound < tail_tol {
                    return Ok(InnerSeries {
                        partial_sum: sum.value(),
                        tail_bound,
                        terms_used,
                    });
                }
            }
        }
        if terms_used >= term_cap {
            return Err(Error::NonConvergence {
                terms: terms_used,
                last_term: term.to_f64().abs(),
            });
        }
        prev = Some(term);
    }
    unreachable!("series terms never run out")
}

/// Inner series in double precision with the default cap of `10^5` terms.
pub fn inner_series(x: f64, a: u32, tail_tol: f64) -> Result<InnerSeries<f64>> {
    inner_series_with::<f64>(x, a, tail_tol, LimitConfig::default().term_cap)
}

/// One evaluation of `c` with its truncation record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CEvaluation {
    pub x: f64,
    pub value: f64,
    /// Outer truncation `a` of the returned value.
    pub a_used: u32,
    /// Inner-series length at `a_used`.
    pub terms_used: usize,
    pub error_estimate: f64,
}

fn c_generic<R: Real>(x: f64, reduced: f64, tol: f64, cfg: &LimitConfig) -> Result<CEvaluation> {
    let quarter = tol / 4.0;
    let level = |a: u32| -> Result<(R, InnerSeries<R>)> {
        let s = inner_series_with::<R>(reduced, a, quarter, cfg.term_cap)?;
        Ok((s.partial_sum - R::from_f64(a as f64), s))
    };

    let (mut prev_val, mut prev_series) = level(cfg.a_min)?;
    let mut prev_increment = f64::INFINITY;
    let mut best = f64::INFINITY;
    for a in cfg.a_min + 1..=cfg.a_cap {
        let (val, series) = level(a)?;
        let increment = (val - prev_val).abs().to_f64();
        best = best.min(increment);
        if increment <= quarter && prev_increment <= quarter {
            let value = (val - R::from_f64(reduced)).to_f64();
            return Ok(CEvaluation {
                x,
                value,
                a_used: a,
                terms_used: series.terms_used,
                error_estimate: series.tail_bound + prev_series.tail_bound + increment,
            });
        }
        prev_increment = increment;
        prev_val = val;
        prev_series = series;
    }
    Err(Error::ToleranceUnachievable {
        requested: tol,
        achieved: 4.0 * best,
    })
}

fn check_config(tol: f64, cfg: &LimitConfig) -> Result<()> {
    if !(tol >= MIN_TOLERANCE) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol:e} below the floor {MIN_TOLERANCE:e}"
        )));
    }
    if cfg.a_min == 0 || cfg.a_min >= cfg.a_cap {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= a_min < a_cap, got {} and {}",
            cfg.a_min, cfg.a_cap
        )));
    }
    Ok(())
}

fn dispatch(x: f64, reduced: f64, tol: f64, cfg: &LimitConfig) -> Result<CEvaluation> {
    match cfg.precision {
        Precision::Double => c_generic::<f64>(x, reduced, tol, cfg),
        Precision::DoubleDouble => c_generic::<DoubleDouble>(x, reduced, tol, cfg),
    }
}

/// Evaluates `c(x)` to within roughly `tol`, reducing `x` modulo 1 first.
pub fn c_of_x_with(x: f64, tol: f64, cfg: &LimitConfig) -> Result<CEvaluation> {
    if !x.is_finite() {
        return Err(Error::domain("c_of_x", x, "finite reals"));
    }
    check_config(tol, cfg)?;
    dispatch(x, frac(x), tol, cfg)
}

/// Evaluates the defining limit at `x` in `[0, 2)` as given, without the
/// reduction modulo 1, so that `c(x)` and `c(x + 1)` come from different
/// series.
pub fn c_of_x_unreduced(x: f64, tol: f64, cfg: &LimitConfig) -> Result<CEvaluation> {
    if !(0.0..2.0).contains(&x) {
        return Err(Error::domain("c_of_x_unreduced", x, "[0, 2)"));
    }
    check_config(tol, cfg)?;
    dispatch(x, x, tol, cfg)
}

/// [`c_of_x_with`] under the default configuration (double-double backend).
pub fn c_of_x(x: f64, tol: f64) -> Result<CEvaluation> {
    c_of_x_with(x, tol, &LimitConfig::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CRow {
    pub x: f64,
    pub value: f64,
    pub value_minus_c0: f64,
    pub error_estimate: f64,
}

/// Uniform tabulation of `c` on `[0, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CTable {
    pub resolution: usize,
    pub x_max: f64,
    pub tol: f64,
    pub c0: f64,
    pub rows: Vec<CRow>,
}

impl CTable {
    pub fn min(&self) -> f64 {
        self.rows.iter().map(|r| r.value).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.rows.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Observed `max - min` over the grid.
    pub fn amplitude(&self) -> f64 {
        self.max() - self.min()
    }

    /// `x value value_minus_c0` lines, LF terminated, 17 significant digits.
    pub fn write_three_column<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(out, "{} {} {}", sig17(r.x), sig17(r.value), sig17(r.value_minus_c0))?;
        }
        Ok(())
    }

    /// `x value_minus_c0` lines, the plotting layout.
    pub fn write_two_column<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(out, "{} {}", sig17(r.x), sig17(r.value_minus_c0))?;
        }
        Ok(())
    }
}

/// Tabulates `c` on `resolution` equally spaced points from 0 to `x_max`.
///
/// Grid points are independent, so the parallel evaluation is bit-identical
/// to a sequential one.
pub fn c_table_with(x_max: f64, resolution: usize, tol: f64, cfg: &LimitConfig) -> Result<CTable> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "table resolution must be >= 2, got {resolution}"
        )));
    }
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::domain("c_table", x_max, "positive x_max"));
    }
    let c0 = c_of_x_with(0.0, tol, cfg)?.value;
    let step = x_max / (resolution - 1) as f64;
    let rows = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let x = if i + 1 == resolution { x_max } else { i as f64 * step };
            c_of_x_with(x, tol, cfg)
                .map(|e| CRow {
                    x,
                    value: e.value,
                    value_minus_c0: e.value - c0,
                    error_estimate: e.error_estimate,
                })
                .map_err(|err| Error::AtGridPoint {
                    x,
                    source: Box::new(err),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CTable {
        resolution,
        x_max,
        tol,
        c0,
        rows,
    })
}

pub fn c_table(x_max: f64, resolution: usize, tol: f64) -> Result<CTable> {
    c_table_with(x_max, resolution, tol, &LimitConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double() -> LimitConfig {
        LimitConfig {
            precision: Precision::Double,
            ..LimitConfig::default()
        }
    }

    #[test]
    fn first_terms_for_a_three() {
        let terms: Vec<f64> = SeriesTerms::<DoubleDouble>::new(0.0, 3)
            .take(12)
            .map(|t| t.to_f64())
            .collect();
        // 0.875 e^{-0.125}
        assert!((terms[0] - 0.772_184_789_761_521_0).abs() < 1e-15);
        for w in terms.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn tail_ratio_below_half_bounded() {
        let terms: Vec<f64> = SeriesTerms::<f64>::new(0.3, 25).take(80).collect();
        for w in terms.windows(2) {
            if w[0] < 0.5 && w[1] > 0.0 {
                assert!(w[1] / w[0] <= (-0.5f64).exp() + 1e-15);
            }
        }
    }

    #[test]
    fn inner_series_contract() {
        let s = inner_series(0.0, 3, 1e-12).unwrap();
        assert!(s.tail_bound < 1e-12);
        assert!(s.partial_sum.is_finite());
        assert!(inner_series(0.0, 0, 1e-12).is_err());
        assert!(inner_series(2.5, 3, 1e-12).is_err());
        assert!(inner_series(0.0, 3, 0.0).is_err());
    }

    #[test]
    fn inner_series_reports_non_convergence() {
        let err = inner_series_with::<f64>(0.0, 30, 1e-12, 10).unwrap_err();
        match err {
            Error::NonConvergence { terms, last_term } => {
                assert_eq!(terms, 10);
                assert!(last_term > 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn c_at_zero_near_published_value() {
        let c = c_of_x(0.0, 1e-10).unwrap();
        assert!((c.value - 0.105).abs() < 1e-3);
        assert!(c.error_estimate >= 0.0 && c.error_estimate.is_finite());
    }

    #[test]
    fn backends_agree() {
        for &x in &[0.0, 0.37, 0.81] {
            let d = c_of_x_with(x, 1e-12, &double()).unwrap().value;
            let dd = c_of_x(x, 1e-12).unwrap().value;
            assert!((d - dd).abs() < 1e-12, "x = {x}: {d} vs {dd}");
        }
    }

    #[test]
    fn periodic_reduction() {
        let a = c_of_x(0.3, 1e-12).unwrap();
        let b = c_of_x(1.3, 1e-12).unwrap();
        let c = c_of_x(-0.7, 1e-12).unwrap();
        assert!((a.value - b.value).abs() <= 2.0 * a.error_estimate.max(1e-16) + 1e-15);
        assert!((a.value - c.value).abs() <= 2.0 * a.error_estimate.max(1e-16) + 1e-15);
    }

    #[test]
    fn unreduced_series_is_periodic() {
        let cfg = LimitConfig::default();
        for &x in &[0.0, 0.3, 0.71] {
            let lo = c_of_x_unreduced(x, 1e-12, &cfg).unwrap();
            let hi = c_of_x_unreduced(x + 1.0, 1e-12, &cfg).unwrap();
            assert!((lo.value - hi.value).abs() <= 2.0 * (lo.error_estimate + hi.error_estimate));
        }
        assert!(c_of_x_unreduced(2.0, 1e-12, &cfg).is_err());
        assert!(c_of_x_unreduced(-0.1, 1e-12, &cfg).is_err());
    }

    #[test]
    fn tolerance_floor_and_cap() {
        assert!(matches!(c_of_x(0.0, 1e-14), Err(Error::InvalidArgument(_))));
        let tight = LimitConfig {
            a_cap: 22,
            ..LimitConfig::default()
        };
        assert!(matches!(
            c_of_x_with(0.0, 1e-13, &tight),
            Err(Error::ToleranceUnachievable { .. })
        ));
        assert!(c_of_x(f64::NAN, 1e-10).is_err());
    }

    #[test]
    fn table_endpoints_and_layout() {
        let t = c_table(1.0, 2, 1e-12).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0].x, 0.0);
        assert_eq!(t.rows[1].x, 1.0);
        assert!((t.rows[0].value - t.rows[1].value).abs() <= 2e-12);
        assert!(c_table(1.0, 1, 1e-12).is_err());

        let mut three = Vec::new();
        t.write_three_column(&mut three).unwrap();
        let text = String::from_utf8(three).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert_eq!(text.lines().next().unwrap().split(' ').count(), 3);

        let mut two = Vec::new();
        t.write_two_column(&mut two).unwrap();
        assert_eq!(String::from_utf8(two).unwrap().lines().next().unwrap().split(' ').count(), 2);
    }

    #[test]
    fn table_covers_two_periods() {
        let t = c_table(2.0, 41, 1e-12).unwrap();
        for i in 0..20 {
            let d = (t.rows[i].value - t.rows[i + 20].value).abs();
            assert!(d <= 2.0 * (t.rows[i].error_estimate + t.rows[i + 20].error_estimate) + 1e-15);
        }
        assert!(t.amplitude() < 1e-7);
    }
}
