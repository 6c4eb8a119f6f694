//! Gumbel laws: the continuous `Gum(α)`, its integer version `dGum(α)`, the
//! shifted-ceiling law predicted for the runtime, their moments and the
//! expectation/variance surfaces over the torus `[0, 1)²`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limit_c::{c_of_x_with, LimitConfig};
use crate::numeric::{format::sig17, CompensatedSum};

/// Euler–Mascheroni constant, 0.57721566490153286060651209008240243104216.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431_042_16;

/// Largest supported moment order.
pub const MAX_MOMENT: u32 = 8;

/// `exp(-exp(t))`, guarded so that huge `|t|` saturates instead of producing
/// NaN from `inf * 0` style intermediates.
#[inline]
fn exp_neg_exp(t: f64) -> f64 {
    if t > 700.0 {
        0.0
    } else if t < -745.0 {
        1.0
    } else {
        (-t.exp()).exp()
    }
}

/// `1 - exp(-exp(t))` without cancellation.
#[inline]
fn one_minus_exp_neg_exp(t: f64) -> f64 {
    if t > 700.0 {
        1.0
    } else if t < -745.0 {
        0.0
    } else {
        -(-t.exp()).exp_m1()
    }
}

/// `Gum(α)`: `P[G <= x] = exp(-exp(-x - α))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuousGumbel {
    pub alpha: f64,
}

impl ContinuousGumbel {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        exp_neg_exp(-x - self.alpha)
    }

    /// `ln P[G <= x] = -exp(-x - α)`, finite where the CDF underflows.
    pub fn log_cdf(&self, x: f64) -> f64 {
        -(-x - self.alpha).exp()
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain("gumbel quantile", u, "(0, 1)"));
        }
        Ok(-self.alpha - (-u.ln()).ln())
    }

    /// Inverse of [`log_cdf`](Self::log_cdf).
    pub fn quantile_from_log_cdf(&self, log_u: f64) -> Result<f64> {
        if !(log_u < 0.0) {
            return Err(Error::domain("gumbel log quantile", log_u, "(-inf, 0)"));
        }
        Ok(-self.alpha - (-log_u).ln())
    }

    /// `E[G] = γ - α`.
    pub fn mean(&self) -> f64 {
        EULER_GAMMA - self.alpha
    }
}

/// Inverse-transform draw `-α - ln(-ln u)` for `u` in `(0, 1)`.
pub fn gumbel_sample(dist: &ContinuousGumbel, u: f64) -> Result<f64> {
    dist.quantile(u)
}

/// `dGum(α)` on the integers: `P[G <= k] = exp(-exp(-k - α))`.
///
/// It is the law of `⌈G⌉` for `G ~ Gum(α)`, which gives an exact sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteGumbelDist {
    pub alpha: f64,
}

impl DiscreteGumbelDist {
    pub fn new(alpha: f64) -> Self {
        Self { alpha }
    }

    pub fn cdf(&self, k: i64) -> f64 {
        exp_neg_exp(-(k as f64) - self.alpha)
    }

    /// `P[G >= k]`.
    pub fn survival(&self, k: i64) -> f64 {
        one_minus_exp_neg_exp(-((k - 1) as f64) - self.alpha)
    }

    /// `exp(-A) - exp(-eA)` with `A = exp(-ℓ - α)`, written as
    /// `exp(-A) (1 - exp(-(e - 1) A))` so that the right tail keeps its
    /// relative accuracy.
    pub fn pmf(&self, l: i64) -> f64 {
        let t = -(l as f64) - self.alpha;
        if t > 700.0 {
            return 0.0;
        }
        let big_a = t.exp();
        (-big_a).exp() * -(-(std::f64::consts::E - 1.0) * big_a).exp_m1()
    }

    /// Inverse-transform draw `⌈-α - ln(-ln u)⌉`.
    pub fn sample_from_uniform(&self, u: f64) -> Result<i64> {
        Ok(ContinuousGumbel::new(self.alpha).quantile(u)?.ceil() as i64)
    }

    /// Integer window `[lo, hi]` outside of which the mass is below `tol`.
    pub fn window(&self, tol: f64) -> (i64, i64) {
        let centre = (-self.alpha).round() as i64;
        let mut lo = centre;
        while self.cdf(lo - 1) > tol {
            lo -= 1;
        }
        let mut hi = centre;
        while self.survival(hi + 1) > tol {
            hi += 1;
        }
        (lo, hi)
    }
}

/// `E[dGum(α)^k]` by a two-sided truncated sum.
///
/// The summation walks outward from the mode and stops on each side once an
/// analytic bound on the remaining weighted tail drops below `tol / 2`:
/// `pmf(ℓ) <= e^{1-ℓ-α}` on the right and `pmf(ℓ) <= exp(-e^{-ℓ-α})` on the
/// left, with consecutive-term ratio bounds turning each into a geometric
/// series.
pub fn dgum_moment(alpha: f64, k: u32, tol: f64) -> Result<f64> {
    if k > MAX_MOMENT {
        return Err(Error::InvalidArgument(format!(
            "moment order {k} above supported maximum {MAX_MOMENT}"
        )));
    }
    if !(tol > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need finite alpha and positive tolerance, got alpha = {alpha}, tol = {tol}"
        )));
    }
    let dist = DiscreteGumbelDist::new(alpha);
    let weight = |l: i64| (l as f64).powi(k as i32);
    let half_tol = tol / 2.0;
    let centre = (-alpha).round() as i64;

    let mut acc = CompensatedSum::<f64>::new();
    let mut largest = 0.0f64;
    let mut add = |v: f64, acc: &mut CompensatedSum<f64>| {
        largest = largest.max(v.abs());
        acc.add(v);
    };

    // right side: l = centre, centre+1, ...
    let mut right_tail;
    let mut l = centre;
    loop {
        add(weight(l) * dist.pmf(l), &mut acc);
        let next = l + 1;
        // bound sum_{m >= next} |m|^k e^{1-m-α} by a geometric series
        right_tail = f64::INFINITY;
        if next > 0 {
            let ratio = ((next + 1) as f64 / next as f64).powi(k as i32) / std::f64::consts::E;
            if ratio < 1.0 {
                let first = weight(next).abs() * (1.0 - next as f64 - alpha).exp();
                right_tail = first / (1.0 - ratio);
            }
        }
        if right_tail < half_tol {
            break;
        }
        l = next;
        if l - centre > 100_000 {
            return Err(Error::ToleranceUnachievable {
                requested: tol,
                achieved: right_tail,
            });
        }
    }

    // left side: l = centre-1, centre-2, ...
    let mut left_tail;
    let mut l = centre - 1;
    loop {
        add(weight(l) * dist.pmf(l), &mut acc);
        let next = l - 1;
        // cdf(m-1)/cdf(m) = exp(-(e-1) e^{-m-α}) shrinks as m decreases
        let a_next = (-(next as f64) - alpha).exp();
        let mass_ratio = (-(std::f64::consts::E - 1.0) * a_next).exp();
        let abs_next = (next.unsigned_abs() as f64).max(1.0);
        let growth = if next < 0 {
            ((abs_next + 1.0) / abs_next).powi(k as i32)
        } else {
            1.0
        };
        let ratio = mass_ratio * growth;
        left_tail = f64::INFINITY;
        if ratio < 1.0 {
            let first = abs_next.powi(k as i32) * dist.cdf(next);
            left_tail = first / (1.0 - ratio);
        }
        if left_tail < half_tol {
            break;
        }
        l = next;
        if centre - l > 100_000 {
            return Err(Error::ToleranceUnachievable {
                requested: tol,
                achieved: left_tail,
            });
        }
    }

    let rounding = 4.0 * f64::EPSILON * largest;
    if rounding > tol {
        return Err(Error::ToleranceUnachievable {
            requested: tol,
            achieved: rounding + left_tail + right_tail,
        });
    }
    Ok(acc.value())
}

/// `Var[dGum(α)]`, computed from moments of the integer-shifted law
/// `dGum(α + m) = dGum(α) - m` with `m = round(-α)` so that the two raw
/// moments stay O(1).
pub fn dgum_variance(alpha: f64, tol: f64) -> Result<f64> {
    let shift = (-alpha).round();
    let centred = alpha + shift;
    let m1 = dgum_moment(centred, 1, tol / 4.0)?;
    let m2 = dgum_moment(centred, 2, tol / 4.0)?;
    Ok(m2 - m1 * m1)
}

/// `h(x, y) = E[dGum(-x - y - c(x))] - x - y`.
pub fn h_of(x: f64, y: f64, c_val: f64, tol: f64) -> Result<f64> {
    Ok(dgum_moment(-x - y - c_val, 1, tol / 4.0)? - x - y)
}

/// Second minus squared first moment of `dGum(-x - y - c(x))`.
pub fn var_of(x: f64, y: f64, c_val: f64, tol: f64) -> Result<f64> {
    dgum_variance(-x - y - c_val, tol)
}

/// Law of `⌈G + s⌉` for `G ~ Gum(γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftedCeilGumbelDist {
    pub shift: f64,
}

impl ShiftedCeilGumbelDist {
    pub fn new(shift: f64) -> Self {
        Self { shift }
    }

    /// `P[⌈G + s⌉ <= k] = P[G <= k - s]`.
    pub fn cdf(&self, k: i64) -> f64 {
        exp_neg_exp(-((k as f64) - self.shift) - EULER_GAMMA)
    }

    /// `P[⌈G + s⌉ >= k] = 1 - exp(-exp(-(k - 1 - s) - γ))`.
    pub fn survival(&self, k: i64) -> f64 {
        one_minus_exp_neg_exp(-((k - 1) as f64 - self.shift) - EULER_GAMMA)
    }

    pub fn pmf(&self, k: i64) -> f64 {
        self.cdf(k) - self.cdf(k - 1)
    }

    /// The law of `⌈G + s⌉ - offset`, which is `dGum(offset + γ - s)`.
    pub fn centred(&self, offset: i64) -> DiscreteGumbelDist {
        DiscreteGumbelDist::new(offset as f64 + EULER_GAMMA - self.shift)
    }

    /// Integers carrying all but `~1e-16` of the mass.
    pub fn support_hint(&self) -> (i64, i64) {
        let s = self.shift.floor() as i64;
        (s - 5, s + 40)
    }
}

/// Predicted runtime law for `n` nodes given `c_val = c({log2 n})`:
/// shift `log2 n + ln n + γ + c_val`.
pub fn predicted_runtime_dist(n: u64, c_val: f64) -> Result<ShiftedCeilGumbelDist> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "predicted law needs n >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    Ok(ShiftedCeilGumbelDist::new(nf.log2() + nf.ln() + EULER_GAMMA + c_val))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    /// `h(x, y)`.
    H,
    /// Limiting variance.
    Var,
}

impl std::fmt::Display for SurfaceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SurfaceKind::H => "h",
            SurfaceKind::Var => "var",
        })
    }
}

/// Values of `h` or the variance on a `resolution × resolution` grid of cell
/// centres of `[0, 1)²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceMesh {
    pub kind: SurfaceKind,
    pub resolution: usize,
    pub tol: f64,
    /// Row-major: `points[i * resolution + j]` is `(x_i, y_j, z)`.
    pub points: Vec<(f64, f64, f64)>,
}

impl SurfaceMesh {
    pub fn min(&self) -> f64 {
        self.points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.points.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `x y z` lines grouped by `x`, a blank line between mesh rows.
    pub fn write_mesh<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, row) in self.points.chunks(self.resolution).enumerate() {
            if i > 0 {
                writeln!(out)?;
            }
            for &(x, y, z) in row {
                writeln!(out, "{} {} {}", sig17(x), sig17(y), sig17(z))?;
            }
        }
        Ok(())
    }
}

pub fn surface_table(
    kind: SurfaceKind,
    resolution: usize,
    tol: f64,
    cfg: &LimitConfig,
) -> Result<SurfaceMesh> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "surface resolution must be >= 2, got {resolution}"
        )));
    }
    let centre = |i: usize| (i as f64 + 0.5) / resolution as f64;
    let c_tol = (tol / 4.0).max(crate::limit_c::MIN_TOLERANCE);
    let c_values = (0..resolution)
        .into_par_iter()
        .map(|i| c_of_x_with(centre(i), c_tol, cfg).map(|e| e.value))
        .collect::<Result<Vec<_>>>()?;
    let points = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / resolution, idx % resolution);
            let (x, y) = (centre(i), centre(j));
            let z = match kind {
                SurfaceKind::H => h_of(x, y, c_values[i], tol)?,
                SurfaceKind::Var => var_of(x, y, c_values[i], tol)?,
            };
            Ok((x, y, z))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceMesh {
        kind,
        resolution,
        tol,
        points,
    })
}
