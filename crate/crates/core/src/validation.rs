//! Comparison of simulated runtimes with the predicted laws: sup-distances
//! between integer laws, moment and bracket checks, exact small-`n` laws,
//! permutation thresholds and the search for `n` with prescribed fractional
//! parts of `log2 n` and `ln n`.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gumbel::{dgum_moment, predicted_runtime_dist, DiscreteGumbelDist, ShiftedCeilGumbelDist};
use crate::numeric::{frac, log_floors, log_fractions, CompensatedSum};
use crate::simulator::{EmpiricalDistribution, SamplerKind};

/// Value of the `format` field in comparison reports.
pub const REPORT_FORMAT: &str = "rumour-comparison/1";

/// Lower and upper ends of the range of `h`.
pub const H_BRACKET: (f64, f64) = (1.18242, 1.18263);

/// Range of the limiting variance.
pub const VAR_BRACKET: (f64, f64) = (1.7277, 1.7289);

/// Margin added on both sides of the union of supports in distance scans.
pub const SCAN_MARGIN: i64 = 10;

/// A law on the integers described by its survival function.
pub trait IntegerLaw {
    /// `P[X >= k]`.
    fn survival(&self, k: i64) -> f64;

    /// Integers outside of which the law carries negligible mass.
    fn support_hint(&self) -> (i64, i64);
}

impl IntegerLaw for EmpiricalDistribution {
    fn survival(&self, k: i64) -> f64 {
        EmpiricalDistribution::survival(self, k)
    }

    fn support_hint(&self) -> (i64, i64) {
        (
            self.min().unwrap_or(0) as i64,
            self.max().unwrap_or(0) as i64,
        )
    }
}

impl IntegerLaw for ShiftedCeilGumbelDist {
    fn survival(&self, k: i64) -> f64 {
        ShiftedCeilGumbelDist::survival(self, k)
    }

    fn support_hint(&self) -> (i64, i64) {
        ShiftedCeilGumbelDist::support_hint(self)
    }
}

impl IntegerLaw for DiscreteGumbelDist {
    fn survival(&self, k: i64) -> f64 {
        DiscreteGumbelDist::survival(self, k)
    }

    fn support_hint(&self) -> (i64, i64) {
        self.window(1e-17)
    }
}

/// Point mass at `at`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointMass {
    pub at: i64,
}

impl IntegerLaw for PointMass {
    fn survival(&self, k: i64) -> f64 {
        if k <= self.at {
            1.0
        } else {
            0.0
        }
    }

    fn support_hint(&self) -> (i64, i64) {
        (self.at, self.at)
    }
}

/// Finite pmf `pmf[j] = P[X = offset + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedLaw {
    pub offset: i64,
    pub pmf: Vec<f64>,
}

impl TabulatedLaw {
    pub fn pmf_at(&self, k: i64) -> f64 {
        usize::try_from(k - self.offset)
            .ok()
            .and_then(|j| self.pmf.get(j).copied())
            .unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(j, p)| (self.offset + j as i64) as f64 * p)
            .collect::<CompensatedSum>()
            .value()
    }
}

impl IntegerLaw for TabulatedLaw {
    fn survival(&self, k: i64) -> f64 {
        let start = (k - self.offset).max(0) as usize;
        self.pmf
            .iter()
            .skip(start)
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }

    fn support_hint(&self) -> (i64, i64) {
        (self.offset, self.offset + self.pmf.len() as i64 - 1)
    }
}

/// `max_k |P[A >= k] - P[B >= k]|` over the union of both support hints
/// widened by [`SCAN_MARGIN`].
pub fn sup_cdf_distance<A: IntegerLaw + ?Sized, B: IntegerLaw + ?Sized>(a: &A, b: &B) -> f64 {
    let (alo, ahi) = a.support_hint();
    let (blo, bhi) = b.support_hint();
    let lo = alo.min(blo) - SCAN_MARGIN;
    let hi = ahi.max(bhi) + SCAN_MARGIN;
    (lo..=hi)
        .map(|k| (a.survival(k) - b.survival(k)).abs())
        .fold(0.0, f64::max)
        .min(1.0)
}

/// Kolmogorov distance between a sample and a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let m = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `|a - b|` measured on the circle `R / Z`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// All `n <= n_max` whose `({log2 n}, {ln n})` lies within `tol` of `(x, y)`
/// in circle distance, ascending.
pub fn find_subsequence_n(x: f64, y: f64, tol: f64, n_max: u64) -> Result<Vec<u64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidArgument("target fractional parts must be finite".into()));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let (x, y) = (frac(x), frac(y));
    // cheap f64 screen with slack, then the double-double recheck
    let slack = 1e-12;
    let hits = (1..=n_max)
        .into_par_iter()
        .filter(|&n| {
            let nf = n as f64;
            circle_distance(frac(nf.log2()), x) < tol + slack
                && circle_distance(frac(nf.ln()), y) < tol + slack
        })
        .filter(|&n| {
            let (fx, fy) = log_fractions(n);
            circle_distance(fx, x) < tol && circle_distance(fy, y) < tol
        })
        .collect();
    Ok(hits)
}

/// `Σ_{i=a}^{b} 1/i`, summed from the small terms up.
pub fn harmonic_partial(a: u64, b: u64) -> Result<f64> {
    if a == 0 || a > b {
        return Err(Error::InvalidArgument(format!(
            "harmonic_partial needs 1 <= a <= b, got a = {a}, b = {b}"
        )));
    }
    Ok((a..=b).rev().map(|i| 1.0 / i as f64).collect::<CompensatedSum>().value())
}

/// Exact one-round transition law of the informed count for small `n`,
/// by enumerating every choice of push targets. Row `i` holds
/// `P[i -> j]` for `j = 0..=n`.
pub fn exact_transition_matrix(n: u64) -> Result<Vec<Vec<f64>>> {
    if !(2..=7).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "exact enumeration supports 2 <= n <= 7, got {n}"
        )));
    }
    let n = n as usize;
    let mut rows = vec![vec![0.0; n + 1]; n + 1];
    rows[n][n] = 1.0;
    for i in 1..n {
        // nodes 0..i are informed; node u picks from the other n - 1 nodes
        let choices = (n - 1).pow(i as u32);
        let mut counts = vec![0u64; n + 1];
        for code in 0..choices {
            let mut c = code;
            let mut hit = vec![false; n];
            for u in 0..i {
                let mut v = c % (n - 1);
                c /= n - 1;
                if v >= u {
                    v += 1;
                }
                hit[v] = true;
            }
            let fresh = hit[i..].iter().filter(|&&h| h).count();
            counts[i + fresh] += 1;
        }
        for (j, &cnt) in counts.iter().enumerate() {
            rows[i][j] = cnt as f64 / choices as f64;
        }
    }
    Ok(rows)
}

/// Exact runtime law for `2 <= n <= 7`, truncated once less than `tail`
/// of the mass remains.
pub fn exact_runtime_law(n: u64, tail: f64) -> Result<TabulatedLaw> {
    if !(tail > 0.0) {
        return Err(Error::InvalidArgument("tail must be positive".into()));
    }
    let m = exact_transition_matrix(n)?;
    let n = n as usize;
    let mut state = vec![0.0; n + 1];
    state[1] = 1.0;
    let mut pmf = Vec::new();
    let mut done = 0.0;
    while 1.0 - done > tail {
        let mut next = vec![0.0; n + 1];
        for (i, &p) in state.iter().enumerate().take(n) {
            if p > 0.0 {
                for j in i..=n {
                    next[j] += p * m[i][j];
                }
            }
        }
        // absorbed mass is moved out of the state vector each round
        pmf.push(next[n]);
        done += next[n];
        next[n] = 0.0;
        state = next;
        if pmf.len() > 100_000 {
            return Err(Error::NonConvergence {
                terms: pmf.len(),
                last_term: 1.0 - done,
            });
        }
    }
    Ok(TabulatedLaw { offset: 1, pmf })
}

/// `1 - α` quantile of the two-sample sup-distance under random relabelling
/// of the pooled runtimes, from `permutations` hypergeometric splits.
pub fn permutation_threshold(
    a: &EmpiricalDistribution,
    b: &EmpiricalDistribution,
    alpha: f64,
    permutations: usize,
    seed: u64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || permutations == 0 || a.trials == 0 || b.trials == 0 {
        return Err(Error::InvalidArgument(
            "permutation threshold needs alpha in (0, 1), permutations >= 1 and nonempty samples".into(),
        ));
    }
    let mut pooled = a.clone();
    pooled.merge(b);
    let bins: Vec<(u32, u64)> = pooled.counts.iter().map(|(&k, &c)| (k, c)).collect();
    let mut stats: Vec<f64> = (0..permutations)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let mut left_total = pooled.trials;
            let mut need = a.trials;
            let mut sa = EmpiricalDistribution::new(a.n);
            let mut sb = EmpiricalDistribution::new(b.n);
            for &(k, c) in &bins {
                let take = if need == 0 {
                    0
                } else if need == left_total {
                    c
                } else {
                    Hypergeometric::new(left_total, c, need)
                        .expect("valid hypergeometric parameters")
                        .sample(&mut rng)
                };
                if take > 0 {
                    sa.counts.insert(k, take);
                }
                if c > take {
                    sb.counts.insert(k, c - take);
                }
                left_total -= c;
                need -= take;
            }
            sa.trials = a.trials;
            sb.trials = b.trials;
            sup_cdf_distance(&sa, &sb)
        })
        .collect();
    stats.sort_by(|x, y| x.total_cmp(y));
    let idx = (((1.0 - alpha) * permutations as f64).ceil() as usize).clamp(1, permutations) - 1;
    Ok(stats[idx])
}

/// Closed interval check with a recorded margin (distance to the nearer end,
/// negative when outside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketCheck {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
    pub margin: f64,
}

impl BracketCheck {
    pub fn new(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        let margin = (value - lo).min(hi - value);
        Self {
            name: name.into(),
            value,
            lo,
            hi,
            pass: margin >= 0.0,
            margin,
        }
    }
}

/// `⌊log2 n⌋ + ln n - 1.116 <= E[X_n] <= ⌈log2 n⌉ + ln n + 2.765`.
pub fn coarse_mean_bracket(n: u64) -> (f64, f64) {
    let nf = n as f64;
    let floor_log2 = n.ilog2() as f64;
    let ceil_log2 = if n.is_power_of_two() { floor_log2 } else { floor_log2 + 1.0 };
    (floor_log2 + nf.ln() - 1.116, ceil_log2 + nf.ln() + 2.765)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub k: u32,
    /// Empirical `E[(X_n - ⌊log2 n⌋ - ⌊ln n⌋)^k]`.
    pub empirical: f64,
    /// `E[dGum(-x - y - c)^k]`.
    pub predicted: f64,
    pub delta: f64,
}

/// Empirical `k`th moment of the centred runtime minus the limiting one.
pub fn moment_check(emp: &EmpiricalDistribution, x: f64, y: f64, c_val: f64, k: u32) -> Result<MomentCheck> {
    if emp.trials == 0 || emp.n < 2 {
        return Err(Error::InvalidArgument("moment check needs a nonempty ensemble with n >= 2".into()));
    }
    let (fl2, fln) = log_floors(emp.n);
    let empirical = emp.raw_moment((fl2 + fln) as f64, k);
    let predicted = dgum_moment(-x - y - c_val, k, 1e-12)?;
    Ok(MomentCheck {
        k,
        empirical,
        predicted,
        delta: empirical - predicted,
    })
}

/// `E[X_n] - log2 n - ln n`, the empirical counterpart of `h(x, y)`.
pub fn centred_mean(emp: &EmpiricalDistribution) -> f64 {
    let nf = emp.n as f64;
    emp.mean() - nf.log2() - nf.ln()
}

/// Bracket checks on the mean and the variance, each widened by `sigmas`
/// standard errors, plus the coarse bracket on the mean.
pub fn bracket_checks(emp: &EmpiricalDistribution, sigmas: f64) -> Vec<BracketCheck> {
    let se_mean = emp.mean_standard_error();
    let se_var = emp.variance_standard_error();
    let (clo, chi) = coarse_mean_bracket(emp.n);
    vec![
        BracketCheck::new("mean-coarse", emp.mean(), clo, chi),
        BracketCheck::new(
            "mean-centred",
            centred_mean(emp),
            H_BRACKET.0 - sigmas * se_mean,
            H_BRACKET.1 + sigmas * se_mean,
        ),
        BracketCheck::new(
            "variance",
            emp.variance(),
            VAR_BRACKET.0 - sigmas * se_var,
            VAR_BRACKET.1 + sigmas * se_var,
        ),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Budget for the sup-distance to the predicted law.
    pub sup_distance: f64,
    /// Standard errors allowed outside the mean and variance brackets.
    pub sigmas: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            sup_distance: 0.02,
            sigmas: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub format: String,
    pub n: u64,
    pub trials: u64,
    pub sampler: SamplerKind,
    pub master_seed: u64,
    pub frac_log2_n: f64,
    pub frac_ln_n: f64,
    pub c_value: f64,
    pub shift: f64,
    pub sup_cdf_distance: f64,
    pub moment_deltas: Vec<MomentCheck>,
    pub bracket_checks: Vec<BracketCheck>,
    pub thresholds: Thresholds,
    /// The distance budget is an engineering choice; no convergence rate is
    /// known for the limit law.
    pub budget_note: String,
    pub pass: bool,
    /// Settings of the run that produced the report, filled in by callers.
    #[serde(default)]
    pub config: BTreeMap<String, String>,
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Compares an ensemble with the predicted law for its `n`, given
/// `c_val = c({log2 n})`.
pub fn compare(
    emp: &EmpiricalDistribution,
    sampler: SamplerKind,
    master_seed: u64,
    c_val: f64,
    thresholds: Thresholds,
) -> Result<ComparisonReport> {
    let pred = predicted_runtime_dist(emp.n, c_val)?;
    let (x, y) = log_fractions(emp.n);
    let distance = sup_cdf_distance(emp, &pred);
    let moment_deltas = (1..=2)
        .map(|k| moment_check(emp, x, y, c_val, k))
        .collect::<Result<Vec<_>>>()?;
    let bracket_checks = bracket_checks(emp, thresholds.sigmas);
    let pass = distance <= thresholds.sup_distance && bracket_checks.iter().all(|b| b.pass);
    Ok(ComparisonReport {
        format: REPORT_FORMAT.to_string(),
        n: emp.n,
        trials: emp.trials,
        sampler,
        master_seed,
        frac_log2_n: x,
        frac_ln_n: y,
        c_value: c_val,
        shift: pred.shift,
        sup_cdf_distance: distance,
        moment_deltas,
        bracket_checks,
        thresholds,
        budget_note: "sup-distance budget and sigma widths are calibrated engineering budgets".into(),
        pass,
        config: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gumbel::EULER_GAMMA;
    use proptest::prelude::*;

    #[test]
    fn point_masses_are_at_distance_one() {
        assert_eq!(sup_cdf_distance(&PointMass { at: 0 }, &PointMass { at: 1 }), 1.0);
        assert_eq!(sup_cdf_distance(&PointMass { at: 3 }, &PointMass { at: 3 }), 0.0);
    }

    #[test]
    fn identical_laws_are_at_distance_zero() {
        let d = ShiftedCeilGumbelDist::new(30.4);
        assert_eq!(sup_cdf_distance(&d, &d), 0.0);
        assert!(sup_cdf_distance(&d, &d.centred(0)) < 1e-15);
    }

    #[test]
    fn n3_law_is_geometric() {
        let law = exact_runtime_law(3, 1e-16).unwrap();
        assert_eq!(law.pmf_at(1), 0.0);
        for k in 2..20 {
            let want = 0.75 * 0.25f64.powi(k as i32 - 2);
            assert!((law.pmf_at(k) - want).abs() < 1e-16, "k = {k}");
        }
    }

    #[test]
    fn transition_rows_are_stochastic() {
        for n in 2..=6 {
            for row in exact_transition_matrix(n).unwrap().iter().skip(1) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
        assert!(exact_transition_matrix(8).is_err());
        // from 2 informed of 4 both free nodes are hit in 2 of 9 target pairs
        let m = exact_transition_matrix(4).unwrap();
        assert!((m[2][4] - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic_partial(1, 1).unwrap(), 1.0);
        assert!((harmonic_partial(2, 4).unwrap() - 13.0 / 12.0).abs() < 1e-15);
        let h = harmonic_partial(1, 1_000_000).unwrap();
        assert!((h - (1e6f64.ln() + EULER_GAMMA)).abs() < 1e-6);
        assert!(harmonic_partial(3, 2).is_err());
        assert!(harmonic_partial(0, 2).is_err());
    }

    #[test]
    fn subsequence_examples() {
        assert_eq!(find_subsequence_n(0.0, 0.0, 1e-3, 10).unwrap(), vec![1]);
        let (x5, y5) = log_fractions(5);
        assert!(find_subsequence_n(x5, y5, 1e-9, 10).unwrap().contains(&5));
        let hits = find_subsequence_n(0.5, 0.5, 0.05, 1_000_000).unwrap();
        assert!(!hits.is_empty());
        for &n in &hits {
            let (x, y) = log_fractions(n);
            assert!(circle_distance(x, 0.5) < 0.05 && circle_distance(y, 0.5) < 0.05);
        }
        assert!(find_subsequence_n(0.5, 0.5, 0.0, 10).is_err());
    }

    #[test]
    fn subsequence_wraps_around() {
        // powers of two have {log2 n} = 0, within 5e-4 of 0.9995 on the circle
        let hits = find_subsequence_n(0.9995, 0.0, 1e-3, 1 << 16).unwrap();
        assert!(hits.contains(&1));
        // ln 2048 = 7.6246189861...
        let hits = find_subsequence_n(0.9995, 0.6246, 1e-3, 1 << 12).unwrap();
        assert!(hits.contains(&(1 << 11)));
    }

    #[test]
    fn coarse_bracket_at_power_of_two() {
        let (lo, hi) = coarse_mean_bracket(1 << 20);
        let ln = (1u64 << 20) as f64;
        assert!((lo - (20.0 + ln.ln() - 1.116)).abs() < 1e-12);
        assert!((hi - (20.0 + ln.ln() + 2.765)).abs() < 1e-12);
    }

    #[test]
    fn bracket_check_margin() {
        let b = BracketCheck::new("t", 1.5, 1.0, 3.0);
        assert!(b.pass && b.margin == 0.5);
        assert!(!BracketCheck::new("t", 3.5, 1.0, 3.0).pass);
    }

    #[test]
    fn ks_distance_of_exact_quantiles() {
        let m = 1000;
        let xs: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / m as f64).abs() < 1e-12);
    }

    #[test]
    fn permutation_threshold_is_small_for_large_samples() {
        let a = EmpiricalDistribution::from_runtimes(10, (0..2000u32).map(|i| 5 + i % 4));
        let b = EmpiricalDistribution::from_runtimes(10, (0..3000u32).map(|i| 5 + i % 3));
        let t = permutation_threshold(&a, &b, 0.001, 200, 1).unwrap();
        assert!(t > 0.0 && t < 0.1, "{t}");
        assert_eq!(t, permutation_threshold(&a, &b, 0.001, 200, 1).unwrap());
    }

    #[test]
    fn report_serializes_with_version() {
        let emp = EmpiricalDistribution::from_runtimes(1 << 10, (0..500u32).map(|i| 17 + i % 5));
        let rep = compare(&emp, SamplerKind::Occupancy, 1, 0.105, Thresholds::default()).unwrap();
        let text = rep.to_json();
        assert!(text.contains("\"format\": \"rumour-comparison/1\""));
        let back: ComparisonReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
        assert!(rep.sup_cdf_distance <= 1.0);
    }

    proptest! {
        #[test]
        fn distance_symmetric_and_bounded(s1 in 0.0f64..50.0, s2 in 0.0f64..50.0) {
            let a = ShiftedCeilGumbelDist::new(s1);
            let b = ShiftedCeilGumbelDist::new(s2);
            let d = sup_cdf_distance(&a, &b);
            prop_assert_eq!(d, sup_cdf_distance(&b, &a));
            prop_assert!((0.0..=1.0).contains(&d));
            if s1.floor() != s2.floor() || (s1 - s2).abs() > 1e-9 {
                prop_assert!(d > 0.0);
            }
        }

        #[test]
        fn subsequence_results_self_verify(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let tol = 0.03;
            for n in find_subsequence_n(x, y, tol, 20_000).unwrap() {
                let (fx, fy) = log_fractions(n);
                prop_assert!(circle_distance(fx, x) < tol && circle_distance(fy, y) < tol);
            }
        }
    }
}
