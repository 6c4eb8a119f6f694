//! Exact simulation of push on the complete graph `K_n`.
//!
//! Three samplers produce the same law for the informed-count process
//! `(|I_t|)_t` and hence for the runtime `X_n`:
//!
//! * [`SamplerKind::Direct`] pushes from every informed node to a uniform
//!   neighbour;
//! * [`SamplerKind::Batch`] draws batches of coupons from a pool of `n - 1`;
//! * [`SamplerKind::Occupancy`] draws the number of pushes that reach
//!   uninformed nodes from a binomial law and then places them one by one
//!   into the uninformed nodes, which needs no per-node state.
//!
//! Randomness for trial `i` of an ensemble comes from a ChaCha8 stream keyed
//! by the master seed with stream number `i`, so every result is a pure
//! function of `(master_seed, trial)`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::recursions::mean_field_step;

/// Default bound on `trials * n` for one ensemble.
pub const DEFAULT_WORK_CAP: u128 = 1 << 40;

/// Header line of the trajectory text dump.
pub const TRAJECTORY_FORMAT: &str = "rumour-trajectories v1";

/// Value of the `format` field in ensemble summaries.
pub const SUMMARY_FORMAT: &str = "rumour-ensemble/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Direct,
    Batch,
    #[default]
    Occupancy,
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplerKind::Direct => "direct",
            SamplerKind::Batch => "batch",
            SamplerKind::Occupancy => "occupancy",
        })
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SamplerKind::Direct),
            "batch" => Ok(SamplerKind::Batch),
            "occupancy" => Ok(SamplerKind::Occupancy),
            other => Err(Error::InvalidArgument(format!(
                "unknown sampler '{other}' (expected direct, batch or occupancy)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPath {
    pub master_seed: u64,
    pub trial: u64,
}

/// The random stream used by trial `trial` of an ensemble.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Outcome of one run: `X_n` and optionally `|I_t|` for `t = 0..=runtime`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub runtime: u32,
    pub trajectory: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub n: u64,
    pub runtime: u32,
    pub trajectory: Option<Vec<u64>>,
    pub sampler: SamplerKind,
    pub seed_path: SeedPath,
}

struct Recorder {
    runtime: u32,
    trajectory: Option<Vec<u64>>,
}

impl Recorder {
    fn new(keep: bool) -> Self {
        Self {
            runtime: 0,
            trajectory: keep.then(|| vec![1]),
        }
    }

    #[inline]
    fn round(&mut self, informed: u64) {
        self.runtime += 1;
        if let Some(t) = self.trajectory.as_mut() {
            t.push(informed);
        }
    }

    fn finish(self) -> Run {
        Run {
            runtime: self.runtime,
            trajectory: self.trajectory,
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if n > u32::MAX as u64 {
        return Err(Error::InvalidArgument(format!(
            "n = {n} exceeds the supported maximum {}",
            u32::MAX
        )));
    }
    Ok(())
}

/// Exact uniform draws from `[0, bound)` by multiply-and-reject on 32-bit
/// words, with the rejection threshold `2^32 mod bound` computed once.
#[derive(Debug, Clone, Copy)]
pub struct UniformBelow {
    bound: u32,
    threshold: u32,
}

impl UniformBelow {
    pub fn new(bound: u32) -> Self {
        assert!(bound > 0, "empty range");
        Self {
            bound,
            threshold: bound.wrapping_neg() % bound,
        }
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u32 {
        loop {
            let m = rng.next_u32() as u64 * self.bound as u64;
            if m as u32 >= self.threshold {
                return (m >> 32) as u32;
            }
        }
    }
}

/// Informed set kept as the prefix `perm[..k]` of a permutation of the
/// nodes, with `pos` its inverse.
struct InformedSet {
    perm: Vec<u32>,
    pos: Vec<u32>,
    k: usize,
}

impl InformedSet {
    fn new(n: u64, informed: u64) -> Self {
        let perm: Vec<u32> = (0..n as u32).collect();
        let pos = perm.clone();
        Self {
            perm,
            pos,
            k: informed as usize,
        }
    }

    #[inline]
    fn inform(&mut self, v: u32) {
        let pv = self.pos[v as usize] as usize;
        if pv >= self.k {
            let w = self.perm[self.k];
            self.perm.swap(pv, self.k);
            self.pos[w as usize] = pv as u32;
            self.pos[v as usize] = self.k as u32;
            self.k += 1;
        }
    }

    /// One synchronous push round.
    #[inline]
    fn push_round<R: Rng + ?Sized>(&mut self, n: u64, rng: &mut R) {
        let senders = self.k;
        let span = UniformBelow::new((n - 1) as u32);
        for idx in 0..senders {
            let u = self.perm[idx];
            let mut v = span.sample(rng);
            if v >= u {
                v += 1;
            }
            self.inform(v);
        }
    }
}

/// Round-by-round push: every informed node sends to a uniform node of
/// `V \ {u}`, drawn as a uniform index in `[0, n - 2]` shifted past `u`.
pub fn simulate_direct<R: Rng + ?Sized>(n: u64, rng: &mut R, keep_trajectory: bool) -> Result<Run> {
    check_n(n)?;
    let mut rec = Recorder::new(keep_trajectory);
    if n == 1 {
        return Ok(rec.finish());
    }
    let mut set = InformedSet::new(n, 1);
    while (set.k as u64) < n {
        set.push_round(n, rng);
        rec.round(set.k as u64);
    }
    Ok(rec.finish())
}

/// One push round from `informed` informed nodes out of `n`; returns the
/// informed count after the round.
pub fn one_round_direct<R: Rng + ?Sized>(n: u64, informed: u64, rng: &mut R) -> Result<u64> {
    check_n(n)?;
    if n < 2 || informed == 0 || informed > n {
        return Err(Error::InvalidArgument(format!(
            "one round needs n >= 2 and 1 <= informed <= n, got n = {n}, informed = {informed}"
        )));
    }
    let mut set = InformedSet::new(n, informed);
    set.push_round(n, rng);
    Ok(set.k as u64)
}

/// Coupon-collector batches: with `d` distinct nodes informed (the start
/// node included) the next round draws `d` coupons with replacement from the
/// `n - 1` coupons of the non-start nodes.
pub fn simulate_batch<R: Rng + ?Sized>(n: u64, rng: &mut R, keep_trajectory: bool) -> Result<Run> {
    check_n(n)?;
    if n < 2 {
        return Err(Error::InvalidArgument("batch sampler needs n >= 2".into()));
    }
    let mut rec = Recorder::new(keep_trajectory);
    let pool = UniformBelow::new((n - 1) as u32);
    let mut seen = vec![false; (n - 1) as usize];
    let mut distinct = 1u64;
    while distinct < n {
        let batch = distinct;
        for _ in 0..batch {
            let c = pool.sample(rng) as usize;
            if !seen[c] {
                seen[c] = true;
                distinct += 1;
            }
        }
        rec.round(distinct);
    }
    Ok(rec.finish())
}

/// Next informed count given `informed` out of `n`.
///
/// Each of the `informed` pushes reaches an uninformed node with probability
/// `(n - informed) / (n - 1)`, independently, and then lands on a uniform
/// uninformed node. Since uninformed nodes are exchangeable the `j`th such
/// push is new exactly when a uniform draw from `[0, U)` is at least the
/// number of new nodes found so far in this round.
#[inline]
pub fn occupancy_step<R: Rng + ?Sized>(n: u64, informed: u64, rng: &mut R) -> u64 {
    let uninformed = n - informed;
    if uninformed == 0 {
        return n;
    }
    let p = uninformed as f64 / (n - 1) as f64;
    let hits = if p >= 1.0 {
        informed
    } else {
        Binomial::new(informed, p)
            .expect("probability lies in [0, 1]")
            .sample(rng)
    };
    let bins = UniformBelow::new(uninformed as u32);
    let mut fresh = 0u32;
    for _ in 0..hits {
        if bins.sample(rng) >= fresh {
            fresh += 1;
        }
    }
    informed + fresh as u64
}

pub fn simulate_occupancy<R: Rng + ?Sized>(
    n: u64,
    rng: &mut R,
    keep_trajectory: bool,
) -> Result<Run> {
    check_n(n)?;
    let mut rec = Recorder::new(keep_trajectory);
    let mut informed = 1u64;
    while informed < n {
        informed = occupancy_step(n, informed, rng);
        rec.round(informed);
    }
    Ok(rec.finish())
}

pub fn simulate<R: Rng + ?Sized>(
    sampler: SamplerKind,
    n: u64,
    rng: &mut R,
    keep_trajectory: bool,
) -> Result<Run> {
    match sampler {
        SamplerKind::Direct => simulate_direct(n, rng, keep_trajectory),
        SamplerKind::Batch => simulate_batch(n, rng, keep_trajectory),
        SamplerKind::Occupancy => simulate_occupancy(n, rng, keep_trajectory),
    }
}

/// Runs trial `trial` of the ensemble seeded by `master_seed`.
pub fn run_trial(
    n: u64,
    sampler: SamplerKind,
    master_seed: u64,
    trial: u64,
    keep_trajectory: bool,
) -> Result<RunRecord> {
    let mut rng = trial_rng(master_seed, trial);
    let run = simulate(sampler, n, &mut rng, keep_trajectory)?;
    Ok(RunRecord {
        n,
        runtime: run.runtime,
        trajectory: run.trajectory,
        sampler,
        seed_path: SeedPath { master_seed, trial },
    })
}

/// Histogram of integer runtimes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub n: u64,
    pub counts: BTreeMap<u32, u64>,
    pub trials: u64,
}

impl EmpiricalDistribution {
    pub fn new(n: u64) -> Self {
        Self {
            n,
            counts: BTreeMap::new(),
            trials: 0,
        }
    }

    pub fn from_runtimes<I: IntoIterator<Item = u32>>(n: u64, runtimes: I) -> Self {
        let mut d = Self::new(n);
        for r in runtimes {
            d.record(r);
        }
        d
    }

    pub fn record(&mut self, runtime: u32) {
        *self.counts.entry(runtime).or_insert(0) += 1;
        self.trials += 1;
    }

    /// Merges another histogram; associative and commutative.
    pub fn merge(&mut self, other: &Self) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.trials += other.trials;
    }

    pub fn min(&self) -> Option<u32> {
        self.counts.keys().next().copied()
    }

    pub fn max(&self) -> Option<u32> {
        self.counts.keys().next_back().copied()
    }

    pub fn count(&self, k: u32) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// `#{X <= k} / trials`.
    pub fn cdf(&self, k: i64) -> f64 {
        if self.trials == 0 || k < 0 {
            return 0.0;
        }
        let below: u64 = self.counts.range(..=(k.min(u32::MAX as i64) as u32)).map(|(_, c)| c).sum();
        below as f64 / self.trials as f64
    }

    /// `#{X >= k} / trials`.
    pub fn survival(&self, k: i64) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        if k <= 0 {
            return 1.0;
        }
        if k > u32::MAX as i64 {
            return 0.0;
        }
        let above: u64 = self.counts.range(k as u32..).map(|(_, c)| c).sum();
        above as f64 / self.trials as f64
    }

    /// `E[(X - offset)^k]` under the empirical law.
    pub fn raw_moment(&self, offset: f64, k: u32) -> f64 {
        let mut acc = CompensatedSum::<f64>::new();
        for (&x, &c) in &self.counts {
            acc.add(c as f64 * (x as f64 - offset).powi(k as i32));
        }
        acc.value() / self.trials as f64
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(0.0, 1)
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.trials < 2 {
            return 0.0;
        }
        let m = self.mean();
        let t = self.trials as f64;
        self.raw_moment(m, 2) * t / (t - 1.0)
    }

    pub fn central_moment(&self, k: u32) -> f64 {
        self.raw_moment(self.mean(), k)
    }

    pub fn mean_standard_error(&self) -> f64 {
        (self.variance() / self.trials as f64).sqrt()
    }

    /// Large-sample standard error of the sample variance,
    /// `sqrt((μ4 - σ⁴) / trials)`.
    pub fn variance_standard_error(&self) -> f64 {
        let m2 = self.central_moment(2);
        let m4 = self.central_moment(4);
        ((m4 - m2 * m2).max(0.0) / self.trials as f64).sqrt()
    }
}

/// Stored `|I_t|` sequences of an ensemble, in trial order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryStore {
    pub n: u64,
    pub sampler: SamplerKind,
    pub master_seed: u64,
    pub trajectories: Vec<Vec<u64>>,
}

impl TrajectoryStore {
    /// Text dump: the format line, a `n sampler seed count` line, then one
    /// line per run with space-separated `|I_t|`.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRAJECTORY_FORMAT}")?;
        writeln!(
            out,
            "n={} sampler={} seed={} runs={}",
            self.n,
            self.sampler,
            self.master_seed,
            self.trajectories.len()
        )?;
        for t in &self.trajectories {
            let line: Vec<String> = t.iter().map(u64::to_string).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidArgument(format!("trajectory file: {msg}"));
        let mut lines = input.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| bad("unexpected end of file"))?
                .map_err(|e| bad(&e.to_string()))
        };
        if next()? != TRAJECTORY_FORMAT {
            return Err(bad("unsupported format version"));
        }
        let header = next()?;
        let mut fields = BTreeMap::new();
        for kv in header.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("malformed header"))?;
            fields.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| fields.get(k).cloned().ok_or_else(|| bad(&format!("missing {k}")));
        let n: u64 = get("n")?.parse().map_err(|_| bad("bad n"))?;
        let sampler: SamplerKind = get("sampler")?.parse()?;
        let master_seed: u64 = get("seed")?.parse().map_err(|_| bad("bad seed"))?;
        let runs: usize = get("runs")?.parse().map_err(|_| bad("bad run count"))?;
        let mut trajectories = Vec::with_capacity(runs);
        for _ in 0..runs {
            let line = next()?;
            let t = line
                .split_whitespace()
                .map(|s| s.parse::<u64>().map_err(|_| bad("bad count")))
                .collect::<Result<Vec<_>>>()?;
            trajectories.push(t);
        }
        Ok(Self {
            n,
            sampler,
            master_seed,
            trajectories,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub n: u64,
    pub trials: u64,
    pub sampler: SamplerKind,
    pub master_seed: u64,
    pub keep_trajectories: bool,
    /// Upper bound on `trials * n`.
    pub work_cap: u128,
}

impl EnsembleConfig {
    pub fn new(n: u64, trials: u64, sampler: SamplerKind, master_seed: u64) -> Self {
        Self {
            n,
            trials,
            sampler,
            master_seed,
            keep_trajectories: false,
            work_cap: DEFAULT_WORK_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub distribution: EmpiricalDistribution,
    pub trajectories: Option<TrajectoryStore>,
}

/// Runs `trials` independent runs in parallel. The histogram and the
/// trajectory order depend only on the configuration, never on scheduling.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<Ensemble> {
    check_n(cfg.n)?;
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if cfg.sampler == SamplerKind::Batch && cfg.n < 2 {
        return Err(Error::InvalidArgument("batch sampler needs n >= 2".into()));
    }
    let work = cfg.trials as u128 * cfg.n as u128;
    if work > cfg.work_cap {
        return Err(Error::ResourceCap {
            requested: work,
            cap: cfg.work_cap,
        });
    }
    let n = cfg.n;
    if cfg.keep_trajectories {
        let runs = (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(n, cfg.sampler, cfg.master_seed, i, true))
            .collect::<Result<Vec<_>>>()?;
        let distribution = EmpiricalDistribution::from_runtimes(n, runs.iter().map(|r| r.runtime));
        let trajectories = runs
            .into_iter()
            .map(|r| r.trajectory.expect("trajectory requested"))
            .collect();
        return Ok(Ensemble {
            distribution,
            trajectories: Some(TrajectoryStore {
                n,
                sampler: cfg.sampler,
                master_seed: cfg.master_seed,
                trajectories,
            }),
        });
    }
    let distribution = (0..cfg.trials)
        .into_par_iter()
        .try_fold(
            || EmpiricalDistribution::new(n),
            |mut acc, i| {
                acc.record(run_trial(n, cfg.sampler, cfg.master_seed, i, false)?.runtime);
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || EmpiricalDistribution::new(n),
            |mut a, b| {
                a.merge(&b);
                Ok(a)
            },
        )?;
    Ok(Ensemble {
        distribution,
        trajectories: None,
    })
}

/// Line-delimited JSON record of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub format: String,
    pub n: u64,
    pub trials: u64,
    pub sampler: SamplerKind,
    pub master_seed: u64,
    pub histogram: BTreeMap<u32, u64>,
    pub mean: f64,
    pub variance: f64,
}

impl EnsembleSummary {
    pub fn new(dist: &EmpiricalDistribution, sampler: SamplerKind, master_seed: u64) -> Self {
        Self {
            format: SUMMARY_FORMAT.to_string(),
            n: dist.n,
            trials: dist.trials,
            sampler,
            master_seed,
            histogram: dist.counts.clone(),
            mean: dist.mean(),
            variance: dist.variance(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub start_round: u32,
    /// `n^(1 - c/4)`.
    pub threshold: f64,
    pub per_run: Vec<f64>,
    pub exceed_fraction: f64,
}

/// For each run, `sup_t | |I_{T+t}| - f^(t)(|I_T| / n) n |` over the stored
/// rounds, together with the fraction of runs above `n^(1 - c/4)`.
pub fn trajectory_deviation(store: &TrajectoryStore, start_round: u32, c: f64) -> Result<DeviationReport> {
    if !(c > 0.0 && c < 0.49) {
        return Err(Error::domain("trajectory_deviation c", c, "(0, 0.49)"));
    }
    let n = store.n as f64;
    if store.n >= 2 && (start_round as f64) < c * n.log2() {
        return Err(Error::InvalidArgument(format!(
            "start round {start_round} below c log2 n = {}",
            c * n.log2()
        )));
    }
    let mut per_run = Vec::with_capacity(store.trajectories.len());
    for (run, t) in store.trajectories.iter().enumerate() {
        let runtime = t.len().saturating_sub(1) as u32;
        if start_round > runtime {
            return Err(Error::TrajectoryTooShort {
                run,
                runtime,
                round: start_round,
            });
        }
        let mut x = t[start_round as usize] as f64 / n;
        let mut sup = 0.0f64;
        for &observed in &t[start_round as usize..] {
            sup = sup.max((observed as f64 - x * n).abs());
            x = mean_field_step(x);
        }
        per_run.push(sup);
    }
    let threshold = n.powf(1.0 - c / 4.0);
    let exceed = per_run.iter().filter(|&&d| d > threshold).count();
    let exceed_fraction = if per_run.is_empty() {
        0.0
    } else {
        exceed as f64 / per_run.len() as f64
    };
    Ok(DeviationReport {
        start_round,
        threshold,
        per_run,
        exceed_fraction,
    })
}

/// Whether `trajectory[t] = 2^t` for every `t <= t_max` that it stores.
pub fn doubles_up_to(trajectory: &[u64], t_max: u32) -> bool {
    trajectory
        .iter()
        .take(t_max as usize + 1)
        .enumerate()
        .all(|(t, &v)| v == 1u64 << t)
}

/// Exact probability that the first `t_max` rounds all double, for
/// `2^t_max <= n`: in the round from `2^t` informed nodes the `j`th push must
/// reach one of the `n - 2^t - j` nodes still untouched.
pub fn doubling_probability(n: u64, t_max: u32) -> Result<f64> {
    if n < 2 || t_max >= 63 || (1u64 << t_max) > n {
        return Err(Error::InvalidArgument(format!(
            "doubling probability needs n >= 2 and 2^t_max <= n, got n = {n}, t_max = {t_max}"
        )));
    }
    let nf = n as f64;
    let mut log_p = CompensatedSum::<f64>::new();
    for t in 0..t_max {
        let size = 1u64 << t;
        for j in 0..size {
            let free = (n - size - j) as f64;
            log_p.add((-(nf - 1.0 - free) / (nf - 1.0)).ln_1p());
        }
    }
    Ok(log_p.value().exp())
}

/// `n^{-1} Σ_{1 <= i < n} (T_i - E T_i)` for independent
/// `T_i ~ Geo((n - i) / (n - 1))` on `{1, 2, ...}`.
pub struct GeometricSumProbe {
    n: u64,
    laws: Vec<Option<Geometric>>,
    centre: f64,
}

impl GeometricSumProbe {
    pub fn new(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("probe needs n >= 2".into()));
        }
        let laws = (1..n)
            .map(|i| {
                let p = (n - i) as f64 / (n - 1) as f64;
                (p < 1.0).then(|| Geometric::new(p).expect("p in (0, 1)"))
            })
            .collect();
        let centre: CompensatedSum = (1..n).map(|i| (n - 1) as f64 / (n - i) as f64).collect();
        Ok(Self {
            n,
            laws,
            centre: centre.value(),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut total: u64 = 0;
        for law in &self.laws {
            total += 1 + law.as_ref().map_or(0, |g| g.sample(rng));
        }
        (total as f64 - self.centre) / self.n as f64
    }

    /// `samples` draws, draw `i` from stream `i` of `master_seed`.
    pub fn sample_many(&self, samples: u64, master_seed: u64) -> Vec<f64> {
        (0..samples)
            .into_par_iter()
            .map(|i| self.sample(&mut trial_rng(master_seed, i)))
            .collect()
    }
}
