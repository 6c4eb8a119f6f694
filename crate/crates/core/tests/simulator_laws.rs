//! Runtime laws of the three samplers against exact small-`n` laws, each
//! other, and the doubling phase.

use rumour_core::simulator::{
    doubles_up_to, doubling_probability, run_ensemble, EmpiricalDistribution, EnsembleConfig,
    SamplerKind,
};
use rumour_core::validation::{
    coarse_mean_bracket, exact_runtime_law, permutation_threshold, sup_cdf_distance, IntegerLaw,
};

const SAMPLERS: [SamplerKind; 3] = [SamplerKind::Direct, SamplerKind::Batch, SamplerKind::Occupancy];

fn ensemble(n: u64, trials: u64, sampler: SamplerKind, seed: u64) -> EmpiricalDistribution {
    run_ensemble(&EnsembleConfig::new(n, trials, sampler, seed))
        .unwrap()
        .distribution
}

fn assert_bins_within_4_sigma(emp: &EmpiricalDistribution, pmf: impl Fn(i64) -> f64, label: &str) {
    let t = emp.trials as f64;
    let hi = emp.max().unwrap() as i64 + 2;
    for k in 0..=hi {
        let p = pmf(k);
        let observed = emp.count(k as u32) as f64;
        let sd = (t * p * (1.0 - p)).sqrt();
        assert!(
            (observed - t * p).abs() <= 4.0 * sd + 1e-9,
            "{label}: bin {k} has {observed}, expected {}",
            t * p
        );
    }
}

#[test]
fn three_nodes_follow_geometric_tail() {
    let pmf = |k: i64| if k >= 2 { 0.75 * 0.25f64.powi(k as i32 - 2) } else { 0.0 };
    for (i, s) in SAMPLERS.into_iter().enumerate() {
        let emp = ensemble(3, 100_000, s, 10 + i as u64);
        assert_bins_within_4_sigma(&emp, pmf, &s.to_string());
    }
}

#[test]
fn small_n_match_exact_chain() {
    for n in [4u64, 5, 6] {
        let law = exact_runtime_law(n, 1e-15).unwrap();
        for (i, s) in SAMPLERS.into_iter().enumerate() {
            let emp = ensemble(n, 50_000, s, 100 * n + i as u64);
            assert_bins_within_4_sigma(&emp, |k| law.pmf_at(k), &format!("{s}, n = {n}"));
        }
    }
}

#[test]
fn samplers_agree_at_moderate_n() {
    let n = 50;
    let direct = ensemble(n, 20_000, SamplerKind::Direct, 1);
    for s in [SamplerKind::Batch, SamplerKind::Occupancy] {
        let other = ensemble(n, 20_000, s, 2);
        let d = sup_cdf_distance(&direct, &other);
        let threshold = permutation_threshold(&direct, &other, 0.001, 1000, 7).unwrap();
        assert!(d < threshold, "{s}: {d} >= {threshold}");
    }
}

#[test]
fn runtime_at_least_log2_n() {
    for s in SAMPLERS {
        let emp = ensemble(1000, 2000, s, 5);
        assert!(emp.support_hint().0 >= 10);
    }
}

#[test]
fn mean_within_coarse_bracket() {
    let n = 10_000;
    let emp = ensemble(n, 5_000, SamplerKind::Batch, 9);
    let (lo, hi) = coarse_mean_bracket(n);
    assert!(lo <= emp.mean() && emp.mean() <= hi, "{lo} <= {} <= {hi}", emp.mean());
}

fn doubling_fraction(n: u64, runs: u64, t_max: u32) -> f64 {
    let cfg = EnsembleConfig {
        keep_trajectories: true,
        ..EnsembleConfig::new(n, runs, SamplerKind::Occupancy, 31)
    };
    let store = run_ensemble(&cfg).unwrap().trajectories.unwrap();
    let ok = store
        .trajectories
        .iter()
        .filter(|t| doubles_up_to(t, t_max))
        .count();
    ok as f64 / runs as f64
}

#[test]
fn doubling_fraction_matches_exact_probability() {
    let (n, runs) = (1_000_000u64, 1000u64);
    let t_max = (0.49 * (n as f64).log2()).floor() as u32;
    let p = doubling_probability(n, t_max).unwrap();
    let frac = doubling_fraction(n, runs, t_max);
    let sd = (p * (1.0 - p) / runs as f64).sqrt();
    assert!((frac - p).abs() < 4.0 * sd, "{frac} vs exact {p}");
}

/// The whp doubling statement read literally as ">= 99% of runs at n = 10^6"
/// does not hold: the exact probability is about 0.877.
#[test]
#[ignore = "the 99% level exceeds the exact doubling probability at this n"]
fn doubling_fraction_at_least_99_percent() {
    let n = 1_000_000u64;
    let t_max = (0.49 * (n as f64).log2()).floor() as u32;
    assert!(doubling_fraction(n, 1000, t_max) >= 0.99);
}
