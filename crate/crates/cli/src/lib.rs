#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Command-line front end: argument definitions and the subcommand drivers.
//!
//! Every file written by a subcommand starts with `#` lines that name the
//! format version and echo the resolved configuration, except the JSON
//! artifacts, which carry the same information as fields.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rumour_core::gumbel::{surface_table, SurfaceKind, SurfaceMesh};
use rumour_core::limit_c::{c_of_x_with, c_table_with, LimitConfig};
use rumour_core::numeric::{format::sig17, log_fractions, Precision};
use rumour_core::simulator::{
    run_ensemble, EmpiricalDistribution, EnsembleConfig, EnsembleSummary, SamplerKind,
    DEFAULT_WORK_CAP, SUMMARY_FORMAT,
};
use rumour_core::validation::{compare, find_subsequence_n, Thresholds, VAR_BRACKET};

pub mod error;

pub use error::{CliError, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "rumour", version, about = "Push rumour spreading on the complete graph: limit-law numerics and exact simulation")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "RUMOUR_THREADS")]
    pub threads: Option<usize>,

    /// Arithmetic backend for the c(x) series.
    #[arg(long, global = true, default_value_t = Precision::DoubleDouble)]
    pub precision: Precision,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate c(x) on [0, xmax].
    ComputeC(ComputeCArgs),
    /// Write the h and variance surfaces over [0, 1)^2.
    Surfaces(SurfacesArgs),
    /// Simulate an ensemble of runs.
    Simulate(SimulateArgs),
    /// Compare an ensemble with the predicted runtime law.
    Compare(CompareArgs),
    /// List n whose fractional parts of log2 n and ln n are near a target.
    FindN(FindNArgs),
}

#[derive(Debug, Args)]
pub struct ComputeCArgs {
    #[arg(long, default_value_t = 2.0)]
    pub xmax: f64,
    #[arg(long, default_value_t = 400, value_parser = clap::value_parser!(u64).range(2..))]
    pub resolution: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Directory receiving `c_table.dat` and `c_minus_c0.dat`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SurfacesArgs {
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(2..))]
    pub resolution: u64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Allowed distance of variance values outside the limiting bracket.
    #[arg(long, default_value_t = 1e-4)]
    pub bracket_tol: f64,
    /// Directory receiving `h_surface.dat` and `var_surface.dat`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = SamplerKind::Occupancy)]
    pub sampler: SamplerKind,
    /// Upper bound on trials * n.
    #[arg(long, default_value_t = DEFAULT_WORK_CAP)]
    pub work_cap: u128,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(short = 'n', long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Master seed; a fresh one is generated and printed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Summary record (one JSON line).
    #[arg(long, default_value = "ensemble.jsonl")]
    pub out: PathBuf,
    /// Also keep every |I_t| sequence and write them here.
    #[arg(long)]
    pub trajectories: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(short = 'n', long, value_parser = clap::value_parser!(u64).range(2..), conflicts_with_all = ["find_n", "input"])]
    pub n: Option<u64>,
    /// Pick the largest n <= --n-max with fractional parts near `x,y`.
    #[arg(long, value_name = "X,Y", value_parser = parse_pair, conflicts_with = "input")]
    pub find_n: Option<(f64, f64)>,
    /// Circle-distance tolerance for --find-n.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_max: u64,
    /// Compare a stored ensemble summary instead of simulating.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long, required_unless_present = "input")]
    pub seed: Option<u64>,
    /// Tolerance for c({log2 n}).
    #[arg(long, default_value_t = 1e-12)]
    pub c_tol: f64,
    /// Budget for the sup-distance to the predicted law.
    #[arg(long, default_value_t = 0.02)]
    pub budget: f64,
    /// Standard errors allowed outside the mean and variance brackets.
    #[arg(long, default_value_t = 4.0)]
    pub sigmas: f64,
    #[arg(long, default_value = "comparison.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FindNArgs {
    pub x: f64,
    pub y: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_max: u64,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

/// `#` header: format line, then one `key = value` line per setting.
pub fn header(format: &str, config: &[(&str, String)]) -> String {
    let mut s = format!("# {format}\n# rumour {VERSION}\n");
    for (k, v) in config {
        s.push_str(&format!("# {k} = {v}\n"));
    }
    s
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn limit_config(precision: Precision) -> LimitConfig {
    LimitConfig {
        precision,
        ..LimitConfig::default()
    }
}

/// Runs one subcommand, writing the human-readable summary to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::ComputeC(a) => compute_c(a, cli.precision, out),
        Command::Surfaces(a) => surfaces(a, cli.precision, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Compare(a) => compare_cmd(a, cli.precision, out),
        Command::FindN(a) => find_n(a, out),
    }
}

pub fn compute_c(a: &ComputeCArgs, precision: Precision, out: &mut dyn Write) -> Result<(), CliError> {
    positive("xmax", a.xmax)?;
    positive("tol", a.tol)?;
    let table = c_table_with(a.xmax, a.resolution as usize, a.tol, &limit_config(precision))?;
    let config = [
        ("xmax", sig17(a.xmax)),
        ("resolution", a.resolution.to_string()),
        ("tol", sig17(a.tol)),
        ("precision", precision.to_string()),
        ("c0", sig17(table.c0)),
    ];
    let mut three = create(&a.out_dir, "c_table.dat")?;
    three.write_all(header("rumour-c-table v1: x c(x) c(x)-c(0)", &config).as_bytes())?;
    table.write_three_column(&mut three)?;
    three.flush()?;
    let mut two = create(&a.out_dir, "c_minus_c0.dat")?;
    two.write_all(header("rumour-c-table v1: x c(x)-c(0)", &config).as_bytes())?;
    table.write_two_column(&mut two)?;
    two.flush()?;
    writeln!(out, "c(0) = {}", sig17(table.c0))?;
    writeln!(out, "amplitude (max - min) = {}", sig17(table.amplitude()))?;
    writeln!(out, "rows = {}", table.rows.len())?;
    Ok(())
}

fn write_surface(dir: &Path, name: &str, mesh: &SurfaceMesh, precision: Precision) -> Result<(), CliError> {
    let mut f = create(dir, name)?;
    let config = [
        ("surface", mesh.kind.to_string()),
        ("resolution", mesh.resolution.to_string()),
        ("tol", sig17(mesh.tol)),
        ("precision", precision.to_string()),
    ];
    f.write_all(header("rumour-surface v1: x y z", &config).as_bytes())?;
    mesh.write_mesh(&mut f)?;
    f.flush()?;
    Ok(())
}

pub fn surfaces(a: &SurfacesArgs, precision: Precision, out: &mut dyn Write) -> Result<(), CliError> {
    positive("tol", a.tol)?;
    if !(a.bracket_tol >= 0.0) {
        return Err(CliError::Usage("--bracket-tol must be nonnegative".into()));
    }
    let cfg = limit_config(precision);
    let res = a.resolution as usize;
    let h = surface_table(SurfaceKind::H, res, a.tol, &cfg)?;
    let var = surface_table(SurfaceKind::Var, res, a.tol, &cfg)?;
    write_surface(&a.out_dir, "h_surface.dat", &h, precision)?;
    write_surface(&a.out_dir, "var_surface.dat", &var, precision)?;
    writeln!(out, "inf h = {}", sig17(h.min()))?;
    writeln!(out, "sup h = {}", sig17(h.max()))?;
    writeln!(out, "inf var = {}", sig17(var.min()))?;
    writeln!(out, "sup var = {}", sig17(var.max()))?;
    let (lo, hi) = (VAR_BRACKET.0 - a.bracket_tol, VAR_BRACKET.1 + a.bracket_tol);
    if var.min() < lo || var.max() > hi {
        return Err(CliError::CheckFailed(format!(
            "variance surface leaves [{lo}, {hi}]: [{}, {}]",
            var.min(),
            var.max()
        )));
    }
    Ok(())
}

fn fresh_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    (nanos as u64) ^ ((nanos >> 64) as u64) ^ (std::process::id() as u64).rotate_left(32)
}

fn ensemble_config(n: u64, e: &EnsembleArgs, seed: u64, keep: bool) -> EnsembleConfig {
    EnsembleConfig {
        keep_trajectories: keep,
        work_cap: e.work_cap,
        ..EnsembleConfig::new(n, e.trials, e.sampler, seed)
    }
}

fn print_distribution(d: &EmpiricalDistribution, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "mean = {}", sig17(d.mean()))?;
    writeln!(out, "variance = {}", sig17(d.variance()))?;
    writeln!(out, "histogram (runtime: count):")?;
    for (k, c) in d.counts.iter().take(12) {
        writeln!(out, "  {k}: {c}")?;
    }
    if d.counts.len() > 12 {
        writeln!(out, "  ... {} more", d.counts.len() - 12)?;
    }
    Ok(())
}

pub fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let seed = match a.seed {
        Some(s) => s,
        None => {
            let s = fresh_seed();
            writeln!(out, "seed = {s} (generated)")?;
            s
        }
    };
    let cfg = ensemble_config(a.n, &a.ensemble, seed, a.trajectories.is_some());
    let ens = run_ensemble(&cfg)?;
    let summary = EnsembleSummary::new(&ens.distribution, cfg.sampler, seed);
    let mut f = BufWriter::new(File::create(&a.out)?);
    writeln!(f, "{}", summary.to_json_line())?;
    f.flush()?;
    if let (Some(path), Some(store)) = (&a.trajectories, &ens.trajectories) {
        let mut t = BufWriter::new(File::create(path)?);
        store.write_text(&mut t)?;
        t.flush()?;
    }
    writeln!(out, "n = {}, trials = {}, sampler = {}", a.n, cfg.trials, cfg.sampler)?;
    print_distribution(&ens.distribution, out)
}

/// Reads the first record of an ensemble summary file.
pub fn load_summary(path: &Path) -> Result<EnsembleSummary, CliError> {
    let reader = BufReader::new(File::open(path)?);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let summary: EnsembleSummary = serde_json::from_str(&line)?;
        if summary.format != SUMMARY_FORMAT {
            return Err(CliError::Usage(format!("unsupported summary format {}", summary.format)));
        }
        return Ok(summary);
    }
    Err(CliError::Usage(format!("{} holds no summary record", path.display())))
}

pub fn compare_cmd(a: &CompareArgs, precision: Precision, out: &mut dyn Write) -> Result<(), CliError> {
    positive("c-tol", a.c_tol)?;
    positive("budget", a.budget)?;
    positive("sigmas", a.sigmas)?;
    let (dist, sampler, seed) = if let Some(path) = &a.input {
        let s = load_summary(path)?;
        let trials = s.histogram.values().sum();
        if trials != s.trials {
            return Err(CliError::Usage("summary histogram does not sum to its trial count".into()));
        }
        let dist = EmpiricalDistribution {
            n: s.n,
            counts: s.histogram,
            trials,
        };
        (dist, s.sampler, s.master_seed)
    } else {
        let seed = a.seed.ok_or_else(|| CliError::Usage("--seed is required".into()))?;
        let n = match (a.n, a.find_n) {
            (Some(n), _) => n,
            (None, Some((x, y))) => {
                positive("tol", a.tol)?;
                let hits = find_subsequence_n(x, y, a.tol, a.n_max)?;
                let n = *hits.iter().rev().find(|&&n| n >= 2).ok_or_else(|| {
                    CliError::Usage(format!("no n <= {} within {} of ({x}, {y})", a.n_max, a.tol))
                })?;
                writeln!(out, "picked n = {n} from {} candidates", hits.len())?;
                n
            }
            (None, None) => return Err(CliError::Usage("give -n, --find-n or --input".into())),
        };
        let cfg = ensemble_config(n, &a.ensemble, seed, false);
        (run_ensemble(&cfg)?.distribution, cfg.sampler, seed)
    };
    if dist.n < 2 {
        return Err(CliError::Usage("comparison needs n >= 2".into()));
    }
    let (x, _) = log_fractions(dist.n);
    let c = c_of_x_with(x, a.c_tol, &limit_config(precision))?;
    let thresholds = Thresholds {
        sup_distance: a.budget,
        sigmas: a.sigmas,
    };
    let mut report = compare(&dist, sampler, seed, c.value, thresholds)?;
    report.config = [
        ("c_tol", sig17(a.c_tol)),
        ("precision", precision.to_string()),
        ("work_cap", a.ensemble.work_cap.to_string()),
        ("input", a.input.as_ref().map_or("-".into(), |p| p.display().to_string())),
        ("find_n", a.find_n.map_or("-".into(), |(x, y)| format!("{x},{y}"))),
        ("find_n_tol", sig17(a.tol)),
        ("n_max", a.n_max.to_string()),
        ("rumour_version", VERSION.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let mut f = BufWriter::new(File::create(&a.out)?);
    writeln!(f, "{}", report.to_json())?;
    f.flush()?;
    writeln!(out, "n = {}, trials = {}", report.n, report.trials)?;
    writeln!(out, "c({{log2 n}}) = {}", sig17(report.c_value))?;
    writeln!(
        out,
        "sup-CDF distance = {} (budget {})",
        sig17(report.sup_cdf_distance),
        report.thresholds.sup_distance
    )?;
    for m in &report.moment_deltas {
        writeln!(out, "moment {}: empirical {} predicted {}", m.k, sig17(m.empirical), sig17(m.predicted))?;
    }
    for b in &report.bracket_checks {
        writeln!(
            out,
            "{} {}: {} in [{}, {}]",
            if b.pass { "PASS" } else { "FAIL" },
            b.name,
            sig17(b.value),
            b.lo,
            b.hi
        )?;
    }
    if !report.pass {
        return Err(CliError::CheckFailed("comparison outside budget; see report".into()));
    }
    Ok(())
}

pub fn find_n(a: &FindNArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let hits = find_subsequence_n(a.x, a.y, a.tol, a.n_max)?;
    writeln!(out, "# n frac(log2 n) frac(ln n)")?;
    for n in hits {
        let (fx, fy) = log_fractions(n);
        writeln!(out, "{n} {} {}", sig17(fx), sig17(fy))?;
    }
    Ok(())
}

/// Parses the arguments, configures the thread pool and runs; returns the
/// process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            let _ = writeln!(err, "error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        // a second initialisation within one process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
