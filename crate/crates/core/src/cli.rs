//! Command-line front end: dataset I/O, task runs and experiment suites.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    exact_for_all_cost, fit_power_law, log_log_fit, pulls_vs_gap_averaged, scaling_curve,
    GapProfile, GapSource,
};
use crate::bandit::{run, Answer, ArmSummary, BanditConfig, RunReport, Task};
use crate::data::{gaussian_points, read_csv, write_csv};
use crate::depth::{
    binomial, exact_depths_all, mc_estimate, naive_counts_all, round_rng, ExactDepth,
    NaiveSimplicial, PlanarSimplicial, DEFAULT_NAIVE_CAP,
};
use crate::error::DepthError;
use crate::geometry::PointSet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the worker pool (`0` or unset: all cores).
pub const THREADS_ENV: &str = "DEPTHBANDIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "depthbandit",
    version,
    about = "Adaptive simplicial depth statistics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Depth of one or all points.
    Depth(DepthArgs),
    /// Deepest point.
    Median(MedianArgs),
    /// The k deepest points.
    Topk(TopkArgs),
    /// Depth-ordered clusters.
    Rank(RankArgs),
    /// Write a synthetic dataset.
    Generate(GenerateArgs),
    /// Run an experiment suite.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file, one point per row.
    pub input: PathBuf,
    /// Skip the first line.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Planar,
    Mc,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    pub index: Option<usize>,
    #[arg(long)]
    pub all: bool,
    #[arg(long, value_enum, default_value_t = Method::Naive)]
    pub method: Method,
    /// Monte-Carlo simplices (mc only).
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Scale on the per-round sample target.
    #[arg(long, default_value_t = 1.0)]
    pub ct: f64,
    #[arg(long, default_value_t = 1.0)]
    pub switch_factor: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MedianArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct TopkArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated cluster boundaries, e.g. `0,5,n`; `n` stands for the
    /// number of points.
    #[arg(long)]
    pub boundaries: String,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Distribution {
    Gaussian,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = Distribution::Gaussian)]
    pub dist: Distribution,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    PullsVsGap,
    GapCdf,
    Scaling,
    ErrorRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Points per instance (default 2000 for pulls-vs-gap, 200 for gap-cdf,
    /// 100 for error-rate).
    #[arg(long)]
    pub n: Option<usize>,
    /// Instance sizes for the scaling suite.
    #[arg(long, value_delimiter = ',', default_value = "500,1000,2000,4000")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Instances for gap-cdf.
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    /// Runs per instance or size (default 50 for pulls-vs-gap, 20 for
    /// scaling, 200 for error-rate).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ct: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Machine-readable result of a `depth`, `median`, `topk` or `rank` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub task: String,
    pub config: Value,
    pub answer: Answer,
    pub per_point: Vec<ArmSummary>,
    pub total_cost_units: f64,
    pub rounds: u32,
    pub wall_time_ms: f64,
    /// Hoeffding half-width at failure probability 0.05 (Monte-Carlo depth).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub suite: String,
    pub config: Value,
    pub summary: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<DepthError> for CliError {
    fn from(e: DepthError) -> Self {
        match e {
            DepthError::InvalidArgument(_)
            | DepthError::IndexOutOfRange { .. }
            | DepthError::UnsupportedDimension { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Sizes the global worker pool from `DEPTHBANDIT_THREADS`.
pub fn configure_threads() -> CliResult<()> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        })?,
        Err(_) => 0,
    };
    if threads > 0 {
        // fails only if a pool already exists, which then stays in use
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match configure_threads().and_then(|_| execute(cli.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Depth(a) => cmd_depth(&a),
        Command::Median(a) => {
            let cfg = bandit_config(&a.run, Task::Median);
            cmd_bandit(&a.input, &a.run, cfg)
        }
        Command::Topk(a) => {
            let cfg = bandit_config(&a.run, Task::TopK { k: a.k });
            cmd_bandit(&a.input, &a.run, cfg)
        }
        Command::Rank(a) => cmd_rank(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Experiment(a) => cmd_experiment(&a),
    }
}

fn load(input: &InputArgs) -> CliResult<PointSet> {
    read_csv(&input.input, input.header).map_err(|e| match e {
        DepthError::Parse { line, msg } => {
            CliError::Runtime(format!("{}: line {line}: {msg}", input.input.display()))
        }
        other => other.into(),
    })
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn write_json<T: Serialize>(value: &T, out: &Path) -> CliResult<()> {
    let mut f = File::create(out)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// Writes the document to `out` and prints `summary`, or prints the document
/// when there is no output file.
fn emit<T: Serialize>(value: &T, out: Option<&Path>, summary: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            write_json(value, path)?;
            println!("{summary}");
        }
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

fn deepest(per_point: &[ArmSummary]) -> usize {
    let mut best = &per_point[0];
    for a in &per_point[1..] {
        if a.mu_hat > best.mu_hat {
            best = a;
        }
    }
    best.index
}

/// Hoeffding half-width of an `S`-sample mean at failure probability 0.05.
pub fn mc_half_width(samples: u64) -> f64 {
    ((2.0f64 / 0.05).ln() / (2.0 * samples as f64)).sqrt()
}

fn cmd_depth(a: &DepthArgs) -> CliResult<()> {
    let start = Instant::now();
    if a.method == Method::Mc && a.samples == 0 {
        return Err(CliError::Usage("samples must be positive".into()));
    }
    let points = load(&a.input)?;
    let n = points.len();
    let indices: Vec<usize> = match a.index {
        Some(i) if i >= n => {
            return Err(DepthError::IndexOutOfRange { index: i, n }.into());
        }
        Some(i) => vec![i],
        None => (0..n).collect(),
    };
    let mut half_width = None;
    let (per_point, cost): (Vec<ArmSummary>, f64) = match a.method {
        Method::Naive => {
            let subsets = binomial(n, points.dim() + 1);
            if a.all {
                let total = subsets as f64;
                let counts = naive_counts_all(&points, DEFAULT_NAIVE_CAP)?;
                let per = counts
                    .iter()
                    .enumerate()
                    .map(|(index, &c)| exact_summary(index, c as f64 / total))
                    .collect();
                (per, n as f64 * total)
            } else {
                let exact = NaiveSimplicial::new(&points);
                (
                    exact_all(&exact, &indices)?,
                    exact.cost() * indices.len() as f64,
                )
            }
        }
        Method::Planar => {
            let exact = PlanarSimplicial::new(&points);
            (
                exact_all(&exact, &indices)?,
                exact.cost() * indices.len() as f64,
            )
        }
        Method::Mc => {
            let mut rng = round_rng(a.seed, 0);
            let counts = mc_estimate(&points, &indices, a.samples as usize, &mut rng);
            half_width = Some(mc_half_width(a.samples));
            let per = indices
                .iter()
                .zip(&counts.hits)
                .map(|(&index, &h)| ArmSummary {
                    index,
                    mu_hat: h as f64 / a.samples as f64,
                    pulls: a.samples,
                    exact: false,
                })
                .collect();
            (per, (a.samples * indices.len() as u64) as f64)
        }
    };
    let answer = Answer::Index(deepest(&per_point));
    let config = json!({
        "input": a.input.input,
        "header": a.input.header,
        "index": a.index,
        "all": a.all,
        "method": a.method,
        "samples": if a.method == Method::Mc { Some(a.samples) } else { None },
        "seed": a.seed,
    });
    let summary = match &per_point[..] {
        [one] => format!("depth of point {}: {:.6}", one.index, one.mu_hat),
        many => {
            let best = deepest(many);
            format!(
                "depth of {} points, deepest {} at {:.6}",
                many.len(),
                best,
                many.iter().find(|p| p.index == best).unwrap().mu_hat
            )
        }
    };
    let file = ResultFile {
        task: "depth".into(),
        config,
        answer,
        per_point,
        total_cost_units: cost,
        rounds: 0,
        wall_time_ms: elapsed_ms(start),
        half_width,
    };
    emit(&file, a.out.as_deref(), &summary)
}

fn exact_summary(index: usize, depth: f64) -> ArmSummary {
    ArmSummary {
        index,
        mu_hat: depth,
        pulls: 0,
        exact: true,
    }
}

fn exact_all(exact: &(dyn ExactDepth + '_), indices: &[usize]) -> CliResult<Vec<ArmSummary>> {
    indices
        .par_iter()
        .map(|&i| {
            exact
                .depth(i)
                .map(|e| exact_summary(i, e.mean))
                .map_err(CliError::from)
        })
        .collect()
}

fn bandit_config(r: &RunArgs, task: Task) -> BanditConfig {
    BanditConfig {
        delta: r.delta,
        epsilon: r.epsilon,
        schedule_scale: r.ct,
        switch_factor: r.switch_factor,
        exact_cost: None,
        task,
        seed: r.seed,
        record_trace: false,
    }
}

/// Parses `0,5,n`-style boundary lists.
pub fn parse_boundaries(list: &str, n: usize) -> CliResult<Vec<usize>> {
    list.split(',')
        .map(|t| match t.trim() {
            "n" => Ok(n),
            t => t
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad boundary {t:?} in {list:?}"))),
        })
        .collect()
}

fn cmd_rank(a: &RankArgs) -> CliResult<()> {
    let points = load(&a.input)?;
    let boundaries = parse_boundaries(&a.boundaries, points.len())?;
    let cfg = bandit_config(&a.run, Task::CoarseRank { boundaries });
    run_task(&points, &a.input, &a.run, cfg)
}

fn cmd_bandit(input: &InputArgs, r: &RunArgs, cfg: BanditConfig) -> CliResult<()> {
    let points = load(input)?;
    run_task(&points, input, r, cfg)
}

fn run_task(points: &PointSet, input: &InputArgs, r: &RunArgs, cfg: BanditConfig) -> CliResult<()> {
    let start = Instant::now();
    cfg.validate(points.len())?;
    let report = run(points, &cfg)?;
    let exact_method = if points.dim() == 2 { "planar" } else { "naive" };
    let mut config = serde_json::to_value(&cfg)?;
    let obj = config
        .as_object_mut()
        .expect("config serializes to an object");
    obj.insert("input".into(), json!(input.input));
    obj.insert("header".into(), json!(input.header));
    obj.insert("exact_method".into(), json!(exact_method));
    obj.insert("resolved_exact_cost".into(), json!(report.exact_cost));
    let summary = summary_line(&cfg.task, &report);
    let file = ResultFile {
        task: cfg.task.name().into(),
        config,
        answer: report.answer,
        per_point: report.per_point,
        total_cost_units: report.total_cost_units,
        rounds: report.rounds,
        wall_time_ms: elapsed_ms(start),
        half_width: None,
    };
    emit(&file, r.out.as_deref(), &summary)
}

fn summary_line(task: &Task, report: &RunReport) -> String {
    let answer = match &report.answer {
        Answer::Index(i) => format!("point {i}"),
        Answer::Set(s) => format!("points {s:?}"),
        Answer::Clusters(c) => {
            let sizes: Vec<usize> = c.iter().map(Vec::len).collect();
            format!("clusters of sizes {sizes:?}")
        }
    };
    let exact = report.per_point.iter().filter(|a| a.exact).count();
    format!(
        "{}: {answer} after {} rounds, {:.0} cost units, {exact} exact",
        task.name(),
        report.rounds,
        report.total_cost_units
    )
}

fn cmd_generate(a: &GenerateArgs) -> CliResult<()> {
    let points = match a.dist {
        Distribution::Gaussian => gaussian_points(a.n, a.d, a.seed)?,
    };
    match &a.out {
        Some(path) => {
            write_csv(&points, File::create(path)?)?;
            println!(
                "wrote {} points in {} dimensions to {}",
                a.n,
                a.d,
                path.display()
            );
        }
        None => write_csv(&points, std::io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs) -> CliResult<()> {
    let start = Instant::now();
    if !(a.delta > 0.0 && a.delta < 1.0) {
        return Err(CliError::Usage(format!(
            "delta must lie in (0, 1), got {}",
            a.delta
        )));
    }
    let mut report = match a.suite {
        Suite::GapCdf => suite_gap_cdf(a)?,
        Suite::PullsVsGap => suite_pulls_vs_gap(a)?,
        Suite::Scaling => suite_scaling(a)?,
        Suite::ErrorRate => suite_error_rate(a)?,
    };
    report.summary["wall_time_ms"] = json!(elapsed_ms(start));
    let summary = format!("{}: {}", report.suite, report.summary);
    match (a.format, &a.out) {
        (Format::Json, out) => emit(&report, out.as_deref(), &summary),
        (Format::Csv, Some(path)) => {
            write_table(&report, File::create(path)?)?;
            println!("{summary}");
            Ok(())
        }
        (Format::Csv, None) => write_table(&report, std::io::stdout().lock()),
    }
}

fn write_table<W: Write>(report: &ExperimentReport, w: W) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| CliError::Runtime(e.to_string());
    wtr.write_record(&report.columns).map_err(io)?;
    for row in &report.rows {
        wtr.write_record(row.iter().map(|v| v.to_string()))
            .map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

fn experiment_config(a: &ExperimentArgs, n: Option<usize>, trials: Option<usize>) -> Value {
    json!({
        "suite": a.suite,
        "n": n,
        "d": a.d,
        "trials": trials,
        "delta": a.delta,
        "ct": a.ct,
        "seed": a.seed,
    })
}

fn suite_gap_cdf(a: &ExperimentArgs) -> CliResult<ExperimentReport> {
    let n = a.n.unwrap_or(200);
    if a.instances == 0 {
        return Err(CliError::Usage("instances must be positive".into()));
    }
    let profiles = (0..a.instances as u64)
        .into_par_iter()
        .map(|t| {
            let pts = gaussian_points(n, a.d, a.seed.wrapping_add(t))?;
            GapProfile::from_depths(&exact_depths_all(&pts)?, GapSource::Exact)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let pooled = GapProfile::pooled(&profiles)?;
    let fit = fit_power_law(&pooled)?;
    let rows = pooled
        .empirical_cdf()
        .into_iter()
        .map(|(g, f)| vec![g, f])
        .collect();
    let mut config = experiment_config(a, Some(n), None);
    config["instances"] = json!(a.instances);
    Ok(ExperimentReport {
        suite: "gap-cdf".into(),
        config,
        summary: json!({
            "alpha": fit.alpha,
            "r_squared": fit.r_squared,
            "n_points_used": fit.n_points_used,
        }),
        columns: vec!["normalized_gap".into(), "empirical_cdf".into()],
        rows,
    })
}

fn suite_pulls_vs_gap(a: &ExperimentArgs) -> CliResult<ExperimentReport> {
    let n = a.n.unwrap_or(2000);
    let trials = a.trials.unwrap_or(50);
    if trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    let points = gaussian_points(n, a.d, a.seed)?;
    let depths = exact_depths_all(&points)?;
    let best = depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gaps: Vec<f64> = depths.iter().map(|d| best - d).collect();
    let mut cfg = BanditConfig::median(a.delta, 0);
    cfg.schedule_scale = a.ct;
    let reports = (0..trials as u64)
        .map(|t| {
            let mut c = cfg.clone();
            c.seed = a.seed.wrapping_add(t);
            run(&points, &c)
        })
        .collect::<crate::Result<Vec<RunReport>>>()?;
    let reg = pulls_vs_gap_averaged(&reports, &gaps)?;
    let rows = (0..n)
        .map(|i| {
            let mean = reports
                .iter()
                .map(|r| r.per_point[i].pulls as f64)
                .sum::<f64>()
                / trials as f64;
            let exact_any = reports.iter().any(|r| r.per_point[i].exact);
            vec![i as f64, gaps[i], mean, exact_any as u8 as f64]
        })
        .collect();
    Ok(ExperimentReport {
        suite: "pulls-vs-gap".into(),
        config: experiment_config(a, Some(n), Some(trials)),
        summary: json!({
            "slope": reg.fit.slope,
            "intercept": reg.fit.intercept,
            "r_squared": reg.fit.r_squared,
            "arms_used": reg.fit.n_used,
            "arms_exact": reg.n_excluded_exact,
        }),
        columns: vec![
            "index".into(),
            "gap".into(),
            "mean_pulls".into(),
            "exact".into(),
        ],
        rows,
    })
}

fn suite_scaling(a: &ExperimentArgs) -> CliResult<ExperimentReport> {
    let trials = a.trials.unwrap_or(20);
    let mut cfg = BanditConfig::median(a.delta, a.seed);
    cfg.schedule_scale = a.ct;
    let seed = a.seed;
    let d = a.d;
    let curve = scaling_curve(
        move |n, t| gaussian_points(n, d, seed.wrapping_add(t)),
        &a.ns,
        &cfg,
        trials,
    )?;
    let planar = d == 2;
    let baseline: Vec<f64> =
        a.ns.iter()
            .map(|&n| exact_for_all_cost(n, d, planar))
            .collect();
    let base_fit = log_log_fit(&a.ns, &baseline)?;
    let rows = curve
        .points
        .iter()
        .zip(&baseline)
        .map(|(p, &b)| vec![p.n as f64, p.mean_cost, b])
        .collect();
    let mut config = experiment_config(a, None, Some(trials));
    config["ns"] = json!(a.ns);
    Ok(ExperimentReport {
        suite: "scaling".into(),
        config,
        summary: json!({
            "slope": curve.fit.slope,
            "r_squared": curve.fit.r_squared,
            "exact_for_all_slope": base_fit.slope,
        }),
        columns: vec!["n".into(), "mean_cost".into(), "exact_for_all_cost".into()],
        rows,
    })
}

/// Each trial draws a fresh instance and runs the median search with the
/// same seed, so the oracle and the adaptive run see the same data.
fn suite_error_rate(a: &ExperimentArgs) -> CliResult<ExperimentReport> {
    let n = a.n.unwrap_or(100);
    let trials = a.trials.unwrap_or(200);
    if trials == 0 {
        return Err(CliError::Usage("trials must be positive".into()));
    }
    let rows = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let seed = a.seed.wrapping_add(t);
            let points = gaussian_points(n, a.d, seed)?;
            let depths = exact_depths_all(&points)?;
            let best = depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut cfg = BanditConfig::median(a.delta, seed);
            cfg.schedule_scale = a.ct;
            let report = run(&points, &cfg)?;
            let got = report.median_index().expect("median run answers an index");
            let oracle = depths.iter().position(|&d| d == best).unwrap();
            let correct = depths[got] == best;
            Ok(vec![
                t as f64,
                got as f64,
                oracle as f64,
                correct as u8 as f64,
                report.total_cost_units,
            ])
        })
        .collect::<crate::Result<Vec<Vec<f64>>>>()?;
    let failures = rows.iter().filter(|r| r[3] == 0.0).count();
    let fraction = failures as f64 / trials as f64;
    let bound = a.delta + 3.0 * (a.delta * (1.0 - a.delta) / trials as f64).sqrt();
    Ok(ExperimentReport {
        suite: "error-rate".into(),
        config: experiment_config(a, Some(n), Some(trials)),
        summary: json!({
            "failures": failures,
            "failure_fraction": fraction,
            "bound": bound,
        }),
        columns: vec![
            "trial".into(),
            "answer".into(),
            "oracle".into(),
            "correct".into(),
            "cost".into(),
        ],
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries_accept_n_token() {
        assert_eq!(parse_boundaries("0,5,n", 60).unwrap(), vec![0, 5, 60]);
        assert_eq!(parse_boundaries(" 0 , 1 ,n", 9).unwrap(), vec![0, 1, 9]);
        assert!(matches!(
            parse_boundaries("0,x,n", 9),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn half_width_value() {
        let h = mc_half_width(1000);
        assert!((h - (40f64.ln() / 2000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        let e: CliError = DepthError::InvalidArgument("x".into()).into();
        assert_eq!(e.exit_code(), EXIT_USAGE);
        let e: CliError = DepthError::Parse {
            line: 3,
            msg: "x".into(),
        }
        .into();
        assert_eq!(e.exit_code(), EXIT_RUNTIME);
        let e: CliError = DepthError::TooLarge { count: 10, cap: 1 }.into();
        assert_eq!(e.exit_code(), EXIT_RUNTIME);
    }

    #[test]
    fn parse_rejects_bad_delta_type_and_missing_args() {
        assert!(Cli::try_parse_from(["depthbandit", "median"]).is_err());
        assert!(Cli::try_parse_from(["depthbandit", "depth", "f.csv"]).is_err());
        assert!(
            Cli::try_parse_from(["depthbandit", "depth", "f.csv", "--all", "--index", "1"])
                .is_err()
        );
        assert!(Cli::try_parse_from(["depthbandit", "experiment", "--suite", "nope"]).is_err());
        assert!(Cli::try_parse_from(["depthbandit", "median", "f.csv", "--delta", "0.1"]).is_ok());
    }
}
