//! Command-line frontend.
//!
//! Exit codes: 0 on success, 1 on domain or runtime errors, 2 on usage
//! errors (including dimension mismatches between arguments).

mod output;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

use crate::bifurcation::{linspace, scan_1d, scan_2d, GridAxis};
use crate::delay::{
    beta_sweep, classify_regime_coord, simulate_delayed, BaselineMode, DelayConfig, SweepConfig,
};
use crate::dynamics::{iterate, IterationConfig, Map};
use crate::equilibrium::{find_fixed_point, uniform_limit, FixedPointReport};
use crate::error::Error;
use crate::simplex::{Favorability, FavorabilityMode, SimplexState};
use crate::stability::{classify, StabilityReport};

pub use output::{num, Csv, Document, RunManifest};
use svg::Series;

/// Comma-separated decimals; `_` marks a slot filled in by a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct VecArg {
    raw: String,
    pub values: Vec<Option<f64>>,
}

impl FromStr for VecArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|tok| match tok.trim() {
                "_" => Ok(None),
                t => t
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| format!("'{t}' is not a number")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            raw: s.to_string(),
            values,
        })
    }
}

impl Serialize for VecArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.raw)
    }
}

impl VecArg {
    fn complete(&self, flag: &str) -> Result<Vec<f64>, CliError> {
        self.values
            .iter()
            .map(|v| v.ok_or_else(|| CliError::Usage(format!("{flag} may not contain '_' here"))))
            .collect()
    }
}

/// `lo:hi:steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeArg {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, steps] = parts.as_slice() else {
            return Err(format!("expected lo:hi:steps, got '{s}'"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound '{lo}'"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound '{hi}'"))?;
        let steps: usize = steps.parse().map_err(|_| format!("bad step count '{steps}'"))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || steps < 2 {
            return Err(format!("need lo < hi and steps >= 2, got '{s}'"));
        }
        Ok(Self { lo, hi, steps })
    }
}

impl fmt::Display for RangeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.steps)
    }
}

impl Serialize for RangeArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    PerComponent,
    GlobalMax,
}

#[derive(Debug, Parser)]
#[command(name = "meanfield", version, about = "Attractive mean-field dynamics on the probability simplex")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for scans and sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate the map and record the trajectory.
    Simulate(SimulateArgs),
    /// Analytic limit state: active set, threshold, p and r.
    FixedPoint(FixedPointArgs),
    /// Tangential and transversal stability of a fixed point.
    Stability(StabilityArgs),
    /// Sweep one favorability parameter and locate thresholds.
    Scan1d(Scan1dArgs),
    /// Label the limit regions over a grid of two parameters.
    Scan2d(Scan2dArgs),
    /// Delayed feedback: simulate and classify, or sweep beta.
    Delay(DelayArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Favorability vector, e.g. 0.3,0.4,0.25.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "uniform")]
    pub c: Option<VecArg>,
    /// Use the uniform map (every c_i = 1).
    #[arg(long)]
    pub uniform: bool,
    /// Number of components (inferred from --c or --p0 when omitted).
    #[arg(long)]
    pub n: Option<usize>,
    /// Reject c_i > 1.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Data file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File format (default: from the --out extension, else csv).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write an SVG plot to this path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Initial state (default: barycenter).
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<VecArg>,
    /// Stop once the step displacement falls below this.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: usize,
    /// Record every k-th state (default: 1 for n <= 10, else 10).
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Zero coordinates below 1e-15 after each step.
    #[arg(long)]
    pub snap: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FixedPointArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Initial state; decides the limit of the uniform map (default: barycenter).
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<VecArg>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StabilityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Point to analyse (default: the limit from the barycenter).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "at_uniform")]
    pub at: Option<VecArg>,
    /// Analyse the barycenter.
    #[arg(long)]
    pub at_uniform: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Scan1dArgs {
    /// Favorability vector with '_' at the varied slot.
    #[arg(long, allow_hyphen_values = true)]
    pub c: VecArg,
    /// Varied parameter (1-based).
    #[arg(long)]
    pub vary: usize,
    /// lo:hi:steps.
    #[arg(long)]
    pub range: RangeArg,
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Scan2dArgs {
    /// Favorability vector with '_' at the varied slots.
    #[arg(long, allow_hyphen_values = true)]
    pub c: VecArg,
    /// Varied parameters i,j (1-based).
    #[arg(long)]
    pub vary: String,
    /// lo:hi:steps for both axes.
    #[arg(long)]
    pub range: RangeArg,
    /// Separate lo:hi:steps for the second axis.
    #[arg(long)]
    pub range2: Option<RangeArg>,
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DelayArgs {
    /// Baseline favorability vector.
    #[arg(long, allow_hyphen_values = true)]
    pub c: VecArg,
    /// Feedback strength.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Lag in steps.
    #[arg(long, default_value_t = 0)]
    pub tau: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::PerComponent)]
    pub mode: ModeArg,
    /// Initial state and constant prehistory (default: barycenter).
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<VecArg>,
    #[arg(long, default_value_t = 30_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub transient: usize,
    /// Tolerance for fixed-point and period detection.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_fp: f64,
    /// Number of trailing states classified.
    #[arg(long, default_value_t = 2000)]
    pub window: usize,
    /// Coordinate sampled for extrema and spectra (1-based).
    #[arg(long, default_value_t = 1)]
    pub coord: usize,
    /// Sweep beta over lo:hi:steps and emit a bifurcation diagram.
    #[arg(long)]
    pub sweep_beta: Option<RangeArg>,
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidState(_)
            | Error::InvalidParameter(_) => CliError::Usage(e.to_string()),
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

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Summaries go to stdout, diagnostics to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        // A pool installed earlier in the same process is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::FixedPoint(a) => cmd_fixed_point(a),
        Command::Stability(a) => cmd_stability(a),
        Command::Scan1d(a) => cmd_scan1d(a),
        Command::Scan2d(a) => cmd_scan2d(a),
        Command::Delay(a) => cmd_delay(a),
    }
}

fn favorability(values: Vec<f64>, strict: bool) -> CliResult<Favorability> {
    let mode = if strict {
        FavorabilityMode::Strict
    } else {
        FavorabilityMode::Permissive
    };
    Ok(Favorability::with_mode(values, mode)?)
}

fn mismatch(expected: usize, got: usize) -> CliError {
    Error::DimensionMismatch { expected, got }.into()
}

/// The map plus the dimension implied by the arguments.
fn resolve_model(model: &ModelArgs, point: Option<&VecArg>) -> CliResult<(Map, usize)> {
    let point_len = point.map(|p| p.values.len());
    let (map, n) = match (&model.c, model.uniform) {
        (Some(c), _) => {
            let c = favorability(c.complete("--c")?, model.strict)?;
            let n = c.dim();
            (Map::Heterogeneous(c), n)
        }
        (None, true) => {
            let n = model.n.or(point_len).ok_or_else(|| {
                CliError::Usage("--uniform needs --n or an explicit state".into())
            })?;
            (Map::Uniform, n)
        }
        (None, false) => return Err(CliError::Usage("either --c or --uniform is required".into())),
    };
    if let Some(m) = model.n.filter(|m| *m != n) {
        return Err(mismatch(n, m));
    }
    if let Some(m) = point_len.filter(|m| *m != n) {
        return Err(mismatch(n, m));
    }
    Ok((map, n))
}

fn state(arg: Option<&VecArg>, n: usize, flag: &str) -> CliResult<SimplexState> {
    match arg {
        Some(p) => {
            let v = p.complete(flag)?;
            if v.len() != n {
                return Err(mismatch(n, v.len()));
            }
            Ok(SimplexState::new(v)?)
        }
        None => Ok(SimplexState::uniform(n)?),
    }
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.10}")).collect();
    format!("({})", parts.join(", "))
}

/// Writes the data file and plot requested by `out`.
fn emit<T: Serialize>(
    out: &OutputArgs,
    manifest: &RunManifest,
    data: &T,
    csv: impl FnOnce() -> Csv,
    plot: impl FnOnce() -> String,
) -> CliResult<()> {
    if let Some(path) = &out.out {
        let format = out.format.unwrap_or_else(|| infer_format(path));
        let text = match format {
            Format::Csv => csv().render(manifest),
            Format::Json => output::render_json(manifest, data)?,
        };
        output::write_file(path, &text)?;
    } else if out.format.is_some() {
        return Err(CliError::Usage("--format requires --out".into()));
    }
    if let Some(path) = &out.svg {
        output::write_file(path, &plot())?;
    }
    Ok(())
}

fn infer_format(path: &Path) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        _ => Format::Csv,
    }
}

fn state_header(n: usize) -> impl Iterator<Item = String> {
    (1..=n).map(|i| format!("p_{i}"))
}

fn trajectory_csv(traj: &crate::dynamics::Trajectory) -> Csv {
    let n = traj.last().dim();
    let mut csv = Csv::new(std::iter::once("t".to_string()).chain(state_header(n)));
    for (t, s) in traj.times.iter().zip(&traj.states) {
        csv.row(std::iter::once(t.to_string()).chain(s.as_slice().iter().map(|x| num(*x))).collect());
    }
    csv
}

fn trajectory_plot(title: &str, traj: &crate::dynamics::Trajectory) -> String {
    let n = traj.last().dim();
    let series: Vec<Series> = (0..n)
        .map(|i| Series {
            name: format!("p_{}", i + 1),
            points: traj.times.iter().zip(&traj.states).map(|(t, s)| (*t as f64, s.get(i))).collect(),
        })
        .collect();
    svg::line_chart(title, "t", "p_i", &series)
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<()> {
    let (map, n) = resolve_model(&a.model, a.p0.as_ref())?;
    let p0 = state(a.p0.as_ref(), n, "--p0")?;
    let cfg = IterationConfig {
        max_steps: a.max_steps,
        tol: a.tol,
        record_every: a.record_every.unwrap_or(IterationConfig::for_dim(n).record_every),
        snap: a.snap,
    };
    let traj = iterate(&p0, &map, &cfg)?;
    println!("steps: {}", traj.steps_taken);
    println!("converged: {}", traj.converged);
    println!("residual: {:e}", traj.final_residual);
    println!("limit: {}", fmt_vec(traj.last().as_slice()));

    let manifest = RunManifest::new("simulate", params(&a));
    emit(
        &a.output,
        &manifest,
        &traj,
        || {
            let mut csv = trajectory_csv(&traj);
            csv.result("steps", traj.steps_taken.to_string());
            csv.result("converged", traj.converged.to_string());
            csv.result("residual", num(traj.final_residual));
            csv
        },
        || trajectory_plot("trajectory", &traj),
    )
}

fn fixed_point_csv(fp: &FixedPointReport, map: &Map) -> CliResult<Csv> {
    let c = map.favorability(fp.dim())?;
    let mut csv = Csv::new(["i", "c_i", "p_inf", "r_inf", "active", "critical"]);
    for i in 0..fp.dim() {
        csv.row(vec![
            (i + 1).to_string(),
            num(c.get(i)),
            num(fp.p_inf.get(i)),
            num(fp.r_inf.as_slice()[i]),
            fp.active_set.contains(i).to_string(),
            fp.critical.contains(i).to_string(),
        ]);
    }
    csv.result("active_set", format!("\"{}\"", fp.active_set));
    csv.result("lambda", num(fp.lambda_value));
    csv.result("residual", num(fp.residual));
    Ok(csv)
}

fn print_fixed_point(fp: &FixedPointReport) {
    println!("active_set: {}", fp.active_set);
    println!("lambda: {:.10}", fp.lambda_value);
    println!("p_inf: {}", fmt_vec(fp.p_inf.as_slice()));
    println!("r_inf: {}", fmt_vec(fp.r_inf.as_slice()));
    println!("residual: {:e}", fp.residual);
    if fp.is_critical() {
        println!("critical: {}", fp.critical);
    }
}

fn cmd_fixed_point(a: FixedPointArgs) -> CliResult<()> {
    let (map, n) = resolve_model(&a.model, a.p0.as_ref())?;
    let p0 = state(a.p0.as_ref(), n, "--p0")?;
    let fp = match &map {
        Map::Uniform => uniform_limit(&p0),
        Map::Heterogeneous(c) => find_fixed_point(&p0, c)?,
    };
    print_fixed_point(&fp);
    let manifest = RunManifest::new("fixed-point", params(&a));
    let csv = fixed_point_csv(&fp, &map)?;
    emit(&a.output, &manifest, &fp, || csv, || {
        let points = (0..n).map(|i| ((i + 1) as f64, fp.p_inf.get(i))).collect();
        svg::scatter_chart("limit state", "i", "p_i", &[Series { name: "p_inf".into(), points }])
    })
}

/// Data written by `stability`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct StabilityOutput {
    pub fixed_point: FixedPointReport,
    pub stability: StabilityReport,
}

fn cmd_stability(a: StabilityArgs) -> CliResult<()> {
    let (map, n) = resolve_model(&a.model, a.at.as_ref())?;
    let fp = if let Some(at) = &a.at {
        FixedPointReport::at(&state(Some(at), n, "--at")?, &map)?
    } else if a.at_uniform {
        FixedPointReport::at(&SimplexState::uniform(n)?, &map)?
    } else {
        let p0 = SimplexState::uniform(n)?;
        match &map {
            Map::Uniform => uniform_limit(&p0),
            Map::Heterogeneous(c) => find_fixed_point(&p0, c)?,
        }
    };
    let report = classify(&fp, &map)?;
    println!("point: {}", fmt_vec(fp.p_inf.as_slice()));
    let eig: Vec<String> = report
        .tangential_spectrum
        .iter()
        .map(|z| {
            if z.im == 0.0 {
                format!("{:.10}", z.re)
            } else {
                format!("{:.10}{:+.10}i", z.re, z.im)
            }
        })
        .collect();
    println!("tangential: [{}]", eig.join(", "));
    println!("spectral_radius: {:.10}", report.spectral_radius);
    for (i, v) in &report.transversal_values {
        println!("transversal p_{}: {:.10}", i + 1, v);
    }
    println!("verdict: {}", report.verdict);
    if report.marginal {
        println!("marginal: true");
    }

    let data = StabilityOutput {
        fixed_point: fp,
        stability: report,
    };
    let manifest = RunManifest::new("stability", params(&a));
    emit(
        &a.output,
        &manifest,
        &data,
        || {
            let mut csv = Csv::new(["kind", "index", "re", "im"]);
            for (k, z) in data.stability.tangential_spectrum.iter().enumerate() {
                csv.row(vec!["tangential".into(), (k + 1).to_string(), num(z.re), num(z.im)]);
            }
            for (i, v) in &data.stability.transversal_values {
                csv.row(vec!["transversal".into(), (i + 1).to_string(), num(*v), num(0.0)]);
            }
            csv.result("verdict", data.stability.verdict.as_str());
            csv.result("spectral_radius", num(data.stability.spectral_radius));
            csv.result("marginal", data.stability.marginal.to_string());
            csv
        },
        || {
            let points = data.stability.tangential_spectrum.iter().map(|z| (z.re, z.im)).collect();
            let circle = (0..=128)
                .map(|k| {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / 128.0;
                    (th.cos(), th.sin())
                })
                .collect();
            svg::scatter_chart(
                "tangential spectrum",
                "Re",
                "Im",
                &[
                    Series { name: "eigenvalues".into(), points },
                    Series { name: "unit circle".into(), points: circle },
                ],
            )
        },
    )
}

/// Base vector for a scan: `_` slots must be exactly the varied ones and
/// are filled with `fill`.
fn scan_base(c: &VecArg, varied: &[usize], fill: f64, strict: bool) -> CliResult<Favorability> {
    let n = c.values.len();
    for &i in varied {
        if i >= n {
            return Err(CliError::Usage(format!("--vary {} out of range 1..={n}", i + 1)));
        }
    }
    let mut v = Vec::with_capacity(n);
    for (i, x) in c.values.iter().enumerate() {
        match (x, varied.contains(&i)) {
            (Some(x), false) => v.push(*x),
            (_, true) => v.push(fill),
            (None, false) => {
                return Err(CliError::Usage(format!("'_' at slot {} which is not varied", i + 1)));
            }
        }
    }
    favorability(v, strict)
}

fn one_based(i: usize) -> CliResult<usize> {
    i.checked_sub(1)
        .ok_or_else(|| CliError::Usage("parameter indices are 1-based".into()))
}

fn cmd_scan1d(a: Scan1dArgs) -> CliResult<()> {
    let i = one_based(a.vary)?;
    let base = scan_base(&a.c, &[i], a.range.lo, a.strict)?;
    let n = base.dim();
    let scan = scan_1d(i, a.range.lo, a.range.hi, a.range.steps, &base)?;
    println!("samples: {}", scan.samples.len());
    for v in &scan.critical_values {
        println!("critical_value: {v:.10}");
    }
    let manifest = RunManifest::new("scan1d", params(&a));
    emit(
        &a.output,
        &manifest,
        &scan,
        || {
            let mut csv = Csv::new(
                std::iter::once(format!("c_{}", i + 1))
                    .chain(state_header(n))
                    .chain(["zero_set".to_string(), "verdict".to_string()]),
            );
            for s in &scan.samples {
                let mut row = vec![num(s.c_value)];
                row.extend(s.p_inf.as_slice().iter().map(|x| num(*x)));
                row.push(format!("\"{}\"", s.zero_set));
                row.push(s.verdict.as_str().into());
                csv.row(row);
            }
            let cv: Vec<String> = scan.critical_values.iter().map(|v| num(*v)).collect();
            csv.result("critical_values", format!("[{}]", cv.join(";")));
            csv
        },
        || {
            let series: Vec<Series> = (0..n)
                .map(|k| Series {
                    name: format!("p_{}", k + 1),
                    points: scan.samples.iter().map(|s| (s.c_value, s.p_inf.get(k))).collect(),
                })
                .collect();
            svg::line_chart("limit state", &format!("c_{}", i + 1), "p_inf", &series)
        },
    )
}

fn cmd_scan2d(a: Scan2dArgs) -> CliResult<()> {
    let pair: Vec<usize> = a
        .vary
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("bad --vary '{}'", a.vary))))
        .collect::<CliResult<_>>()?;
    let [i, j] = pair.as_slice() else {
        return Err(CliError::Usage("--vary takes two indices i,j".into()));
    };
    let (i, j) = (one_based(*i)?, one_based(*j)?);
    let ri = a.range;
    let rj = a.range2.unwrap_or(a.range);
    let base = scan_base(&a.c, &[i, j], ri.lo.max(rj.lo), a.strict)?;
    let axis = |r: RangeArg| GridAxis {
        lo: r.lo,
        hi: r.hi,
        steps: r.steps,
    };
    let scan = scan_2d(i, j, axis(ri), axis(rj), &base)?;
    let labels = scan.distinct_labels();
    println!("cells: {}", scan.values_i.len() * scan.values_j.len());
    println!("regions: {}", labels.len());
    for l in &labels {
        let count = scan.labels.iter().flatten().filter(|x| &x.zero_set == l).count();
        println!("zero_set {l}: {count}");
    }
    let manifest = RunManifest::new("scan2d", params(&a));
    let (ni, nj) = (format!("c_{}", i + 1), format!("c_{}", j + 1));
    emit(
        &a.output,
        &manifest,
        &scan,
        || {
            let mut csv = Csv::new([ni.clone(), nj.clone(), "zero_set".into(), "critical".into()]);
            for (a_, ci) in scan.values_i.iter().enumerate() {
                for (b, cj) in scan.values_j.iter().enumerate() {
                    let l = &scan.labels[a_][b];
                    csv.row(vec![num(*ci), num(*cj), format!("\"{}\"", l.zero_set), l.critical.to_string()]);
                }
            }
            csv.result("regions", labels.len().to_string());
            csv
        },
        || {
            let mut series: Vec<Series> = labels
                .iter()
                .map(|l| Series {
                    name: format!("zero {l}"),
                    points: Vec::new(),
                })
                .collect();
            for (a_, ci) in scan.values_i.iter().enumerate() {
                for (b, cj) in scan.values_j.iter().enumerate() {
                    let k = labels.iter().position(|l| *l == scan.labels[a_][b].zero_set).unwrap_or(0);
                    series[k].points.push((*ci, *cj));
                }
            }
            for curve in &scan.curves {
                series.push(Series {
                    name: curve.name.clone(),
                    points: curve.points.iter().map(|[x, y]| (*x, *y)).collect(),
                });
            }
            svg::scatter_chart("limit regions", &ni, &nj, &series)
        },
    )
}

/// Data written by `delay` without a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct DelayOutput {
    pub config: DelayConfig,
    pub trajectory: crate::dynamics::Trajectory,
    pub regime: crate::delay::RegimeReport,
}

fn cmd_delay(a: DelayArgs) -> CliResult<()> {
    let c = favorability(a.c.complete("--c")?, a.strict)?;
    let n = c.dim();
    let p0 = state(a.p0.as_ref(), n, "--p0")?;
    let coord = one_based(a.coord)?;
    if coord >= n {
        return Err(CliError::Usage(format!("--coord {} out of range 1..={n}", a.coord)));
    }
    if a.steps <= a.transient || a.steps - a.transient + 1 < a.window {
        return Err(CliError::Usage(format!(
            "steps - transient must cover the window ({} - {} < {})",
            a.steps, a.transient, a.window
        )));
    }
    let mode = match a.mode {
        ModeArg::PerComponent => BaselineMode::PerComponent,
        ModeArg::GlobalMax => BaselineMode::GlobalMax,
    };
    let cfg = DelayConfig::new(c, a.beta, a.tau)?.with_mode(mode);
    let manifest = RunManifest::new("delay", params(&a));

    if let Some(range) = a.sweep_beta {
        if range.lo < 0.0 {
            return Err(CliError::Usage("beta must be >= 0".into()));
        }
        let betas = linspace(range.lo, range.hi, range.steps);
        let sweep = SweepConfig {
            steps: a.steps,
            transient: a.transient,
            tol_fp: a.tol_fp,
            window: a.window,
            coord,
        };
        let samples = beta_sweep(&p0, &cfg, &betas, &sweep)?;
        let failed = samples.iter().filter(|s| s.error.is_some()).count();
        for regime in ["fixed_point", "periodic", "quasi_periodic", "aperiodic"] {
            let k = samples.iter().filter(|s| s.regime.map(|r| r.as_str()) == Some(regime)).count();
            println!("{regime}: {k}");
        }
        println!("failed: {failed}");
        return emit(
            &a.output,
            &manifest,
            &samples,
            || {
                let mut csv = Csv::new(["beta", "extremum"]);
                for s in &samples {
                    for e in &s.tail_extrema {
                        csv.row(vec![num(s.beta), num(*e)]);
                    }
                }
                for s in samples.iter().filter(|s| s.error.is_some()) {
                    csv.result("failed", format!("{} {}", num(s.beta), s.error.as_deref().unwrap_or("")));
                }
                csv
            },
            || {
                let points = samples
                    .iter()
                    .flat_map(|s| s.tail_extrema.iter().map(move |e| (s.beta, *e)))
                    .collect();
                svg::scatter_chart(
                    "bifurcation diagram",
                    "beta",
                    &format!("extrema of p_{}", coord + 1),
                    &[Series { name: format!("p_{}", coord + 1), points }],
                )
            },
        );
    }

    let trajectory = simulate_delayed(&p0, &cfg, a.steps, a.transient)?;
    let regime = classify_regime_coord(&trajectory, a.tol_fp, a.window, coord)?;
    println!("regime: {}", regime.regime);
    if let Some(q) = regime.period {
        println!("period: {q}");
    }
    println!("diameter: {:e}", regime.diameter);
    println!("extrema: {}", regime.tail_extrema.len());
    println!("final: {}", fmt_vec(trajectory.last().as_slice()));
    let data = DelayOutput {
        config: cfg,
        trajectory,
        regime,
    };
    emit(
        &a.output,
        &manifest,
        &data,
        || {
            let mut csv = trajectory_csv(&data.trajectory);
            csv.result("regime", data.regime.regime.as_str());
            if let Some(q) = data.regime.period {
                csv.result("period", q.to_string());
            }
            csv
        },
        || trajectory_plot("delayed trajectory", &data.trajectory),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_vector_arguments() {
        let v: VecArg = "0.8,_,0.9".parse().unwrap();
        assert_eq!(v.values, vec![Some(0.8), None, Some(0.9)]);
        assert!("0.8,x".parse::<VecArg>().is_err());
        assert!(v.complete("--c").is_err());
        let r: RangeArg = "0.05:1.0:200".parse().unwrap();
        assert_eq!((r.lo, r.hi, r.steps), (0.05, 1.0, 200));
        for bad in ["0.05:1.0", "1:0.5:10", "0:1:1", "a:1:3"] {
            assert!(bad.parse::<RangeArg>().is_err(), "{bad}");
        }
    }

    #[test]
    fn scan_base_requires_matching_placeholders() {
        let c: VecArg = "0.8,_,0.9".parse().unwrap();
        assert_eq!(scan_base(&c, &[1], 0.5, false).unwrap().as_slice(), &[0.8, 0.5, 0.9]);
        assert!(scan_base(&c, &[0], 0.5, false).is_err());
        assert!(scan_base(&c, &[3], 0.5, false).is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(CliError::from(Error::DimensionMismatch { expected: 3, got: 1 }).exit_code(), 2);
        assert_eq!(CliError::from(Error::NotFixedPoint(0.1)).exit_code(), 1);
        assert_eq!(
            CliError::from(Error::DomainViolation {
                step: 1,
                index: None,
                value: -1.0
            })
            .exit_code(),
            1
        );
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
