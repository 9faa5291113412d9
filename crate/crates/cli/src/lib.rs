//! Batch front end for the `twicecens` estimators.
//!
//! [`run`] takes a full argv (program name first) and never exits the
//! process; `main` only forwards its [`CommandResult`].

use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use twicecens::simulate::{BootstrapReport, GENERATOR};
use twicecens::turnbull::Initialization;
use twicecens::{
    bootstrap_ci, bootstrap_coverage, check_bounds, convergence_study, fit_model_one, fit_model_two, fit_turnbull,
    group, normality_study, parse_dataset, sample_diagnostics, sample_latent, validate_for_model, CsvFormat, Error,
    GroupedSample, LatentSpec, Model, Observation, TurnbullOptions,
};

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommandResult {
    /// 0 success, 1 runtime failure, 2 usage/parse error, 3 model-validation failure
    pub exit_code: i32,
    pub emitted_files: Vec<PathBuf>,
    /// warnings and notes, one per line
    pub log: Vec<String>,
    /// text destined for standard output
    pub stdout: String,
    /// `error[kind]: message` when `exit_code != 0`
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FailureKind {
    Usage,
    Parse,
    Validation,
    Numerical,
    Runtime,
}

impl FailureKind {
    fn exit_code(self) -> i32 {
        match self {
            FailureKind::Usage | FailureKind::Parse => 2,
            FailureKind::Validation => 3,
            FailureKind::Numerical | FailureKind::Runtime => 1,
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::Usage => "usage",
            FailureKind::Parse => "parse",
            FailureKind::Validation => "validation",
            FailureKind::Numerical => "numerical",
            FailureKind::Runtime => "runtime",
        })
    }
}

#[derive(Debug)]
struct Failure {
    kind: FailureKind,
    message: String,
}

impl Failure {
    fn new(kind: FailureKind, message: impl Into<String>) -> Self {
        Failure { kind, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Parse(_) | Error::Spec(_) => FailureKind::Parse,
            Error::ModelViolation(_) | Error::Unidentified(_) => FailureKind::Validation,
            Error::NumericalInconsistency(_) => FailureKind::Numerical,
            Error::Domain(_) | Error::DegenerateSupport(_) => FailureKind::Runtime,
        };
        Failure::new(kind, e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "twicecens", version, about = "Product-limit estimation for twice-censored data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the Model I or Model II product-limit estimator
    Estimate(EstimateArgs),
    /// Fit Turnbull's self-consistent estimator
    Turnbull(TurnbullArgs),
    /// Fit all three estimators and report sandwich violations
    Bounds(BoundsArgs),
    /// Draw an observed dataset from a latent spec
    Simulate(SimulateArgs),
    /// Sup-norm error of the estimator across sample sizes
    Convergence(ConvergenceArgs),
    /// Percentile bootstrap intervals, or their coverage under a latent spec
    Bootstrap(BootstrapArgs),
    /// Sampling distribution of the estimator at fixed points
    Normality(NormalityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FitModel {
    One,
    Two,
}

impl From<FitModel> for Model {
    fn from(m: FitModel) -> Model {
        match m {
            FitModel::One => Model::One,
            FitModel::Two => Model::Two,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Uniform,
    Empirical,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// observation file with rows `y,a`
    #[arg(long)]
    input: PathBuf,
    /// field delimiter of the input file
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    model: FitModel,
    #[command(flatten)]
    input: InputArgs,
    /// write here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// number of bootstrap resamples for pointwise intervals (TSV only)
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct TurnbullArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = twicecens::turnbull::DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value_t = twicecens::turnbull::DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Uniform)]
    init: InitArg,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// also write the full report as JSON
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// latent spec document (TOML)
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [500, 2000, 10000])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    /// restrict errors to `[a, b]`, given as `a,b`
    #[arg(long, value_delimiter = ',', num_args = 2)]
    region: Option<Vec<f64>>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BootstrapArgs {
    /// observation file; intervals are computed for this dataset
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    input: Option<PathBuf>,
    /// latent spec; coverage is estimated over simulated datasets
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// model for `--input` (a spec carries its own)
    #[arg(long, value_enum)]
    model: Option<FitModel>,
    #[arg(long, value_delimiter = ',', required = true)]
    t: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    resamples: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long)]
    seed: u64,
    /// dataset size per replicate (with `--spec`)
    #[arg(long)]
    n: Option<usize>,
    /// replicates (with `--spec`)
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NormalityArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Serialized fit of a Model I or Model II estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FitDocument {
    pub model: Model,
    pub n: usize,
    pub grid: Vec<f64>,
    /// `survival_t` values on the grid (Model I)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival: Option<Vec<f64>>,
    /// `F_T([0, t])` on the grid (Model II)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cdf: Option<Vec<f64>>,
    /// `L⁻` increments (Model I) or `M⁻` increments (Model II)
    pub hazard: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_at_infinity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_at_zero: Option<f64>,
    pub warnings: Vec<String>,
    /// absent when the data has no label-0 observation
    pub diagnostics: Option<DiagnosticsDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DiagnosticsDocument {
    pub t00: f64,
    pub condition11: f64,
    pub identification_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TurnbullDocument {
    pub model: Model,
    pub n: usize,
    /// finite support points
    pub support: Vec<f64>,
    pub masses: Vec<f64>,
    pub mass_at_infinity: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BoundsDocument {
    pub n: usize,
    pub max_lower_violation: f64,
    pub max_upper_violation: f64,
}

/// Serialize to pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

struct Ctx {
    log: Vec<String>,
    stdout: String,
    emitted: Vec<PathBuf>,
}

impl Ctx {
    fn emit(&mut self, output: Option<&Path>, text: String) -> Result<(), Failure> {
        match output {
            Some(path) => {
                fs::write(path, text.as_bytes())
                    .map_err(|e| Failure::new(FailureKind::Runtime, format!("{}: {e}", path.display())))?;
                self.emitted.push(path.to_path_buf());
            }
            None => self.stdout.push_str(&text),
        }
        Ok(())
    }
}

/// Parse `argv` (program name first) and execute the named subcommand.
pub fn run<I, S>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return CommandResult { stdout: e.to_string(), ..Default::default() };
            }
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return failed(Failure::new(FailureKind::Usage, first), Vec::new(), Vec::new());
        }
    };
    let mut ctx = Ctx { log: Vec::new(), stdout: String::new(), emitted: Vec::new() };
    let outcome = match &cli.command {
        Command::Estimate(a) => estimate(a, &mut ctx),
        Command::Turnbull(a) => turnbull(a, &mut ctx),
        Command::Bounds(a) => bounds(a, &mut ctx),
        Command::Simulate(a) => simulate(a, &mut ctx),
        Command::Convergence(a) => convergence(a, &mut ctx),
        Command::Bootstrap(a) => bootstrap(a, &mut ctx),
        Command::Normality(a) => normality(a, &mut ctx),
    };
    match outcome {
        Ok(()) => {
            CommandResult { exit_code: 0, emitted_files: ctx.emitted, log: ctx.log, stdout: ctx.stdout, error: None }
        }
        Err(f) => failed(f, ctx.emitted, ctx.log),
    }
}

fn failed(f: Failure, emitted: Vec<PathBuf>, log: Vec<String>) -> CommandResult {
    let message = f.message.replace('\n', " ");
    CommandResult {
        exit_code: f.kind.exit_code(),
        emitted_files: emitted,
        log,
        stdout: String::new(),
        error: Some(format!("error[{}]: {message}", f.kind)),
    }
}

fn read_observations(path: &Path, delimiter: char) -> Result<Vec<Observation>, Failure> {
    let file =
        fs::File::open(path).map_err(|e| Failure::new(FailureKind::Runtime, format!("{}: {e}", path.display())))?;
    parse_dataset(BufReader::new(file), CsvFormat { delimiter })
        .map_err(|e| Failure::new(FailureKind::Parse, format!("{}: {e}", path.display())))
}

fn read_spec(path: &Path) -> Result<LatentSpec, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::new(FailureKind::Runtime, format!("{}: {e}", path.display())))?;
    Ok(LatentSpec::from_toml_str(&text)?)
}

fn grouped_for(obs: &[Observation], model: Model) -> Result<GroupedSample, Failure> {
    let g = group(obs)?;
    let report = validate_for_model(&g, model);
    if !report.is_ok() {
        let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::new(FailureKind::Validation, format!("model {model}: {}", list.join("; "))));
    }
    Ok(g)
}

fn estimate(a: &EstimateArgs, ctx: &mut Ctx) -> Result<(), Failure> {
    let model = Model::from(a.model);
    let obs = read_observations(&a.input.input, a.input.delimiter)?;
    let g = grouped_for(&obs, model)?;
    let doc = fit_document(&g, model)?;
    ctx.log.extend(doc.warnings.iter().map(|w| format!("warning: {w}")));
    if let Some(d) = &doc.diagnostics {
        ctx.log.push(format!("condition11 = {} (t00 = {})", d.condition11, d.t00));
    }
    let text = match a.format {
        Format::Json => {
            if a.bootstrap.is_some() {
                return Err(Failure::new(FailureKind::Usage, "--bootstrap is only available with --format tsv"));
            }
            to_json(&doc)
        }
        Format::Tsv => {
            let report = match a.bootstrap {
                Some(b) => {
                    let mut t_points = vec![0.0];
                    t_points.extend(doc.grid.iter().filter(|&&t| t > 0.0));
                    let r = bootstrap_ci(&obs, model, &t_points, b, a.level, a.seed)?;
                    if r.failed_resamples > 0 {
                        ctx.log.push(format!("warning: {} bootstrap resamples failed", r.failed_resamples));
                    }
                    Some(r)
                }
                None => None,
            };
            fit_tsv(&doc, report.as_ref())
        }
    };
    ctx.emit(a.output.as_deref(), text)
}

/// Fit `model` on grouped data and package it for serialization.
pub fn fit_document(g: &GroupedSample, model: Model) -> Result<FitDocument, Error> {
    let diagnostics = if g.count_label(0) > 0 {
        let d = sample_diagnostics(g)?;
        Some(DiagnosticsDocument { t00: d.t00, condition11: d.condition11, identification_flag: d.identification_flag })
    } else {
        None
    };
    match model {
        Model::One => {
            let fit = fit_model_one(g)?;
            Ok(FitDocument {
                model,
                n: g.n(),
                grid: fit.grid.clone(),
                survival: Some(fit.survival_t.values().to_vec()),
                cdf: None,
                hazard: fit.hazard_t.increments().to_vec(),
                mass_at_infinity: Some(fit.mass_at_infinity),
                mass_at_zero: None,
                warnings: fit.warnings.iter().map(|w| w.to_string()).collect(),
                diagnostics,
            })
        }
        Model::Two => {
            let fit = fit_model_two(g)?;
            Ok(FitDocument {
                model,
                n: g.n(),
                grid: fit.grid.clone(),
                survival: None,
                cdf: Some(fit.cdf_t.values().to_vec()),
                hazard: fit.reverse_hazard_t.increments().to_vec(),
                mass_at_infinity: None,
                mass_at_zero: Some(fit.mass_at_zero),
                warnings: fit.warnings.iter().map(|w| w.to_string()).collect(),
                diagnostics,
            })
        }
        Model::Turnbull => Err(Error::Domain("use the turnbull subcommand for the self-consistent fit".into())),
    }
}

/// Plot-ready table: a leading row at `t = 0` for the value before the
/// first grid point, then one row per grid point.
fn fit_tsv(doc: &FitDocument, report: Option<&BootstrapReport>) -> String {
    let (values, before, survival) = match (&doc.survival, &doc.cdf) {
        (Some(s), _) => (s.as_slice(), 1.0, true),
        (None, Some(c)) => (c.as_slice(), doc.mass_at_zero.unwrap_or(0.0), false),
        (None, None) => (&[][..], 0.0, false),
    };
    let mut rows: Vec<(f64, f64)> = vec![(0.0, before)];
    rows.extend(doc.grid.iter().copied().zip(values.iter().copied()));
    if rows.len() > 1 && rows[1].0 == 0.0 {
        rows.remove(0);
    }
    let mut out = String::from(if report.is_some() { "t\tvalue\tlower\tupper\n" } else { "t\tvalue\n" });
    for (i, (t, v)) in rows.iter().enumerate() {
        match report {
            Some(r) => {
                let ci = &r.intervals[i];
                let (lo, hi) = if survival { (1.0 - ci.upper, 1.0 - ci.lower) } else { (ci.lower, ci.upper) };
                out.push_str(&format!("{t}\t{v}\t{lo}\t{hi}\n"));
            }
            None => out.push_str(&format!("{t}\t{v}\n")),
        }
    }
    out
}

fn turnbull(a: &TurnbullArgs, ctx: &mut Ctx) -> Result<(), Failure> {
    let obs = read_observations(&a.input.input, a.input.delimiter)?;
    let g = grouped_for(&obs, Model::Turnbull)?;
    let init = match a.init {
        InitArg::Uniform => Initialization::Uniform,
        InitArg::Empirical => Initialization::Empirical,
    };
    let fit = fit_turnbull(&g, TurnbullOptions { tolerance: a.tolerance, max_iterations: a.max_iterations, init })?;
    if !fit.converged {
        ctx.log
            .push(format!("warning: not converged after {} iterations (residual {:e})", fit.iterations, fit.residual));
    }
    let finite = fit.support.iter().take_while(|t| t.is_finite()).count();
    let doc = TurnbullDocument {
        model: Model::Turnbull,
        n: fit.sample_size,
        support: fit.support[..finite].to_vec(),
        masses: fit.masses[..finite].to_vec(),
        mass_at_infinity: fit.mass_at_infinity(),
        iterations: fit.iterations,
        residual: fit.residual,
        converged: fit.converged,
    };
    ctx.emit(a.output.as_deref(), to_json(&doc))
}

fn bounds(a: &BoundsArgs, ctx: &mut Ctx) -> Result<(), Failure> {
    let obs = read_observations(&a.input.input, a.input.delimiter)?;
    let g = grouped_for(&obs, Model::One)?;
    let one = fit_model_one(&g)?;
    let two = fit_model_two(&g)?;
    let t = fit_turnbull(&g, TurnbullOptions::default())?;
    if !t.converged {
        ctx.log.push(format!("warning: Turnbull fit not converged (residual {:e})", t.residual));
    }
    let report = check_bounds(&one, &t, &two)?;
    ctx.stdout.push_str(&format!(
        "maxLowerViolation {}\nmaxUpperViolation {}\n",
        report.max_lower_violation, report.max_upper_violation
    ));
    if let Some(path) = &a.output {
        let doc = BoundsDocument {
            n: g.n(),
            max_lower_violation: report.max_lower_violation,
            max_upper_violation: report.max_upper_violation,
        };
        ctx.emit(Some(path), to_json(&doc))?;
    }
    Ok(())
}

fn simulate(a: &SimulateArgs, ctx: &mut Ctx) -> Result<(), Failure> {
    let spec = read_spec(&a.spec.spec)?;
    let obs = sample_latent(&spec, a.n, a.spec.seed)?;
    let mut text = String::from("y,a\n");
    for o in &obs {
        text.push_str(&format!("{},{}\n", o.y(), o.a()));
    }
    ctx.log.push(format!("generator {GENERATOR}, seed {}", a.spec.seed));
    ctx.emit(a.output.as_deref(), text)
}

fn convergence(a: &ConvergenceArgs, ctx: &mut Ctx) -> Result<(), Failure> {
    let spec = read_spec(&a.spec.spec)?;
    let region = a.region.as_ref().map(|r| (r[0], r[1]));
    let report = convergence_study(&spec, &a.sizes, a.reps, a.spec.seed, region)?;
    ctx.emit(a.output.as_deref(), to_json(&report))
}

fn bootstrap(a: &BootstrapArgs, ctx: &mut Ctx) -> Result<(), Failure> {
    if let Some(path) = &a.spec {
        let spec = read_spec(path)?;
        let (Some(n), Some(reps)) = (a.n, a.reps) else {
            return Err(Failure::new(FailureKind::Usage, "--spec requires --n and --reps"));
        };
        let [t] = a.t.as_slice() else {
            return Err(Failure::new(FailureKind::Usage, "coverage takes a single --t"));
        };
        let report = bootstrap_coverage(&spec, *t, n, reps, a.resamples, a.level, a.seed)?;
        if let Some(c) = &report.coverage {
            ctx.log.push(format!("coverage {} at t = {}", c.coverage, c.t));
        }
        return ctx.emit(a.output.as_deref(), to_json(&report));
    }
    let input = a.input.as_ref().expect("clap enforces --input or --spec");
    let Some(model) = a.model else {
        return Err(Failure::new(FailureKind::Usage, "--input requires --model"));
    };
    let model = Model::from(model);
    let obs = read_observations(input, a.delimiter)?;
    grouped_for(&obs, model)?;
    let report = bootstrap_ci(&obs, model, &a.t, a.resamples, a.level, a.seed)?;
    if report.failed_resamples > 0 {
        ctx.log.push(format!("warning: {} bootstrap resamples failed", report.failed_resamples));
    }
    ctx.emit(a.output.as_deref(), to_json(&report))
}

fn normality(a: &NormalityArgs, ctx: &mut Ctx) -> Result<(), Failure> {
    let spec = read_spec(&a.spec.spec)?;
    let report = normality_study(&spec, a.t, a.n, a.reps, a.spec.seed)?;
    if let Some(c) = report.condition11 {
        ctx.log.push(format!("condition11 = {c}"));
    }
    ctx.emit(a.output.as_deref(), to_json(&report))
}
