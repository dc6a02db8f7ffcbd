mod commands;
mod selftest;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use deformkit::Error;

/// Seed used when neither `--seed` nor `DEFORMKIT_SEED` is given.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Parser, Debug)]
#[command(
    name = "deformkit",
    version,
    about = "Deformation experiments for polynomial roots and zero sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report here (atomically) instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// RNG seed; falls back to DEFORMKIT_SEED, then to 1729.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Omit the timestamp so identical runs give identical bytes.
    #[arg(long, global = true)]
    no_timestamp: bool,

    /// Report errors on standard error as JSON.
    #[arg(long, global = true)]
    json_errors: bool,

    /// Run the subcommand's built-in examples instead of real inputs.
    #[arg(long, global = true)]
    selftest: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roots of a univariate polynomial, clustered into multiplicities.
    Roots(RootsArgs),
    /// Bottleneck matching between the roots of two polynomials.
    Align(AlignArgs),
    /// Largest coefficient perturbation keeping roots eps-aligned.
    Modulus(ModulusArgs),
    /// Hensel-lift the simple roots of f to jet roots of g.
    JetLift(JetLiftArgs),
    /// Sup of |g - f| over the grid of H(T).
    Lemma(LemmaArgs),
    /// Check V(f) ∩ H(T) ⊆ V_eps(g) on sampled points.
    Contain(ContainArgs),
    /// Jet-level checks of a polynomial system against its zero set.
    Variety(VarietyArgs),
    /// Hausdorff distance between two point clouds.
    Hausdorff(HausdorffArgs),
    /// The line pair whose zero sets separate linearly.
    Counterexample(CounterexampleArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Roots(_) => "roots",
            Command::Align(_) => "align",
            Command::Modulus(_) => "modulus",
            Command::JetLift(_) => "jet-lift",
            Command::Lemma(_) => "lemma",
            Command::Contain(_) => "contain",
            Command::Variety(_) => "variety",
            Command::Hausdorff(_) => "hausdorff",
            Command::Counterexample(_) => "counterexample",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct RootsArgs {
    /// Univariate polynomial JSON.
    #[arg(long)]
    pub f: Option<PathBuf>,
    #[arg(long, default_value_t = deformkit::uniroots::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = deformkit::uniroots::DEFAULT_CLUSTER_RADIUS)]
    pub cluster_radius: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct AlignArgs {
    #[arg(long)]
    pub f: Option<PathBuf>,
    #[arg(long)]
    pub g: Option<PathBuf>,
    /// Report whether the bottleneck is below this.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = deformkit::uniroots::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct ModulusArgs {
    #[arg(long)]
    pub f: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct JetLiftArgs {
    #[arg(long)]
    pub f: Option<PathBuf>,
    /// Jet polynomial JSON.
    #[arg(long, conflicts_with = "q")]
    pub g: Option<PathBuf>,
    /// Polynomial q giving g = f + ε^exp q.
    #[arg(long)]
    pub q: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub exp: i32,
    #[arg(long, default_value_t = deformkit::jets::DEFAULT_ORDER)]
    pub order: i32,
}

#[derive(Args, Debug, Serialize)]
pub struct LemmaArgs {
    #[arg(long)]
    pub f: Option<PathBuf>,
    /// Perturbed polynomial; a random deformation at 0.9 of the bound when absent.
    #[arg(long)]
    pub g: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[serde(rename = "T")]
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ContainArgs {
    #[arg(long)]
    pub f: Option<PathBuf>,
    #[arg(long)]
    pub g: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[serde(rename = "T")]
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    #[arg(long, default_value_t = deformkit::varieties::DEFAULT_MEMBERSHIP_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct VarietyArgs {
    /// System JSON `{"polys": [...]}`.
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// JSON array of jet polynomials, one per equation; random first-order
    /// deformations when absent.
    #[arg(long)]
    pub jets: Option<PathBuf>,
    /// Sample points CSV; samples the first hypersurface when absent.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[serde(rename = "T")]
    #[arg(long = "T", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long, default_value_t = deformkit::jets::DEFAULT_ORDER)]
    pub order: i32,
    #[arg(long, default_value_t = deformkit::varieties::DEFAULT_MEMBERSHIP_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 2)]
    pub perturbations: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct HausdorffArgs {
    /// Point cloud CSV.
    #[arg(long)]
    pub w: Option<PathBuf>,
    #[arg(long)]
    pub z: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long)]
    pub delta_prime: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[serde(rename = "T")]
    #[arg(long = "T")]
    pub t: Option<f64>,
    #[arg(long, default_value_t = deformkit::metrics::DEFAULT_COUNTEREXAMPLE_GRID)]
    pub grid: usize,
}

/// What a subcommand produced.
pub enum Output {
    Report(Value),
    Csv(String),
}

/// Failures that are not library errors.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if e.is_numeric() => 2,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Lib(e) if e.is_numeric() => "numeric",
            _ => "input",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Input(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("DEFORMKIT_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Input(format!("DEFORMKIT_SEED={v:?} is not an unsigned integer"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn config_of<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn dispatch(cli: &Cli, seed: u64) -> Result<(Value, Output), CliError> {
    let name = cli.command.name();
    if cli.selftest {
        let config = json!({});
        return Ok((config, Output::Report(selftest::run(name)?)));
    }
    let format = cli.format;
    Ok(match &cli.command {
        Command::Roots(a) => (config_of(a), commands::roots(a, format)?),
        Command::Align(a) => (config_of(a), commands::align(a, format)?),
        Command::Modulus(a) => (config_of(a), commands::modulus(a, seed, format)?),
        Command::JetLift(a) => (config_of(a), commands::jet_lift(a, format)?),
        Command::Lemma(a) => (config_of(a), commands::lemma(a, seed, format)?),
        Command::Contain(a) => (config_of(a), commands::contain(a, seed, format)?),
        Command::Variety(a) => (config_of(a), commands::variety(a, seed, format)?),
        Command::Hausdorff(a) => (config_of(a), commands::hausdorff(a, format)?),
        Command::Counterexample(a) => (config_of(a), commands::counterexample(a, format)?),
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<Option<bool>, CliError> {
    let seed = resolve_seed(cli.seed)?;
    let (mut config, output) = dispatch(cli, seed)?;
    if let Value::Object(map) = &mut config {
        map.insert("seed".into(), json!(seed));
        map.insert("format".into(), json!(cli.format));
        map.insert("selftest".into(), json!(cli.selftest));
    }
    let mut verdict = None;
    let bytes = match output {
        Output::Csv(text) => text.into_bytes(),
        Output::Report(result) => {
            if cli.selftest {
                verdict = result.get("pass").and_then(Value::as_bool);
            }
            let mut report = serde_json::Map::new();
            report.insert("tool".into(), json!("deformkit"));
            report.insert("version".into(), json!(deformkit::VERSION));
            report.insert("subcommand".into(), json!(cli.command.name()));
            report.insert("config".into(), config);
            if !cli.no_timestamp {
                let now = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                report.insert("timestamp".into(), json!(now));
            }
            report.insert("result".into(), result);
            let mut text =
                serde_json::to_string_pretty(&Value::Object(report)).expect("report serializes");
            text.push('\n');
            text.into_bytes()
        }
    };
    match &cli.out {
        Some(path) => write_atomic(path, &bytes)?,
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Input(format!("stdout: {e}")))?,
    }
    Ok(verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Some(false)) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            if cli.json_errors {
                let body = json!({
                    "error": {
                        "subcommand": cli.command.name(),
                        "kind": e.kind(),
                        "message": e.message(),
                        "exit_code": code,
                    }
                });
                eprintln!("{body}");
            } else {
                eprintln!("deformkit {}: {}", cli.command.name(), e.message());
            }
            ExitCode::from(code)
        }
    }
}
