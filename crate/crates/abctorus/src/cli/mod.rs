//! Batch front-end: builder verification, approximation sweeps, scenario
//! runs with diagnostics, inequality audit trails and orbit traces.
//!
//! Exit codes: 0 success, 1 bad flags or parameters, 2 a check failed.

mod abc;
mod approx;
mod blockslide;
mod bounds;
pub mod config;
pub mod manifest;
mod orbit;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::abc_engine::{AbcError, Model};
use crate::analytic_approx::AnalyticError;
use crate::diagnostics::DiagError;
use crate::exact_torus::TorusError;
use crate::tower_bounds::TowerError;

pub use abc::run_abc;
pub use config::RunConfig;
pub use manifest::Manifest;

/// Environment variable read when no seed is given.
pub const SEED_ENV: &str = "ABCTORUS_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config or parameters (exit 1).
    #[error("{0}")]
    Usage(String),
    /// A verification ran and failed (exit 2).
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Failed(_) => 2,
        }
    }
}

macro_rules! usage_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Usage(e.to_string())
            }
        }
    )*};
}

usage_from!(
    TorusError,
    AbcError,
    AnalyticError,
    DiagError,
    std::io::Error
);

impl From<TowerError> for CliError {
    fn from(e: TowerError) -> Self {
        match e {
            TowerError::LinkFailed { .. } | TowerError::ItemViolated { .. } => {
                CliError::Failed(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "abctorus",
    version,
    about = "Finite-stage approximation-by-conjugation constructions on the torus"
)]
pub struct Cli {
    /// Worker threads for the parallel parts (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a block-slide map and verify its induced permutation.
    Blockslide(BlockslideArgs),
    /// Sweep an entire approximation against its step function.
    Approx(ApproxArgs),
    /// Build a scenario from a config file and run its diagnostics.
    Abc(AbcArgs),
    /// Check the convergence inequalities and write audit trails.
    Bounds(BoundsArgs),
    /// Trace an orbit of a stage map.
    Orbit(OrbitArgs),
}

#[derive(Args, Debug)]
pub struct BlockslideArgs {
    /// interchange, rearrange, grid-refine, abc, decompose or minimal.
    #[arg(long)]
    pub builder: String,
    #[arg(long, default_value_t = 2)]
    pub k: u64,
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    #[arg(long, default_value_t = 2)]
    pub l: u64,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub r: u64,
    /// Index function of `abc`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub a: Vec<u64>,
    /// Shift count of `rearrange`.
    #[arg(long, default_value_t = 0)]
    pub i: u64,
    /// First column of `rearrange`.
    #[arg(long, default_value_t = 0)]
    pub c: u64,
    /// Quotient permutation for `decompose`: `k·l` whitespace-separated images.
    #[arg(long)]
    pub perm_file: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ApproxArgs {
    /// Stage index of a circle-stage shear.
    #[arg(long)]
    pub stage: Option<u32>,
    /// psi1, psi2 or psi3.
    #[arg(long)]
    pub which: Option<String>,
    /// Step values on a uniform grid, as integers or `a/b`, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Vec<String>,
    /// Number of periods `N` of the step function.
    #[arg(long, default_value_t = 1)]
    pub n: u64,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// `l` of the stage shear.
    #[arg(long, default_value_t = 4)]
    pub l: u64,
    /// `q` of the stage shear.
    #[arg(long, default_value_t = 3)]
    pub q: u64,
    #[arg(long, default_value_t = 2000)]
    pub samples: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AbcArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed and the environment.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Convergence ledger for generated stage data.
    #[arg(long)]
    pub ledger: bool,
    #[arg(long, default_value_t = 5)]
    pub stages: u32,
    /// Ledger recipe file with keys `stages`, `rho1`, `violate`.
    #[arg(long)]
    pub recipe: Option<PathBuf>,
    /// Liouville certificate of a generated recipe at `(k, level)`.
    #[arg(long)]
    pub liouville_verify: bool,
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    /// Check a rational `α = a/b` through its binary truncations instead.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Generate and verify periodic approximations of a translation.
    #[arg(long)]
    pub translation: bool,
    #[arg(long, default_value_t = 2)]
    pub h: usize,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Start point, coordinates as `a/b`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<String>,
    #[arg(long, default_value_t = 10)]
    pub steps: u64,
    /// Stage index (default: the last stage).
    #[arg(long)]
    pub level: Option<u32>,
    /// exact or analytic (default: the config model).
    #[arg(long)]
    pub model: Option<Model>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The seed from the flag, else the config, else [`SEED_ENV`], else 0.
pub fn resolve_seed(
    flag: Option<u64>,
    config: Option<u64>,
) -> Result<(u64, &'static str), CliError> {
    if let Some(s) = flag {
        return Ok((s, "flag"));
    }
    if let Some(s) = config {
        return Ok((s, "config"));
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(|s| (s, "env"))
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}: cannot parse {v:?}"))),
        Err(_) => Ok((0, "default")),
    }
}

/// Writes `name` under `dir`, creating the directory.
pub(crate) fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Parses `a/b` or an integer.
pub(crate) fn parse_rational(s: &str) -> Result<crate::exact_torus::Rational, CliError> {
    use num_bigint::BigInt;
    let bad = || CliError::Usage(format!("cannot parse rational {s:?}"));
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d == BigInt::from(0) {
        return Err(bad());
    }
    Ok(crate::exact_torus::Rational::new(n, d))
}

fn dispatch(cli: Cli, out: &mut (dyn Write + Send)) -> Result<(), CliError> {
    match cli.command {
        Command::Blockslide(a) => blockslide::run(&a, out),
        Command::Approx(a) => approx::run(&a, out),
        Command::Abc(a) => abc::run(&a, out),
        Command::Bounds(a) => bounds::run(&a, out),
        Command::Orbit(a) => orbit::run(&a, out),
    }
}

/// Runs the command line `args` (program name first), writing reports to
/// `out` and diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let jobs = cli.jobs;
    let result = match jobs {
        Some(0) => Err(CliError::Usage("--jobs must be positive".into())),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| dispatch(cli, out)),
            Err(e) => Err(CliError::Usage(e.to_string())),
        },
        None => dispatch(cli, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
