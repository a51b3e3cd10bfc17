//! The `escape-lab` command line.
//!
//! Every subcommand accepts `--config FILE` with `key = value` lines whose keys
//! are the long flag names; flags given on the command line win.

mod commands;
pub mod report;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;

#[derive(Debug, Parser)]
#[command(name = "escape-lab", version, about = "Short-time escape probabilities of compactly supported wave functions")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Escape from the support over a logarithmic sweep of time steps.
    EscapeScan(EscapeScanArgs),
    /// Right-ray escape beyond an offset, over time steps and offsets.
    OffsetScan(OffsetScanArgs),
    /// Repeated measurements on the support for several step counts.
    Zeno(ZenoArgs),
    /// Region probabilities for a product state on the square.
    Planar(PlanarArgs),
    /// Power-law fit of two columns of an earlier report.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Shape parameters shared by every state.
#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ShapeArgs {
    /// Gaussian width.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Gaussian centre.
    #[arg(long, allow_negative_numbers = true)]
    pub center: Option<f64>,
    /// Support interval; defaults to [-1, 0] (gaussians are untruncated without it).
    #[arg(long, allow_negative_numbers = true)]
    pub support_left: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub support_right: Option<f64>,
    /// File of `x,re[,im]` lines for `custom-samples`.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long, default_value_t = 512)]
    pub mesh_size: usize,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OutputArgs {
    /// `compact` or `standard`.
    #[arg(long, default_value = "compact")]
    pub convention: String,
    /// Report file; standard output when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// `key = value` defaults for any of the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub dt_min: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt_max: f64,
    #[arg(long, default_value_t = 12)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EscapeScanArgs {
    #[arg(long, default_value = "kinked-sine")]
    pub state: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    /// Offset of the rays from the support edges.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OffsetScanArgs {
    #[arg(long, default_value = "kinked-sine")]
    pub state: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value_t = 0.05)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 8)]
    pub delta_points: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ZenoArgs {
    #[arg(long, default_value = "kinked-sine")]
    pub state: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub shape: ShapeArgs,
    /// Total measurement time.
    #[arg(long = "T", default_value_t = 0.01)]
    #[serde(rename = "T")]
    pub total_time: f64,
    /// Comma-separated step counts.
    #[arg(long = "N", value_delimiter = ',', default_values_t = [25, 50, 100, 200])]
    #[serde(rename = "N")]
    pub steps: Vec<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PlanarArgs {
    #[arg(long, default_value = "kinked-sine")]
    pub state_x: String,
    #[arg(long, default_value = "kinked-sine")]
    pub state_y: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitArgs {
    /// CSV report written by another subcommand.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "dt")]
    pub x_col: String,
    #[arg(long, default_value = "escape_total")]
    pub y_col: String,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Failure classes, one per exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::OracleNotConverged { .. }
            | Error::TailTooLarge { .. }
            | Error::DivergentMoment(_)
            | Error::BadFitData(_)
            | Error::NormUnderflow(_)
            | Error::UnresolvedBoundaryLayer { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Long flag names a config file may set for `subcommand`.
fn config_keys(subcommand: &str) -> Option<Vec<String>> {
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(subcommand)?;
    Some(
        sub.get_arguments()
            .filter_map(|a| a.get_long())
            .filter(|l| !matches!(*l, "config" | "help"))
            .map(str::to_string)
            .collect(),
    )
}

fn parse_config(text: &str, allowed: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected `key = value`", k + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if !allowed.iter().any(|a| a == key) {
            return Err(CliError::Config(format!("config line {}: unknown key `{key}`", k + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Insert the entries of `--config FILE` ahead of the command-line flags so
/// that the latter override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(sub) = args.get(1).and_then(|s| s.to_str()).map(str::to_string) else {
        return Ok(args);
    };
    let mut path = None;
    for (k, a) in args.iter().enumerate().skip(2) {
        let Some(a) = a.to_str() else { continue };
        if a == "--config" {
            path = args.get(k + 1).cloned().map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let (Some(path), Some(allowed)) = (path, config_keys(&sub)) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let entries = parse_config(&text, &allowed)?;
    let mut out: Vec<OsString> = args[..2].to_vec();
    out.extend(entries.into_iter().map(|(k, v)| OsString::from(format!("--{k}={v}"))));
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

/// Run the command line and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
