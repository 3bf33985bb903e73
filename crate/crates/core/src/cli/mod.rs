//! Command-line front end.
//!
//! Three subcommands share one set of flags: `curve` writes probability
//! curves, `check` cross-validates closed forms against the state machine,
//! the Lindblad integrator and Monte Carlo, and `trajectories` dumps sampled
//! detector records as JSON lines.
//!
//! Exit codes: 0 success, 1 validation error, 2 tolerance failure, 3 I/O error.

mod check;
pub mod config;
mod output;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use check::{run_check, CheckReport};
pub use config::{ConfigFile, NList, OutputFormat, ParamOverrides, Preset, RunConfig, SourceSelection};
pub use output::{curve_csv, curve_json, trajectories_jsonl, TrajectoryRecord};

use config::{CommandDefaults, DEFAULT_RUNS, DEFAULT_TRAJECTORY_RUNS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Tolerance(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Tolerance(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Tolerance(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cavity-zeno",
    version,
    about = "Zeno effect in two coupled lossy cavities probed by atoms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probability of each scheme's selected record as a function of N.
    Curve(CommonArgs),
    /// Cross-check closed forms, state machine, Lindblad integrator and Monte Carlo.
    Check(CommonArgs),
    /// Sample unconditioned detector records, one JSON object per line.
    Trajectories(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file; flags on the command line override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in parameter set: fig1, fig2 or fig4.
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Measurement scheme, e.g. perfect-detectors, only-dg-inefficient,
    /// only-de-no-click, no-intermediate-ideal, no-intermediate-lossy.
    #[arg(long)]
    pub kind: Option<crate::ProtocolKind>,
    /// Comma-separated N values; `a..b` ranges allowed.
    #[arg(long)]
    pub n: Option<NList>,
    /// Sweep N = 1..=n-max when --n is not given.
    #[arg(long)]
    pub n_max: Option<u32>,
    /// closed-form, state-machine, monte-carlo or all.
    #[arg(long)]
    pub source: Option<SourceSelection>,
    /// Ground-state detector efficiency.
    #[arg(long)]
    pub p_g: Option<f64>,
    /// Excited-state detector efficiency.
    #[arg(long)]
    pub p_e: Option<f64>,
    /// Cavity coupling g (rad/s).
    #[arg(long)]
    pub g: Option<f64>,
    /// Cavity amplitude decay rate k (1/s).
    #[arg(long)]
    pub k: Option<f64>,
    /// Vacuum Rabi frequency (rad/s).
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Total exchange time T0 (s); defaults to pi/2g.
    #[arg(long)]
    pub t0: Option<f64>,
    /// Monte Carlo runs per point.
    #[arg(long)]
    pub runs: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv, json or jsonl.
    #[arg(long)]
    pub format: Option<OutputFormat>,
}

impl CommonArgs {
    fn to_config(&self) -> ConfigFile {
        ConfigFile {
            preset: self.preset,
            kind: self.kind,
            params: ParamOverrides {
                omega: None,
                g: self.g,
                k: self.k,
                omega0: self.omega0,
                p_g: self.p_g,
                p_e: self.p_e,
                t0: self.t0,
            },
            n: self.n.clone().map(|l| l.0),
            n_max: self.n_max,
            source: self.source,
            runs: self.runs,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
        }
    }

    /// Config file (if any) overridden by the flags.
    pub fn resolve(&self, defaults: &CommandDefaults) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        RunConfig::resolve(file.overridden_by(self.to_config()), defaults)
    }
}

const CURVE_DEFAULTS: CommandDefaults = CommandDefaults {
    format: OutputFormat::Csv,
    runs: DEFAULT_RUNS,
    n_values: |m| (1..=m).collect(),
    all_kinds: false,
};

const CHECK_DEFAULTS: CommandDefaults = CommandDefaults {
    format: OutputFormat::Json,
    runs: DEFAULT_RUNS,
    n_values: |m| [1, 2, 3, 5, 10, 20, 50].into_iter().filter(|&n| n <= m).collect(),
    all_kinds: true,
};

const TRAJECTORY_DEFAULTS: CommandDefaults = CommandDefaults {
    format: OutputFormat::Jsonl,
    runs: DEFAULT_TRAJECTORY_RUNS,
    n_values: |_| vec![1],
    all_kinds: false,
};

fn require_format(cfg: &RunConfig, allowed: &[OutputFormat], command: &str) -> Result<(), CliError> {
    if allowed.contains(&cfg.format) {
        Ok(())
    } else {
        let names: Vec<String> = allowed.iter().map(ToString::to_string).collect();
        Err(CliError::Validation(format!(
            "`{command}` writes {}, not {}",
            names.join(" or "),
            cfg.format
        )))
    }
}

/// Write `contents` to `--out`, or to standard output.
fn emit(cfg: &RunConfig, contents: &str) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            w.write_all(contents.as_bytes()).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(contents.as_bytes()).map_err(io_err)?;
            out.flush().map_err(io_err)
        }
    }
}

pub fn cmd_curve(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = args.resolve(&CURVE_DEFAULTS)?;
    require_format(&cfg, &[OutputFormat::Csv, OutputFormat::Json], "curve")?;
    let text = match cfg.format {
        OutputFormat::Csv => curve_csv(&cfg)?,
        _ => curve_json(&cfg)?,
    };
    emit(&cfg, &text)
}

pub fn cmd_check(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = args.resolve(&CHECK_DEFAULTS)?;
    require_format(&cfg, &[OutputFormat::Json], "check")?;
    let report = run_check(&cfg)?;
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    emit(&cfg, &text)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Tolerance(report.failure_summary()))
    }
}

pub fn cmd_trajectories(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = args.resolve(&TRAJECTORY_DEFAULTS)?;
    require_format(&cfg, &[OutputFormat::Jsonl], "trajectories")?;
    if cfg.series.len() != 1 {
        return Err(CliError::Validation(
            "`trajectories` takes a single scheme, not a preset with several".into(),
        ));
    }
    if cfg.n_values.len() != 1 {
        return Err(CliError::Validation("`trajectories` takes a single N".into()));
    }
    emit(&cfg, &trajectories_jsonl(&cfg)?)
}

/// Parse `args` (program name first) and run; returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Curve(a) => cmd_curve(a),
        Command::Check(a) => cmd_check(a),
        Command::Trajectories(a) => cmd_trajectories(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(CliError::Validation(String::new()).exit_code(), 1);
        assert_eq!(CliError::Tolerance(String::new()).exit_code(), 2);
        assert_eq!(CliError::Io(String::new()).exit_code(), 3);
    }

    #[test]
    fn library_errors_are_validation_errors() {
        let err: CliError = crate::params::SystemParams::new(-1.0, 0.0, 1e5).validate().unwrap_err().into();
        assert_eq!(err.exit_code(), 1);
    }
}
