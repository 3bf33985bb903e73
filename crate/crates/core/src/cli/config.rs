//! Run configuration: JSON config file, command-line overrides and presets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::params::{full_transfer_time, SystemParams};
use crate::protocols::{CurveSource, ProtocolKind, SourceKind};

use super::CliError;

pub const DEFAULT_N_MAX: u32 = 50;
pub const DEFAULT_RUNS: u64 = 10_000;
pub const DEFAULT_TRAJECTORY_RUNS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceSelection {
    ClosedForm,
    StateMachine,
    MonteCarlo,
    All,
}

impl SourceSelection {
    pub fn sources(self, n_runs: u64, seed: u64) -> Vec<CurveSource> {
        let mc = CurveSource::MonteCarlo { n_runs, seed };
        match self {
            SourceSelection::ClosedForm => vec![CurveSource::ClosedForm],
            SourceSelection::StateMachine => vec![CurveSource::StateMachine],
            SourceSelection::MonteCarlo => vec![mc],
            SourceSelection::All => vec![CurveSource::ClosedForm, CurveSource::StateMachine, mc],
        }
    }

    pub fn includes(self, kind: SourceKind) -> bool {
        match self {
            SourceSelection::All => true,
            SourceSelection::ClosedForm => kind == SourceKind::ClosedForm,
            SourceSelection::StateMachine => kind == SourceKind::StateMachine,
            SourceSelection::MonteCarlo => kind == SourceKind::MonteCarlo,
        }
    }
}

impl FromStr for SourceSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed-form" => Ok(SourceSelection::ClosedForm),
            "state-machine" => Ok(SourceSelection::StateMachine),
            "monte-carlo" => Ok(SourceSelection::MonteCarlo),
            "all" => Ok(SourceSelection::All),
            _ => Err(format!(
                "unknown source `{s}` (expected closed-form, state-machine, monte-carlo or all)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Jsonl,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "jsonl" => Ok(OutputFormat::Jsonl),
            _ => Err(format!("unknown format `{s}` (expected csv, json or jsonl)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Jsonl => "jsonl",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig4,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig4" => Ok(Preset::Fig4),
            _ => Err(format!("unknown preset `{s}` (expected fig1, fig2 or fig4)")),
        }
    }
}

/// A named curve of a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub label: String,
    pub kind: ProtocolKind,
    pub params: SystemParams,
}

impl Preset {
    /// `fig1`: `D_g` clicks for three efficiencies. `fig2`: `D_e` no-clicks for
    /// three efficiencies. `fig4`: lossy readout scheme for two decay rates.
    /// All use `g = 10³ s⁻¹`, `Ω₀ = 10⁵ s⁻¹` and `T₀ = π/2g`.
    pub fn series(self) -> Vec<SeriesSpec> {
        let base = SystemParams::new(1e3, 0.0, 1e5);
        match self {
            Preset::Fig1 => [1.0, 0.9, 0.5]
                .into_iter()
                .map(|p_g| SeriesSpec {
                    label: format!("p_g={p_g}"),
                    kind: ProtocolKind::OnlyDgInefficient,
                    params: base.with_p_g(p_g),
                })
                .collect(),
            Preset::Fig2 => [1.0, 0.8, 0.5]
                .into_iter()
                .map(|p_e| SeriesSpec {
                    label: format!("p_e={p_e}"),
                    kind: ProtocolKind::OnlyDeNoClick,
                    params: base.with_p_e(p_e),
                })
                .collect(),
            Preset::Fig4 => [1e3, 10.0]
                .into_iter()
                .map(|k| SeriesSpec {
                    label: format!("k={k}"),
                    kind: ProtocolKind::NoIntermediateLossy,
                    params: base.with_k(k),
                })
                .collect(),
        }
    }

    pub fn n_max(self) -> u32 {
        match self {
            Preset::Fig1 | Preset::Fig2 => 100,
            Preset::Fig4 => 400,
        }
    }
}

/// Parameters that may be left unset; unset ones take the defaults of
/// [`SystemParams::new`] with `g = 10³`, `Ω₀ = 10⁵`, `k = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamOverrides {
    pub omega: Option<f64>,
    pub g: Option<f64>,
    pub k: Option<f64>,
    pub omega0: Option<f64>,
    pub p_g: Option<f64>,
    pub p_e: Option<f64>,
    pub t0: Option<f64>,
}

impl ParamOverrides {
    pub fn or(self, fallback: ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            omega: self.omega.or(fallback.omega),
            g: self.g.or(fallback.g),
            k: self.k.or(fallback.k),
            omega0: self.omega0.or(fallback.omega0),
            p_g: self.p_g.or(fallback.p_g),
            p_e: self.p_e.or(fallback.p_e),
            t0: self.t0.or(fallback.t0),
        }
    }

    /// Apply on top of `base`. An unset `t0` follows `g` (`T₀ = π/2g`).
    pub fn apply(&self, base: &SystemParams) -> SystemParams {
        let g = self.g.unwrap_or(base.g);
        let t0 = self.t0.unwrap_or(if self.g.is_some() {
            full_transfer_time(g)
        } else {
            base.t0
        });
        SystemParams {
            omega: self.omega.unwrap_or(base.omega),
            g,
            k: self.k.unwrap_or(base.k),
            omega0: self.omega0.unwrap_or(base.omega0),
            p_g: self.p_g.unwrap_or(base.p_g),
            p_e: self.p_e.unwrap_or(base.p_e),
            t0,
            n: base.n,
        }
    }
}

/// Contents of a `--config` file. Every field is optional; flags given on
/// the command line take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<Preset>,
    pub kind: Option<ProtocolKind>,
    pub params: ParamOverrides,
    pub n: Option<Vec<u32>>,
    pub n_max: Option<u32>,
    pub source: Option<SourceSelection>,
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    /// `self` with every field that `over` sets replaced.
    pub fn overridden_by(self, over: ConfigFile) -> ConfigFile {
        ConfigFile {
            preset: over.preset.or(self.preset),
            kind: over.kind.or(self.kind),
            params: over.params.or(self.params),
            n: over.n.or(self.n),
            n_max: over.n_max.or(self.n_max),
            source: over.source.or(self.source),
            runs: over.runs.or(self.runs),
            seed: over.seed.or(self.seed),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
        }
    }
}

/// Fully resolved configuration of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub series: Vec<SeriesSpecOut>,
    pub n_values: Vec<u32>,
    pub source: SourceSelection,
    pub n_runs: u64,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSpecOut {
    pub label: String,
    pub kind: ProtocolKind,
    pub params: SystemParams,
}

impl From<SeriesSpec> for SeriesSpecOut {
    fn from(s: SeriesSpec) -> Self {
        SeriesSpecOut {
            label: s.label,
            kind: s.kind,
            params: s.params,
        }
    }
}

/// Defaults that differ between subcommands.
pub struct CommandDefaults {
    pub format: OutputFormat,
    pub runs: u64,
    pub n_values: fn(u32) -> Vec<u32>,
    /// Cover every scheme when neither a kind nor a preset is given.
    pub all_kinds: bool,
}

impl RunConfig {
    pub fn resolve(cfg: ConfigFile, defaults: &CommandDefaults) -> Result<RunConfig, CliError> {
        let series: Vec<SeriesSpec> = match (cfg.preset, cfg.kind) {
            (Some(_), Some(kind)) => {
                return Err(CliError::Validation(format!(
                    "--preset and --kind ({kind}) are mutually exclusive"
                )));
            }
            (Some(preset), None) => preset
                .series()
                .into_iter()
                .map(|s| SeriesSpec {
                    params: cfg.params.apply(&s.params),
                    ..s
                })
                .collect(),
            (None, kind) => {
                let kinds = match kind {
                    Some(kind) => vec![kind],
                    None if defaults.all_kinds => ProtocolKind::ALL.to_vec(),
                    None => vec![ProtocolKind::PerfectDetectors],
                };
                kinds
                    .into_iter()
                    .map(|kind| SeriesSpec {
                        label: kind.slug().to_string(),
                        kind,
                        params: cfg.params.apply(&SystemParams::default()),
                    })
                    .collect()
            }
        };

        let n_values = match cfg.n {
            Some(n) => n,
            None => {
                let n_max = cfg.n_max.or(cfg.preset.map(Preset::n_max)).unwrap_or(DEFAULT_N_MAX);
                if n_max == 0 {
                    return Err(CliError::Validation("--n-max must be >= 1".into()));
                }
                (defaults.n_values)(n_max)
            }
        };
        if n_values.is_empty() {
            return Err(CliError::Validation("--n needs at least one value".into()));
        }
        if n_values.contains(&0) {
            return Err(CliError::Validation("--n values must be >= 1".into()));
        }
        if n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Validation("--n values must be strictly increasing".into()));
        }

        for s in &series {
            s.params
                .with_n(n_values[0])
                .validate()
                .map_err(|e| CliError::Validation(format!("{}: {e}", s.label)))?;
        }

        let n_runs = cfg.runs.unwrap_or(defaults.runs);
        if n_runs == 0 {
            return Err(CliError::Validation("--runs must be >= 1".into()));
        }

        Ok(RunConfig {
            series: series.into_iter().map(Into::into).collect(),
            n_values,
            source: cfg.source.unwrap_or(SourceSelection::ClosedForm),
            n_runs,
            seed: cfg.seed.unwrap_or(0),
            out: cfg.out,
            format: cfg.format.unwrap_or(defaults.format),
        })
    }
}

/// `--n` argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NList(pub Vec<u32>);

impl FromStr for NList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_n_list(s).map(NList)
    }
}

/// Parse a comma-separated list of N values; `a..b` (inclusive) ranges are accepted.
pub fn parse_n_list(s: &str) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u32 = lo.trim().parse().map_err(|e| format!("bad range start `{lo}`: {e}"))?;
            let hi: u32 = hi.trim().parse().map_err(|e| format!("bad range end `{hi}`: {e}"))?;
            if lo > hi {
                return Err(format!("empty range `{part}`"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|e| format!("bad N `{part}`: {e}"))?);
        }
    }
    Ok(out)
}
