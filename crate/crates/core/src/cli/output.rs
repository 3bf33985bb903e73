//! Curve and trajectory serialization.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::OutcomeLabel;
use crate::montecarlo::{sample_trajectory, FinalLabel, SeededSampler};
use crate::protocols::{sweep_curve, CurveSeries, ProtocolKind};

use super::config::{RunConfig, SeriesSpecOut, SourceSelection};
use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveBlock {
    pub label: String,
    pub curves: Vec<CurveSeries>,
}

fn compute(cfg: &RunConfig) -> Result<Vec<CurveBlock>, CliError> {
    let sources = cfg.source.sources(cfg.n_runs, cfg.seed);
    cfg.series
        .iter()
        .map(|spec| {
            let curves = sources
                .iter()
                .map(|&src| sweep_curve(&spec.params, spec.kind, &cfg.n_values, src))
                .collect::<crate::Result<Vec<_>>>()?;
            Ok(CurveBlock {
                label: spec.label.clone(),
                curves,
            })
        })
        .collect()
}

fn echo(out: &mut String, spec: &SeriesSpecOut, cfg: &RunConfig) {
    let p = &spec.params;
    let mut line = |key: &str, value: String| {
        let _ = writeln!(out, "# {key} = {value}");
    };
    line("series", spec.label.clone());
    line("kind", spec.kind.to_string());
    line("omega", p.omega.to_string());
    line("g", p.g.to_string());
    line("k", p.k.to_string());
    line("omega0", p.omega0.to_string());
    line("p_g", p.p_g.to_string());
    line("p_e", p.p_e.to_string());
    line("t0", p.t0.to_string());
    let source = serde_json::to_value(cfg.source)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default();
    line("source", source);
    if cfg.source == SourceSelection::MonteCarlo || cfg.source == SourceSelection::All {
        line("runs", cfg.n_runs.to_string());
        line("seed", cfg.seed.to_string());
    }
}

/// One block per series: `#` parameter lines, the `N,source,value,std_error`
/// header and one row per N per source. Blocks are separated by a blank line.
pub fn curve_csv(cfg: &RunConfig) -> Result<String, CliError> {
    let blocks = compute(cfg)?;
    let mut out = String::new();
    for (i, (spec, block)) in cfg.series.iter().zip(&blocks).enumerate() {
        if i > 0 {
            out.push('\n');
        }
        echo(&mut out, spec, cfg);
        out.push_str("N,source,value,std_error\n");
        for (j, &n) in cfg.n_values.iter().enumerate() {
            for curve in &block.curves {
                let point = &curve.points[j];
                let err = point.std_error.map(|e| e.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{n},{},{},{err}", curve.source, point.value);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CurveDocument<'a> {
    config: &'a RunConfig,
    series: Vec<CurveBlock>,
}

pub fn curve_json(cfg: &RunConfig) -> Result<String, CliError> {
    let doc = CurveDocument {
        config: cfg,
        series: compute(cfg)?,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// One line of `trajectories` output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub run_index: u64,
    pub kind: ProtocolKind,
    pub n: u32,
    pub outcomes: Vec<OutcomeLabel>,
    pub terminated_early: bool,
    pub final_label: FinalLabel,
}

pub fn trajectories_jsonl(cfg: &RunConfig) -> Result<String, CliError> {
    let spec = &cfg.series[0];
    let n = cfg.n_values[0];
    let params = spec.params.with_n(n);
    let records = (0..cfg.n_runs)
        .into_par_iter()
        .map(|run_index| {
            let t = sample_trajectory(&params, spec.kind, &SeededSampler::for_run(cfg.seed, run_index))?;
            Ok(TrajectoryRecord {
                seed: cfg.seed,
                run_index,
                kind: spec.kind,
                n,
                outcomes: t.outcomes,
                terminated_early: t.terminated_early,
                final_label: t.final_label,
            })
        })
        .collect::<crate::Result<Vec<_>>>()?;

    let mut out = String::new();
    for r in &records {
        out.push_str(&serde_json::to_string(r).map_err(|e| CliError::Io(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}
