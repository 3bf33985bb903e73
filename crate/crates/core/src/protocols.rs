//! The five measurement schemes, as closed-form probabilities and as exact
//! step-wise density-matrix runs.
//!
//! Every run starts from `|1,0,g⟩` and repeats `N` steps of
//!
//! 1. coupled exchange for `τ_AB = T₀/N` (lossy only for
//!    [`ProtocolKind::NoIntermediateLossy`]),
//! 2. a π pulse between mode B and a fresh atom,
//! 3. detection of that atom, or tracing it out when it is not observed.
//!
//! The two schemes without intermediate detection end with a readout atom
//! that swaps with mode A and is then sent through `D_e`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{measure, trace_out_atom, DetectorSetup, OutcomeLabel};
use crate::dynamics::{coupled_map, pi_pulse_ideal_map, pi_pulse_lossy_map, readout_pulse_map, tau_pi, ExcitationMap};
use crate::error::{invalid, Error, Result};
use crate::montecarlo;
use crate::params::SystemParams;
use crate::state::{BasisState, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    /// Perfect `D_g` and `D_e`; every atom clicks in one of them.
    PerfectDetectors,
    /// Only `D_g`, efficiency `p_g`.
    OnlyDgInefficient,
    /// Only `D_e`, efficiency `p_e`; runs without any click are kept.
    OnlyDeNoClick,
    /// Unobserved probe atoms, lossless cavities, instantaneous pulses,
    /// perfect final readout.
    NoIntermediateIdeal,
    /// Unobserved probe atoms, lossy cavities, finite pulses of length `τ_π`,
    /// final readout through `D_e` with efficiency `p_e`.
    NoIntermediateLossy,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::PerfectDetectors,
        ProtocolKind::OnlyDgInefficient,
        ProtocolKind::OnlyDeNoClick,
        ProtocolKind::NoIntermediateIdeal,
        ProtocolKind::NoIntermediateLossy,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            ProtocolKind::PerfectDetectors => "perfect-detectors",
            ProtocolKind::OnlyDgInefficient => "only-dg-inefficient",
            ProtocolKind::OnlyDeNoClick => "only-de-no-click",
            ProtocolKind::NoIntermediateIdeal => "no-intermediate-ideal",
            ProtocolKind::NoIntermediateLossy => "no-intermediate-lossy",
        }
    }

    pub fn is_lossy(self) -> bool {
        self == ProtocolKind::NoIntermediateLossy
    }

    /// Whether the run ends with a readout atom through mode A.
    pub fn has_readout(self) -> bool {
        matches!(
            self,
            ProtocolKind::NoIntermediateIdeal | ProtocolKind::NoIntermediateLossy
        )
    }

    /// Detection events in a run of `n` atoms, readout included.
    pub fn event_count(self, n: u32) -> usize {
        n as usize + usize::from(self.has_readout())
    }

    pub fn detector_setup(self, params: &SystemParams) -> DetectorSetup {
        match self {
            ProtocolKind::PerfectDetectors => DetectorSetup::both_perfect(),
            ProtocolKind::OnlyDgInefficient => DetectorSetup::only_dg(params.p_g),
            ProtocolKind::OnlyDeNoClick => DetectorSetup::only_de(params.p_e),
            ProtocolKind::NoIntermediateIdeal | ProtocolKind::NoIntermediateLossy => DetectorSetup::none(),
        }
    }

    /// Detector behind the readout atom, if the scheme has one.
    pub fn readout_setup(self, params: &SystemParams) -> Option<DetectorSetup> {
        match self {
            ProtocolKind::NoIntermediateIdeal => Some(DetectorSetup::only_de(1.0)),
            ProtocolKind::NoIntermediateLossy => Some(DetectorSetup::only_de(params.p_e)),
            _ => None,
        }
    }

    /// The event the scheme's closed form gives the probability of.
    pub fn default_conditioning(self) -> Conditioning {
        match self {
            ProtocolKind::PerfectDetectors | ProtocolKind::OnlyDgInefficient => Conditioning::AllClickG,
            ProtocolKind::OnlyDeNoClick => Conditioning::AllNoClick,
            ProtocolKind::NoIntermediateIdeal | ProtocolKind::NoIntermediateLossy => Conditioning::FinalClickE,
        }
    }

    /// Closed-form probability of [`Self::default_conditioning`] for `params.n` atoms.
    pub fn closed_form(self, params: &SystemParams) -> Result<f64> {
        params.validate()?;
        let (n, g, t0) = (params.n, params.g, params.t0);
        Ok(match self {
            ProtocolKind::PerfectDetectors => prob_clicks_dg(n, 1.0, g, t0),
            ProtocolKind::OnlyDgInefficient => prob_clicks_dg(n, params.p_g, g, t0),
            ProtocolKind::OnlyDeNoClick => prob_noclicks_de(n, params.p_e, g, t0),
            ProtocolKind::NoIntermediateIdeal => prob_survival_no_measurement(n, g, t0),
            ProtocolKind::NoIntermediateLossy => prob_de_click_lossy(n, params)?,
        })
    }

    /// Composite map for one step: free exchange followed by the π pulse.
    pub fn step_map(self, params: &SystemParams) -> Result<ExcitationMap> {
        let tau = params.tau_ab();
        if self.is_lossy() {
            Ok(coupled_map(params, params.k, tau).then(&pi_pulse_lossy_map(params)?))
        } else {
            Ok(coupled_map(params, 0.0, tau).then(&pi_pulse_ideal_map()))
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let kind = match key.as_str() {
            "perfect-detectors" | "perfect" => ProtocolKind::PerfectDetectors,
            "only-dg-inefficient" | "only-dg" => ProtocolKind::OnlyDgInefficient,
            "only-de-no-click" | "only-de" => ProtocolKind::OnlyDeNoClick,
            "no-intermediate-ideal" => ProtocolKind::NoIntermediateIdeal,
            "no-intermediate-lossy" => ProtocolKind::NoIntermediateLossy,
            _ => {
                let names: Vec<_> = ProtocolKind::ALL.iter().map(|k| k.slug()).collect();
                return Err(format!("unknown protocol `{s}` (expected one of {})", names.join(", ")));
            }
        };
        Ok(kind)
    }
}

/// Which detector records a run is conditioned on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// Every detection event is a `D_g` click.
    AllClickG,
    /// No detection event fires.
    AllNoClick,
    /// The last event (the readout, when present) is a `D_e` click.
    FinalClickE,
    /// Nothing is selected; the run follows the non-selective evolution.
    Unconditioned,
    /// One label per detection event, readout included.
    Sequence(Vec<OutcomeLabel>),
}

impl Conditioning {
    /// Label required at event `index` of `events`, or `None` when any is accepted.
    pub fn required(&self, index: usize, events: usize) -> Option<OutcomeLabel> {
        match self {
            Conditioning::AllClickG => Some(OutcomeLabel::ClickG),
            Conditioning::AllNoClick => Some(OutcomeLabel::NoClick),
            Conditioning::FinalClickE => (index + 1 == events).then_some(OutcomeLabel::ClickE),
            Conditioning::Unconditioned => None,
            Conditioning::Sequence(seq) => seq.get(index).copied(),
        }
    }

    pub fn accepts(&self, index: usize, events: usize, label: OutcomeLabel) -> bool {
        self.required(index, events).is_none_or(|want| want == label)
    }

    pub fn check(&self, kind: ProtocolKind, n: u32) -> Result<()> {
        if let Conditioning::Sequence(seq) = self {
            let events = kind.event_count(n);
            if seq.len() != events {
                return Err(Error::InvalidConditioning(format!(
                    "{kind} with N = {n} has {events} detection events, sequence has {}",
                    seq.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 0-based; the readout event, when present, has index `N`.
    pub step_index: usize,
    /// State at the start of the step.
    pub pre_state: DensityMatrix,
    /// Selected label, or `None` when the step was not conditioned.
    pub outcome: Option<OutcomeLabel>,
    pub branch_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub probability: f64,
    pub steps: Vec<StepRecord>,
    /// Normalized conditional state at the end of the run. For an impossible
    /// conditioning this is the state just before the event that failed.
    pub final_state: DensityMatrix,
    /// Set when the conditioning selects a zero-probability record.
    pub impossible: bool,
}

fn cos_sq_power(n: u32, g: f64, t0: f64) -> f64 {
    assert!(n >= 1, "at least one probe atom is required");
    let c2 = (g * t0 / f64::from(n)).cos().powi(2);
    match i32::try_from(n) {
        Ok(e) => c2.powi(e),
        Err(_) => c2.powf(f64::from(n)),
    }
}

/// `(cos²(gT₀/N)·p_g)^N`: probability that all `N` atoms click in `D_g`.
///
/// # Panics
/// If `n == 0`.
pub fn prob_clicks_dg(n: u32, p_g: f64, g: f64, t0: f64) -> f64 {
    cos_sq_power(n, g, t0) * p_g.powf(f64::from(n))
}

/// Probability that `D_e` stays silent for all `N` atoms.
///
/// The per-step no-click probabilities telescope: with `s = (cos²(gT₀/N))^N`
/// the product is `s + (1 − p_e)(1 − s)`.
///
/// # Panics
/// If `n == 0`.
pub fn prob_noclicks_de(n: u32, p_e: f64, g: f64, t0: f64) -> f64 {
    let s = cos_sq_power(n, g, t0);
    s + (1.0 - p_e) * (1.0 - s)
}

/// `(cos²(gT₀/N))^N`: photon still in mode A after `N` unobserved atoms.
///
/// # Panics
/// If `n == 0`.
pub fn prob_survival_no_measurement(n: u32, g: f64, t0: f64) -> f64 {
    cos_sq_power(n, g, t0)
}

/// `p_e·e^{−2k(T₀ + Nτ_π)}·(cos²(gT₀/N))^N`: readout click probability with
/// lossy cavities and finite pulses.
pub fn prob_de_click_lossy(n: u32, params: &SystemParams) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "at least one probe atom is required"));
    }
    let tau = tau_pi(params.omega0, params.k)?;
    let exposure = params.t0 + f64::from(n) * tau;
    Ok(params.p_e * (-2.0 * params.k * exposure).exp() * cos_sq_power(n, params.g, params.t0))
}

/// Apply one detection event, selecting `required` (or everything).
/// Returns the branch probability, the normalized post-state (`None` when the
/// branch is empty) and the recorded label.
fn detect(
    rho: &DensityMatrix,
    setup: &DetectorSetup,
    required: Option<OutcomeLabel>,
) -> Result<(f64, Option<DensityMatrix>)> {
    match required {
        None => Ok((1.0, Some(trace_out_atom(rho)))),
        Some(label) => {
            let outcome = measure(rho, setup)?.into_iter().find(|o| o.label == label);
            Ok(outcome.map_or((0.0, None), |o| (o.probability, o.post_state)))
        }
    }
}

/// Exact step-wise evolution of `params.n` atoms, conditioned on `conditioning`.
pub fn run_protocol(params: &SystemParams, kind: ProtocolKind, conditioning: &Conditioning) -> Result<RunResult> {
    params.validate()?;
    conditioning.check(kind, params.n)?;

    let step = kind.step_map(params)?;
    let setup = kind.detector_setup(params);
    let events = kind.event_count(params.n);

    let mut stages: Vec<(ExcitationMap, DetectorSetup)> = vec![(step, setup); params.n as usize];
    if let Some(readout) = kind.readout_setup(params) {
        stages.push((readout_pulse_map(), readout));
    }

    let mut state = DensityMatrix::new_pure(BasisState::Ket10g);
    let mut probability = 1.0;
    let mut steps = Vec::with_capacity(events);
    for (index, (map, setup)) in stages.iter().enumerate() {
        let evolved = map.apply(&state);
        let required = conditioning.required(index, events);
        let (p, post) = detect(&evolved, setup, required)?;
        steps.push(StepRecord {
            step_index: index,
            pre_state: state,
            outcome: required,
            branch_probability: p,
        });
        probability *= p;
        match post {
            Some(next) => state = next,
            None => {
                return Ok(RunResult {
                    probability: 0.0,
                    steps,
                    final_state: evolved,
                    impossible: true,
                });
            }
        }
    }
    Ok(RunResult {
        probability,
        steps,
        final_state: state,
        impossible: false,
    })
}

/// Where the values of a curve come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveSource {
    ClosedForm,
    StateMachine,
    MonteCarlo { n_runs: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    ClosedForm,
    StateMachine,
    MonteCarlo,
}

impl CurveSource {
    pub fn kind(&self) -> SourceKind {
        match self {
            CurveSource::ClosedForm => SourceKind::ClosedForm,
            CurveSource::StateMachine => SourceKind::StateMachine,
            CurveSource::MonteCarlo { .. } => SourceKind::MonteCarlo,
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::ClosedForm => "closed-form",
            SourceKind::StateMachine => "state-machine",
            SourceKind::MonteCarlo => "monte-carlo",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: u32,
    pub value: f64,
    /// Binomial standard error; only set for Monte Carlo points.
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub kind: ProtocolKind,
    pub source: SourceKind,
    pub params: SystemParams,
    pub points: Vec<CurvePoint>,
}

impl CurveSeries {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

/// Evaluate `kind`'s default event probability at each `N` in `n_values`.
///
/// `n_values` must be non-empty and strictly increasing. Points are computed
/// in parallel; the output order is that of `n_values`.
pub fn sweep_curve(
    params: &SystemParams,
    kind: ProtocolKind,
    n_values: &[u32],
    source: CurveSource,
) -> Result<CurveSeries> {
    if n_values.is_empty() {
        return Err(invalid("n_values", "at least one N is required"));
    }
    if n_values[0] == 0 {
        return Err(invalid("n_values", "every N must be >= 1"));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("n_values", "N values must be strictly increasing"));
    }
    params.validate()?;

    let points = n_values
        .par_iter()
        .map(|&n| {
            let p = params.with_n(n);
            let (value, std_error) = match source {
                CurveSource::ClosedForm => (kind.closed_form(&p)?, None),
                CurveSource::StateMachine => (run_protocol(&p, kind, &kind.default_conditioning())?.probability, None),
                CurveSource::MonteCarlo { n_runs, seed } => {
                    let est = montecarlo::estimate(&p, kind, &kind.default_conditioning(), n_runs, seed)?;
                    (est.value, Some(est.std_error))
                }
            };
            Ok(CurvePoint { n, value, std_error })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CurveSeries {
        kind,
        source: source.kind(),
        params: *params,
        points,
    })
}
