//! Ionization detectors with finite efficiency.
//!
//! A detector is a classical channel on the atomic populations: it fires
//! with probability `efficiency × P(monitored level)`. The atom is discarded
//! afterwards, so every post-state is re-embedded with the atom in `|g⟩`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::state::{BasisState, DensityMatrix, Matrix4c, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorMode {
    /// Both detectors present, both perfect.
    BothPerfect,
    /// Only the ground-state detector, efficiency `p_g`.
    OnlyDg,
    /// Only the excited-state detector, efficiency `p_e`.
    OnlyDe,
    /// Atoms leave unobserved.
    NoDetector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSetup {
    mode: DetectorMode,
    p_g: f64,
    p_e: f64,
}

impl DetectorSetup {
    pub fn both_perfect() -> Self {
        DetectorSetup {
            mode: DetectorMode::BothPerfect,
            p_g: 1.0,
            p_e: 1.0,
        }
    }

    pub fn only_dg(p_g: f64) -> Self {
        DetectorSetup {
            mode: DetectorMode::OnlyDg,
            p_g,
            p_e: 0.0,
        }
    }

    pub fn only_de(p_e: f64) -> Self {
        DetectorSetup {
            mode: DetectorMode::OnlyDe,
            p_g: 0.0,
            p_e,
        }
    }

    pub fn none() -> Self {
        DetectorSetup {
            mode: DetectorMode::NoDetector,
            p_g: 0.0,
            p_e: 0.0,
        }
    }

    pub fn mode(&self) -> DetectorMode {
        self.mode
    }

    /// Effective efficiency of the ground-state channel (0 when absent).
    pub fn p_g(&self) -> f64 {
        self.p_g
    }

    /// Effective efficiency of the excited-state channel (0 when absent).
    pub fn p_e(&self) -> f64 {
        self.p_e
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_g", self.p_g), ("p_e", self.p_e)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(
                    name,
                    format!("detector efficiency must lie in [0, 1], got {p}"),
                ));
            }
        }
        if self.mode == DetectorMode::BothPerfect && (self.p_g != 1.0 || self.p_e != 1.0) {
            return Err(invalid("mode", "perfect detectors require p_g = p_e = 1"));
        }
        Ok(())
    }

    /// Labels this setup can produce, in a fixed order.
    pub fn outcome_labels(&self) -> &'static [OutcomeLabel] {
        use OutcomeLabel::*;
        match self.mode {
            DetectorMode::BothPerfect => &[ClickG, ClickE],
            DetectorMode::OnlyDg => &[ClickG, NoClick],
            DetectorMode::OnlyDe => &[ClickE, NoClick],
            DetectorMode::NoDetector => &[NoClick],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeLabel {
    ClickG,
    ClickE,
    NoClick,
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeLabel::ClickG => "ClickG",
            OutcomeLabel::ClickE => "ClickE",
            OutcomeLabel::NoClick => "NoClick",
        })
    }
}

impl FromStr for OutcomeLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "clickg" | "g" => Ok(OutcomeLabel::ClickG),
            "clicke" | "e" => Ok(OutcomeLabel::ClickE),
            "noclick" | "n" => Ok(OutcomeLabel::NoClick),
            _ => Err(format!("unknown outcome `{s}` (expected ClickG, ClickE or NoClick)")),
        }
    }
}

/// One branch of a measurement. `post_state` is `None` for branches of zero
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub label: OutcomeLabel,
    pub probability: f64,
    pub post_state: Option<DensityMatrix>,
}

impl MeasurementOutcome {
    fn from_branch(label: OutcomeLabel, branch: Matrix4c) -> Self {
        let weight = branch.trace().re;
        let post_state = (weight > 0.0).then(|| DensityMatrix::from_unnormalized(branch, weight));
        MeasurementOutcome {
            label,
            probability: weight.clamp(0.0, 1.0),
            post_state,
        }
    }
}

/// Atom-in-`|g⟩` block of `rho`: rows and columns of `|0,0,e⟩` zeroed.
fn ground_block(rho: &DensityMatrix) -> Matrix4c {
    let mut m = *rho.matrix();
    let e = BasisState::Ket00e.index();
    for j in 0..4 {
        m[(e, j)] = C64::new(0.0, 0.0);
        m[(j, e)] = C64::new(0.0, 0.0);
    }
    m
}

/// Field state left behind by an excited atom, re-embedded as `|0,0,g⟩`.
fn excited_remainder(rho: &DensityMatrix) -> Matrix4c {
    let mut m = Matrix4c::zeros();
    let vac = BasisState::Ket00g.index();
    m[(vac, vac)] = C64::new(rho.population(BasisState::Ket00e), 0.0);
    m
}

/// Trace over the atom, with the (discarded) atom replaced by a fresh `|g⟩`.
pub fn trace_out_atom(rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::from_map_output(ground_block(rho) + excited_remainder(rho))
}

/// Selective measurement of the atom with the given detectors.
///
/// Returns every outcome `setup` can produce, in the order of
/// [`DetectorSetup::outcome_labels`], with normalized post-states.
pub fn measure(rho: &DensityMatrix, setup: &DetectorSetup) -> Result<Vec<MeasurementOutcome>> {
    setup.validate()?;
    let ground = ground_block(rho);
    let excited = excited_remainder(rho);
    let outcomes = setup
        .outcome_labels()
        .iter()
        .map(|&label| {
            let branch = match (setup.mode, label) {
                (_, OutcomeLabel::ClickG) => ground.scale(setup.p_g),
                (_, OutcomeLabel::ClickE) => excited.scale(setup.p_e),
                (DetectorMode::OnlyDg, OutcomeLabel::NoClick) => ground.scale(1.0 - setup.p_g) + excited,
                (DetectorMode::OnlyDe, OutcomeLabel::NoClick) => ground + excited.scale(1.0 - setup.p_e),
                (_, OutcomeLabel::NoClick) => ground + excited,
            };
            MeasurementOutcome::from_branch(label, branch)
        })
        .collect();
    Ok(outcomes)
}
