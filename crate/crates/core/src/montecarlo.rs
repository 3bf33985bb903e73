//! Sampling of individual experimental runs.
//!
//! Each step draws the fate of the probe atom from the populations of the
//! post-pulse state: the atom absorbed the photon, the photon leaked to the
//! environment, or the photon is still in the cavities. The detectors then
//! fire on the atom's level with their efficiencies. Branching on these
//! populations is exact here because the atom is always measured or traced
//! out in the `{g, e}` basis and the vacuum is stationary.
//!
//! Every run owns a ChaCha stream selected by `(seed, run index)`, so
//! estimates do not depend on how rayon schedules the runs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{DetectorMode, DetectorSetup, OutcomeLabel};
use crate::dynamics::{readout_pulse_map, ExcitationMap};
use crate::error::{invalid, Result};
use crate::params::SystemParams;
use crate::protocols::{Conditioning, ProtocolKind};
use crate::state::{BasisState, DensityMatrix, Matrix4c};

/// Seed plus stream index of a ChaCha8 generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededSampler {
    seed: u64,
    stream: u64,
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        SeededSampler { seed, stream: 0 }
    }

    /// Sampler for run `run_index` of an experiment seeded with `seed`.
    pub fn for_run(seed: u64, run_index: u64) -> Self {
        SeededSampler {
            seed,
            stream: run_index,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Move on to the next stream.
    pub fn advance(&mut self) {
        self.stream = self.stream.wrapping_add(1);
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Where the photon ended up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FinalLabel {
    /// Still in mode A at the end of the run (or when it was cut short).
    PhotonInA,
    /// Transferred to B and absorbed by one of the probe atoms.
    PhotonInBAbsorbed,
    /// Leaked to the environment.
    Lost,
    /// The run never held a photon.
    Vacuum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub outcomes: Vec<OutcomeLabel>,
    /// The record stopped as soon as it violated the conditioning.
    pub terminated_early: bool,
    pub final_label: FinalLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// `√(p̂(1 − p̂)/n_runs)`.
    pub std_error: f64,
    pub hits: u64,
    pub n_runs: u64,
}

impl Estimate {
    pub fn from_counts(hits: u64, n_runs: u64) -> Self {
        let n = n_runs as f64;
        let value = hits as f64 / n;
        Estimate {
            value,
            std_error: (value * (1.0 - value) / n).sqrt(),
            hits,
            n_runs,
        }
    }

    /// `|value − expected|` in units of the standard error. A zero standard
    /// error is floored at one count's worth (`1/n_runs`).
    pub fn z_score(&self, expected: f64) -> f64 {
        let sigma = self.std_error.max(1.0 / self.n_runs as f64);
        (self.value - expected).abs() / sigma
    }
}

fn fires(rng: &mut impl Rng, efficiency: f64) -> bool {
    efficiency >= 1.0 || rng.random::<f64>() < efficiency
}

fn detector_label(setup: &DetectorSetup, atom_excited: bool, rng: &mut impl Rng) -> OutcomeLabel {
    match (setup.mode(), atom_excited) {
        (DetectorMode::BothPerfect, true) => OutcomeLabel::ClickE,
        (DetectorMode::BothPerfect, false) => OutcomeLabel::ClickG,
        (DetectorMode::OnlyDg, false) if fires(rng, setup.p_g()) => OutcomeLabel::ClickG,
        (DetectorMode::OnlyDe, true) if fires(rng, setup.p_e()) => OutcomeLabel::ClickE,
        _ => OutcomeLabel::NoClick,
    }
}

/// Draw one detector outcome for `rho`: the atom is found excited with
/// probability `P(|0,0,e⟩)`, then the matching detector fires with its efficiency.
pub fn sample_outcome(rho: &DensityMatrix, setup: &DetectorSetup, rng: &mut impl Rng) -> OutcomeLabel {
    let excited = rng.random::<f64>() < rho.population(BasisState::Ket00e);
    detector_label(setup, excited, rng)
}

#[allow(clippy::large_enum_variant)]
enum Branch {
    Absorbed,
    Vacuum,
    Survived(Matrix4c),
}

/// Sample which of the three branches the post-pulse state falls into.
/// Works on raw matrices: every map applied by the engine is an exact contraction.
fn sample_branch(rho: &Matrix4c, rng: &mut impl Rng) -> Branch {
    let pop = |s: BasisState| rho[(s.index(), s.index())].re.clamp(0.0, 1.0);
    let p_excited = pop(BasisState::Ket00e);
    let p_vacuum = pop(BasisState::Ket00g);
    let u: f64 = rng.random();
    if u < p_excited {
        return Branch::Absorbed;
    }
    if u < p_excited + p_vacuum {
        return Branch::Vacuum;
    }
    let mut field = Matrix4c::zeros();
    let (a, b) = (BasisState::Ket10g.index(), BasisState::Ket01g.index());
    for i in [a, b] {
        for j in [a, b] {
            field[(i, j)] = rho[(i, j)];
        }
    }
    let weight = field.trace().re;
    if weight <= 0.0 {
        return Branch::Vacuum;
    }
    Branch::Survived(field.unscale(weight))
}

/// Precomputed per-step maps for one `(params, kind)` pair.
struct Engine {
    stages: Vec<(ExcitationMap, DetectorSetup)>,
    n: usize,
}

impl Engine {
    fn new(params: &SystemParams, kind: ProtocolKind) -> Result<Self> {
        params.validate()?;
        let step = kind.step_map(params)?;
        let setup = kind.detector_setup(params);
        let mut stages = vec![(step, setup)];
        if let Some(readout) = kind.readout_setup(params) {
            stages.push((readout_pulse_map(), readout));
        }
        Ok(Engine {
            stages,
            n: params.n as usize,
        })
    }

    fn events(&self) -> usize {
        self.n + self.stages.len() - 1
    }

    fn stage(&self, index: usize) -> &(ExcitationMap, DetectorSetup) {
        if index < self.n {
            &self.stages[0]
        } else {
            &self.stages[1]
        }
    }

    fn run(&self, rng: &mut impl Rng, conditioning: &Conditioning) -> Trajectory {
        let events = self.events();
        let vacuum = DensityMatrix::vacuum().into_matrix();
        let mut state = DensityMatrix::new_pure(BasisState::Ket10g).into_matrix();
        let mut fate: Option<FinalLabel> = None;
        let mut outcomes = Vec::with_capacity(events);

        for index in 0..events {
            let (map, setup) = self.stage(index);
            let evolved = map.apply_matrix(&state);
            let atom_excited = match sample_branch(&evolved, rng) {
                Branch::Absorbed => {
                    state = vacuum;
                    if index < self.n {
                        fate.get_or_insert(FinalLabel::PhotonInBAbsorbed);
                    }
                    true
                }
                Branch::Vacuum => {
                    state = vacuum;
                    fate.get_or_insert(FinalLabel::Lost);
                    false
                }
                Branch::Survived(next) => {
                    state = next;
                    false
                }
            };
            let label = detector_label(setup, atom_excited, rng);
            outcomes.push(label);
            if !conditioning.accepts(index, events, label) {
                return Trajectory {
                    outcomes,
                    terminated_early: true,
                    final_label: fate.unwrap_or(FinalLabel::PhotonInA),
                };
            }
        }
        Trajectory {
            outcomes,
            terminated_early: false,
            final_label: fate.unwrap_or(FinalLabel::PhotonInA),
        }
    }
}

/// One unconditioned run of `params.n` atoms.
pub fn sample_trajectory(params: &SystemParams, kind: ProtocolKind, sampler: &SeededSampler) -> Result<Trajectory> {
    sample_conditioned(params, kind, &Conditioning::Unconditioned, sampler)
}

/// One run that stops at the first event violating `conditioning`.
pub fn sample_conditioned(
    params: &SystemParams,
    kind: ProtocolKind,
    conditioning: &Conditioning,
    sampler: &SeededSampler,
) -> Result<Trajectory> {
    conditioning.check(kind, params.n)?;
    let engine = Engine::new(params, kind)?;
    Ok(engine.run(&mut sampler.rng(), conditioning))
}

/// `n_runs` independent runs starting at stream 0 of `seed`.
pub fn sample_many(params: &SystemParams, kind: ProtocolKind, n_runs: u64, seed: u64) -> Result<Vec<Trajectory>> {
    let engine = Engine::new(params, kind)?;
    Ok((0..n_runs)
        .into_par_iter()
        .map(|i| engine.run(&mut SeededSampler::for_run(seed, i).rng(), &Conditioning::Unconditioned))
        .collect())
}

/// Empirical frequency of `event` over `n_runs` runs.
pub fn estimate(
    params: &SystemParams,
    kind: ProtocolKind,
    event: &Conditioning,
    n_runs: u64,
    seed: u64,
) -> Result<Estimate> {
    if n_runs == 0 {
        return Err(invalid("n_runs", "at least one run is required"));
    }
    event.check(kind, params.n)?;
    let engine = Engine::new(params, kind)?;
    let hits = (0..n_runs)
        .into_par_iter()
        .filter(|&i| {
            !engine
                .run(&mut SeededSampler::for_run(seed, i).rng(), event)
                .terminated_early
        })
        .count() as u64;
    Ok(Estimate::from_counts(hits, n_runs))
}
