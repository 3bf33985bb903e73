//! Cross-validation report for the `check` subcommand.

use serde::{Deserialize, Serialize};

use crate::dynamics::{pi_pulse_ideal, tau_pi};
use crate::lindblad::{coupled_cavities_generator, default_step, integrate, jaynes_cummings_generator};
use crate::montecarlo::estimate;
use crate::params::SystemParams;
use crate::protocols::{run_protocol, ProtocolKind};
use crate::state::{BasisState, DensityMatrix, C64};

use super::config::RunConfig;
use super::CliError;

pub const STATE_MACHINE_TOL: f64 = 1e-10;
pub const LINDBLAD_TOL: f64 = 1e-7;
pub const SIGMA_LIMIT: f64 = 3.0;
pub const REQUIRED_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityCell {
    pub series: String,
    pub kind: ProtocolKind,
    pub n: u32,
    pub closed_form: f64,
    pub state_machine: f64,
    pub deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladCell {
    pub series: String,
    pub kind: ProtocolKind,
    pub n: u32,
    /// Largest entrywise difference after one exchange-plus-pulse step.
    pub deviation: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloCell {
    pub series: String,
    pub kind: ProtocolKind,
    pub n: u32,
    pub expected: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSection<T> {
    pub tolerance: f64,
    pub max_deviation: f64,
    pub passed: bool,
    pub cells: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSection {
    pub sigma_limit: f64,
    pub required_fraction: f64,
    pub runs: u64,
    pub seed: u64,
    pub fraction_within: f64,
    pub max_z: f64,
    pub passed: bool,
    pub cells: Vec<MonteCarloCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub passed: bool,
    pub closed_form_vs_state_machine: ExactSection<ProbabilityCell>,
    pub lindblad_vs_closed_form: ExactSection<LindbladCell>,
    pub monte_carlo: MonteCarloSection,
}

impl CheckReport {
    pub fn failure_summary(&self) -> String {
        let mut failed = Vec::new();
        if !self.closed_form_vs_state_machine.passed {
            failed.push(format!(
                "state machine deviates by {:e} (tolerance {:e})",
                self.closed_form_vs_state_machine.max_deviation, STATE_MACHINE_TOL
            ));
        }
        if !self.lindblad_vs_closed_form.passed {
            failed.push(format!(
                "Lindblad integration deviates by {:e} (tolerance {:e})",
                self.lindblad_vs_closed_form.max_deviation, LINDBLAD_TOL
            ));
        }
        if !self.monte_carlo.passed {
            failed.push(format!(
                "only {:.1}% of Monte Carlo cells within {SIGMA_LIMIT} sigma",
                100.0 * self.monte_carlo.fraction_within
            ));
        }
        failed.join("; ")
    }
}

/// Mixed state with coherences in every block.
fn probe_state() -> DensityMatrix {
    let h = C64::new(0.5, 0.0);
    let sup = DensityMatrix::from_amplitudes([h, C64::new(0.0, 0.5), h, -h]).expect("normalized amplitudes");
    let a = DensityMatrix::new_pure(BasisState::Ket10g);
    DensityMatrix::mixture([(0.7, &sup), (0.3, &a)]).expect("positive weights")
}

/// One protocol step integrated with RK4: coupled exchange for `T₀/N`,
/// then the damped Jaynes–Cummings pulse for `τ_π` (lossy scheme) or the
/// instantaneous pulse.
fn integrated_step(params: &SystemParams, kind: ProtocolKind, rho: &DensityMatrix) -> crate::Result<DensityMatrix> {
    let dt = default_step(params);
    let exchange = SystemParams {
        k: if kind.is_lossy() { params.k } else { 0.0 },
        ..*params
    };
    let tau_ab = params.tau_ab();
    let after = integrate(
        &coupled_cavities_generator(&exchange),
        rho,
        tau_ab,
        step_within(dt, tau_ab),
    )?;
    if kind.is_lossy() {
        let tau = tau_pi(params.omega0, params.k)?;
        integrate(&jaynes_cummings_generator(params), &after, tau, step_within(dt, tau))
    } else {
        Ok(pi_pulse_ideal(&after))
    }
}

fn step_within(dt: f64, t: f64) -> f64 {
    if t > 0.0 {
        dt.min(t)
    } else {
        dt
    }
}

fn max_of(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

pub fn run_check(cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let rho = probe_state();
    let mut sm_cells = Vec::new();
    let mut lb_cells = Vec::new();
    let mut mc_cells = Vec::new();

    for spec in &cfg.series {
        for &n in &cfg.n_values {
            let params = spec.params.with_n(n);
            let kind = spec.kind;
            let event = kind.default_conditioning();

            let closed_form = kind.closed_form(&params)?;
            let state_machine = run_protocol(&params, kind, &event)?.probability;
            let deviation = (closed_form - state_machine).abs();
            sm_cells.push(ProbabilityCell {
                series: spec.label.clone(),
                kind,
                n,
                closed_form,
                state_machine,
                deviation,
                passed: deviation <= STATE_MACHINE_TOL,
            });

            let exact = kind.step_map(&params)?.apply(&rho);
            let integrated = integrated_step(&params, kind, &rho).map_err(|e| CliError::Tolerance(e.to_string()))?;
            let deviation = exact.max_abs_diff(&integrated);
            lb_cells.push(LindbladCell {
                series: spec.label.clone(),
                kind,
                n,
                deviation,
                passed: deviation <= LINDBLAD_TOL,
            });

            let est = estimate(&params, kind, &event, cfg.n_runs, cfg.seed)?;
            let z = est.z_score(closed_form);
            mc_cells.push(MonteCarloCell {
                series: spec.label.clone(),
                kind,
                n,
                expected: closed_form,
                estimate: est.value,
                std_error: est.std_error,
                z,
                within: z <= SIGMA_LIMIT,
            });
        }
    }

    let sm = ExactSection {
        tolerance: STATE_MACHINE_TOL,
        max_deviation: max_of(sm_cells.iter().map(|c| c.deviation)),
        passed: sm_cells.iter().all(|c| c.passed),
        cells: sm_cells,
    };
    let lb = ExactSection {
        tolerance: LINDBLAD_TOL,
        max_deviation: max_of(lb_cells.iter().map(|c| c.deviation)),
        passed: lb_cells.iter().all(|c| c.passed),
        cells: lb_cells,
    };
    let fraction_within = mc_cells.iter().filter(|c| c.within).count() as f64 / mc_cells.len() as f64;
    let mc = MonteCarloSection {
        sigma_limit: SIGMA_LIMIT,
        required_fraction: REQUIRED_FRACTION,
        runs: cfg.n_runs,
        seed: cfg.seed,
        fraction_within,
        max_z: max_of(mc_cells.iter().map(|c| c.z)),
        passed: fraction_within >= REQUIRED_FRACTION,
        cells: mc_cells,
    };
    Ok(CheckReport {
        passed: sm.passed && lb.passed && mc.passed,
        closed_form_vs_state_machine: sm,
        lindblad_vs_closed_form: lb,
        monte_carlo: mc,
    })
}
