//! Dense Lindblad integrator on the four-state space.
//!
//! This is the brute-force reference for the closed forms in
//! [`crate::dynamics`]: generators are written directly from the master
//! equations, with no knowledge of the analytic solutions, and integrated
//! with fixed-step RK4.

use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;
use crate::state::{hermitian_part, validate, BasisState, DensityMatrix, Matrix4c, C64};

/// States produced by [`integrate`] must satisfy the invariants to this level.
pub const INTEGRATION_TOL: f64 = 1e-6;
/// Trace drift expected from [`integrate`] over durations up to `10/g`.
pub const INTEGRATION_TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue expected from [`integrate`] at default steps.
pub const INTEGRATION_POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub op: Matrix4c,
    pub rate: f64,
}

/// `dρ/dt = −i[H, ρ] + Σ rate·(2LρL† − ρL†L − L†Lρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    hamiltonian: Matrix4c,
    jumps: Vec<JumpOperator>,
}

impl GeneratorSpec {
    pub fn new(hamiltonian: Matrix4c, jumps: Vec<JumpOperator>) -> Result<Self> {
        let defect = (hamiltonian - hamiltonian.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let scale = hamiltonian.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if defect > 1e-12 * scale {
            return Err(invalid("hamiltonian", format!("not Hermitian (defect {defect:.3e})")));
        }
        if let Some(j) = jumps.iter().find(|j| !(j.rate >= 0.0 && j.rate.is_finite())) {
            return Err(invalid(
                "rate",
                format!("jump rates must be finite and >= 0, got {}", j.rate),
            ));
        }
        Ok(GeneratorSpec { hamiltonian, jumps })
    }

    pub fn zero() -> Self {
        GeneratorSpec {
            hamiltonian: Matrix4c::zeros(),
            jumps: Vec::new(),
        }
    }

    pub fn hamiltonian(&self) -> &Matrix4c {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    pub fn rhs(&self, rho: &Matrix4c) -> Matrix4c {
        let h = &self.hamiltonian;
        let mut d = (h * rho - rho * h) * C64::new(0.0, -1.0);
        for j in &self.jumps {
            if j.rate == 0.0 {
                continue;
            }
            let l = &j.op;
            let ld = l.adjoint();
            let ldl = ld * l;
            d += ((l * rho * ld).scale(2.0) - rho * ldl - ldl * rho).scale(j.rate);
        }
        d
    }
}

fn ket_bra(row: BasisState, col: BasisState) -> Matrix4c {
    let mut m = Matrix4c::zeros();
    m[(row.index(), col.index())] = C64::new(1.0, 0.0);
    m
}

/// Mode-A annihilation operator restricted to the four-state space.
pub fn annihilate_a() -> Matrix4c {
    ket_bra(BasisState::Ket00g, BasisState::Ket10g)
}

/// Mode-B annihilation operator restricted to the four-state space.
pub fn annihilate_b() -> Matrix4c {
    ket_bra(BasisState::Ket00g, BasisState::Ket01g)
}

/// `b†σ₋` restricted to the four-state space, i.e. `|0,1,g⟩⟨0,0,e|`.
fn b_dag_sigma_minus() -> Matrix4c {
    ket_bra(BasisState::Ket01g, BasisState::Ket00e)
}

fn number_of_excitations() -> Matrix4c {
    let mut m = Matrix4c::zeros();
    for s in BasisState::ALL {
        m[(s.index(), s.index())] = C64::new(f64::from(s.excitations()), 0.0);
    }
    m
}

fn cavity_losses(k: f64) -> Vec<JumpOperator> {
    vec![
        JumpOperator {
            op: annihilate_a(),
            rate: k,
        },
        JumpOperator {
            op: annihilate_b(),
            rate: k,
        },
    ]
}

/// Two coupled lossy modes with the atom as a spectator:
/// `H = ω(a†a + b†b + σ₊σ₋) + g(a†b + b†a)`, jump operators `a`, `b` at rate `k`.
pub fn coupled_cavities_generator(params: &SystemParams) -> GeneratorSpec {
    let a = annihilate_a();
    let b = annihilate_b();
    let h = number_of_excitations().scale(params.omega) + (a.adjoint() * b + b.adjoint() * a).scale(params.g);
    GeneratorSpec {
        hamiltonian: h,
        jumps: cavity_losses(params.k),
    }
}

/// Damped Jaynes–Cummings coupling of the atom to mode B with the cavities
/// decoupled: `H = ω(a†a + b†b + σ₊σ₋) + (Ω₀/2)(b†σ₋ + bσ₊)`, jump
/// operators `a`, `b` at rate `k`.
pub fn jaynes_cummings_generator(params: &SystemParams) -> GeneratorSpec {
    let x = b_dag_sigma_minus();
    let h = number_of_excitations().scale(params.omega) + (x + x.adjoint()).scale(0.5 * params.omega0);
    GeneratorSpec {
        hamiltonian: h,
        jumps: cavity_losses(params.k),
    }
}

/// `min(1/(50Ω₀), 1/(50g), 1/(50(k+g)))`.
pub fn default_step(params: &SystemParams) -> f64 {
    let fastest = params.omega0.max(params.g).max(params.k + params.g);
    1.0 / (50.0 * fastest)
}

fn rk4_step(gen: &GeneratorSpec, rho: &Matrix4c, h: f64) -> Matrix4c {
    let k1 = gen.rhs(rho);
    let k2 = gen.rhs(&(rho + k1.scale(0.5 * h)));
    let k3 = gen.rhs(&(rho + k2.scale(0.5 * h)));
    let k4 = gen.rhs(&(rho + k3.scale(h)));
    let next = rho + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0);
    hermitian_part(&next)
}

/// Number of RK4 steps and the actual step used to land exactly on `t`.
fn step_plan(t: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t.is_finite() && t >= 0.0 && dt.is_finite() && dt > 0.0) || (t > 0.0 && dt > t) {
        return Err(Error::InvalidStep { dt, t });
    }
    if t == 0.0 {
        return Ok((0, 0.0));
    }
    let n = (t / dt - 1e-9).ceil().max(1.0) as usize;
    Ok((n, t / n as f64))
}

/// Integrate `gen` from `rho` for a time `t` with RK4 steps no larger than `dt`.
///
/// The step is shrunk so that an integer number of steps lands on `t`.
pub fn integrate(gen: &GeneratorSpec, rho: &DensityMatrix, t: f64, dt: f64) -> Result<DensityMatrix> {
    integrate_observed(gen, rho, t, dt, 0, |_, _| {})
}

/// Like [`integrate`], calling `observe(time, state)` every `every` steps
/// (and at the end). `every = 0` only observes the final state.
pub fn integrate_observed(
    gen: &GeneratorSpec,
    rho: &DensityMatrix,
    t: f64,
    dt: f64,
    every: usize,
    mut observe: impl FnMut(f64, &Matrix4c),
) -> Result<DensityMatrix> {
    let (steps, h) = step_plan(t, dt)?;
    let mut m = *rho.matrix();
    for i in 1..=steps {
        m = rk4_step(gen, &m, h);
        if every > 0 && i % every == 0 && i != steps {
            observe(i as f64 * h, &m);
        }
    }
    observe(t, &m);
    let diag = validate(&m);
    if diag.worst_defect() > INTEGRATION_TOL {
        return Err(Error::IntegrationDiagnostic(diag));
    }
    Ok(DensityMatrix::from_integrator(m))
}
