//! Closed-form propagators for the cavity pair and the probe atom.
//!
//! Every map here has the same structure: a contraction `M` acting on the
//! one-excitation sector `{|1,0,g⟩, |0,1,g⟩, |0,0,e⟩}` and the vacuum
//! `|0,0,g⟩` left untouched. At zero temperature all jump operators carry the
//! excitation into the vacuum, so the weight that `M` removes from the
//! one-excitation block reappears as vacuum population:
//!
//! ```text
//! ρ₁₁ → M ρ₁₁ M†      ρ₁₀ → M ρ₁₀      ρ₀₀ → ρ₀₀ + tr ρ₁₁ − tr(M ρ₁₁ M†)
//! ```
//!
//! Phase convention: the one-excitation sector carries energy ω (atom
//! resonant with the modes), and the exchange amplitudes take the factor −i
//! of the exact solution, `c₂ = −i sin(gt)`. Probabilities only depend on
//! moduli.

use nalgebra::Matrix3;

use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;
use crate::state::{DensityMatrix, Matrix4c, C64};

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);
const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Lossless exchange amplitudes for a photon starting in mode A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeAmplitudes {
    /// Amplitude to remain in A, `cos(gt)`.
    pub c1: C64,
    /// Amplitude to be found in B, `−i sin(gt)`.
    pub c2: C64,
}

/// Lossy exchange amplitudes `f₁`, `l₂` for a photon starting in mode A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossyAmplitudes {
    pub f1: C64,
    pub l2: C64,
}

/// Trace-preserving map given by a contraction on the one-excitation sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationMap {
    block: Matrix3<C64>,
}

impl ExcitationMap {
    pub fn identity() -> Self {
        ExcitationMap {
            block: Matrix3::identity(),
        }
    }

    /// Build from a 3×3 block in the order `(|1,0,g⟩, |0,1,g⟩, |0,0,e⟩)`.
    /// The block must be a contraction (`M†M ≤ 1`) for the result to be physical.
    pub fn from_block(block: Matrix3<C64>) -> Self {
        ExcitationMap { block }
    }

    pub fn block(&self) -> &Matrix3<C64> {
        &self.block
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &ExcitationMap) -> ExcitationMap {
        ExcitationMap {
            block: next.block * self.block,
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_map_output(self.apply_matrix(rho.matrix()))
    }

    pub(crate) fn apply_matrix(&self, r: &Matrix4c) -> Matrix4c {
        let b11: Matrix3<C64> = r.fixed_view::<3, 3>(0, 0).into_owned();
        let col = r.fixed_view::<3, 1>(0, 3).into_owned();
        let new11 = self.block * b11 * self.block.adjoint();
        let new_col = self.block * col;
        let lost = (b11.trace() - new11.trace()).re;

        let mut out = Matrix4c::zeros();
        out.fixed_view_mut::<3, 3>(0, 0).copy_from(&new11);
        out.fixed_view_mut::<3, 1>(0, 3).copy_from(&new_col);
        out.fixed_view_mut::<1, 3>(3, 0).copy_from(&new_col.adjoint());
        out[(3, 3)] = r[(3, 3)] + C64::new(lost, 0.0);
        out
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(invalid("t", format!("evolution time must be finite and >= 0, got {t}")))
    }
}

fn free_phase(omega: f64, t: f64) -> C64 {
    C64::from_polar(1.0, -omega * t)
}

pub fn exchange_amplitudes(g: f64, t: f64) -> ExchangeAmplitudes {
    let (s, c) = (g * t).sin_cos();
    ExchangeAmplitudes {
        c1: C64::new(c, 0.0),
        c2: C64::new(0.0, -s),
    }
}

/// `f₁ = e^{−(k+iω)t} cos(gt)`, `l₂ = −i e^{−(k+iω)t} sin(gt)`.
pub fn lossy_amplitudes(params: &SystemParams, t: f64) -> LossyAmplitudes {
    let envelope = C64::new(-params.k * t, -params.omega * t).exp();
    let (s, c) = (params.g * t).sin_cos();
    LossyAmplitudes {
        f1: envelope * c,
        l2: envelope * C64::new(0.0, -s),
    }
}

/// Exchange between the two modes for a time `t` with amplitude decay `k`.
/// The atom is a spectator.
pub fn coupled_map(params: &SystemParams, k: f64, t: f64) -> ExcitationMap {
    let amps = lossy_amplitudes(&SystemParams { k, ..*params }, t);
    let atom = free_phase(params.omega, t);
    ExcitationMap::from_block(Matrix3::new(
        amps.f1, amps.l2, ZERO, //
        amps.l2, amps.f1, ZERO, //
        ZERO, ZERO, atom,
    ))
}

/// Lossless two-mode exchange over `t`.
pub fn evolve_coupled_unitary(rho: &DensityMatrix, params: &SystemParams, t: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    Ok(coupled_map(params, 0.0, t).apply(rho))
}

/// Two-mode exchange over `t` with both cavities decaying at rate `params.k`.
pub fn evolve_coupled_lossy(rho: &DensityMatrix, params: &SystemParams, t: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    Ok(coupled_map(params, params.k, t).apply(rho))
}

/// Duration of a complete transfer of the mode-B excitation in the damped
/// Jaynes–Cummings model: `arccos((2k² − Ω₀²)/Ω₀²) / √(Ω₀² − k²)`.
///
/// At this time the amplitude of mode B vanishes exactly.
pub fn tau_pi(omega0: f64, k: f64) -> Result<f64> {
    if !(omega0.is_finite() && k.is_finite() && k >= 0.0 && omega0 > k) {
        return Err(Error::TauPiDomain { omega0, k });
    }
    let o2 = omega0 * omega0;
    let arg = ((2.0 * k * k - o2) / o2).clamp(-1.0, 1.0);
    Ok(arg.acos() / (o2 - k * k).sqrt())
}

/// Instantaneous lossless π pulse between mode B and the probe atom:
/// `|0,1,g⟩ → −i|0,0,e⟩`, `|0,0,e⟩ → −i|0,1,g⟩`.
pub fn pi_pulse_ideal_map() -> ExcitationMap {
    ExcitationMap::from_block(Matrix3::new(
        ONE, ZERO, ZERO, //
        ZERO, ZERO, MINUS_I, //
        ZERO, MINUS_I, ZERO,
    ))
}

pub fn pi_pulse_ideal(rho: &DensityMatrix) -> DensityMatrix {
    pi_pulse_ideal_map().apply(rho)
}

/// Exact damped Jaynes–Cummings propagator over `τ_π`, with the cavities
/// decoupled and mode A decaying freely.
///
/// With `φ = arctan(√(Ω₀² − k²)/k)` the B/atom block at `τ_π` reduces to
/// `e^{−kτ_π/2} [[0, −i], [−i, 2k/Ω₀]]`, so a photon in B reaches the atom
/// with probability `e^{−kτ_π}` and mode A keeps `e^{−2kτ_π}`.
pub fn pi_pulse_lossy_map(params: &SystemParams) -> Result<ExcitationMap> {
    let tau = tau_pi(params.omega0, params.k)?;
    let phase = free_phase(params.omega, tau);
    let a = (-params.k * tau).exp() * phase;
    let half = (-0.5 * params.k * tau).exp() * phase;
    let stay = half * (2.0 * params.k / params.omega0);
    Ok(ExcitationMap::from_block(Matrix3::new(
        a,
        ZERO,
        ZERO, //
        ZERO,
        ZERO,
        half * MINUS_I, //
        ZERO,
        half * MINUS_I,
        stay,
    )))
}

pub fn pi_pulse_lossy(rho: &DensityMatrix, params: &SystemParams) -> Result<DensityMatrix> {
    Ok(pi_pulse_lossy_map(params)?.apply(rho))
}

/// Instantaneous lossless π pulse between mode A and a readout atom:
/// `|1,0,g⟩ → −i|0,0,e⟩`.
pub fn readout_pulse_map() -> ExcitationMap {
    ExcitationMap::from_block(Matrix3::new(
        ZERO, ZERO, MINUS_I, //
        ZERO, ONE, ZERO, //
        MINUS_I, ZERO, ZERO,
    ))
}

pub fn readout_pulse(rho: &DensityMatrix) -> DensityMatrix {
    readout_pulse_map().apply(rho)
}
