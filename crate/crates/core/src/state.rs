//! State space of one photon shared by two cavity modes plus one probe atom.
//!
//! Only four joint states are ever populated: the photon in mode A, the
//! photon in mode B, the photon absorbed by the atom, and the vacuum. Every
//! propagator in this crate conserves or lowers the excitation number, so the
//! truncation is exact for the protocols simulated here.

use std::fmt;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix4c = Matrix4<C64>;

/// Hermiticity tolerance: max |ρ_ij − conj(ρ_ji)|.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace tolerance: |tr ρ − 1|.
pub const TRACE_TOL: f64 = 1e-10;
/// Positivity tolerance: smallest eigenvalue ≥ −POSITIVITY_TOL.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Joint basis `|n_A, n_B, atom⟩`. The discriminant is the matrix index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisState {
    /// `|1,0,g⟩`: photon in mode A.
    Ket10g = 0,
    /// `|0,1,g⟩`: photon in mode B.
    Ket01g = 1,
    /// `|0,0,e⟩`: photon absorbed by the probe atom.
    Ket00e = 2,
    /// `|0,0,g⟩`: vacuum.
    Ket00g = 3,
}

impl BasisState {
    pub const ALL: [BasisState; 4] = [
        BasisState::Ket10g,
        BasisState::Ket01g,
        BasisState::Ket00e,
        BasisState::Ket00g,
    ];

    #[inline]
    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// True for `|0,0,e⟩`, the only state with the atom excited.
    pub const fn atom_excited(self) -> bool {
        matches!(self, BasisState::Ket00e)
    }

    pub const fn excitations(self) -> u32 {
        match self {
            BasisState::Ket00g => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasisState::Ket10g => "|1,0,g>",
            BasisState::Ket01g => "|0,1,g>",
            BasisState::Ket00e => "|0,0,e>",
            BasisState::Ket00g => "|0,0,g>",
        };
        f.write_str(s)
    }
}

/// Result of [`validate`]: measured defects and the flags they raise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_violated: bool,
    pub trace_violated: bool,
    pub positivity_violated: bool,
}

impl Diagnostics {
    pub fn is_valid(&self) -> bool {
        !(self.hermiticity_violated || self.trace_violated || self.positivity_violated)
    }

    /// Largest of the three defects, with the eigenvalue counted only when negative.
    pub fn worst_defect(&self) -> f64 {
        self.hermiticity_defect
            .max(self.trace_defect)
            .max((-self.min_eigenvalue).max(0.0))
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hermiticity defect {:.3e}{}, trace defect {:.3e}{}, min eigenvalue {:.3e}{}",
            self.hermiticity_defect,
            if self.hermiticity_violated { " (violated)" } else { "" },
            self.trace_defect,
            if self.trace_violated { " (violated)" } else { "" },
            self.min_eigenvalue,
            if self.positivity_violated { " (violated)" } else { "" },
        )
    }
}

pub(crate) fn hermitian_part(m: &Matrix4c) -> Matrix4c {
    (m + m.adjoint()).unscale(2.0)
}

fn hermiticity_defect(m: &Matrix4c) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn min_eigenvalue(m: &Matrix4c) -> f64 {
    let eig = SymmetricEigen::new(hermitian_part(m));
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Check a raw 4×4 matrix against the density-operator invariants.
pub fn validate(m: &Matrix4c) -> Diagnostics {
    let hermiticity_defect = hermiticity_defect(m);
    let tr = m.trace();
    let trace_defect = (tr - C64::new(1.0, 0.0)).norm();
    let min_eigenvalue = min_eigenvalue(m);
    Diagnostics {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        hermiticity_violated: hermiticity_defect.is_nan() || hermiticity_defect > HERMITICITY_TOL,
        trace_violated: trace_defect.is_nan() || trace_defect > TRACE_TOL,
        positivity_violated: min_eigenvalue.is_nan() || min_eigenvalue < -POSITIVITY_TOL,
    }
}

/// Hermitian, unit-trace, positive semidefinite operator on the four-state space.
///
/// Values are only constructed through validating constructors or through the
/// trace-preserving maps of this crate, so every `DensityMatrix` in circulation
/// satisfies the invariants checked by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Matrix4c);

impl DensityMatrix {
    /// Projector onto a basis state.
    pub fn new_pure(state: BasisState) -> Self {
        let mut m = Matrix4c::zeros();
        m[(state.index(), state.index())] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    pub fn vacuum() -> Self {
        Self::new_pure(BasisState::Ket00g)
    }

    pub fn from_matrix(m: Matrix4c) -> Result<Self> {
        let diag = validate(&m);
        if diag.is_valid() {
            Ok(DensityMatrix(m))
        } else {
            Err(Error::InvalidState(diag))
        }
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn from_amplitudes(amps: [C64; 4]) -> Result<Self> {
        let mut m = Matrix4c::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = amps[i] * amps[j].conj();
            }
        }
        Self::from_matrix(m)
    }

    /// Diagonal (classical) mixture of the basis states.
    pub fn from_populations(pops: [f64; 4]) -> Result<Self> {
        let mut m = Matrix4c::zeros();
        for (i, p) in pops.iter().enumerate() {
            m[(i, i)] = C64::new(*p, 0.0);
        }
        Self::from_matrix(m)
    }

    /// Wrap a matrix produced by a trace-preserving map. The input is
    /// Hermitized; validity is asserted in debug builds only.
    pub(crate) fn from_map_output(m: Matrix4c) -> Self {
        let m = hermitian_part(&m);
        debug_assert!(
            validate(&m).worst_defect() < 1e-9,
            "map produced an invalid state: {}",
            validate(&m)
        );
        DensityMatrix(m)
    }

    /// Wrap integrator output; the caller has already bounded its defects.
    pub(crate) fn from_integrator(m: Matrix4c) -> Self {
        DensityMatrix(hermitian_part(&m))
    }

    /// Normalize a positive operator of weight `weight > 0`.
    pub(crate) fn from_unnormalized(m: Matrix4c, weight: f64) -> Self {
        Self::from_map_output(m.unscale(weight))
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4c {
        self.0
    }

    pub fn entry(&self, row: BasisState, col: BasisState) -> C64 {
        self.0[(row.index(), col.index())]
    }

    /// Diagonal element for `state`, clamped to `[0, 1]`.
    pub fn population(&self, state: BasisState) -> f64 {
        self.0[(state.index(), state.index())].re.clamp(0.0, 1.0)
    }

    pub fn populations(&self) -> [f64; 4] {
        BasisState::ALL.map(|s| self.population(s))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn diagnostics(&self) -> Diagnostics {
        validate(&self.0)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Convex combination `Σ wᵢ ρᵢ`, with the weights renormalized.
    pub fn mixture<'a>(parts: impl IntoIterator<Item = (f64, &'a DensityMatrix)>) -> Result<Self> {
        let mut m = Matrix4c::zeros();
        let mut total = 0.0;
        for (w, rho) in parts {
            if w.is_nan() || w < 0.0 {
                return Err(crate::error::invalid("weight", format!("negative mixture weight {w}")));
            }
            m += rho.0.scale(w);
            total += w;
        }
        if total.is_nan() || total <= 0.0 {
            return Err(crate::error::invalid("weight", "mixture weights sum to zero"));
        }
        Ok(Self::from_unnormalized(m, total))
    }
}

/// Free-function form of [`DensityMatrix::population`].
pub fn population(rho: &DensityMatrix, state: BasisState) -> f64 {
    rho.population(state)
}
