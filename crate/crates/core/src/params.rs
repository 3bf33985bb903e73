use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Physical constants and protocol knobs. Rates in s⁻¹, times in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Mode frequency ω (rad/s). Only enters as a phase.
    pub omega: f64,
    /// Cavity–cavity coupling g (rad/s).
    pub g: f64,
    /// Cavity amplitude decay rate k (1/s).
    pub k: f64,
    /// Vacuum Rabi frequency Ω₀ (rad/s).
    pub omega0: f64,
    /// Efficiency of the ground-state detector.
    pub p_g: f64,
    /// Efficiency of the excited-state detector.
    pub p_e: f64,
    /// Total coupled-exchange time T₀ (s).
    pub t0: f64,
    /// Number of probe atoms.
    pub n: u32,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams::new(1e3, 0.0, 1e5)
    }
}

impl SystemParams {
    /// Lossless-detector parameters with `T₀ = π/2g`, `ω = 0` and a single atom.
    pub fn new(g: f64, k: f64, omega0: f64) -> Self {
        SystemParams {
            omega: 0.0,
            g,
            k,
            omega0,
            p_g: 1.0,
            p_e: 1.0,
            t0: full_transfer_time(g),
            n: 1,
        }
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n = n;
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_p_g(mut self, p_g: f64) -> Self {
        self.p_g = p_g;
        self
    }

    pub fn with_p_e(mut self, p_e: f64) -> Self {
        self.p_e = p_e;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// Free-exchange interval between consecutive atoms, `T₀/N`.
    pub fn tau_ab(&self) -> f64 {
        self.t0 / f64::from(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega", self.omega),
            ("g", self.g),
            ("k", self.k),
            ("omega0", self.omega0),
            ("p_g", self.p_g),
            ("p_e", self.p_e),
            ("t0", self.t0),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.g <= 0.0 {
            return Err(invalid("g", format!("must be > 0, got {}", self.g)));
        }
        if self.omega0 <= 0.0 {
            return Err(invalid("omega0", format!("must be > 0, got {}", self.omega0)));
        }
        if self.k < 0.0 {
            return Err(invalid("k", format!("must be >= 0, got {}", self.k)));
        }
        if self.omega0 <= self.k {
            return Err(invalid(
                "omega0",
                format!("must exceed k (omega0 = {}, k = {})", self.omega0, self.k),
            ));
        }
        for (name, p) in [("p_g", self.p_g), ("p_e", self.p_e)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(name, format!("must lie in [0, 1], got {p}")));
            }
        }
        if self.t0 < 0.0 {
            return Err(invalid("t0", format!("must be >= 0, got {}", self.t0)));
        }
        if self.n == 0 {
            return Err(invalid("n", "at least one probe atom is required"));
        }
        Ok(())
    }
}

/// `π/2g`: time for a complete photon transfer between the cavities.
pub fn full_transfer_time(g: f64) -> f64 {
    FRAC_PI_2 / g
}
