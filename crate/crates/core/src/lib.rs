//! Quantum Zeno effect for a photon tunnelling between two coupled lossy
//! microwave cavities, monitored by two-level atoms sent through one of them.
//!
//! The crate provides closed-form propagators and probabilities, exact
//! step-wise density-matrix runs of each measurement scheme, a Monte Carlo
//! sampler of detector records, and a dense Lindblad integrator used as an
//! independent reference for all of the above.

pub mod cli;
pub mod detection;
pub mod dynamics;
pub mod error;
pub mod lindblad;
pub mod montecarlo;
pub mod params;
pub mod protocols;
pub mod state;

#[cfg(test)]
mod testutil;

pub use detection::{measure, trace_out_atom, DetectorMode, DetectorSetup, MeasurementOutcome, OutcomeLabel};
pub use error::{Error, Result};
pub use montecarlo::{estimate, sample_trajectory, Estimate, FinalLabel, SeededSampler, Trajectory};
pub use params::SystemParams;
pub use protocols::{
    run_protocol, sweep_curve, Conditioning, CurvePoint, CurveSeries, CurveSource, ProtocolKind, RunResult, SourceKind,
    StepRecord,
};
pub use state::{population, validate, BasisState, DensityMatrix, Diagnostics, C64};
