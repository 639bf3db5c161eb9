//! Hybrid Cassie–Mayr electric arc in a sinusoidally driven RL circuit, and the
//! evidence that its voltage–current characteristic behaves like a memristor:
//! a pinched hysteresis loop, coincident voltage and current zero crossings,
//! and a loop that collapses onto a single-valued curve as the drive frequency
//! grows.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the parameter types and right-hand sides,
//! * [`integrator`] the adaptive Dormand–Prince solver, zero-crossing location
//!   and the periodic settle loop,
//! * [`analysis`] turns settled periods into pinch points, loop areas, Fourier
//!   spectra, fingerprint verdicts and parameter sweeps,
//! * [`cli`] reads scenario files and presets and writes CSV output.

pub mod analysis;
pub mod cli;
pub mod integrator;
pub mod model;

pub use integrator::{
    find_zero_crossings, integrate, settle_to_periodic, IntegrationError, IntegratorConfig, SettleConfig, SettleReport,
    Settled, Signal, Trajectory,
};
pub use model::{
    arc_rhs, ArcParameters, ArcState, CircuitParameters, ConductanceModel, FixedConductance, ModelError, SigmaLaw,
    ThetaLaw,
};
