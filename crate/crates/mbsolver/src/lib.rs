//! Linearized Maxwell-Bloch solver for an off-resonant cascaded-absorption
//! memory: weak signal, strong classical control, warm vapor.
//!
//! The atomic state is resolved over position, axial velocity class and
//! ground magnetic sublevel; within each sublevel channel the polarization
//! runs over intermediate hyperfine levels and the spin wave over storage
//! hyperfine levels, so every hyperfine path shares its read-in and
//! read-out amplitudes exactly as the angular-momentum algebra dictates.

pub mod config;
pub mod curves;
pub mod model;
pub mod schedule;
pub mod solver;

pub use config::{Calibration, RunConfig};
pub use curves::{efficiency_vs_energy, fit_lifetime, lifetime_curve, EnergyPoint, LifetimeFit, LifetimePoint};
pub use schedule::{build_control_envelope, ControlEnvelope, ControlPulse, PathSelection, ProtocolSchedule, SignalPulse, SolverGrid};
pub use solver::{evolve_dark, propagate_retrieval, propagate_storage, retrieve_with_state, run_memory, EnsembleState, MemoryResult, NormBudget};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum MemoryError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrator unstable at t = {time:.4e} s (step {step}, dt = {dt:.3e} s): stored norm {norm:.4e} exceeds bound {bound:.4e}")]
    Unstable { time: f64, step: usize, dt: f64, norm: f64, bound: f64 },
    #[error("grid violates the RK4 stability bound: |λ|max·dt = {product:.3} > {limit}")]
    GridUnstable { product: f64, limit: f64 },
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Atom(#[from] atomphys::AtomError),
    #[error(transparent)]
    Analytic(#[from] analytic::AnalyticError),
    #[error("configuration error: {0}")]
    Config(String),
}
