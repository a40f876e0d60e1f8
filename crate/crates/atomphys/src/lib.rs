//! Atomic and thermal physics for warm alkali vapor: species data, hyperfine
//! structure, dipole line strengths, axial velocity quadrature and Voigt
//! absorption.

pub mod absorption;
pub mod angular;
pub mod constants;
pub mod faddeeva;
pub mod hyperfine;
pub mod species;
pub mod thermal;

pub use absorption::{fit_temperature, line_components, transmission_spectrum, voigt_absorption, ManifoldPair, TemperatureFit};
pub use angular::{absorption_amplitude, dipole_component, relative_line_strength, wigner_3j, wigner_6j};
pub use species::{HyperfineLevel, Manifold, SpeciesRecord, Transition, VaporPressureModel};
pub use thermal::{thermal_speed, velocity_nodes, velocity_quadrature, ThermalEnsemble};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AtomError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid species data: {0}")]
    InvalidSpecies(String),
    #[error("fit did not converge ({reason}); best T = {best_temperature} K, SSR = {ssr:.3e}, rms residual = {rms_residual:.3e}")]
    FitNonConvergence { reason: String, best_temperature: f64, ssr: f64, rms_residual: f64 },
}
