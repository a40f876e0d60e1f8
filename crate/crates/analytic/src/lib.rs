//! Reference models for the cascade memory: motion-induced dephasing,
//! hyperfine beat envelopes, a single-atom master-equation check and the
//! μ₁ noise benchmark.

pub mod beats;
pub mod dephasing;
pub mod geometry;
pub mod lindblad;

pub use beats::{beat_envelope, storage_beat_mixture, storage_beat_model, BeatComponent, BeatMixture, BeatModel};
pub use dephasing::{doppler_lifetime, residual_wavevector, DephasingModel};
pub use geometry::{Geometry, Polarization};
pub use lindblad::{single_atom_lindblad, LindbladOptions, LindbladTrace, StateLabel};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integrator failure at t = {time:.4e} s: {reason}")]
    Integrator { time: f64, reason: String },
}

/// μ₁ = ⟨n_noise⟩ / η: noise photons per pulse referred to the memory input.
pub fn mu1(noise_photons: f64, efficiency: f64) -> Result<f64, AnalyticError> {
    if !(efficiency > 0.0) || efficiency > 1.0 {
        return Err(AnalyticError::Domain(format!("efficiency must lie in (0, 1], got {efficiency}")));
    }
    if !(noise_photons >= 0.0) {
        return Err(AnalyticError::Domain(format!("noise photon number must be non-negative, got {noise_photons}")));
    }
    Ok(noise_photons / efficiency)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu1_arithmetic() {
        assert_eq!(mu1(0.0, 0.3).unwrap(), 0.0);
        assert!((mu1(1e-4, 0.5).unwrap() - 2e-4).abs() < 1e-18);
        assert!(matches!(mu1(1e-4, 0.0), Err(AnalyticError::Domain(_))));
    }
}
