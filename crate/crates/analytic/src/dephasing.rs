//! Motion-induced dephasing of the stored coherence.

use std::f64::consts::PI;

use atomphys::{thermal_speed, SpeciesRecord};
use serde::Serialize;

use crate::geometry::Geometry;
use crate::AnalyticError;

/// Signed residual wavevector of the two-photon coherence (m⁻¹).
///
/// Counter-propagating beams leave k_s − k_c; co-propagating beams add.
pub fn residual_wavevector(lambda_signal: f64, lambda_control: f64, geometry: Geometry) -> f64 {
    let (ks, kc) = (2.0 * PI / lambda_signal, 2.0 * PI / lambda_control);
    match geometry {
        Geometry::CounterPropagating => ks - kc,
        Geometry::CoPropagating => ks + kc,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DephasingModel {
    pub k_r: f64,
    pub v_s: f64,
    /// 1/(|k_r| v_s); infinite when k_r = 0.
    pub tau_d: f64,
}

impl DephasingModel {
    pub fn new(k_r: f64, v_s: f64) -> Self {
        let rate = k_r.abs() * v_s;
        let tau_d = if rate == 0.0 { f64::INFINITY } else { 1.0 / rate };
        DephasingModel { k_r, v_s, tau_d }
    }

    pub fn for_species(
        lambda_signal: f64,
        lambda_control: f64,
        temperature: f64,
        species: &SpeciesRecord,
        geometry: Geometry,
    ) -> Result<Self, AnalyticError> {
        if !(lambda_signal > 0.0 && lambda_control > 0.0) {
            return Err(AnalyticError::Domain("wavelengths must be positive".into()));
        }
        let vs = thermal_speed(species, temperature).map_err(|e| AnalyticError::Domain(e.to_string()))?;
        Ok(Self::new(residual_wavevector(lambda_signal, lambda_control, geometry), vs))
    }

    /// Intensity envelope exp(−(τ/τ_D)²).
    pub fn envelope(&self, tau: f64) -> f64 {
        if self.tau_d.is_infinite() {
            1.0
        } else {
            (-(tau / self.tau_d).powi(2)).exp()
        }
    }
}

/// τ_D = 1/(|k_r| v_s); +∞ when the wavevectors cancel exactly.
pub fn doppler_lifetime(
    lambda_signal: f64,
    lambda_control: f64,
    temperature: f64,
    species: &SpeciesRecord,
    geometry: Geometry,
) -> Result<f64, AnalyticError> {
    Ok(DephasingModel::for_species(lambda_signal, lambda_control, temperature, species, geometry)?.tau_d)
}
