//! Weak-probe transmission scans across the signal line and the inverse
//! temperature fit.

use std::f64::consts::PI;
use std::path::Path;

use atomphys::absorption::{fit_temperature, transmission_spectrum, TemperatureFit};
use atomphys::{SpeciesRecord, ThermalEnsemble};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{OrcaError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbsorptionConfig {
    pub species: String,
    pub temperature_k: f64,
    pub cell_length_m: f64,
    /// Probe detuning range from the line centroid.
    pub scan_start_ghz: f64,
    pub scan_stop_ghz: f64,
    pub points: usize,
    /// Relative Gaussian noise on each transmission sample.
    pub noise: f64,
    /// Detuning below the F → F+1 line at which the signal transmission is reported.
    pub signal_detuning_ghz: f64,
}

impl Default for AbsorptionConfig {
    fn default() -> Self {
        Self {
            species: "cs133".into(),
            temperature_k: 364.15,
            cell_length_m: 0.072,
            scan_start_ghz: -9.0,
            scan_stop_ghz: 9.0,
            points: 600,
            noise: 0.0,
            signal_detuning_ghz: 6.0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct AbsorptionOverrides {
    pub species: Option<String>,
    pub temperature_k: Option<f64>,
    pub noise: Option<f64>,
}

impl AbsorptionConfig {
    pub fn validate(&self) -> Result<()> {
        SpeciesRecord::builtin(&self.species)?;
        if !(self.temperature_k > 0.0 && self.cell_length_m > 0.0) {
            return Err(OrcaError::Config("temperature and cell length must be positive".into()));
        }
        if !(self.scan_stop_ghz > self.scan_start_ghz) || self.points < 2 {
            return Err(OrcaError::Config("scan needs stop > start and at least two points".into()));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(OrcaError::Config(format!("noise {} must be non-negative", self.noise)));
        }
        Ok(())
    }

    pub fn detunings(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..self.points)
            .map(|k| 2.0 * PI * 1e9 * (self.scan_start_ghz + (self.scan_stop_ghz - self.scan_start_ghz) * k as f64 / n as f64))
            .collect()
    }
}

pub fn resolve(config: Option<&Path>, o: &AbsorptionOverrides) -> Result<AbsorptionConfig> {
    let mut cfg: AbsorptionConfig = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| OrcaError::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| OrcaError::Config(e.to_string()))?
        }
        None => AbsorptionConfig::default(),
    };
    if let Some(s) = &o.species {
        cfg.species = s.clone();
    }
    if let Some(t) = o.temperature_k {
        cfg.temperature_k = t;
    }
    if let Some(n) = o.noise {
        cfg.noise = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct AbsorptionReport {
    pub fit: TemperatureFit,
    pub fitted_temperature_k: f64,
    /// Single-pass transmission at the signal detuning.
    pub signal_transmission: f64,
    /// (detuning rad/s, transmission).
    pub spectrum: Vec<(f64, f64)>,
}

pub fn compute(cfg: &AbsorptionConfig, seed: u64) -> Result<AbsorptionReport> {
    let species = SpeciesRecord::builtin(&cfg.species)?;
    let ens = ThermalEnsemble::from_vapor(&species, cfg.temperature_k, cfg.cell_length_m)?;
    let mut spectrum = transmission_spectrum(&cfg.detunings(), &ens, &species);
    if cfg.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Normal::new(0.0, cfg.noise).map_err(|e| OrcaError::Config(e.to_string()))?;
        spectrum.iter_mut().for_each(|(_, t)| *t *= 1.0 + n.sample(&mut rng));
    }
    let f = species.upper_ground_f();
    let line = species.intermediate.offset(f + 1.0) - species.ground.offset(f);
    let signal = transmission_spectrum(&[line - 2.0 * PI * cfg.signal_detuning_ghz * 1e9], &ens, &species)[0].1;
    let fit = fit_temperature(&spectrum, &species, cfg.cell_length_m)?;
    Ok(AbsorptionReport { fitted_temperature_k: fit.temperature, fit, signal_transmission: signal, spectrum })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_endpoints() {
        let d = AbsorptionConfig::default().detunings();
        assert_eq!(d.len(), 600);
        assert!((d[0] + 2.0 * PI * 9e9).abs() < 1.0 && (d[599] - 2.0 * PI * 9e9).abs() < 1.0);
    }

    #[test]
    fn invalid_scan_rejected() {
        let o = AbsorptionOverrides { noise: Some(-0.1), ..Default::default() };
        assert!(resolve(None, &o).is_err());
        let o = AbsorptionOverrides { species: Some("na23".into()), ..Default::default() };
        assert!(matches!(resolve(None, &o), Err(OrcaError::Config(_))));
    }
}
