//! Storage-time curves with Doppler and hyperfine-beat overlays.

use std::path::Path;

use analytic::{storage_beat_mixture, DephasingModel};
use mbsolver::{fit_lifetime, lifetime_curve, LifetimeFit, LifetimePoint, RunConfig};
use serde::Serialize;

use crate::error::{OrcaError, Result};

/// Shipped Cs operating point; the CLI default when no config file is given.
pub const CS_CALIBRATED: &str = include_str!("../../../configs/cs-calibrated.toml");

#[derive(Clone, Debug, Default)]
pub struct MemoryOverrides {
    pub species: Option<String>,
    /// Restrict to the stretched chain from the upper ground level.
    pub pumped: bool,
    /// Only 0 is accepted: collapses intermediate and storage splittings.
    pub splittings: Option<f64>,
    pub no_storage_decay: bool,
    pub taus_ns: Option<Vec<f64>>,
    pub energies_nj: Option<Vec<f64>>,
}

fn canonical_species(name: &str) -> &str {
    match name.to_ascii_lowercase().as_str() {
        "cs" | "cs133" => "cs133",
        "rb" | "rb87" => "rb87",
        _ => name,
    }
}

/// Built-in base configuration for a species: the calibrated Cs file with
/// every hyperfine chain enabled, or Rb defaults with a storage-time axis
/// long enough to reach its 1/e point.
pub fn builtin_config(species: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_toml_str(CS_CALIBRATED)?;
    cfg.model.pumped_path = None;
    if canonical_species(species) != "cs133" {
        cfg = RunConfig::from_toml_str("")?;
        cfg.species = canonical_species(species).to_string();
        cfg.lifetime.taus_ns = (0..=50).map(|k| k as f64 * 5.0).collect();
    }
    Ok(cfg)
}

/// File or built-in configuration with the command-line overrides applied.
pub fn resolve(config: Option<&Path>, o: &MemoryOverrides) -> Result<RunConfig> {
    let mut cfg = match config {
        Some(p) => RunConfig::from_file(p)?,
        None => builtin_config(o.species.as_deref().unwrap_or("cs133"))?,
    };
    if let Some(s) = &o.species {
        cfg.species = canonical_species(s).to_string();
    }
    match o.splittings {
        Some(x) if x == 0.0 => cfg.model.zero_splittings = true,
        Some(x) => return Err(OrcaError::Config(format!("--splittings only accepts 0, got {x}"))),
        None => {}
    }
    if o.no_storage_decay {
        cfg.model.no_storage_decay = true;
    }
    if o.pumped {
        let f = cfg.species()?.upper_ground_f();
        cfg.model.pumped_path = Some([f + 1.0, f + 2.0]);
    }
    if let Some(t) = &o.taus_ns {
        cfg.lifetime.taus_ns = t.clone();
    }
    if let Some(e) = &o.energies_nj {
        cfg.sweep.energies_nj = e.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct LifetimeRow {
    #[serde(flatten)]
    pub point: LifetimePoint,
    /// exp(−(τ/τ_D)²).
    pub doppler: f64,
    /// Sublevel-resolved storage beat times the Doppler envelope.
    pub beat: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LifetimeReport {
    pub fitted_lifetime_s: f64,
    pub fit: LifetimeFit,
    pub doppler_lifetime_s: f64,
    pub rows: Vec<LifetimeRow>,
}

pub fn compute(cfg: &RunConfig) -> Result<LifetimeReport> {
    let species = cfg.species()?;
    let ens = cfg.ensemble_for(&species)?;
    let sched = cfg.schedule_for(&species)?;
    let curve = lifetime_curve(&sched, &cfg.taus(), &cfg.grid(), &ens, &species)?;
    let dephasing = DephasingModel::for_species(
        sched.signal.wavelength,
        sched.controls[0].wavelength,
        cfg.temperature_k,
        &species,
        sched.geometry,
    )?;
    let beats = storage_beat_mixture(&species, sched.polarization, sched.delta, dephasing.tau_d)?;
    let rows: Vec<LifetimeRow> = curve
        .iter()
        .map(|p| LifetimeRow { point: *p, doppler: dephasing.envelope(p.tau), beat: beats.envelope(p.tau) })
        .collect();
    let fit = fit_lifetime(&curve.iter().map(|p| (p.tau, p.eta_n)).collect::<Vec<_>>())?;
    Ok(LifetimeReport { fitted_lifetime_s: fit.first_crossing, fit, doppler_lifetime_s: dephasing.tau_d, rows })
}
