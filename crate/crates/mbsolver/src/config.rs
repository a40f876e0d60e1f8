//! TOML run configuration: species, cell, schedule, grid and calibration.
//!
//! Values use laboratory units (ns, ps, nJ, GHz, µm) and are converted to
//! SI when the solver objects are built.

use std::f64::consts::PI;
use std::path::Path;

use analytic::{Geometry, Polarization};
use atomphys::{SpeciesRecord, ThermalEnsemble};
use serde::{Deserialize, Serialize};

use crate::schedule::{ControlPulse, PathSelection, ProtocolSchedule, SignalPulse, SolverGrid};
use crate::MemoryError;

fn default_species() -> String {
    "cs133".into()
}
fn default_temperature() -> f64 {
    364.15
}
fn default_length() -> f64 {
    0.072
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Built-in name ("cs133", "rb87") or path to a species TOML file.
    #[serde(default = "default_species")]
    pub species: String,
    #[serde(default = "default_temperature")]
    pub temperature_k: f64,
    #[serde(default = "default_length")]
    pub cell_length_m: f64,
    /// Atomic number density; derived from the vapor-pressure model when absent.
    #[serde(default)]
    pub density_m3: Option<f64>,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub calibration: Calibration,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub lifetime: LifetimeConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub delta_ghz: f64,
    pub two_photon_detuning_mhz: f64,
    pub geometry: Geometry,
    /// "signal/control" with components pi, sigma+, sigma-.
    pub polarization: String,
    pub signal_fwhm_ps: f64,
    pub control_fwhm_ps: f64,
    pub waist_um: f64,
    pub read_in_energy_nj: f64,
    pub read_out_energy_nj: f64,
    pub storage_time_ns: f64,
    /// Carrier wavelengths; species values when absent.
    pub signal_wavelength_nm: Option<f64>,
    pub control_wavelength_nm: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            delta_ghz: 6.0,
            two_photon_detuning_mhz: 0.0,
            geometry: Geometry::CounterPropagating,
            polarization: "pi/pi".into(),
            signal_fwhm_ps: 540.0,
            control_fwhm_ps: 500.0,
            waist_um: 300.0,
            read_in_energy_nj: 0.21,
            read_out_energy_nj: 0.97,
            storage_time_ns: 3.5,
            signal_wavelength_nm: None,
            control_wavelength_nm: None,
        }
    }
}

/// The two free parameters of the model: a scale on the control-transition
/// dipole and the signal/control timing offset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Calibration {
    pub control_dipole_scale: f64,
    /// Read-in control centre minus signal centre (ps).
    pub control_delay_ps: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration { control_dipole_scale: 1.0, control_delay_ps: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub z_points: usize,
    pub dt_ps: f64,
    pub velocity_nodes: usize,
    pub margin_sigmas: f64,
    pub tail_ps: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = SolverGrid::default();
        GridConfig { z_points: g.z_points, dt_ps: g.dt * 1e12, velocity_nodes: g.velocity_nodes, margin_sigmas: g.margin_sigmas, tail_ps: g.tail * 1e12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Restrict to one (F′, F″) chain from the upper ground level, as after optical pumping.
    pub pumped_path: Option<[f64; 2]>,
    /// Collapse intermediate and storage hyperfine splittings.
    pub zero_splittings: bool,
    /// Switch off storage-state decay.
    pub no_storage_decay: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifetimeConfig {
    pub taus_ns: Vec<f64>,
}

impl Default for LifetimeConfig {
    fn default() -> Self {
        LifetimeConfig { taus_ns: (0..=40).map(|k| k as f64 * 0.5).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub energies_nj: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { energies_nj: vec![0.0, 0.025, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.4, 2.0, 3.0, 4.0] }
    }
}

/// Strips hyperfine structure from the intermediate and storage manifolds.
pub fn without_splittings(species: &SpeciesRecord) -> SpeciesRecord {
    let mut s = species.clone();
    for l in s.intermediate.levels.iter_mut().chain(s.storage.levels.iter_mut()) {
        l.energy_offset = 0.0;
    }
    s
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, MemoryError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| MemoryError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, MemoryError> {
        let text = std::fs::read_to_string(path).map_err(|e| MemoryError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), MemoryError> {
        let species = self.species()?;
        self.ensemble_for(&species)?;
        self.schedule_for(&species)?.validate()?;
        self.grid().validate()?;
        if self.lifetime.taus_ns.is_empty() || self.lifetime.taus_ns.iter().any(|t| !(*t >= 0.0)) {
            return Err(MemoryError::Config("lifetime.taus_ns must be a non-empty list of non-negative times".into()));
        }
        if self.sweep.energies_nj.iter().any(|e| !(*e >= 0.0)) {
            return Err(MemoryError::Config("sweep.energies_nj must be non-negative".into()));
        }
        Ok(())
    }

    /// Species with the model switches applied.
    pub fn species(&self) -> Result<SpeciesRecord, MemoryError> {
        let base = if Path::new(&self.species).extension().is_some_and(|e| e == "toml") {
            SpeciesRecord::from_file(Path::new(&self.species))?
        } else {
            SpeciesRecord::builtin(&self.species)?
        };
        let mut s = if self.model.zero_splittings { without_splittings(&base) } else { base };
        if self.model.no_storage_decay {
            s.storage.linewidth = 0.0;
        }
        Ok(s)
    }

    pub fn ensemble_for(&self, species: &SpeciesRecord) -> Result<ThermalEnsemble, MemoryError> {
        Ok(match self.density_m3 {
            Some(n) => ThermalEnsemble::with_density(species, self.temperature_k, n, self.cell_length_m)?,
            None => ThermalEnsemble::from_vapor(species, self.temperature_k, self.cell_length_m)?,
        })
    }

    pub fn schedule_for(&self, species: &SpeciesRecord) -> Result<ProtocolSchedule, MemoryError> {
        let c = &self.schedule;
        let polarization: Polarization = c.polarization.parse()?;
        let lc = c.control_wavelength_nm.map(|x| x * 1e-9).unwrap_or(species.control.wavelength);
        let delay = self.calibration.control_delay_ps * 1e-12;
        let control = |center: f64, energy_nj: f64| ControlPulse {
            center,
            fwhm: c.control_fwhm_ps * 1e-12,
            energy: energy_nj * 1e-9,
            wavelength: lc,
            waist: c.waist_um * 1e-6,
        };
        Ok(ProtocolSchedule {
            signal: SignalPulse {
                center: 0.0,
                fwhm: c.signal_fwhm_ps * 1e-12,
                wavelength: c.signal_wavelength_nm.map(|x| x * 1e-9).unwrap_or(species.signal.wavelength),
                mean_photons: 2.0,
            },
            controls: vec![control(delay, c.read_in_energy_nj), control(delay + c.storage_time_ns * 1e-9, c.read_out_energy_nj)],
            delta: 2.0 * PI * c.delta_ghz * 1e9,
            two_photon_detuning: 2.0 * PI * c.two_photon_detuning_mhz * 1e6,
            geometry: c.geometry,
            polarization,
            control_dipole_scale: self.calibration.control_dipole_scale,
        })
    }

    pub fn grid(&self) -> SolverGrid {
        let g = &self.grid;
        SolverGrid {
            z_points: g.z_points,
            dt: g.dt_ps * 1e-12,
            velocity_nodes: g.velocity_nodes,
            paths: match self.model.pumped_path {
                Some(p) => PathSelection::Only(vec![p]),
                None => PathSelection::All,
            },
            margin_sigmas: g.margin_sigmas,
            tail: g.tail_ps * 1e-12,
        }
    }

    pub fn taus(&self) -> Vec<f64> {
        self.lifetime.taus_ns.iter().map(|t| t * 1e-9).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.sweep.energies_nj.iter().map(|e| e * 1e-9).collect()
    }
}
