//! Pulse schedule, discretization and the control-field envelope.

use std::f64::consts::{LN_2, PI};

use analytic::{Geometry, Polarization};
use atomphys::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use atomphys::{relative_line_strength, SpeciesRecord};
use serde::{Deserialize, Serialize};

use crate::MemoryError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalPulse {
    /// Peak time at the cell entrance, in the frame moving with the signal (s).
    pub center: f64,
    /// Intensity FWHM (s).
    pub fwhm: f64,
    pub wavelength: f64,
    /// Sets the input scale, ∫|A_in|² dt = mean_photons; efficiencies do not depend on it.
    pub mean_photons: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPulse {
    /// Time at which the pulse peak crosses the middle of the cell, in the signal frame (s).
    pub center: f64,
    /// Intensity FWHM (s).
    pub fwhm: f64,
    /// Pulse energy (J).
    pub energy: f64,
    pub wavelength: f64,
    /// 1/e² intensity radius (m).
    pub waist: f64,
}

/// The first control pulse reads in, the second reads out; the storage time
/// is the separation of their centres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSchedule {
    pub signal: SignalPulse,
    pub controls: Vec<ControlPulse>,
    /// One-photon detuning from the F → F+1 line (rad/s); positive moves both fields toward the ground state.
    pub delta: f64,
    /// Two-photon detuning from the stretched storage level (rad/s).
    pub two_photon_detuning: f64,
    pub geometry: Geometry,
    pub polarization: Polarization,
    /// Multiplies the tabulated intermediate–storage reduced dipole.
    pub control_dipole_scale: f64,
}

impl ProtocolSchedule {
    /// Cs defaults: 6 GHz red detuning, 540 ps signal, 500 ps control pulses, counter-propagating.
    pub fn for_species(species: &SpeciesRecord, read_in_energy: f64, read_out_energy: f64, storage_time: f64) -> Self {
        let control = |center: f64, energy: f64| ControlPulse {
            center,
            fwhm: 500e-12,
            energy,
            wavelength: species.control.wavelength,
            waist: 300e-6,
        };
        ProtocolSchedule {
            signal: SignalPulse { center: 0.0, fwhm: 540e-12, wavelength: species.signal.wavelength, mean_photons: 2.0 },
            controls: vec![control(0.0, read_in_energy), control(storage_time, read_out_energy)],
            delta: 2.0 * PI * 6e9,
            two_photon_detuning: 0.0,
            geometry: Geometry::CounterPropagating,
            polarization: Polarization::default(),
            control_dipole_scale: 1.0,
        }
    }

    pub fn read_in(&self) -> &ControlPulse {
        &self.controls[0]
    }

    pub fn read_out(&self) -> Result<&ControlPulse, MemoryError> {
        self.controls.get(1).ok_or_else(|| MemoryError::Domain("schedule has no read-out control pulse".into()))
    }

    pub fn storage_time(&self) -> f64 {
        match self.controls.get(1) {
            Some(c) => c.center - self.controls[0].center,
            None => 0.0,
        }
    }

    /// Moves the read-out pulse so that it trails the read-in pulse by `tau`.
    pub fn set_storage_time(&mut self, tau: f64) {
        let c0 = self.controls[0].center;
        if let Some(c) = self.controls.get_mut(1) {
            c.center = c0 + tau;
        }
    }

    pub fn set_energies(&mut self, read_in: f64, read_out: f64) {
        self.controls[0].energy = read_in;
        if let Some(c) = self.controls.get_mut(1) {
            c.energy = read_out;
        }
    }

    pub fn validate(&self) -> Result<(), MemoryError> {
        let bad = |m: String| Err(MemoryError::Domain(m));
        if !(self.signal.fwhm > 0.0 && self.signal.wavelength > 0.0) {
            return bad("signal duration and wavelength must be positive".into());
        }
        if !(self.signal.mean_photons >= 0.0) {
            return bad("mean photon number must be non-negative".into());
        }
        if self.controls.is_empty() {
            return bad("control pulse list is empty".into());
        }
        for (k, c) in self.controls.iter().enumerate() {
            if !(c.fwhm > 0.0 && c.waist > 0.0 && c.wavelength > 0.0) {
                return bad(format!("control pulse {k}: duration, waist and wavelength must be positive"));
            }
            if !(c.energy >= 0.0) {
                return bad(format!("control pulse {k}: energy must be non-negative"));
            }
        }
        if self.storage_time() < 0.0 {
            return bad(format!("storage time must be non-negative, got {:e}", self.storage_time()));
        }
        if !(self.control_dipole_scale > 0.0) {
            return bad("control dipole scale must be positive".into());
        }
        Ok(())
    }
}

/// Which (F′, F″) hyperfine steps the solver keeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PathSelection {
    #[default]
    All,
    /// Only the listed (F′, F″) pairs, as when optical pumping isolates one chain.
    Only(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverGrid {
    pub z_points: usize,
    /// RK4 time step (s).
    pub dt: f64,
    pub velocity_nodes: usize,
    pub paths: PathSelection,
    /// Integration windows extend this many amplitude standard deviations beyond each pulse.
    pub margin_sigmas: f64,
    /// Extra time after the read-out pulse to collect the emitted field (s).
    pub tail: f64,
}

impl Default for SolverGrid {
    fn default() -> Self {
        SolverGrid { z_points: 20, dt: 10e-12, velocity_nodes: 16, paths: PathSelection::All, margin_sigmas: 5.0, tail: 0.3e-9 }
    }
}

impl SolverGrid {
    pub fn validate(&self) -> Result<(), MemoryError> {
        if self.z_points < 2 {
            return Err(MemoryError::Domain("need at least two z points".into()));
        }
        if !(self.dt > 0.0) || self.velocity_nodes == 0 || !(self.margin_sigmas > 0.0) || !(self.tail >= 0.0) {
            return Err(MemoryError::Domain("dt, velocity nodes and margins must be positive".into()));
        }
        Ok(())
    }

    /// Every dipole-allowed chain (F, F′, F″) from ground level `f_ground`, restricted by the selection.
    pub fn hyperfine_paths(&self, species: &SpeciesRecord, f_ground: f64) -> Vec<(f64, f64, f64)> {
        let (g, e, s) = (&species.ground, &species.intermediate, &species.storage);
        let i = species.nuclear_spin;
        let mut out = Vec::new();
        for le in &e.levels {
            if relative_line_strength(f_ground, le.f, g.j, e.j, i) == 0.0 {
                continue;
            }
            for ls in &s.levels {
                if relative_line_strength(le.f, ls.f, e.j, s.j, i) == 0.0 {
                    continue;
                }
                let keep = match &self.paths {
                    PathSelection::All => true,
                    PathSelection::Only(list) => list.iter().any(|p| (p[0] - le.f).abs() < 1e-9 && (p[1] - ls.f).abs() < 1e-9),
                };
                if keep {
                    out.push((f_ground, le.f, ls.f));
                }
            }
        }
        out
    }
}

/// Gaussian control Rabi-frequency envelope Ω_c(t) = Ω₀ exp(−2 ln2 (t − t₀)²/T²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ControlEnvelope {
    pub peak_rabi: f64,
    pub peak_intensity: f64,
    pub center: f64,
    pub fwhm: f64,
    pub waist: f64,
}

impl ControlEnvelope {
    pub fn rabi(&self, t: f64) -> f64 {
        self.peak_rabi * (-2.0 * LN_2 * ((t - self.center) / self.fwhm).powi(2)).exp()
    }

    pub fn intensity(&self, t: f64) -> f64 {
        self.peak_intensity * (-4.0 * LN_2 * ((t - self.center) / self.fwhm).powi(2)).exp()
    }

    /// Standard deviation of the amplitude envelope.
    pub fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * LN_2.sqrt())
    }
}

/// Peak power P = E·2√(ln2/π)/T, on-axis intensity I₀ = 2P/(πw₀²),
/// field E₀ = √(2I₀/(cε₀)) and Ω₀ = d E₀/ħ.
pub fn build_control_envelope(pulse: &ControlPulse, reduced_dipole: f64) -> Result<ControlEnvelope, MemoryError> {
    if !(pulse.energy >= 0.0) || !(pulse.waist > 0.0) || !(pulse.fwhm > 0.0) {
        return Err(MemoryError::Domain("control energy must be non-negative, waist and duration positive".into()));
    }
    let peak_power = pulse.energy * 2.0 * (LN_2 / PI).sqrt() / pulse.fwhm;
    let peak_intensity = 2.0 * peak_power / (PI * pulse.waist.powi(2));
    let field = (2.0 * peak_intensity / (SPEED_OF_LIGHT * EPSILON_0)).sqrt();
    Ok(ControlEnvelope {
        peak_rabi: reduced_dipole * field / HBAR,
        peak_intensity,
        center: pulse.center,
        fwhm: pulse.fwhm,
        waist: pulse.waist,
    })
}
