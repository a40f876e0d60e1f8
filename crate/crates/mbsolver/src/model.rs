//! Discretized ensemble: velocity nodes, sublevel channels, couplings and
//! rates in the frame co-moving with the signal.

use std::f64::consts::PI;

use analytic::{residual_wavevector, Geometry};
use atomphys::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use atomphys::{absorption_amplitude, velocity_nodes, SpeciesRecord, ThermalEnsemble};
use num_complex::Complex64;

use crate::schedule::{ProtocolSchedule, SolverGrid};
use crate::MemoryError;

/// RK4 is stable on the imaginary axis up to 2√2; keep a margin.
pub const RK4_LIMIT: f64 = 2.5;

#[derive(Clone, Debug)]
pub struct Model {
    pub nz: usize,
    pub nv: usize,
    pub nc: usize,
    pub ne: usize,
    pub ns: usize,
    pub length: f64,
    pub dz: f64,
    pub velocities: Vec<f64>,
    pub vweights: Vec<f64>,
    /// Ground magnetic quantum number and multiplicity of each channel.
    pub class_m: Vec<f64>,
    pub class_w: Vec<f64>,
    pub e_levels: Vec<f64>,
    pub s_levels: Vec<f64>,
    /// Signal amplitudes g[c·ne + e].
    pub g: Vec<f64>,
    /// Control amplitudes c[(c·ne + e)·ns + s].
    pub c: Vec<f64>,
    /// γ_e + i(Δ_e + k_s v), indexed [v·ne + e].
    pub lam_e: Vec<Complex64>,
    /// γ_s + i(δ_s + k_r v), indexed [v·ns + s].
    pub lam_s: Vec<Complex64>,
    /// One-photon detunings Δ_e (rad/s) at rest.
    pub det_e: Vec<f64>,
    /// ∂z A = iβ Σ w g P with A = Ω_s/2.
    pub beta: f64,
    /// Linear off-resonant wavenumber shift βΣ w g²/(Δ_e + k_s v); the field is
    /// carried in a frame rotating with it.
    pub k_lin: f64,
    pub k_s: f64,
    pub k_r: f64,
    pub geometry: Geometry,
    pub control_dipole: f64,
    pub paths: Vec<(f64, f64, f64)>,
}

impl Model {
    pub fn new(schedule: &ProtocolSchedule, grid: &SolverGrid, ensemble: &ThermalEnsemble, species: &SpeciesRecord) -> Result<Model, MemoryError> {
        schedule.validate()?;
        grid.validate()?;
        let (g, e, s) = (&species.ground, &species.intermediate, &species.storage);
        let i = species.nuclear_spin;
        let fg = species.upper_ground_f();
        let paths = grid.hyperfine_paths(species, fg);
        if paths.is_empty() {
            return Err(MemoryError::Domain("path selection leaves no allowed hyperfine chain".into()));
        }
        let mut e_levels: Vec<f64> = paths.iter().map(|p| p.1).collect();
        e_levels.sort_by(f64::total_cmp);
        e_levels.dedup();
        let mut s_levels: Vec<f64> = paths.iter().map(|p| p.2).collect();
        s_levels.sort_by(f64::total_cmp);
        s_levels.dedup();
        let (ne, ns) = (e_levels.len(), s_levels.len());

        let (qs, qc) = (schedule.polarization.signal, schedule.polarization.control);
        let mirror = schedule.polarization.is_mirror_symmetric();
        let nm = (2.0 * fg).round() as usize + 1;
        let mut class_m = Vec::new();
        let mut class_w = Vec::new();
        let mut gv = Vec::new();
        let mut cv = Vec::new();
        for k in 0..nm {
            let m = -fg + k as f64;
            if mirror && m < -1e-9 {
                continue;
            }
            let gs: Vec<f64> = e_levels.iter().map(|&fe| absorption_amplitude(g.j, e.j, i, fg, m, fe, qs)).collect();
            if gs.iter().all(|x| *x == 0.0) {
                continue;
            }
            let me = m + qs as f64;
            for &fe in &e_levels {
                for &fs in &s_levels {
                    let on = paths.iter().any(|p| p.1 == fe && p.2 == fs);
                    cv.push(if on { absorption_amplitude(e.j, s.j, i, fe, me, fs, qc) } else { 0.0 });
                }
            }
            gv.extend(gs);
            class_m.push(m);
            class_w.push(if mirror && m.abs() > 1e-9 { 2.0 } else { 1.0 });
        }
        let nc = class_m.len();

        let nodes = velocity_nodes(ensemble.thermal_speed, grid.velocity_nodes)?;
        let velocities: Vec<f64> = nodes.iter().map(|p| p.0).collect();
        let vweights: Vec<f64> = nodes.iter().map(|p| p.1).collect();

        let k_s = 2.0 * PI / schedule.signal.wavelength;
        let lc = schedule.read_in().wavelength;
        let k_r = residual_wavevector(schedule.signal.wavelength, lc, schedule.geometry);
        let e_ref = e.level(fg + 1.0).map(|l| l.energy_offset).unwrap_or(0.0);
        let s_ref = s.offset(s.f_max());
        let det_e: Vec<f64> = e_levels.iter().map(|&f| schedule.delta + e.offset(f) - e_ref).collect();
        let det_s: Vec<f64> = s_levels.iter().map(|&f| schedule.two_photon_detuning + s.offset(f) - s_ref).collect();
        let (ge, gs) = (0.5 * (g.linewidth + e.linewidth), 0.5 * (g.linewidth + s.linewidth));
        let mut lam_e = Vec::with_capacity(velocities.len() * ne);
        let mut lam_s = Vec::with_capacity(velocities.len() * ns);
        for &v in &velocities {
            lam_e.extend(det_e.iter().map(|d| Complex64::new(ge, d + k_s * v)));
            lam_s.extend(det_s.iter().map(|d| Complex64::new(gs, d + k_r * v)));
        }

        let sublevels = (2.0 * i + 1.0) * (2.0 * g.j + 1.0);
        let n_sub = ensemble.number_density / sublevels;
        let omega_s = 2.0 * PI * SPEED_OF_LIGHT / schedule.signal.wavelength;
        let beta = n_sub * species.signal.reduced_dipole.powi(2) * omega_s / (2.0 * HBAR * SPEED_OF_LIGHT * EPSILON_0);

        let mut chi = 0.0;
        for (v, &wv) in vweights.iter().enumerate() {
            for c in 0..nc {
                for (e, &d) in det_e.iter().enumerate() {
                    chi += wv * class_w[c] * gv[c * ne + e].powi(2) / (d + k_s * velocities[v]);
                }
            }
        }
        let k_lin = beta * chi;

        let nz = grid.z_points;
        Ok(Model {
            nz,
            nv: velocities.len(),
            nc,
            ne,
            ns,
            length: ensemble.cell_length,
            dz: ensemble.cell_length / nz as f64,
            velocities,
            vweights,
            class_m,
            class_w,
            e_levels,
            s_levels,
            g: gv,
            c: cv,
            lam_e,
            lam_s,
            det_e,
            beta,
            k_lin,
            k_s,
            k_r,
            geometry: schedule.geometry,
            control_dipole: species.control.reduced_dipole * schedule.control_dipole_scale,
            paths,
        })
    }

    pub fn p_len(&self) -> usize {
        self.nz * self.nv * self.nc * self.ne
    }

    pub fn s_len(&self) -> usize {
        self.nz * self.nv * self.nc * self.ns
    }

    /// Length of cell z; the grid is uniform.
    pub fn z_weight(&self, _z: usize) -> f64 {
        self.dz
    }

    /// Centre of cell z.
    pub fn z_center(&self, z: usize) -> f64 {
        (z as f64 + 0.5) * self.dz
    }

    /// Control arrival time at cell z for a pulse that crosses mid-cell at `center`.
    pub fn control_time(&self, center: f64, z: usize) -> f64 {
        match self.geometry {
            Geometry::CounterPropagating => center + (self.length - 2.0 * self.z_center(z)) / SPEED_OF_LIGHT,
            Geometry::CoPropagating => center,
        }
    }

    /// Two-photon read-out overlap κ[c·ns + s] = Σ_e g c / Δ_e.
    pub fn readout_overlap(&self) -> Vec<f64> {
        let mut k = vec![0.0; self.nc * self.ns];
        for c in 0..self.nc {
            for e in 0..self.ne {
                for s in 0..self.ns {
                    k[c * self.ns + s] += self.g[c * self.ne + e] * self.c[(c * self.ne + e) * self.ns + s] / self.det_e[e];
                }
            }
        }
        k
    }

    /// Largest |λ| of the linear system for a given peak control Rabi frequency.
    pub fn max_rate(&self, peak_rabi: f64) -> f64 {
        let le = self.lam_e.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let ls = self.lam_s.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let cmax = self.c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let self_coupling: f64 = 0.5
            * self.beta
            * self.dz
            * (0..self.nc).map(|c| self.class_w[c] * (0..self.ne).map(|e| self.g[c * self.ne + e].powi(2)).sum::<f64>()).sum::<f64>();
        le.max(ls) + 0.5 * peak_rabi * cmax * (self.ns.max(self.ne) as f64).sqrt() + self_coupling
    }
}
