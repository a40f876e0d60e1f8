//! Single-atom master equation over the hyperfine levels of the three
//! manifolds (12 states for Cs), used to spot-check the linearized
//! ensemble model.

use atomphys::{relative_line_strength, wigner_6j, SpeciesRecord};
use num_complex::Complex64;
use serde::Serialize;

use crate::dephasing::residual_wavevector;
use crate::geometry::Geometry;
use crate::AnalyticError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Level {
    Ground,
    Intermediate,
    Storage,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateLabel {
    pub level: Level,
    pub f: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladOptions {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Keep every n-th step in the trace (the final state is always kept).
    pub record_every: usize,
    /// One-photon detuning from the F → F+1 line of the upper ground level; positive puts the signal to the red.
    pub delta: f64,
    /// Two-photon detuning from the stretched storage level.
    pub two_photon_detuning: f64,
    pub velocity: f64,
    pub geometry: Geometry,
    /// Initial diagonal populations in basis order; `None` puts every atom in the upper ground level.
    pub initial_populations: Option<Vec<f64>>,
}

impl LindbladOptions {
    pub fn new(t_start: f64, t_end: f64) -> Self {
        LindbladOptions {
            t_start,
            t_end,
            dt: 1e-12,
            record_every: 10,
            delta: 0.0,
            two_photon_detuning: 0.0,
            velocity: 0.0,
            geometry: Geometry::CounterPropagating,
            initial_populations: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LindbladTrace {
    pub labels: Vec<StateLabel>,
    pub times: Vec<f64>,
    /// Row-major density matrices at each recorded time.
    pub rho: Vec<Vec<Complex64>>,
}

impl LindbladTrace {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index(&self, level: Level, f: f64) -> Option<usize> {
        self.labels.iter().position(|l| l.level == level && (l.f - f).abs() < 1e-9)
    }

    pub fn population(&self, record: usize, state: usize) -> f64 {
        self.rho[record][state * self.dim() + state].re
    }

    pub fn coherence(&self, record: usize, row: usize, col: usize) -> Complex64 {
        self.rho[record][row * self.dim() + col]
    }

    /// Summed population of a manifold.
    pub fn manifold_population(&self, record: usize, level: Level) -> f64 {
        (0..self.dim()).filter(|&k| self.labels[k].level == level).map(|k| self.population(record, k)).sum()
    }

    pub fn final_record(&self) -> usize {
        self.times.len() - 1
    }
}

struct Model {
    n: usize,
    energy: Vec<f64>,
    /// (row, col, coefficient multiplying Ω_s or Ω_c / 2), row > col
    signal_links: Vec<(usize, usize, f64)>,
    control_links: Vec<(usize, usize, f64)>,
    /// (from, to, rate)
    jumps: Vec<(usize, usize, f64)>,
    total_decay: Vec<f64>,
}

fn branching(j_lower: f64, j_upper: f64, i: f64, f_lower: f64, f_upper: f64) -> f64 {
    (2.0 * f_lower + 1.0) * (2.0 * j_upper + 1.0) * wigner_6j(j_lower, j_upper, 1.0, f_upper, f_lower, i).powi(2)
}

fn build(species: &SpeciesRecord, opts: &LindbladOptions) -> (Vec<StateLabel>, Model) {
    let (g, e, s) = (&species.ground, &species.intermediate, &species.storage);
    let i = species.nuclear_spin;
    let mut labels = Vec::new();
    labels.extend(g.levels.iter().map(|l| StateLabel { level: Level::Ground, f: l.f }));
    labels.extend(e.levels.iter().map(|l| StateLabel { level: Level::Intermediate, f: l.f }));
    labels.extend(s.levels.iter().map(|l| StateLabel { level: Level::Storage, f: l.f }));
    let n = labels.len();
    let (ng, ne) = (g.levels.len(), e.levels.len());

    let fg = species.upper_ground_f();
    let g_ref = g.offset(fg);
    let e_ref = e.level(fg + 1.0).map(|l| l.energy_offset).unwrap_or(0.0);
    let s_ref = s.offset(s.f_max());
    let ks = species.signal.wavenumber();
    let kr = residual_wavevector(species.signal.wavelength, species.control.wavelength, opts.geometry);
    let v = opts.velocity;

    let mut energy = vec![0.0; n];
    for (k, l) in g.levels.iter().enumerate() {
        energy[k] = l.energy_offset - g_ref;
    }
    for (k, l) in e.levels.iter().enumerate() {
        energy[ng + k] = opts.delta + (l.energy_offset - e_ref) + ks * v;
    }
    for (k, l) in s.levels.iter().enumerate() {
        energy[ng + ne + k] = opts.two_photon_detuning + (l.energy_offset - s_ref) + kr * v;
    }

    let mut signal_links = Vec::new();
    let mut control_links = Vec::new();
    let mut jumps = Vec::new();
    let mut total_decay = vec![0.0; n];
    for (a, lg) in g.levels.iter().enumerate() {
        for (b, le) in e.levels.iter().enumerate() {
            let w = relative_line_strength(lg.f, le.f, g.j, e.j, i);
            if w != 0.0 {
                signal_links.push((ng + b, a, w));
            }
            let br = branching(g.j, e.j, i, lg.f, le.f);
            if br > 0.0 {
                jumps.push((ng + b, a, e.linewidth * br));
                total_decay[ng + b] += e.linewidth * br;
            }
        }
    }
    for (b, le) in e.levels.iter().enumerate() {
        for (c, ls) in s.levels.iter().enumerate() {
            let w = relative_line_strength(le.f, ls.f, e.j, s.j, i);
            if w != 0.0 {
                control_links.push((ng + ne + c, ng + b, w));
            }
            let br = branching(e.j, s.j, i, le.f, ls.f);
            if br > 0.0 {
                jumps.push((ng + ne + c, ng + b, s.linewidth * br));
                total_decay[ng + ne + c] += s.linewidth * br;
            }
        }
    }
    (labels, Model { n, energy, signal_links, control_links, jumps, total_decay })
}

impl Model {
    fn rhs(&self, rho: &[Complex64], omega_s: f64, omega_c: f64, out: &mut [Complex64]) {
        let n = self.n;
        // Hermitian H: diagonal energies, real off-diagonal couplings −Ω w/2.
        let mut h = vec![0.0; n * n];
        for k in 0..n {
            h[k * n + k] = self.energy[k];
        }
        for &(r, c, w) in &self.signal_links {
            h[r * n + c] = -0.5 * omega_s * w;
            h[c * n + r] = -0.5 * omega_s * w;
        }
        for &(r, c, w) in &self.control_links {
            h[r * n + c] = -0.5 * omega_c * w;
            h[c * n + r] = -0.5 * omega_c * w;
        }
        let mi = Complex64::new(0.0, -1.0);
        for r in 0..n {
            for c in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let hrk = h[r * n + k];
                    if hrk != 0.0 {
                        acc += hrk * rho[k * n + c];
                    }
                    let hkc = h[k * n + c];
                    if hkc != 0.0 {
                        acc -= rho[r * n + k] * hkc;
                    }
                }
                out[r * n + c] = mi * acc - 0.5 * (self.total_decay[r] + self.total_decay[c]) * rho[r * n + c];
            }
        }
        for &(from, to, rate) in &self.jumps {
            out[to * n + to] += rate * rho[from * n + from];
        }
    }

    fn max_rate(&self, omega_s: f64, omega_c: f64) -> f64 {
        let e = self.energy.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let d = self.total_decay.iter().fold(0.0f64, |m, x| m.max(*x));
        e + d + omega_s.abs() + omega_c.abs()
    }
}

/// Integrates the master equation with classical RK4 under real Rabi
/// envelopes Ω_s(t) and Ω_c(t) (rad/s).
///
/// The trace is preserved to rounding because the generator is trace-free;
/// a drift beyond 10⁻⁹ or a population below −10⁻⁹ aborts with diagnostics.
pub fn single_atom_lindblad(
    species: &SpeciesRecord,
    omega_s: &dyn Fn(f64) -> f64,
    omega_c: &dyn Fn(f64) -> f64,
    opts: &LindbladOptions,
) -> Result<LindbladTrace, AnalyticError> {
    if !(opts.dt > 0.0) || !(opts.t_end > opts.t_start) {
        return Err(AnalyticError::Domain("need dt > 0 and t_end > t_start".into()));
    }
    let (labels, model) = build(species, opts);
    let n = model.n;
    let mut rho = vec![Complex64::new(0.0, 0.0); n * n];
    match &opts.initial_populations {
        Some(p) => {
            if p.len() != n || p.iter().any(|x| *x < 0.0) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(AnalyticError::Domain(format!("initial populations must be {n} non-negative values summing to 1")));
            }
            for k in 0..n {
                rho[k * n + k] = Complex64::new(p[k], 0.0);
            }
        }
        None => {
            let k = labels
                .iter()
                .position(|l| l.level == Level::Ground && l.f == species.upper_ground_f())
                .expect("upper ground level present");
            rho[k * n + k] = Complex64::new(1.0, 0.0);
        }
    }

    let steps = ((opts.t_end - opts.t_start) / opts.dt).ceil() as usize;
    let dt = (opts.t_end - opts.t_start) / steps as f64;
    let every = opts.record_every.max(1);
    let mut trace = LindbladTrace { labels, times: vec![opts.t_start], rho: vec![rho.clone()] };
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n * n], vec![zero; n * n], vec![zero; n * n], vec![zero; n * n]);
    let mut tmp = vec![zero; n * n];

    for step in 0..steps {
        let t = opts.t_start + step as f64 * dt;
        let (s0, c0) = (omega_s(t), omega_c(t));
        let (sh, ch) = (omega_s(t + 0.5 * dt), omega_c(t + 0.5 * dt));
        let (s1, c1) = (omega_s(t + dt), omega_c(t + dt));
        let stiff = model.max_rate(s0.abs().max(sh.abs()), c0.abs().max(ch.abs())) * dt;
        if stiff > 2.5 {
            return Err(AnalyticError::Integrator { time: t, reason: format!("step too large: |λ|·dt = {stiff:.2} exceeds the RK4 bound") });
        }
        model.rhs(&rho, s0, c0, &mut k1);
        for k in 0..n * n {
            tmp[k] = rho[k] + 0.5 * dt * k1[k];
        }
        model.rhs(&tmp, sh, ch, &mut k2);
        for k in 0..n * n {
            tmp[k] = rho[k] + 0.5 * dt * k2[k];
        }
        model.rhs(&tmp, sh, ch, &mut k3);
        for k in 0..n * n {
            tmp[k] = rho[k] + dt * k3[k];
        }
        model.rhs(&tmp, s1, c1, &mut k4);
        for k in 0..n * n {
            rho[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }

        let tr: f64 = (0..n).map(|k| rho[k * n + k].re).sum();
        let min_pop = (0..n).map(|k| rho[k * n + k].re).fold(f64::INFINITY, f64::min);
        if (tr - 1.0).abs() > 1e-9 || min_pop < -1e-9 || !tr.is_finite() {
            return Err(AnalyticError::Integrator {
                time: t + dt,
                reason: format!("trace {tr:.12} or minimum population {min_pop:.3e} out of bounds"),
            });
        }
        if (step + 1) % every == 0 || step + 1 == steps {
            trace.times.push(t + dt);
            trace.rho.push(rho.clone());
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cesium_basis_has_twelve_states() {
        let cs = SpeciesRecord::cesium();
        let tr = single_atom_lindblad(&cs, &|_| 0.0, &|_| 0.0, &LindbladOptions::new(0.0, 1e-11)).unwrap();
        assert_eq!(tr.dim(), 12);
        assert!((tr.population(tr.final_record(), tr.index(Level::Ground, 4.0).unwrap()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn branching_ratios_sum_to_one() {
        let cs = SpeciesRecord::cesium();
        let (g, e) = (&cs.ground, &cs.intermediate);
        for le in &e.levels {
            let s: f64 = g.levels.iter().map(|lg| branching(g.j, e.j, 3.5, lg.f, le.f)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oversized_step_is_reported() {
        let cs = SpeciesRecord::cesium();
        let mut o = LindbladOptions::new(0.0, 1e-9);
        o.dt = 1e-10;
        o.delta = 2.0 * std::f64::consts::PI * 6e9;
        assert!(matches!(single_atom_lindblad(&cs, &|_| 0.0, &|_| 0.0, &o), Err(AnalyticError::Integrator { .. })));
    }
}
