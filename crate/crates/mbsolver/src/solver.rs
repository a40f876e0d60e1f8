//! Read-in, dark storage and read-out of the linearized ladder equations
//!
//!   ∂τ P_e = −(γ_e + i(Δ_e + k_s v)) P_e + i g_e A + i (Ω_c/2) Σ_s c_es S_s
//!   ∂τ S_s = −(γ_s + i(δ_s + k_r v)) S_s + i (Ω_c/2) Σ_e c_es P_e
//!   ∂z A   = iβ Σ_{v,m} w_v w_m Σ_e g_e P_e
//!
//! in the frame τ = t − z/c. A = Ω_s/2 is slaved to the polarization: at
//! every RK4 stage it is rebuilt cell by cell from the entrance value,
//!
//!   A_{j+1} = A_j + iΔz (β Σ w g P_j − K Ā_j),   Ā_j = (A_j + A_{j+1})/2,
//!
//! and cell j is driven by Ā_j. K is the linear off-resonant index, so the
//! amplitudes live in a frame rotating as e^{iKz}; this removes the large
//! dispersive phase from the z discretization. The pairing conserves photon
//! number exactly in the semi-discrete system (the K term is a pure phase),
//! and adds only a small real-negative diagonal (βΔz Σ w g²/2) to the
//! stiffness budget. Output fields carry the frame phase e^{-iKL}.

use std::f64::consts::LN_2;

use atomphys::constants::SPEED_OF_LIGHT;
use atomphys::{SpeciesRecord, ThermalEnsemble};
use num_complex::Complex64;
use serde::Serialize;

use crate::model::{Model, RK4_LIMIT};
use crate::schedule::{build_control_envelope, ControlEnvelope, ProtocolSchedule, SignalPulse, SolverGrid};
use crate::MemoryError;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

#[inline]
fn times_i(x: C) -> C {
    C::new(-x.im, x.re)
}

/// Where the input photon number went, as fractions of the input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct NormBudget {
    pub transmitted: f64,
    pub stored: f64,
    pub decayed: f64,
    pub residual_polarization: f64,
}

impl NormBudget {
    pub fn total(&self) -> f64 {
        self.transmitted + self.stored + self.decayed + self.residual_polarization
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub dt: f64,
    pub z_points: usize,
    pub velocity_nodes: usize,
    pub channels: usize,
    pub paths: Vec<(f64, f64, f64)>,
    /// max |λ|·dt against the RK4 limit.
    pub stability_product: f64,
}

/// Discretized ρ(v): polarization P[z, v, m, F′] and spin wave S[z, v, m, F″].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleState {
    /// Frame time the amplitudes refer to (s).
    pub time: f64,
    pub p: Vec<C>,
    pub s: Vec<C>,
    /// (z, v, m, F′, F″) extents.
    pub dims: [usize; 5],
    pub ensemble: ThermalEnsemble,
    /// ∫|A_in|² dt of the read-in signal.
    pub input_norm: f64,
    pub eta_in: f64,
    pub read_in_budget: NormBudget,
    pub transmitted: Vec<(f64, C)>,
    pub spin_wave_norm: Vec<(f64, f64)>,
    /// β·w_z·w_v·w_m per (z, v, m) cell.
    norm_weights: Vec<f64>,
    /// Dark propagator exponents, [v·ne + e] and [v·ns + s].
    lam_e: Vec<C>,
    lam_s: Vec<C>,
    vweights: Vec<f64>,
    kappa: Vec<f64>,
}

impl EnsembleState {
    fn empty(model: &Model, ensemble: &ThermalEnsemble, time: f64) -> Self {
        let mut norm_weights = Vec::with_capacity(model.nz * model.nv * model.nc);
        for z in 0..model.nz {
            for v in 0..model.nv {
                for c in 0..model.nc {
                    norm_weights.push(model.beta * model.z_weight(z) * model.vweights[v] * model.class_w[c]);
                }
            }
        }
        EnsembleState {
            time,
            p: vec![ZERO; model.p_len()],
            s: vec![ZERO; model.s_len()],
            dims: [model.nz, model.nv, model.nc, model.ne, model.ns],
            ensemble: ensemble.clone(),
            input_norm: 0.0,
            eta_in: 0.0,
            read_in_budget: NormBudget::default(),
            transmitted: Vec::new(),
            spin_wave_norm: Vec::new(),
            norm_weights,
            lam_e: model.lam_e.clone(),
            lam_s: model.lam_s.clone(),
            vweights: model.vweights.clone(),
            kappa: model.readout_overlap(),
        }
    }

    fn weighted(&self, x: &[C], per: usize) -> f64 {
        self.norm_weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * x[k * per..(k + 1) * per].iter().map(|a| a.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Spin-wave photon number β∫dz Σ w |S|² (same units as `input_norm`).
    pub fn stored_norm(&self) -> f64 {
        self.weighted(&self.s, self.dims[4])
    }

    pub fn polarization_norm(&self) -> f64 {
        self.weighted(&self.p, self.dims[3])
    }

    /// Norm of the part of the spin wave a read-out pulse can phase-match:
    /// Σ_z w_z Σ_m w_m |Σ_v w_v Σ_F″ κ S|², κ the two-photon overlap.
    pub fn retrievable_norm(&self) -> f64 {
        let [nz, nv, nc, _, ns] = self.dims;
        let mut total = 0.0;
        for z in 0..nz {
            for c in 0..nc {
                let mut amp = ZERO;
                for v in 0..nv {
                    let base = ((z * nv + v) * nc + c) * ns;
                    for s in 0..ns {
                        amp += self.vweights[v] * self.kappa[c * ns + s] * self.s[base + s];
                    }
                }
                // cell weight without the velocity factor
                let w = self.norm_weights[(z * nv) * nc + c] / self.vweights[0];
                total += w * amp.norm_sqr();
            }
        }
        total
    }

    /// Free evolution by a signed interval; used internally to refer the
    /// state to an arbitrary frame time.
    fn shift(&mut self, dt: f64) {
        let [nz, nv, nc, ne, ns] = self.dims;
        let fe: Vec<C> = self.lam_e.iter().map(|l| (-l * dt).exp()).collect();
        let fs: Vec<C> = self.lam_s.iter().map(|l| (-l * dt).exp()).collect();
        for z in 0..nz {
            for v in 0..nv {
                for c in 0..nc {
                    let cell = (z * nv + v) * nc + c;
                    for e in 0..ne {
                        self.p[cell * ne + e] *= fe[v * ne + e];
                    }
                    for s in 0..ns {
                        self.s[cell * ns + s] *= fs[v * ns + s];
                    }
                }
            }
        }
        self.time += dt;
    }
}

/// Linear-model input-output summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemoryResult {
    pub eta_in: f64,
    pub eta_total: f64,
    /// η_total/η_in, 0 when nothing was absorbed.
    pub eta_out: f64,
    pub storage_time: f64,
    pub transmitted: Vec<(f64, C)>,
    pub recalled: Vec<(f64, C)>,
    /// Spin-wave photon number relative to the input, through both windows.
    pub spin_wave_norm: Vec<(f64, f64)>,
    pub read_in_budget: NormBudget,
    pub read_out_budget: Option<NormBudget>,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Copy)]
struct SignalShape {
    center: f64,
    fwhm: f64,
    /// Peak amplitude.
    scale: f64,
}

impl SignalShape {
    fn new(pulse: &SignalPulse) -> Self {
        let unit = SignalShape { center: pulse.center, fwhm: pulse.fwhm, scale: 1.0 };
        SignalShape { scale: (pulse.mean_photons / unit.energy()).sqrt(), ..unit }
    }
    fn amplitude(&self, t: f64) -> f64 {
        self.scale * (-2.0 * LN_2 * ((t - self.center) / self.fwhm).powi(2)).exp()
    }
    fn sigma(&self) -> f64 {
        self.fwhm / (2.0 * LN_2.sqrt())
    }
    /// ∫|A|² dt over the whole pulse.
    fn energy(&self) -> f64 {
        self.scale * self.scale * self.fwhm * (std::f64::consts::PI / (4.0 * LN_2)).sqrt()
    }
}

struct WindowOutput {
    field_out: Vec<(f64, C)>,
    out_energy: f64,
    in_energy: f64,
    decayed: f64,
    spin_norm: Vec<(f64, f64)>,
    steps: usize,
}

struct Scratch {
    src: Vec<C>,
    a: Vec<C>,
    rabi: Vec<f64>,
}

impl Model {
    /// Evaluates dy/dt; returns the exit field and (optionally) the loss power.
    fn rhs(&self, t: f64, y: &[C], k: &mut [C], a_in: C, control: &ControlEnvelope, sc: &mut Scratch, want_loss: bool) -> (C, f64) {
        let (nz, nv, nc, ne, ns) = (self.nz, self.nv, self.nc, self.ne, self.ns);
        let (p, s) = y.split_at(self.p_len());
        let (kp, ks) = k.split_at_mut(self.p_len());
        for z in 0..nz {
            let mut src = ZERO;
            for v in 0..nv {
                let wv = self.vweights[v];
                for c in 0..nc {
                    let base = ((z * nv + v) * nc + c) * ne;
                    let g = &self.g[c * ne..(c + 1) * ne];
                    let mut acc = ZERO;
                    for e in 0..ne {
                        acc += g[e] * p[base + e];
                    }
                    src += (wv * self.class_w[c]) * acc;
                }
            }
            sc.src[z] = src;
            sc.rabi[z] = 0.5 * control.rabi(t - self.control_time(control.center, z) + control.center);
        }
        sc.a[0] = a_in;
        let h = self.beta * self.dz;
        let half = C::new(0.0, 0.5 * self.k_lin * self.dz);
        let (fwd, inv) = (C::new(1.0, 0.0) - half, 1.0 / (C::new(1.0, 0.0) + half));
        for z in 0..nz {
            sc.a[z + 1] = (sc.a[z] * fwd + times_i(h * sc.src[z])) * inv;
        }

        let mut loss = 0.0;
        for z in 0..nz {
            let om = sc.rabi[z];
            let az = 0.5 * (sc.a[z] + sc.a[z + 1]);
            let mut lz = 0.0;
            for v in 0..nv {
                let le = &self.lam_e[v * ne..(v + 1) * ne];
                let ls = &self.lam_s[v * ns..(v + 1) * ns];
                let mut lv = 0.0;
                for c in 0..nc {
                    let cell = (z * nv + v) * nc + c;
                    let pc = &p[cell * ne..(cell + 1) * ne];
                    let sc_ = &s[cell * ns..(cell + 1) * ns];
                    let g = &self.g[c * ne..(c + 1) * ne];
                    let cc = &self.c[c * ne * ns..(c + 1) * ne * ns];
                    let kpc = &mut kp[cell * ne..(cell + 1) * ne];
                    for e in 0..ne {
                        let mut coup = ZERO;
                        if om != 0.0 {
                            let row = &cc[e * ns..(e + 1) * ns];
                            for q in 0..ns {
                                coup += row[q] * sc_[q];
                            }
                        }
                        kpc[e] = -le[e] * pc[e] + times_i(g[e] * az + om * coup);
                    }
                    let ksc = &mut ks[cell * ns..(cell + 1) * ns];
                    for q in 0..ns {
                        let mut coup = ZERO;
                        if om != 0.0 {
                            for e in 0..ne {
                                coup += cc[e * ns + q] * pc[e];
                            }
                        }
                        ksc[q] = -ls[q] * sc_[q] + times_i(om * coup);
                    }
                    if want_loss {
                        let mut l = 0.0;
                        for e in 0..ne {
                            l += 2.0 * le[e].re * pc[e].norm_sqr();
                        }
                        for q in 0..ns {
                            l += 2.0 * ls[q].re * sc_[q].norm_sqr();
                        }
                        lv += self.class_w[c] * l;
                    }
                }
                lz += self.vweights[v] * lv;
            }
            loss += self.z_weight(z) * lz;
        }
        (sc.a[nz], self.beta * loss)
    }

    fn norm_of(&self, y: &[C]) -> f64 {
        let (p, s) = y.split_at(self.p_len());
        let mut total = 0.0;
        for z in 0..self.nz {
            for v in 0..self.nv {
                for c in 0..self.nc {
                    let cell = (z * self.nv + v) * self.nc + c;
                    let w = self.z_weight(z) * self.vweights[v] * self.class_w[c];
                    let n: f64 = p[cell * self.ne..(cell + 1) * self.ne].iter().map(|x| x.norm_sqr()).sum::<f64>()
                        + s[cell * self.ns..(cell + 1) * self.ns].iter().map(|x| x.norm_sqr()).sum::<f64>();
                    total += w * n;
                }
            }
        }
        self.beta * total
    }

    fn integrate(
        &self,
        state: &mut EnsembleState,
        t1: f64,
        dt_target: f64,
        input: Option<SignalShape>,
        control: &ControlEnvelope,
    ) -> Result<WindowOutput, MemoryError> {
        let t0 = state.time;
        let steps = ((t1 - t0) / dt_target).ceil().max(1.0) as usize;
        let dt = (t1 - t0) / steps as f64;
        let n = self.p_len() + self.s_len();
        let mut y: Vec<C> = Vec::with_capacity(n);
        y.extend_from_slice(&state.p);
        y.extend_from_slice(&state.s);
        let mut k = vec![ZERO; n];
        let mut acc = vec![ZERO; n];
        let mut tmp = vec![ZERO; n];
        let mut sc = Scratch { src: vec![ZERO; self.nz], a: vec![ZERO; self.nz + 1], rabi: vec![0.0; self.nz] };
        let a_in = |t: f64| input.map(|s| C::new(s.amplitude(t), 0.0)).unwrap_or(ZERO);

        let initial_norm = self.norm_of(&y);
        // absolute slack for the leading edge, where the running input is tiny
        let slack = 1e-3 * (initial_norm + input.map(|s| s.energy()).unwrap_or(0.0));
        let mut field_out = Vec::with_capacity(steps + 1);
        let mut spin_norm = Vec::new();
        let (mut out_energy, mut in_energy, mut decayed) = (0.0, 0.0, 0.0);
        let (mut prev_out, mut prev_in, mut prev_loss) = (0.0, 0.0, 0.0);
        let record_every = (steps / 200).max(1);

        for step in 0..=steps {
            let t = t0 + step as f64 * dt;
            let (a_out, loss) = self.rhs(t, &y, &mut k, a_in(t), control, &mut sc, true);
            field_out.push((t, a_out));
            let (pw_out, pw_in) = (a_out.norm_sqr(), a_in(t).norm_sqr());
            if step > 0 {
                out_energy += 0.5 * dt * (prev_out + pw_out);
                in_energy += 0.5 * dt * (prev_in + pw_in);
                decayed += 0.5 * dt * (prev_loss + loss);
            }
            (prev_out, prev_in, prev_loss) = (pw_out, pw_in, loss);
            if step % record_every == 0 || step == steps {
                let (_, s) = y.split_at(self.p_len());
                let ns: f64 = state
                    .norm_weights
                    .iter()
                    .enumerate()
                    .map(|(cell, w)| w * s[cell * self.ns..(cell + 1) * self.ns].iter().map(|x| x.norm_sqr()).sum::<f64>())
                    .sum();
                spin_norm.push((t, ns));
            }
            if step % 16 == 0 || step == steps {
                let norm = self.norm_of(&y);
                let bound = 1.05 * (initial_norm + in_energy) + slack + 1e-300;
                if !norm.is_finite() || norm > bound {
                    return Err(MemoryError::Unstable { time: t, step, dt, norm, bound });
                }
            }
            if step == steps {
                break;
            }

            // classical RK4; stage 1 derivative is already in k
            let th = t + 0.5 * dt;
            for j in 0..n {
                acc[j] = k[j];
                tmp[j] = y[j] + 0.5 * dt * k[j];
            }
            self.rhs(th, &tmp, &mut k, a_in(th), control, &mut sc, false);
            for j in 0..n {
                acc[j] += 2.0 * k[j];
                tmp[j] = y[j] + 0.5 * dt * k[j];
            }
            self.rhs(th, &tmp, &mut k, a_in(th), control, &mut sc, false);
            for j in 0..n {
                acc[j] += 2.0 * k[j];
                tmp[j] = y[j] + dt * k[j];
            }
            self.rhs(t + dt, &tmp, &mut k, a_in(t + dt), control, &mut sc, false);
            for j in 0..n {
                y[j] += dt / 6.0 * (acc[j] + k[j]);
            }
        }
        let (p, s) = y.split_at(self.p_len());
        state.p.copy_from_slice(p);
        state.s.copy_from_slice(s);
        state.time = t1;
        Ok(WindowOutput { field_out, out_energy, in_energy, decayed, spin_norm, steps })
    }

    fn diagnostics(&self, grid: &SolverGrid, steps: usize, dt: f64, peak: f64) -> Diagnostics {
        Diagnostics {
            steps,
            dt,
            z_points: self.nz,
            velocity_nodes: self.nv,
            channels: self.nc,
            paths: self.paths.clone(),
            stability_product: self.max_rate(peak) * grid.dt,
        }
    }

    fn check_stability(&self, grid: &SolverGrid, peak: f64) -> Result<(), MemoryError> {
        let product = self.max_rate(peak) * grid.dt;
        if product > RK4_LIMIT {
            return Err(MemoryError::GridUnstable { product, limit: RK4_LIMIT });
        }
        Ok(())
    }
}

/// Read-in: integrates the signal and first control pulse through the cell
/// and returns the stored state together with the read-in part of the result.
pub fn propagate_storage(
    schedule: &ProtocolSchedule,
    grid: &SolverGrid,
    ensemble: &ThermalEnsemble,
    species: &SpeciesRecord,
) -> Result<(EnsembleState, MemoryResult), MemoryError> {
    let model = Model::new(schedule, grid, ensemble, species)?;
    let control = build_control_envelope(schedule.read_in(), model.control_dipole)?;
    model.check_stability(grid, control.peak_rabi)?;
    let signal = SignalShape::new(&schedule.signal);
    let transit = model.length / SPEED_OF_LIGHT;
    let m = grid.margin_sigmas;
    let t0 = (signal.center - m * signal.sigma()).min(control.center - transit - m * control.sigma());
    let t1 = (signal.center + m * signal.sigma()).max(control.center + transit + m * control.sigma()) + grid.tail;

    let mut state = EnsembleState::empty(&model, ensemble, t0);
    let out = model.integrate(&mut state, t1, grid.dt, Some(signal), &control)?;
    let input = out.in_energy;
    // an empty input leaves every fraction at zero
    let frac = |x: f64| if input > 0.0 { x / input } else { 0.0 };
    let budget = NormBudget {
        transmitted: frac(out.out_energy),
        stored: frac(state.stored_norm()),
        decayed: frac(out.decayed),
        residual_polarization: frac(state.polarization_norm()),
    };
    state.input_norm = input;
    state.eta_in = if input > 0.0 { 1.0 - budget.transmitted } else { 0.0 };
    state.read_in_budget = budget;
    state.transmitted = out.field_out.clone();
    state.spin_wave_norm = out.spin_norm.iter().map(|&(t, n)| (t, frac(n))).collect();
    let result = MemoryResult {
        eta_in: state.eta_in,
        eta_total: 0.0,
        eta_out: 0.0,
        storage_time: schedule.storage_time(),
        transmitted: out.field_out,
        recalled: Vec::new(),
        spin_wave_norm: state.spin_wave_norm.clone(),
        read_in_budget: budget,
        read_out_budget: None,
        diagnostics: model.diagnostics(grid, out.steps, (t1 - t0) / out.steps as f64, control.peak_rabi),
    };
    Ok((state, result))
}

/// Free evolution between control pulses: S gains exp(−(γ_s + i(δ_s + k_r v))τ),
/// P gains exp(−(γ_e + i(Δ_e + k_s v))τ); the field is untouched.
pub fn evolve_dark(state: &EnsembleState, duration: f64) -> Result<EnsembleState, MemoryError> {
    if !(duration >= 0.0) {
        return Err(MemoryError::Domain(format!("dark evolution needs a non-negative duration, got {duration:e}")));
    }
    let mut out = state.clone();
    out.shift(duration);
    Ok(out)
}

/// Read-out with the second control pulse and zero input field.
///
/// Residual polarization is dropped at the start of the window.
/// The stored state is first carried by free evolution to the start of the
/// read-out window. Storage time is the separation of the control centres,
/// so for short storage this interval is negative: the state is referred
/// back through the dark propagator, which treats the pulses as
/// non-overlapping.
pub fn propagate_retrieval(
    state: &EnsembleState,
    schedule: &ProtocolSchedule,
    grid: &SolverGrid,
    species: &SpeciesRecord,
) -> Result<MemoryResult, MemoryError> {
    retrieve_with_state(state, schedule, grid, species).map(|r| r.1)
}

/// As `propagate_retrieval`, also returning the ensemble at the end of the read-out window.
pub fn retrieve_with_state(
    state: &EnsembleState,
    schedule: &ProtocolSchedule,
    grid: &SolverGrid,
    species: &SpeciesRecord,
) -> Result<(EnsembleState, MemoryResult), MemoryError> {
    let model = Model::new(schedule, grid, &state.ensemble, species)?;
    if state.dims != [model.nz, model.nv, model.nc, model.ne, model.ns] {
        return Err(MemoryError::Domain("state discretization does not match the grid".into()));
    }
    let control = build_control_envelope(schedule.read_out()?, model.control_dipole)?;
    model.check_stability(grid, control.peak_rabi)?;
    let transit = model.length / SPEED_OF_LIGHT;
    let m = grid.margin_sigmas;
    let t0 = control.center - transit - m * control.sigma();
    let t1 = control.center + transit + m * control.sigma() + grid.tail;

    let mut work = state.clone();
    work.shift(t0 - state.time);
    // Residual polarization left by the read-in radiates during storage and
    // is booked there; the read-out window sees only the spin wave.
    work.p.iter_mut().for_each(|x| *x = ZERO);
    let stored_before = work.stored_norm() + work.polarization_norm();
    let out = model.integrate(&mut work, t1, grid.dt, None, &control)?;
    let input = state.input_norm;
    let eta_total = if input > 0.0 { out.out_energy / input } else { 0.0 };
    let budget = if stored_before > 0.0 {
        Some(NormBudget {
            transmitted: out.out_energy / stored_before,
            stored: work.stored_norm() / stored_before,
            decayed: out.decayed / stored_before,
            residual_polarization: work.polarization_norm() / stored_before,
        })
    } else {
        None
    };
    let mut spin = state.spin_wave_norm.clone();
    if input > 0.0 {
        spin.extend(out.spin_norm.iter().map(|&(t, n)| (t, n / input)));
    }
    let result = MemoryResult {
        eta_in: state.eta_in,
        eta_total,
        eta_out: if state.eta_in > 0.0 { eta_total / state.eta_in } else { 0.0 },
        storage_time: schedule.storage_time(),
        transmitted: state.transmitted.clone(),
        recalled: out.field_out,
        spin_wave_norm: spin,
        read_in_budget: state.read_in_budget,
        read_out_budget: budget,
        diagnostics: model.diagnostics(grid, out.steps, (t1 - t0) / out.steps as f64, control.peak_rabi),
    };
    Ok((work, result))
}

/// Read-in, storage for the scheduled time and read-out.
pub fn run_memory(
    schedule: &ProtocolSchedule,
    grid: &SolverGrid,
    ensemble: &ThermalEnsemble,
    species: &SpeciesRecord,
) -> Result<MemoryResult, MemoryError> {
    let (state, _) = propagate_storage(schedule, grid, ensemble, species)?;
    propagate_retrieval(&state, schedule, grid, species)
}
