//! Doppler-broadened absorption and the cell-temperature fit.

use std::f64::consts::PI;

use serde::Serialize;

use crate::angular::relative_line_strength;
use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::faddeeva::voigt_profile;
use crate::species::{Manifold, SpeciesRecord, Transition};
use crate::thermal::{thermal_speed, ThermalEnsemble};
use crate::AtomError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ManifoldPair {
    /// ground → intermediate
    Signal,
    /// intermediate → storage; lower levels weighted as if thermally populated
    Control,
}

/// One hyperfine component: centre (rad/s from the centroid line) and weight p_F·S_FF'.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineComponent {
    pub f_lower: f64,
    pub f_upper: f64,
    pub center: f64,
    pub weight: f64,
}

fn manifolds<'a>(species: &'a SpeciesRecord, pair: ManifoldPair) -> (&'a Manifold, &'a Manifold, &'a Transition) {
    match pair {
        ManifoldPair::Signal => (&species.ground, &species.intermediate, &species.signal),
        ManifoldPair::Control => (&species.intermediate, &species.storage, &species.control),
    }
}

/// Hyperfine components of a manifold pair with thermal lower-level populations.
pub fn line_components(species: &SpeciesRecord, pair: ManifoldPair) -> Vec<LineComponent> {
    let (lower, upper, _) = manifolds(species, pair);
    let i = species.nuclear_spin;
    let total: f64 = lower.levels.iter().map(|l| 2.0 * l.f + 1.0).sum();
    let mut out = Vec::new();
    for l in &lower.levels {
        let p = (2.0 * l.f + 1.0) / total;
        for u in &upper.levels {
            let w = relative_line_strength(l.f, u.f, lower.j, upper.j, i);
            if w != 0.0 {
                out.push(LineComponent {
                    f_lower: l.f,
                    f_upper: u.f,
                    center: u.energy_offset - l.energy_offset,
                    weight: p * w * w,
                });
            }
        }
    }
    out
}

/// Integrated cross-section ∫σ dΔ = π ω0 d² / (3 ε0 ħ c), in m²·rad/s.
pub fn integrated_cross_section(transition: &Transition) -> f64 {
    PI * transition.angular_frequency() * transition.reduced_dipole.powi(2) / (3.0 * EPSILON_0 * HBAR * SPEED_OF_LIGHT)
}

fn alpha_from_parts(detuning: f64, density: f64, sigma_d: f64, gamma: f64, strength: f64, comps: &[LineComponent]) -> f64 {
    if density == 0.0 {
        return 0.0;
    }
    let s: f64 = comps.iter().map(|c| c.weight * voigt_profile(detuning - c.center, sigma_d, gamma)).sum();
    density * strength * s
}

/// Intensity absorption coefficient α (m⁻¹) at detuning ω − ω0 (rad/s) from the
/// centroid-to-centroid transition frequency.
pub fn voigt_absorption(detuning: f64, ensemble: &ThermalEnsemble, species: &SpeciesRecord, pair: ManifoldPair) -> f64 {
    let (lower, upper, tr) = manifolds(species, pair);
    let comps = line_components(species, pair);
    let sigma_d = tr.wavenumber() * ensemble.thermal_speed;
    let gamma = lower.linewidth + upper.linewidth;
    alpha_from_parts(detuning, ensemble.number_density, sigma_d, gamma, integrated_cross_section(tr), &comps)
}

/// Single-pass transmission exp(−α L) over a list of detunings.
pub fn transmission_spectrum(detunings: &[f64], ensemble: &ThermalEnsemble, species: &SpeciesRecord) -> Vec<(f64, f64)> {
    let (lower, upper, tr) = manifolds(species, ManifoldPair::Signal);
    let comps = line_components(species, ManifoldPair::Signal);
    let sigma_d = tr.wavenumber() * ensemble.thermal_speed;
    let gamma = lower.linewidth + upper.linewidth;
    let strength = integrated_cross_section(tr);
    detunings
        .iter()
        .map(|&d| {
            let a = alpha_from_parts(d, ensemble.number_density, sigma_d, gamma, strength, &comps);
            (d, (-a * ensemble.cell_length).exp())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TemperatureFit {
    pub temperature: f64,
    pub number_density: f64,
    pub ssr: f64,
    pub rms_residual: f64,
    pub evaluations: usize,
}

pub const FIT_T_MIN: f64 = 250.0;
pub const FIT_T_MAX: f64 = 500.0;
const SCAN_POINTS: usize = 101;

/// Least-squares temperature from a transmission spectrum of the signal line.
///
/// Density follows the vapor-pressure model at each trial temperature. A
/// coarse scan over [250, 500] K brackets the optimum and Brent's method
/// refines it; an optimum on the scan boundary or an absorption-free spectrum
/// is reported as non-convergence.
pub fn fit_temperature(spectrum: &[(f64, f64)], species: &SpeciesRecord, cell_length: f64) -> Result<TemperatureFit, AtomError> {
    if spectrum.len() < 20 {
        return Err(AtomError::Domain(format!("temperature fit needs at least 20 samples, got {}", spectrum.len())));
    }
    if !(cell_length > 0.0) {
        return Err(AtomError::Domain("cell length must be positive".into()));
    }
    let (lower, upper, tr) = manifolds(species, ManifoldPair::Signal);
    let comps = line_components(species, ManifoldPair::Signal);
    let gamma = lower.linewidth + upper.linewidth;
    let strength = integrated_cross_section(tr);
    let k = tr.wavenumber();
    let mut evaluations = 0usize;
    let mut ssr = |t: f64| -> f64 {
        evaluations += 1;
        let vs = thermal_speed(species, t).expect("bracket is positive");
        let n = species.vapor_pressure.number_density(t).expect("bracket is positive");
        spectrum
            .iter()
            .map(|&(d, y)| {
                let model = (-alpha_from_parts(d, n, k * vs, gamma, strength, &comps) * cell_length).exp();
                (model - y).powi(2)
            })
            .sum()
    };

    let max_absorption = spectrum.iter().map(|p| 1.0 - p.1).fold(f64::MIN, f64::max);
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| FIT_T_MIN + (FIT_T_MAX - FIT_T_MIN) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| ssr(t)).collect();
    let (imin, &vmin) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let rms = |s: f64| (s / spectrum.len() as f64).sqrt();

    if max_absorption < 1e-3 || imin == 0 || imin == SCAN_POINTS - 1 {
        return Err(AtomError::FitNonConvergence {
            reason: if max_absorption < 1e-3 {
                "spectrum shows no absorption; temperature is not identifiable".into()
            } else {
                "optimum lies on the temperature bracket boundary".into()
            },
            best_temperature: grid[imin],
            ssr: vmin,
            rms_residual: rms(vmin),
        });
    }
    let (t, s) = brent_minimize(&mut ssr, grid[imin - 1], grid[imin], grid[imin + 1], 1e-6);
    let n = species.vapor_pressure.number_density(t)?;
    Ok(TemperatureFit { temperature: t, number_density: n, ssr: s, rms_residual: rms(s), evaluations })
}

/// Brent's parabolic/golden-section minimiser on a bracket a < b < c with f(b) ≤ f(a), f(c).
pub fn brent_minimize(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, c: f64, tol: f64) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut lo, mut hi) = (a.min(c), a.max(c));
    let (mut x, mut w, mut v) = (b, b, b);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let xm = 0.5 * (lo + hi);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (hi - lo) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (lo - x) && p < q * (hi - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { lo - x } else { hi - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}
