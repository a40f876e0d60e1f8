//! Storage-time and control-energy sweeps, and the 1/e lifetime extraction.

use atomphys::absorption::brent_minimize;
use atomphys::{SpeciesRecord, ThermalEnsemble};
use rayon::prelude::*;
use serde::Serialize;

use crate::schedule::{ProtocolSchedule, SolverGrid};
use crate::solver::{propagate_retrieval, propagate_storage, run_memory};
use crate::MemoryError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LifetimePoint {
    pub tau: f64,
    pub eta_total: f64,
    pub eta_in: f64,
    /// η_total(τ)/η_total(0).
    pub eta_n: f64,
}

/// One read-in, then a read-out per storage time. η_N is normalized to the
/// read-out at zero storage time, which is always computed.
pub fn lifetime_curve(
    template: &ProtocolSchedule,
    taus: &[f64],
    grid: &SolverGrid,
    ensemble: &ThermalEnsemble,
    species: &SpeciesRecord,
) -> Result<Vec<LifetimePoint>, MemoryError> {
    if taus.is_empty() {
        return Err(MemoryError::Domain("storage-time list is empty".into()));
    }
    if taus.iter().any(|t| !(*t >= 0.0)) {
        return Err(MemoryError::Domain("storage times must be non-negative".into()));
    }
    let mut schedule = template.clone();
    schedule.set_storage_time(0.0);
    let (state, _) = propagate_storage(&schedule, grid, ensemble, species)?;
    let mut all: Vec<f64> = vec![0.0];
    all.extend(taus.iter().copied().filter(|t| *t != 0.0));
    let results: Vec<Result<(f64, f64), MemoryError>> = all
        .par_iter()
        .map(|&tau| {
            let mut s = schedule.clone();
            s.set_storage_time(tau);
            propagate_retrieval(&state, &s, grid, species).map(|r| (tau, r.eta_total))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let eta0 = results[0].1;
    if !(eta0 > 0.0) {
        return Err(MemoryError::OutOfRange("zero retrieval at zero storage time; cannot normalize".into()));
    }
    Ok(taus
        .iter()
        .map(|&tau| {
            let eta = results.iter().find(|r| r.0 == tau).map(|r| r.1).unwrap_or(eta0);
            LifetimePoint { tau, eta_total: eta, eta_in: state.eta_in, eta_n: eta / eta0 }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyPoint {
    pub energy: f64,
    pub eta_total: f64,
    pub eta_in: f64,
}

/// Equal read-in and read-out energies at the template's storage time.
pub fn efficiency_vs_energy(
    template: &ProtocolSchedule,
    energies: &[f64],
    grid: &SolverGrid,
    ensemble: &ThermalEnsemble,
    species: &SpeciesRecord,
) -> Result<Vec<EnergyPoint>, MemoryError> {
    if energies.iter().any(|e| !(*e >= 0.0)) {
        return Err(MemoryError::Domain("pulse energies must be non-negative".into()));
    }
    let out: Vec<Result<EnergyPoint, MemoryError>> = energies
        .par_iter()
        .map(|&energy| {
            let mut s = template.clone();
            s.set_energies(energy, energy);
            run_memory(&s, grid, ensemble, species).map(|r| EnergyPoint { energy, eta_total: r.eta_total, eta_in: r.eta_in })
        })
        .collect();
    out.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LifetimeFit {
    /// Interpolated first downward crossing of 1/e.
    pub first_crossing: f64,
    /// Later crossings of 1/e in either direction.
    pub recrossings: Vec<f64>,
    pub oscillatory: bool,
    /// Least-squares T of exp(−τ/T) over the supplied points; a diagnostic
    /// only, the reported lifetime is `first_crossing`.
    pub exponential_time: f64,
}

fn crossing(t0: f64, y0: f64, t1: f64, y1: f64, level: f64) -> f64 {
    if y0 > 0.0 && y1 > 0.0 {
        let (l0, l1, ll) = (y0.ln(), y1.ln(), level.ln());
        t0 + (ll - l0) / (l1 - l0) * (t1 - t0)
    } else {
        t0 + (level - y0) / (y1 - y0) * (t1 - t0)
    }
}

/// 1/e time of a normalized efficiency curve (τ, η_N).
///
/// The lifetime is the first downward crossing, interpolated linearly in
/// log η (exact for exponentials). Hyperfine beats can bring the curve back
/// above 1/e; those later crossings are listed and flag the fit as oscillatory.
pub fn fit_lifetime(curve: &[(f64, f64)]) -> Result<LifetimeFit, MemoryError> {
    let mut pts: Vec<(f64, f64)> = curve.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let level = (-1.0f64).exp();
    let mut crossings = Vec::new();
    for w in pts.windows(2) {
        let ((t0, y0), (t1, y1)) = (w[0], w[1]);
        if (y0 >= level) != (y1 >= level) {
            crossings.push(crossing(t0, y0, t1, y1, level));
        }
    }
    let Some(&first) = crossings.first() else {
        return Err(MemoryError::OutOfRange(format!(
            "curve never crosses 1/e between τ = {:e} and {:e} s",
            pts.first().map(|p| p.0).unwrap_or(0.0),
            pts.last().map(|p| p.0).unwrap_or(0.0)
        )));
    };
    let recrossings = crossings[1..].to_vec();

    let ssr = |t: f64| pts.iter().map(|&(x, y)| (y - (-x / t).exp()).powi(2)).sum::<f64>();
    let span = pts.last().unwrap().0.max(1e-15);
    let grid: Vec<f64> = (0..=120).map(|k| span * 1e-2 * 10f64.powf(k as f64 / 40.0)).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| ssr(t)).collect();
    let k = (1..grid.len() - 1).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let mut f = |t: f64| ssr(t);
    let (exp_t, _) = brent_minimize(&mut f, grid[k - 1], grid[k], grid[k + 1], 1e-10);

    let oscillatory = !recrossings.is_empty();
    Ok(LifetimeFit { first_crossing: first, recrossings, oscillatory, exponential_time: exp_t })
}
