//! Total and read-in efficiency against control pulse energy.

use mbsolver::{efficiency_vs_energy, EnergyPoint, RunConfig};
use serde::Serialize;

use crate::error::{OrcaError, Result};

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    /// Grid point with the largest total efficiency.
    pub maximum: EnergyPoint,
    /// d ln η / d ln E between the two smallest positive energies.
    pub low_energy_exponent: Option<f64>,
    pub points: Vec<EnergyPoint>,
}

pub fn compute(cfg: &RunConfig) -> Result<SweepReport> {
    if cfg.sweep.energies_nj.is_empty() {
        return Err(OrcaError::Config("sweep.energies_nj is empty".into()));
    }
    let species = cfg.species()?;
    let ens = cfg.ensemble_for(&species)?;
    let sched = cfg.schedule_for(&species)?;
    let points = efficiency_vs_energy(&sched, &cfg.energies(), &cfg.grid(), &ens, &species)?;
    let maximum = *points.iter().max_by(|a, b| a.eta_total.total_cmp(&b.eta_total)).unwrap();
    Ok(SweepReport { maximum, low_energy_exponent: low_energy_exponent(&points), points })
}

fn low_energy_exponent(points: &[EnergyPoint]) -> Option<f64> {
    let mut pos: Vec<&EnergyPoint> = points.iter().filter(|p| p.energy > 0.0 && p.eta_total > 0.0).collect();
    pos.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    pos.dedup_by(|a, b| a.energy == b.energy);
    match pos.as_slice() {
        [a, b, ..] => Some((b.eta_total / a.eta_total).ln() / (b.energy / a.energy).ln()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_of_a_power_law() {
        let p = |e: f64| EnergyPoint { energy: e, eta_total: 3.0 * e * e, eta_in: 0.0 };
        let pts = [p(0.0), p(4.0), p(1.0), p(2.0)];
        assert!((low_energy_exponent(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(low_energy_exponent(&[p(0.0), p(1.0)]), None);
    }
}
