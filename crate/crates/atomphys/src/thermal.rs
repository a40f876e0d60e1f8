//! Thermal speed, axial Maxwell-Boltzmann quadrature and vapor density.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::constants::BOLTZMANN;
use crate::species::SpeciesRecord;
use crate::AtomError;

pub const DEFAULT_VELOCITY_NODES: usize = 64;

/// Warm vapor cell. `thermal_speed` is always sqrt(k_B T / m) of the species it was built for.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermalEnsemble {
    pub temperature: f64,
    pub number_density: f64,
    pub thermal_speed: f64,
    pub cell_length: f64,
}

impl ThermalEnsemble {
    /// Density taken from the species vapor-pressure model.
    pub fn from_vapor(species: &SpeciesRecord, temperature: f64, cell_length: f64) -> Result<Self, AtomError> {
        let n = species.vapor_pressure.number_density(temperature)?;
        Self::with_density(species, temperature, n, cell_length)
    }

    pub fn with_density(species: &SpeciesRecord, temperature: f64, number_density: f64, cell_length: f64) -> Result<Self, AtomError> {
        if !(number_density >= 0.0) {
            return Err(AtomError::Domain(format!("number density must be non-negative, got {number_density}")));
        }
        if !(cell_length > 0.0) {
            return Err(AtomError::Domain(format!("cell length must be positive, got {cell_length}")));
        }
        Ok(ThermalEnsemble {
            temperature,
            number_density,
            thermal_speed: thermal_speed(species, temperature)?,
            cell_length,
        })
    }
}

/// v_s = sqrt(k_B T / m).
pub fn thermal_speed(species: &SpeciesRecord, temperature: f64) -> Result<f64, AtomError> {
    if !(temperature > 0.0) {
        return Err(AtomError::Domain(format!("temperature must be positive, got {temperature}")));
    }
    Ok((BOLTZMANN * temperature / species.mass).sqrt())
}

/// Gauss-Hermite nodes for the 1-D Maxwell-Boltzmann density of rms width `thermal_speed`.
///
/// Returns (velocity, weight) ascending in velocity; weights are positive and
/// sum to 1. Exact for polynomial moments up to degree 2n − 1.
pub fn velocity_nodes(thermal_speed: f64, n_points: usize) -> Result<Vec<(f64, f64)>, AtomError> {
    if n_points == 0 {
        return Err(AtomError::Domain("velocity quadrature needs at least one node".into()));
    }
    // Golub-Welsch: Jacobi matrix of the physicists' Hermite recurrence.
    let jacobi = DMatrix::from_fn(n_points, n_points, |r, c| {
        if r + 1 == c || c + 1 == r {
            (r.max(c) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut nodes: Vec<(f64, f64)> = (0..n_points)
        .map(|k| {
            let x = eig.eigenvalues[k];
            let v0 = eig.eigenvectors[(0, k)];
            (std::f64::consts::SQRT_2 * thermal_speed * x, v0 * v0)
        })
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrise to remove eigen-solver asymmetry at the 1e-16 level.
    let n = nodes.len();
    for k in 0..n / 2 {
        let (va, wa) = nodes[k];
        let (vb, wb) = nodes[n - 1 - k];
        let v = 0.5 * (vb - va);
        let w = 0.5 * (wa + wb);
        nodes[k] = (-v, w);
        nodes[n - 1 - k] = (v, w);
    }
    if n % 2 == 1 {
        nodes[n / 2].0 = 0.0;
    }
    let total: f64 = nodes.iter().map(|p| p.1).sum();
    for p in &mut nodes {
        p.1 /= total;
    }
    Ok(nodes)
}

/// Quadrature over the ensemble's axial velocity distribution.
pub fn velocity_quadrature(ensemble: &ThermalEnsemble, n_points: usize) -> Result<Vec<(f64, f64)>, AtomError> {
    velocity_nodes(ensemble.thermal_speed, n_points)
}
