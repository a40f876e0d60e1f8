//! Species records loaded from versioned TOML data assets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::angular::f_range;
use crate::constants::{BOLTZMANN, MHZ, TORR};
use crate::hyperfine::hyperfine_offset;
use crate::AtomError;

const CS133: &str = include_str!("../data/cs133.toml");
const RB87: &str = include_str!("../data/rb87.toml");

/// One hyperfine level; `energy_offset` in rad/s from the manifold centroid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperfineLevel {
    pub f: f64,
    pub energy_offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifold {
    pub label: String,
    pub j: f64,
    pub a_mhz: f64,
    pub b_mhz: f64,
    /// Natural linewidth Γ in rad/s (0 for the ground manifold).
    pub linewidth: f64,
    pub levels: Vec<HyperfineLevel>,
}

impl Manifold {
    pub fn level(&self, f: f64) -> Option<&HyperfineLevel> {
        self.levels.iter().find(|l| (l.f - f).abs() < 1e-9)
    }

    pub fn offset(&self, f: f64) -> f64 {
        self.level(f).map_or(0.0, |l| l.energy_offset)
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.f).collect()
    }

    pub fn f_max(&self) -> f64 {
        self.levels.iter().map(|l| l.f).fold(f64::MIN, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Transition {
    /// Vacuum wavelength in m.
    pub wavelength: f64,
    /// Reduced dipole in C·m, normalised to the lower J.
    pub reduced_dipole: f64,
    pub citation: String,
}

impl Transition {
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    pub fn angular_frequency(&self) -> f64 {
        self.wavenumber() * crate::constants::SPEED_OF_LIGHT
    }
}

/// log10(P/torr) = c0 + c1/T + c2·T + c3·log10(T), liquid phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VaporPressureModel {
    pub coefficients: [f64; 4],
    pub citation: String,
}

impl VaporPressureModel {
    pub fn pressure_pa(&self, temperature: f64) -> f64 {
        let [c0, c1, c2, c3] = self.coefficients;
        let log_p = c0 + c1 / temperature + c2 * temperature + c3 * temperature.log10();
        10f64.powf(log_p) * TORR
    }

    /// Ideal-gas number density in m⁻³.
    pub fn number_density(&self, temperature: f64) -> Result<f64, AtomError> {
        if !(temperature > 0.0) {
            return Err(AtomError::Domain(format!("temperature must be positive, got {temperature}")));
        }
        Ok(self.pressure_pa(temperature) / (BOLTZMANN * temperature))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeciesRecord {
    pub name: String,
    pub mass: f64,
    pub nuclear_spin: f64,
    pub ground: Manifold,
    pub intermediate: Manifold,
    pub storage: Manifold,
    /// ground → intermediate
    pub signal: Transition,
    /// intermediate → storage
    pub control: Transition,
    pub vapor_pressure: VaporPressureModel,
    pub citation: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifold {
    label: String,
    #[serde(rename = "J")]
    j: f64,
    #[serde(rename = "A_MHz")]
    a_mhz: f64,
    #[serde(rename = "B_MHz", default)]
    b_mhz: f64,
    #[serde(rename = "linewidth_MHz", default)]
    linewidth_mhz: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifolds {
    ground: RawManifold,
    intermediate: RawManifold,
    storage: RawManifold,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    wavelength_nm: f64,
    #[serde(rename = "reduced_dipole_Cm")]
    reduced_dipole_cm: f64,
    #[serde(default)]
    citation: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransitions {
    signal: RawTransition,
    control: RawTransition,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpecies {
    schema_version: u32,
    name: String,
    mass_kg: f64,
    nuclear_spin: f64,
    #[serde(default)]
    citation: String,
    manifolds: RawManifolds,
    transitions: RawTransitions,
    vapor_pressure: VaporPressureModel,
}

fn build_manifold(raw: RawManifold, i: f64, excited: bool) -> Result<Manifold, AtomError> {
    if excited && !(raw.linewidth_mhz > 0.0) {
        return Err(AtomError::InvalidSpecies(format!("manifold {} needs a positive linewidth", raw.label)));
    }
    if raw.linewidth_mhz < 0.0 {
        return Err(AtomError::InvalidSpecies(format!("manifold {} has a negative linewidth", raw.label)));
    }
    if crate::angular::twice(raw.j).is_none() || raw.j <= 0.0 {
        return Err(AtomError::InvalidSpecies(format!("manifold {} has invalid J = {}", raw.label, raw.j)));
    }
    let levels: Vec<HyperfineLevel> = f_range(raw.j, i)
        .into_iter()
        .map(|f| HyperfineLevel { f, energy_offset: hyperfine_offset(raw.a_mhz, raw.b_mhz, f, raw.j, i) * MHZ })
        .collect();
    let diffs: Vec<f64> = levels.windows(2).map(|w| w[1].energy_offset - w[0].energy_offset).collect();
    let ordered = diffs.iter().all(|d| *d > 0.0) || diffs.iter().all(|d| *d < 0.0);
    if levels.len() > 1 && !ordered {
        return Err(AtomError::InvalidSpecies(format!("manifold {} offsets are not strictly ordered in F", raw.label)));
    }
    Ok(Manifold {
        label: raw.label,
        j: raw.j,
        a_mhz: raw.a_mhz,
        b_mhz: raw.b_mhz,
        linewidth: raw.linewidth_mhz * MHZ,
        levels,
    })
}

fn build_transition(raw: RawTransition) -> Result<Transition, AtomError> {
    if !(raw.wavelength_nm > 0.0) || !(raw.reduced_dipole_cm > 0.0) {
        return Err(AtomError::InvalidSpecies("transition wavelength and dipole must be positive".into()));
    }
    Ok(Transition { wavelength: raw.wavelength_nm * 1e-9, reduced_dipole: raw.reduced_dipole_cm, citation: raw.citation })
}

impl SpeciesRecord {
    pub fn from_toml_str(text: &str) -> Result<Self, AtomError> {
        let raw: RawSpecies = toml::from_str(text).map_err(|e| AtomError::InvalidSpecies(e.to_string()))?;
        if raw.schema_version != 1 {
            return Err(AtomError::InvalidSpecies(format!("unsupported schema_version {}", raw.schema_version)));
        }
        if !(raw.mass_kg > 0.0) {
            return Err(AtomError::InvalidSpecies("mass must be positive".into()));
        }
        let i = raw.nuclear_spin;
        if crate::angular::twice(i).is_none() || i < 0.0 {
            return Err(AtomError::InvalidSpecies(format!("invalid nuclear spin {i}")));
        }
        Ok(SpeciesRecord {
            name: raw.name,
            mass: raw.mass_kg,
            nuclear_spin: i,
            ground: build_manifold(raw.manifolds.ground, i, false)?,
            intermediate: build_manifold(raw.manifolds.intermediate, i, true)?,
            storage: build_manifold(raw.manifolds.storage, i, true)?,
            signal: build_transition(raw.transitions.signal)?,
            control: build_transition(raw.transitions.control)?,
            vapor_pressure: raw.vapor_pressure,
            citation: raw.citation,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, AtomError> {
        let text = std::fs::read_to_string(path).map_err(|e| AtomError::InvalidSpecies(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Shipped species by name: `cs`/`cs133` or `rb87`.
    pub fn builtin(name: &str) -> Result<Self, AtomError> {
        match name.to_ascii_lowercase().as_str() {
            "cs" | "cs133" | "cesium" | "caesium" => Self::from_toml_str(CS133),
            "rb87" | "rb" | "rubidium" => Self::from_toml_str(RB87),
            other => Err(AtomError::InvalidSpecies(format!("unknown species {other:?}"))),
        }
    }

    pub fn cesium() -> Self {
        Self::builtin("cs133").expect("shipped cesium asset is valid")
    }

    pub fn rubidium87() -> Self {
        Self::builtin("rb87").expect("shipped rubidium asset is valid")
    }

    pub fn state_count(&self) -> usize {
        self.ground.levels.len() + self.intermediate.levels.len() + self.storage.levels.len()
    }

    /// Highest ground F, the populated level the memory addresses.
    pub fn upper_ground_f(&self) -> f64 {
        self.ground.f_max()
    }

    /// Thermal fraction of atoms in ground level F.
    pub fn ground_population(&self, f: f64) -> f64 {
        (2.0 * f + 1.0) / ((2.0 * self.nuclear_spin + 1.0) * (2.0 * self.ground.j + 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cesium_has_twelve_states() {
        let cs = SpeciesRecord::cesium();
        assert_eq!(cs.state_count(), 12);
        assert_eq!(cs.storage.f_values(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn rubidium_loads() {
        let rb = SpeciesRecord::rubidium87();
        assert_eq!(rb.ground.f_values(), vec![1.0, 2.0]);
        assert_eq!(rb.state_count(), 10);
    }

    #[test]
    fn rejects_zero_excited_linewidth() {
        let bad = CS133.replace("linewidth_MHz = 5.234", "linewidth_MHz = 0.0");
        assert!(SpeciesRecord::from_toml_str(&bad).is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = CS133.replace("nuclear_spin = 3.5", "nuclear_spin = 3.5\nspin_typo = 1");
        assert!(SpeciesRecord::from_toml_str(&bad).is_err());
    }

    #[test]
    fn cesium_density_near_cell_temperature() {
        let cs = SpeciesRecord::cesium();
        let n = cs.vapor_pressure.number_density(364.15).unwrap();
        assert!(n > 7e18 && n < 1e19, "{n}");
    }
}
