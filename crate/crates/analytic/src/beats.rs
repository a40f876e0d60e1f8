//! Hyperfine quantum beats of the stored coherence under a Doppler envelope.

use atomphys::{absorption_amplitude, relative_line_strength, SpeciesRecord};
use num_complex::Complex64;
use serde::Serialize;

use crate::geometry::Polarization;
use crate::AnalyticError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BeatComponent {
    pub amplitude: Complex64,
    /// Angular frequency (rad/s) of the component during storage.
    pub frequency: f64,
}

/// Coherent sum of stored components: η_N(τ) = |Σ c_F e^{iω_F τ}|² e^{−(τ/τ_D)²}.
///
/// Amplitudes are rescaled on construction so that Σ c_F = 1, which makes
/// η_N(0) = 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeatModel {
    pub components: Vec<BeatComponent>,
    pub tau_d: f64,
}

impl BeatModel {
    pub fn new(components: Vec<BeatComponent>, tau_d: f64) -> Result<Self, AnalyticError> {
        let total: Complex64 = components.iter().map(|c| c.amplitude).sum();
        if total.norm() < 1e-300 {
            return Err(AnalyticError::Domain("beat components cancel at zero storage time".into()));
        }
        if !(tau_d > 0.0) {
            return Err(AnalyticError::Domain(format!("Doppler time must be positive, got {tau_d}")));
        }
        let components = components
            .into_iter()
            .map(|c| BeatComponent { amplitude: c.amplitude / total, frequency: c.frequency })
            .collect();
        Ok(BeatModel { components, tau_d })
    }

    /// Beat factor alone, without the Doppler envelope.
    pub fn interference(&self, tau: f64) -> f64 {
        coherent_sum(&self.components, tau).norm_sqr()
    }
}

fn coherent_sum(components: &[BeatComponent], tau: f64) -> Complex64 {
    components.iter().map(|c| c.amplitude * Complex64::from_polar(1.0, c.frequency * tau)).sum()
}

fn doppler(tau: f64, tau_d: f64) -> f64 {
    if tau_d.is_infinite() {
        1.0
    } else {
        (-(tau / tau_d).powi(2)).exp()
    }
}

pub fn beat_envelope(model: &BeatModel, tau: f64) -> f64 {
    model.interference(tau) * doppler(tau, model.tau_d)
}

/// Incoherent sum of beat channels, one per initial magnetic sublevel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeatMixture {
    pub channels: Vec<Vec<BeatComponent>>,
    pub tau_d: f64,
}

impl BeatMixture {
    pub fn envelope(&self, tau: f64) -> f64 {
        let at = |t: f64| self.channels.iter().map(|c| coherent_sum(c, t).norm_sqr()).sum::<f64>();
        let norm = at(0.0);
        if norm == 0.0 {
            return 0.0;
        }
        at(tau) / norm * doppler(tau, self.tau_d)
    }
}

/// Storage-manifold model with hyperfine-level weights only: component F″
/// carries the two-step line-strength product Σ_F′ S(F→F′) S(F′→F″) from
/// the upper ground level.
pub fn storage_beat_model(species: &SpeciesRecord, tau_d: f64) -> Result<BeatModel, AnalyticError> {
    let fg = species.upper_ground_f();
    let (g, e, s) = (&species.ground, &species.intermediate, &species.storage);
    let i = species.nuclear_spin;
    let comps = s
        .levels
        .iter()
        .filter_map(|ls| {
            let p: f64 = e
                .levels
                .iter()
                .map(|le| relative_line_strength(fg, le.f, g.j, e.j, i).powi(2) * relative_line_strength(le.f, ls.f, e.j, s.j, i).powi(2))
                .sum();
            (p > 0.0).then(|| BeatComponent { amplitude: Complex64::new(p, 0.0), frequency: ls.energy_offset })
        })
        .collect();
    BeatModel::new(comps, tau_d)
}

/// Sublevel-resolved model for pure spherical polarizations.
///
/// Each ground sublevel m of the upper ground level is an independent
/// channel; the two-photon amplitude to storage level F″ is
/// G = Σ_F′ a(F,m→F′) a(F′→F″) / Δ_F′ and the recalled amplitude is Σ G² e^{iωτ}.
/// `delta` is the one-photon detuning from the F → F+1 line; pass
/// `f64::INFINITY` to weight intermediate levels equally.
pub fn storage_beat_mixture(
    species: &SpeciesRecord,
    polarization: Polarization,
    delta: f64,
    tau_d: f64,
) -> Result<BeatMixture, AnalyticError> {
    if !(tau_d > 0.0) {
        return Err(AnalyticError::Domain(format!("Doppler time must be positive, got {tau_d}")));
    }
    let fg = species.upper_ground_f();
    let (g, e, s) = (&species.ground, &species.intermediate, &species.storage);
    let i = species.nuclear_spin;
    let e_ref = e.level(fg + 1.0).map(|l| l.energy_offset).unwrap_or(0.0);
    let (qs, qc) = (polarization.signal, polarization.control);
    let mut channels = Vec::new();
    let nm = (2.0 * fg).round() as i32 + 1;
    for k in 0..nm {
        let m = -fg + k as f64;
        let comps: Vec<BeatComponent> = s
            .levels
            .iter()
            .map(|ls| {
                let amp: f64 = e
                    .levels
                    .iter()
                    .map(|le| {
                        let det = if delta.is_finite() { 1.0 / (delta + le.energy_offset - e_ref) } else { 1.0 };
                        absorption_amplitude(g.j, e.j, i, fg, m, le.f, qs)
                            * absorption_amplitude(e.j, s.j, i, le.f, m + qs as f64, ls.f, qc)
                            * det
                    })
                    .sum();
                BeatComponent { amplitude: Complex64::new(amp * amp, 0.0), frequency: ls.energy_offset }
            })
            .filter(|c| c.amplitude.re != 0.0)
            .collect();
        if !comps.is_empty() {
            channels.push(comps);
        }
    }
    Ok(BeatMixture { channels, tau_d })
}
