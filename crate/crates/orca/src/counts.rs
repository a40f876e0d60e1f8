//! Photon-counting runs: event streams for the four shutter settings, gated
//! estimators, histograms and the source/memory figures of merit.

use std::path::Path;

use photonstats::{
    exact_click_probabilities, g11, g2h, heralding_budget, readout_series, simulate_event_streams, AddedNoise,
    Configuration, CorrelationResult, GateKind, GateSpec, GatedHits, HeraldingBudget, MemoryChannelModel,
    PairSourceModel, PhotonError, ReadoutSlot, SeriesEntry, SlotSelection, StreamSet,
};
use serde::{Deserialize, Serialize};

use crate::error::{OrcaError, Result};

/// Memory channel either from a lifetime model or from explicit slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemorySection {
    pub eta_in: f64,
    /// Efficiency at the first read-out.
    pub eta_readout: f64,
    pub storage_ps: f64,
    pub lifetime_ps: f64,
    /// Laser slots covered by read-out slots.
    pub orders: usize,
    /// Replaces the lifetime model when present.
    pub readouts: Option<Vec<ReadoutSlot>>,
    /// `none`, `poisson:<mean>` or `thermal:<mean>` photons per pulse.
    pub noise: String,
}

impl Default for MemorySection {
    fn default() -> Self {
        Self {
            eta_in: 0.70,
            eta_readout: 0.1677,
            storage_ps: 3500.0,
            lifetime_ps: 5400.0,
            orders: 3,
            readouts: None,
            noise: "none".into(),
        }
    }
}

impl MemorySection {
    pub fn model(&self, slot_period_ps: f64) -> Result<MemoryChannelModel> {
        let noise: AddedNoise = self.noise.parse()?;
        let mut m = match &self.readouts {
            Some(r) => MemoryChannelModel { eta_in: self.eta_in, readouts: r.clone(), noise },
            None => {
                if !(self.lifetime_ps > 0.0) {
                    return Err(OrcaError::Config("memory.lifetime_ps must be positive".into()));
                }
                MemoryChannelModel::from_lifetime(
                    self.eta_in,
                    self.eta_readout,
                    self.storage_ps,
                    self.lifetime_ps,
                    slot_period_ps,
                    self.orders,
                )
            }
        };
        m.noise = noise;
        m.validate()?;
        Ok(m)
    }
}

/// Stage transmissions for the heralding budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSection {
    pub stages: Vec<(String, f64)>,
}

impl Default for BudgetSection {
    fn default() -> Self {
        let s = |k: &str, v: f64| (k.to_string(), v);
        Self { stages: vec![s("eta_k", 0.007), s("eta_det", 0.5), s("eta_s_add", 0.30), s("eta_s_total", 0.037)] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountsConfig {
    pub duration_s: f64,
    pub source: PairSourceModel,
    pub memory: MemorySection,
    pub gates: GateSpec,
    pub budget: BudgetSection,
}

impl Default for CountsConfig {
    fn default() -> Self {
        Self {
            duration_s: 10.0,
            source: PairSourceModel::default(),
            memory: MemorySection::default(),
            gates: GateSpec::default(),
            budget: BudgetSection::default(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CountsOverrides {
    pub mu: Option<f64>,
    pub memory_noise: Option<String>,
    pub duration_s: Option<f64>,
}

impl CountsConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| OrcaError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(OrcaError::Config(format!("duration_s = {} must be positive", self.duration_s)));
        }
        self.source.validate()?;
        self.gates.validate(self.source.trigger_period_ps())?;
        self.memory.model(self.gates.slot_period_ps)?;
        heralding_budget(&self.budget.stages)?;
        Ok(())
    }
}

pub fn resolve(config: Option<&Path>, o: &CountsOverrides) -> Result<CountsConfig> {
    let mut cfg = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| OrcaError::Config(format!("{}: {e}", p.display())))?;
            CountsConfig::from_toml_str(&text)?
        }
        None => CountsConfig::default(),
    };
    if let Some(mu) = o.mu {
        cfg.source.mu = mu;
    }
    if let Some(n) = &o.memory_noise {
        cfg.memory.noise = n.clone();
    }
    if let Some(d) = o.duration_s {
        cfg.duration_s = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Estimate with its oracle value, or the reason it is undefined.
#[derive(Clone, Debug, Serialize)]
pub struct GateEstimate {
    pub config: Configuration,
    pub delay_ns: f64,
    pub selection: SlotSelection,
    pub g11: Option<CorrelationResult>,
    pub g2h: Option<CorrelationResult>,
    pub oracle_g11: Option<f64>,
    pub oracle_g2h: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesRow {
    pub config: Configuration,
    #[serde(flatten)]
    pub entry: SeriesEntry,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountsReport {
    pub triggers: u64,
    /// Heralded g(2) in the read-in gate for every setting and in the first
    /// read-out gate for MEM.
    pub gates: Vec<GateEstimate>,
    /// g(1,1) against herald-to-gate delay, one block per setting.
    pub series: Vec<SeriesRow>,
    /// Noise photons per pulse referred to the memory input.
    pub mu1: f64,
    pub budget: HeraldingBudget,
}

fn ok_or_note<T>(r: std::result::Result<T, PhotonError>, notes: &mut Vec<String>) -> Option<T> {
    r.map_err(|e| notes.push(e.to_string())).ok()
}

/// Gates reported for heralded g(2).
pub fn reported_gates() -> Vec<(Configuration, SlotSelection)> {
    let mut v: Vec<_> = Configuration::ALL.iter().map(|&c| (c, SlotSelection::new(0, GateKind::In))).collect();
    v.insert(2, (Configuration::Mem, SlotSelection::new(0, GateKind::Out)));
    v
}

pub fn simulate(cfg: &CountsConfig, seed: u64) -> Result<StreamSet> {
    let memory = cfg.memory.model(cfg.gates.slot_period_ps)?;
    Ok(simulate_event_streams(&cfg.source, &memory, &cfg.gates, cfg.duration_s, seed)?)
}

/// Runs the estimators on simulated or loaded streams. Undefined results
/// (no clicks in a gate) are recorded as notes, not errors.
pub fn analyse(cfg: &CountsConfig, streams: &StreamSet) -> Result<CountsReport> {
    let memory = cfg.memory.model(cfg.gates.slot_period_ps)?;
    let mut gates = Vec::new();
    let mut series = Vec::new();
    for c in Configuration::ALL {
        let st = streams.get(c);
        let hits = GatedHits::new(st, &cfg.gates)?;
        for (_, sel) in reported_gates().into_iter().filter(|(k, _)| *k == c) {
            let mut notes = Vec::new();
            let counts = hits.counts(sel)?;
            let oracle = exact_click_probabilities(&cfg.source, &memory, &cfg.gates, c, sel)?;
            gates.push(GateEstimate {
                config: c,
                delay_ns: sel.delay_ps(&cfg.gates) * 1e-3,
                selection: sel,
                g11: ok_or_note(g11(&counts), &mut notes),
                g2h: ok_or_note(g2h(&counts), &mut notes),
                oracle_g11: ok_or_note(oracle.g11(), &mut notes),
                oracle_g2h: ok_or_note(oracle.g2h(), &mut notes),
                notes,
            });
        }
        series.extend(readout_series(st, &cfg.gates)?.into_iter().map(|entry| SeriesRow { config: c, entry }));
    }
    let first = memory.readouts.iter().min_by(|a, b| a.delay_ps.total_cmp(&b.delay_ps));
    let mu1 = match first {
        Some(r) => analytic::mu1(memory.noise.photons_per_pulse, r.efficiency)?,
        None => return Err(OrcaError::Config("memory has no read-out slot".into())),
    };
    Ok(CountsReport {
        triggers: streams.sig.total_triggers,
        gates,
        series,
        mu1,
        budget: heralding_budget(&cfg.budget.stages)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let c = CountsConfig::default();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(CountsConfig::from_toml_str(&text).unwrap(), c);
        assert!(CountsConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn overrides_are_validated() {
        let o = CountsOverrides { memory_noise: Some("thermal:0.01".into()), ..Default::default() };
        let c = resolve(None, &o).unwrap();
        assert_eq!(c.memory.model(12500.0).unwrap().noise.photons_per_pulse, 0.01);
        for bad in [
            CountsOverrides { mu: Some(-1.0), ..Default::default() },
            CountsOverrides { memory_noise: Some("pink:1".into()), ..Default::default() },
            CountsOverrides { duration_s: Some(0.0), ..Default::default() },
        ] {
            assert!(matches!(resolve(None, &bad), Err(OrcaError::Config(_))));
        }
    }

    #[test]
    fn zero_pairs_give_notes_not_errors() {
        let o = CountsOverrides { mu: Some(0.0), duration_s: Some(1e-3), ..Default::default() };
        let mut cfg = resolve(None, &o).unwrap();
        cfg.source.dark_rate_hz = [0.0; 3];
        let r = analyse(&cfg, &simulate(&cfg, 1).unwrap()).unwrap();
        assert!(r.gates.iter().all(|g| g.g2h.is_none() && !g.notes.is_empty()));
        assert!(r.series.iter().all(|s| s.entry.g11.is_none()));
    }
}
