//! Source, memory channel, detectors and time gates.
//!
//! All times are picoseconds. Within each laser slot the source photons arrive
//! at the read-in gate centre; everything else is a delay relative to that.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::{PhotonError, Result};

/// Largest tolerated probability mass cut off by the photon-number truncation.
pub const TRUNCATION_TOLERANCE: f64 = 1e-8;

/// Jitter is drawn from a Gaussian cut at this many standard deviations.
pub const JITTER_CUTOFF_SIGMAS: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Detector {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "s1")]
    S1,
    #[serde(rename = "s2")]
    S2,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::I, Detector::S1, Detector::S2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Detector::I => "i",
            Detector::S1 => "s1",
            Detector::S2 => "s2",
        }
    }
}

impl FromStr for Detector {
    type Err = PhotonError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(Detector::I),
            "s1" => Ok(Detector::S1),
            "s2" => Ok(Detector::S2),
            _ => Err(PhotonError::Config(format!("unknown detector '{s}'"))),
        }
    }
}

/// Shutter settings: which of signal, read-in control and read-out control pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Configuration {
    Sig,
    Mem,
    Ri,
    Ctrl,
}

impl Configuration {
    pub const ALL: [Configuration; 4] = [Configuration::Sig, Configuration::Mem, Configuration::Ri, Configuration::Ctrl];

    pub fn label(self) -> &'static str {
        match self {
            Configuration::Sig => "SIG",
            Configuration::Mem => "MEM",
            Configuration::Ri => "RI",
            Configuration::Ctrl => "CTRL",
        }
    }

    pub(crate) fn index(self) -> u64 {
        match self {
            Configuration::Sig => 0,
            Configuration::Mem => 1,
            Configuration::Ri => 2,
            Configuration::Ctrl => 3,
        }
    }

    fn read_out_on(self) -> bool {
        matches!(self, Configuration::Mem | Configuration::Ctrl)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Configuration {
    type Err = PhotonError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SIG" => Ok(Configuration::Sig),
            "MEM" => Ok(Configuration::Mem),
            "RI" => Ok(Configuration::Ri),
            "CTRL" => Ok(Configuration::Ctrl),
            _ => Err(PhotonError::Config(format!("unknown configuration '{s}'"))),
        }
    }
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(PhotonError::Config(format!("{name} = {v} is not a probability")))
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(PhotonError::Config(format!("{name} = {v} must be finite and non-negative")))
    }
}

/// Single-mode pair source with a two-arm loss chain and three click detectors.
///
/// Signal transmission is split around the memory: `eta_signal` carries the
/// photon from the source to the memory, `eta_signal_post` from the memory to
/// the beam splitter in front of s1/s2. Detector efficiencies are separate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairSourceModel {
    /// Mean pair number per pulse.
    pub mu: f64,
    pub eta_signal: f64,
    pub eta_signal_post: f64,
    pub eta_idler: f64,
    /// Indexed by [`Detector::index`].
    pub detector_efficiency: [f64; 3],
    pub dark_rate_hz: [f64; 3],
    pub jitter_sigma_ps: f64,
    pub rep_rate_hz: f64,
    pub trigger_rate_hz: f64,
    pub n_max: usize,
}

impl Default for PairSourceModel {
    /// Loss chain of the experiment: 4.7% to the memory, 30% after it, 50%
    /// detectors, darks 163/296/356 Hz, idler rate ≈ 30 kHz at μ = 0.05.
    fn default() -> Self {
        Self {
            mu: 0.0075,
            eta_signal: 0.047,
            eta_signal_post: 0.30,
            eta_idler: 0.015,
            detector_efficiency: [0.5; 3],
            dark_rate_hz: [163.0, 296.0, 356.0],
            jitter_sigma_ps: 350.0,
            rep_rate_hz: 80e6,
            trigger_rate_hz: 1e6,
            n_max: 10,
        }
    }
}

impl PairSourceModel {
    pub fn validate(&self) -> Result<()> {
        check_nonneg("mu", self.mu)?;
        check_prob("eta_signal", self.eta_signal)?;
        check_prob("eta_signal_post", self.eta_signal_post)?;
        check_prob("eta_idler", self.eta_idler)?;
        for d in Detector::ALL {
            check_prob(&format!("detector_efficiency[{}]", d.label()), self.detector_efficiency[d.index()])?;
            check_nonneg(&format!("dark_rate_hz[{}]", d.label()), self.dark_rate_hz[d.index()])?;
        }
        check_nonneg("jitter_sigma_ps", self.jitter_sigma_ps)?;
        if !(self.rep_rate_hz > 0.0 && self.trigger_rate_hz > 0.0) {
            return Err(PhotonError::Config("repetition and trigger rates must be positive".into()));
        }
        let ratio = self.rep_rate_hz / self.trigger_rate_hz;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio || ratio < 1.0 {
            return Err(PhotonError::Config(format!(
                "repetition rate {} Hz is not an integer multiple of the trigger rate {} Hz",
                self.rep_rate_hz, self.trigger_rate_hz
            )));
        }
        if self.n_max == 0 {
            return Err(PhotonError::Config("n_max must be at least 1".into()));
        }
        let err = self.truncation_error();
        if err > TRUNCATION_TOLERANCE {
            return Err(PhotonError::Truncation { error: err, tolerance: TRUNCATION_TOLERANCE });
        }
        Ok(())
    }

    pub fn pulses_per_trigger(&self) -> u64 {
        (self.rep_rate_hz / self.trigger_rate_hz).round() as u64
    }

    pub fn pulse_period_ps(&self) -> f64 {
        1e12 / self.rep_rate_hz
    }

    pub fn trigger_period_ps(&self) -> f64 {
        1e12 / self.trigger_rate_hz
    }

    /// Probability mass beyond n_max: (μ/(1+μ))^(n_max+1).
    pub fn truncation_error(&self) -> f64 {
        (self.mu / (1.0 + self.mu)).powi(self.n_max as i32 + 1)
    }

    /// Renormalized thermal law P(n) = μⁿ/(1+μ)ⁿ⁺¹, n = 0..=n_max.
    pub fn pair_distribution(&self) -> Vec<f64> {
        let r = self.mu / (1.0 + self.mu);
        let mut p: Vec<f64> = Vec::with_capacity(self.n_max + 1);
        let mut term = 1.0 / (1.0 + self.mu);
        for _ in 0..=self.n_max {
            p.push(term);
            term *= r;
        }
        let norm: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= norm);
        p
    }

    /// Idler click probability per idler photon.
    pub(crate) fn idler_detection(&self) -> f64 {
        self.eta_idler * self.detector_efficiency[0]
    }

    /// Per-photon click probability on s1 and s2 for a photon leaving the memory.
    pub(crate) fn post_memory_split(&self) -> [f64; 2] {
        let t = 0.5 * self.eta_signal_post;
        [t * self.detector_efficiency[1], t * self.detector_efficiency[2]]
    }

    pub(crate) fn jitter_cutoff_ps(&self) -> f64 {
        JITTER_CUTOFF_SIGMAS * self.jitter_sigma_ps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutSlot {
    pub delay_ps: f64,
    /// Probability that a photon entering the memory leaves at this delay.
    pub efficiency: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Poisson,
    Thermal,
}

/// Noise photons per pulse emitted by the memory into the read-out gate.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AddedNoise {
    pub kind: NoiseKind,
    pub photons_per_pulse: f64,
}

impl FromStr for AddedNoise {
    type Err = PhotonError;
    /// `none`, `poisson:<mean>` or `thermal:<mean>`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(AddedNoise::default());
        }
        let (k, v) = s
            .split_once(':')
            .ok_or_else(|| PhotonError::Config(format!("noise '{s}' is not of the form kind:mean")))?;
        let kind = match k {
            "poisson" => NoiseKind::Poisson,
            "thermal" => NoiseKind::Thermal,
            _ => return Err(PhotonError::Config(format!("unknown noise kind '{k}'"))),
        };
        let photons_per_pulse: f64 =
            v.parse().map_err(|_| PhotonError::Config(format!("noise mean '{v}' is not a number")))?;
        check_nonneg("noise mean", photons_per_pulse)?;
        Ok(AddedNoise { kind, photons_per_pulse })
    }
}

impl AddedNoise {
    /// ln P(no noise photon detected) when each is detected with probability x.
    pub(crate) fn ln_no_click(&self, x: f64) -> f64 {
        let nu = self.photons_per_pulse;
        match self.kind {
            NoiseKind::Poisson => -nu * x,
            NoiseKind::Thermal => -(nu * x).ln_1p(),
        }
    }

    /// (mean, second factorial moment) of the noise photon number.
    pub(crate) fn moments(&self) -> (f64, f64) {
        let nu = self.photons_per_pulse;
        match self.kind {
            NoiseKind::Poisson => (nu, nu * nu),
            NoiseKind::Thermal => (nu, 2.0 * nu * nu),
        }
    }
}

/// Phenomenological memory: absorbed fraction, delayed read-out slots and
/// optional added noise. Unabsorbed light leaks through promptly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemoryChannelModel {
    pub eta_in: f64,
    pub readouts: Vec<ReadoutSlot>,
    pub noise: AddedNoise,
}

impl Default for MemoryChannelModel {
    /// η_in = 0.70, 16.77% at 3.5 ns, decaying with 5.4 ns over the
    /// following control pulses.
    fn default() -> Self {
        Self::from_lifetime(0.70, 0.1677, 3500.0, 5400.0, 12500.0, 3)
    }
}

impl MemoryChannelModel {
    /// Read-out slots at every later control pulse: the read-out pulse at
    /// storage + 12.5k ns and the next read-in pulses at 12.5k ns (k ≥ 1),
    /// each with η(t) = η_ro·exp(−(t − storage)/lifetime).
    pub fn from_lifetime(
        eta_in: f64,
        eta_ro: f64,
        storage_ps: f64,
        lifetime_ps: f64,
        slot_period_ps: f64,
        orders: usize,
    ) -> Self {
        let eta = |t: f64| eta_ro * (-(t - storage_ps) / lifetime_ps).exp();
        let mut readouts = Vec::new();
        for k in 0..orders {
            let base = k as f64 * slot_period_ps;
            if k > 0 {
                readouts.push(ReadoutSlot { delay_ps: base, efficiency: eta(base) });
            }
            readouts.push(ReadoutSlot { delay_ps: base + storage_ps, efficiency: eta(base + storage_ps) });
        }
        Self { eta_in, readouts, noise: AddedNoise::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("eta_in", self.eta_in)?;
        let mut total = 0.0;
        for r in &self.readouts {
            check_nonneg("read-out delay", r.delay_ps)?;
            if r.delay_ps == 0.0 {
                return Err(PhotonError::Config("read-out slot at zero delay collides with the prompt leak".into()));
            }
            check_prob("read-out efficiency", r.efficiency)?;
            total += r.efficiency;
        }
        if total > self.eta_in * (1.0 + 1e-12) {
            return Err(PhotonError::Config(format!(
                "read-out efficiencies sum to {total}, more than the absorbed fraction {}",
                self.eta_in
            )));
        }
        check_nonneg("added noise", self.noise.photons_per_pulse)
    }

    /// Memory channel without its added noise.
    pub fn noiseless(&self) -> Self {
        Self { noise: AddedNoise::default(), ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    In,
    Out,
}

/// Gate pair in a slot k pulses after the herald.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotSelection {
    pub order: u64,
    pub gate: GateKind,
}

impl SlotSelection {
    pub fn new(order: u64, gate: GateKind) -> Self {
        Self { order, gate }
    }

    /// Nominal herald-to-gate delay.
    pub fn delay_ps(&self, gates: &GateSpec) -> f64 {
        let base = self.order as f64 * gates.slot_period_ps;
        match self.gate {
            GateKind::In => base,
            GateKind::Out => base + gates.read_out_offset_ps,
        }
    }
}

/// Time gates within one laser slot plus the histogram binning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateSpec {
    pub slot_period_ps: f64,
    /// Read-in gate centre measured from the slot start; source photons arrive here.
    pub read_in_center_ps: f64,
    pub read_in_width_ps: f64,
    pub read_out_offset_ps: f64,
    pub read_out_width_ps: f64,
    pub coincidence_window_ps: f64,
    pub arrival_bin_ps: f64,
    pub coincidence_bin_ps: f64,
}

impl Default for GateSpec {
    fn default() -> Self {
        Self {
            slot_period_ps: 12500.0,
            read_in_center_ps: 2000.0,
            read_in_width_ps: 2500.0,
            read_out_offset_ps: 3500.0,
            read_out_width_ps: 2500.0,
            coincidence_window_ps: 3500.0,
            arrival_bin_ps: 200.0,
            coincidence_bin_ps: 100.0,
        }
    }
}

impl GateSpec {
    pub fn validate(&self, trigger_period_ps: f64) -> Result<()> {
        for (n, v) in [
            ("slot_period_ps", self.slot_period_ps),
            ("read_in_width_ps", self.read_in_width_ps),
            ("read_out_width_ps", self.read_out_width_ps),
            ("coincidence_window_ps", self.coincidence_window_ps),
            ("arrival_bin_ps", self.arrival_bin_ps),
            ("coincidence_bin_ps", self.coincidence_bin_ps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PhotonError::Config(format!("{n} must be positive")));
            }
        }
        check_nonneg("read_out_offset_ps", self.read_out_offset_ps)?;
        let slots = trigger_period_ps / self.slot_period_ps;
        if (slots - slots.round()).abs() > 1e-9 * slots || slots < 1.0 {
            return Err(PhotonError::Config(format!(
                "slot period {} ps does not divide the trigger period {} ps",
                self.slot_period_ps, trigger_period_ps
            )));
        }
        let (a0, a1) = self.window(GateKind::In);
        let (b0, b1) = self.window(GateKind::Out);
        if a0 < 0.0 || b1 > self.slot_period_ps || a1 > self.slot_period_ps || b0 < 0.0 {
            return Err(PhotonError::Config("gates must lie inside one laser slot".into()));
        }
        if a1 > b0 && b1 > a0 {
            return Err(PhotonError::Config("read-in and read-out gates overlap".into()));
        }
        Ok(())
    }

    /// [start, end) of a gate within the slot.
    pub fn window(&self, kind: GateKind) -> (f64, f64) {
        match kind {
            GateKind::In => {
                let h = 0.5 * self.read_in_width_ps;
                (self.read_in_center_ps - h, self.read_in_center_ps + h)
            }
            GateKind::Out => {
                let c = self.read_in_center_ps + self.read_out_offset_ps;
                let h = 0.5 * self.read_out_width_ps;
                (c - h, c + h)
            }
        }
    }

    pub fn width(&self, kind: GateKind) -> f64 {
        match kind {
            GateKind::In => self.read_in_width_ps,
            GateKind::Out => self.read_out_width_ps,
        }
    }

    /// Gate containing a phase within the slot.
    pub fn classify(&self, phase_ps: f64) -> Option<GateKind> {
        [GateKind::In, GateKind::Out].into_iter().find(|&k| {
            let (a, b) = self.window(k);
            phase_ps >= a && phase_ps < b
        })
    }

    /// Slot offset and gate where a photon delayed by `delay_ps` from the
    /// source time lands. Errors if jitter could carry it across a gate edge,
    /// since gated counts would then depend on the jitter draw.
    pub(crate) fn landing(&self, delay_ps: f64, cutoff_ps: f64) -> Result<Option<(u64, GateKind)>> {
        let t = self.read_in_center_ps + delay_ps;
        let offset = (t / self.slot_period_ps).floor();
        let phase = t - offset * self.slot_period_ps;
        for kind in [GateKind::In, GateKind::Out] {
            let (a, b) = self.window(kind);
            let inside = phase - a >= cutoff_ps && b - phase > cutoff_ps;
            let outside = phase + cutoff_ps < a || phase - cutoff_ps >= b;
            if inside {
                return Ok(Some((offset as u64, kind)));
            }
            if !outside {
                return Err(PhotonError::Config(format!(
                    "arrivals delayed by {delay_ps} ps come within the jitter cutoff of a gate edge"
                )));
            }
        }
        // wrap-around: phase near the slot end may jitter into the next slot's gate
        if phase + cutoff_ps >= self.slot_period_ps && self.window(GateKind::In).0 < phase + cutoff_ps - self.slot_period_ps {
            return Err(PhotonError::Config(format!(
                "arrivals delayed by {delay_ps} ps can jitter into the next slot's gate"
            )));
        }
        Ok(None)
    }
}

/// One way a pair's signal photon can reach the detectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Route {
    pub delay_ps: f64,
    /// Probability per generated signal photon, source to memory output.
    pub prob: f64,
}

/// Signal routes for a shutter setting. SIG passes the detuned cell without
/// loss; RI stores but never reads out on purpose, so only the leak is seen.
pub(crate) fn signal_routes(source: &PairSourceModel, memory: &MemoryChannelModel, config: Configuration) -> Vec<Route> {
    let eta = source.eta_signal;
    let leak = Route { delay_ps: 0.0, prob: eta * (1.0 - memory.eta_in) };
    match config {
        Configuration::Sig => vec![Route { delay_ps: 0.0, prob: eta }],
        Configuration::Ri => vec![leak],
        Configuration::Ctrl => vec![],
        Configuration::Mem => std::iter::once(leak)
            .chain(memory.readouts.iter().map(|r| Route { delay_ps: r.delay_ps, prob: eta * r.efficiency }))
            .collect(),
    }
}

/// Added noise reaches the read-out gate only while the read-out control runs.
pub(crate) fn active_noise(memory: &MemoryChannelModel, config: Configuration) -> Option<AddedNoise> {
    (config.read_out_on() && memory.noise.photons_per_pulse > 0.0).then_some(memory.noise)
}
