//! Monte Carlo click generator.
//!
//! Most pulses carry no pair, so the generator jumps between non-empty pulses
//! with geometric skips and only then draws the photon number from the
//! conditional law. Work is split into blocks of triggers; every block owns
//! a ChaCha stream keyed by (seed, configuration, block) so the output does
//! not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::model::{
    active_noise, signal_routes, AddedNoise, Configuration, Detector, GateSpec, MemoryChannelModel, NoiseKind,
    PairSourceModel, Route,
};
use crate::stream::{EventStream, Record};
use crate::{PhotonError, Result};

const BLOCK_TRIGGERS: u64 = 2000;

/// One stream per shutter setting.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamSet {
    pub sig: EventStream,
    pub mem: EventStream,
    pub ri: EventStream,
    pub ctrl: EventStream,
}

impl StreamSet {
    pub fn get(&self, c: Configuration) -> &EventStream {
        match c {
            Configuration::Sig => &self.sig,
            Configuration::Mem => &self.mem,
            Configuration::Ri => &self.ri,
            Configuration::Ctrl => &self.ctrl,
        }
    }
}

pub fn simulate_event_streams(
    source: &PairSourceModel,
    memory: &MemoryChannelModel,
    gates: &GateSpec,
    duration_s: f64,
    seed: u64,
) -> Result<StreamSet> {
    let run = |c| simulate_configuration(source, memory, gates, c, duration_s, seed);
    Ok(StreamSet {
        sig: run(Configuration::Sig)?,
        mem: run(Configuration::Mem)?,
        ri: run(Configuration::Ri)?,
        ctrl: run(Configuration::Ctrl)?,
    })
}

/// Cumulative draw tables shared by all blocks.
struct Plan {
    pulses_per_trigger: u64,
    pulse_period: f64,
    trigger_period: u64,
    total_triggers: u64,
    /// P(n ≥ 1) and the CDF of n conditioned on n ≥ 1.
    pair_nonzero: f64,
    pair_cdf: Vec<f64>,
    idler_click: f64,
    routes: Vec<Route>,
    split: [f64; 2],
    noise: Option<AddedNoise>,
    dark_rate: [f64; 3],
    source_time: f64,
    noise_time: f64,
    jitter: f64,
    cutoff: f64,
}

pub fn simulate_configuration(
    source: &PairSourceModel,
    memory: &MemoryChannelModel,
    gates: &GateSpec,
    config: Configuration,
    duration_s: f64,
    seed: u64,
) -> Result<EventStream> {
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(PhotonError::Config(format!("duration {duration_s} s must be positive")));
    }
    source.validate()?;
    memory.validate()?;
    gates.validate(source.trigger_period_ps())?;
    if (gates.slot_period_ps - source.pulse_period_ps()).abs() > 1e-9 * gates.slot_period_ps {
        return Err(PhotonError::Config(format!(
            "gate slot period {} ps differs from the pulse period {} ps",
            gates.slot_period_ps,
            source.pulse_period_ps()
        )));
    }
    let total_triggers = (duration_s * source.trigger_rate_hz).round().max(1.0) as u64;
    let p = source.pair_distribution();
    let pair_nonzero = 1.0 - p[0];
    let mut acc = 0.0;
    let pair_cdf: Vec<f64> = p[1..]
        .iter()
        .map(|x| {
            acc += x / pair_nonzero.max(f64::MIN_POSITIVE);
            acc
        })
        .collect();
    let plan = Plan {
        pulses_per_trigger: source.pulses_per_trigger(),
        pulse_period: source.pulse_period_ps(),
        trigger_period: source.trigger_period_ps().round() as u64,
        total_triggers,
        pair_nonzero,
        pair_cdf,
        idler_click: source.idler_detection(),
        routes: signal_routes(source, memory, config),
        split: source.post_memory_split(),
        noise: active_noise(memory, config),
        dark_rate: source.dark_rate_hz,
        source_time: gates.read_in_center_ps,
        noise_time: gates.read_in_center_ps + gates.read_out_offset_ps,
        jitter: source.jitter_sigma_ps,
        cutoff: source.jitter_cutoff_ps(),
    };
    let blocks = total_triggers.div_ceil(BLOCK_TRIGGERS);
    let parts: Vec<Vec<Record>> =
        (0..blocks).into_par_iter().map(|b| plan.block(b, seed, config)).collect();
    let records: Vec<Record> = parts.into_iter().flatten().collect();
    EventStream::new(records, plan.trigger_period, total_triggers, config)
}

impl Plan {
    fn block(&self, block: u64, seed: u64, config: Configuration) -> Vec<Record> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((config.index() << 48) | block);
        let t0 = block * BLOCK_TRIGGERS;
        let t1 = (t0 + BLOCK_TRIGGERS).min(self.total_triggers);
        let first = t0 * self.pulses_per_trigger;
        let count = (t1 - t0) * self.pulses_per_trigger;
        let mut out: Vec<(f64, Detector)> = Vec::new();

        if self.pair_nonzero > 0.0 {
            let skip = Geometric::new(self.pair_nonzero).expect("probability in (0,1)");
            let mut k = skip.sample(&mut rng);
            while k < count {
                self.pair_pulse(first + k, &mut rng, &mut out);
                k = k.saturating_add(1 + skip.sample(&mut rng));
            }
        }
        if let Some(noise) = self.noise {
            self.noise_slots(noise, first, count, &mut rng, &mut out);
        }
        let span_ps = (t1 - t0) * self.trigger_period;
        for d in Detector::ALL {
            let lambda = self.dark_rate[d.index()] * span_ps as f64 * 1e-12;
            if lambda > 0.0 {
                let n: f64 = Poisson::new(lambda).expect("positive mean").sample(&mut rng);
                for _ in 0..n as u64 {
                    let t = t0 * self.trigger_period + rng.random_range(0..span_ps);
                    out.push((t as f64, d));
                }
            }
        }

        let end = self.total_triggers * self.trigger_period;
        out.into_iter()
            .filter_map(|(t, detector)| {
                let t = t.round().max(0.0) as u64;
                (t < end).then(|| Record { trigger: t / self.trigger_period, time_ps: t % self.trigger_period, detector })
            })
            .collect()
    }

    fn jitter<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.jitter == 0.0 {
            return 0.0;
        }
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let dt = z * self.jitter;
            if dt.abs() <= self.cutoff {
                return dt;
            }
        }
    }

    /// Routes one photon leaving the memory onto s1, s2 or nowhere.
    fn split<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        let v: f64 = rng.random();
        if v < self.split[0] {
            Some(0)
        } else if v < self.split[0] + self.split[1] {
            Some(1)
        } else {
            None
        }
    }

    fn pair_pulse<R: Rng>(&self, pulse: u64, rng: &mut R, out: &mut Vec<(f64, Detector)>) {
        let u: f64 = rng.random();
        let n = 1 + self.pair_cdf.iter().position(|&c| u < c).unwrap_or(self.pair_cdf.len() - 1);
        let base = pulse as f64 * self.pulse_period + self.source_time;

        if (0..n).any(|_| rng.random::<f64>() < self.idler_click) {
            out.push((base + self.jitter(rng), Detector::I));
        }
        // threshold detectors: one click per detector per arrival time
        let mut fired = vec![[false; 2]; self.routes.len()];
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let Some(r) = self.routes.iter().position(|r| {
                acc += r.prob;
                u < acc
            }) else {
                continue;
            };
            if let Some(d) = self.split(rng) {
                fired[r][d] = true;
            }
        }
        for (route, f) in self.routes.iter().zip(fired) {
            for (d, det) in [Detector::S1, Detector::S2].into_iter().enumerate() {
                if f[d] {
                    out.push((base + route.delay_ps + self.jitter(rng), det));
                }
            }
        }
    }

    fn noise_slots<R: Rng>(&self, noise: AddedNoise, first: u64, count: u64, rng: &mut R, out: &mut Vec<(f64, Detector)>) {
        let nu = noise.photons_per_pulse;
        let nonzero = match noise.kind {
            NoiseKind::Poisson => -(-nu).exp_m1(),
            NoiseKind::Thermal => nu / (1.0 + nu),
        };
        let skip = Geometric::new(nonzero).expect("probability in (0,1)");
        let mut k = skip.sample(rng);
        while k < count {
            let m = match noise.kind {
                // memoryless: the excess over one is again geometric
                NoiseKind::Thermal => 1 + Geometric::new(1.0 / (1.0 + nu)).expect("valid").sample(rng),
                NoiseKind::Poisson => zero_truncated_poisson(nu, rng),
            };
            let mut fired = [false; 2];
            for _ in 0..m {
                if let Some(d) = self.split(rng) {
                    fired[d] = true;
                }
            }
            let base = (first + k) as f64 * self.pulse_period + self.noise_time;
            for (d, det) in [Detector::S1, Detector::S2].into_iter().enumerate() {
                if fired[d] {
                    out.push((base + self.jitter(rng), det));
                }
            }
            k = k.saturating_add(1 + skip.sample(rng));
        }
    }
}

/// Inverse-CDF draw of a Poisson variate conditioned on being ≥ 1.
fn zero_truncated_poisson<R: Rng>(nu: f64, rng: &mut R) -> u64 {
    let norm = -(-nu).exp_m1();
    let u: f64 = rng.random::<f64>() * norm;
    let mut term = nu * (-nu).exp();
    let mut acc = term;
    let mut m = 1u64;
    while u > acc && m < 1000 {
        m += 1;
        term *= nu / m as f64;
        acc += term;
    }
    m
}
