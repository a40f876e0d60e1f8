//! Exact gate-level click probabilities for the generator's model.
//!
//! Gate pair: herald = read-in gate of slot j, signal = selected gate of slot
//! j + k. Photons of pulse j reaching the signal gate are correlated with the
//! herald. Photons of other pulses, added noise and dark counts are
//! independent of it. For any set D of detectors the probability that none
//! fires factorizes over these independent sources:
//!
//!   P₀(D) = Σₙ P(n) (1 − a[i∈D])ⁿ (1 − Σ_{s∈D} y_s)ⁿ · Π_pulses Σₙ P(n)(1 − Σ_{s∈D} b_s)ⁿ · noise · darks
//!
//! and every click probability follows by inclusion–exclusion.
//!
//! Threshold detectors make the click-based g2h depend weakly on loss. The
//! photon-number moments returned by [`exact_moments`] are the linear-detection
//! limit, in which normalized correlations are exactly loss invariant.

use serde::Serialize;

use crate::model::{
    active_noise, signal_routes, AddedNoise, Configuration, Detector, GateKind, GateSpec, MemoryChannelModel,
    PairSourceModel, SlotSelection,
};
use crate::{PhotonError, Result};

/// Enumeration is limited to this many pairs per pulse.
pub const MAX_ENUMERATED_PAIRS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleProbabilities {
    pub p_i: f64,
    pub p_s1: f64,
    pub p_s2: f64,
    pub p_s1i: f64,
    pub p_s2i: f64,
    pub p_trip: f64,
    /// Pair-number probability mass dropped by the truncation.
    pub truncation_error: f64,
}

impl OracleProbabilities {
    pub fn g11(&self) -> Result<f64> {
        let den = (self.p_s1 + self.p_s2) * self.p_i;
        if den > 0.0 {
            Ok((self.p_s1i + self.p_s2i) / den)
        } else {
            Err(PhotonError::Undefined("oracle g11 has zero singles probability".into()))
        }
    }

    pub fn g2h(&self) -> Result<f64> {
        let den = self.p_s1i * self.p_s2i;
        if den > 0.0 {
            Ok(self.p_trip * self.p_i / den)
        } else {
            Err(PhotonError::Undefined("oracle g2h has zero heralded probability".into()))
        }
    }
}

/// Mean click numbers for number-resolving, linear detectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleMoments {
    pub m_i: f64,
    pub m_s1: f64,
    pub m_s2: f64,
    pub m_s1i: f64,
    pub m_s2i: f64,
    pub m_trip: f64,
}

impl OracleMoments {
    pub fn g11(&self) -> f64 {
        (self.m_s1i + self.m_s2i) / ((self.m_s1 + self.m_s2) * self.m_i)
    }

    pub fn g2h(&self) -> f64 {
        self.m_trip * self.m_i / (self.m_s1i * self.m_s2i)
    }
}

/// Per-photon detection probabilities feeding one gate pair.
struct GateModel {
    pairs: Vec<f64>,
    idler: f64,
    /// Correlated pulse: per-photon click probability on s1, s2.
    y: [f64; 2],
    /// Other pulses, one entry per slot offset.
    background: Vec<[f64; 2]>,
    noise: Option<(AddedNoise, [f64; 2])>,
    /// Mean dark counts per gate for i, s1, s2.
    dark: [f64; 3],
}

fn build(
    source: &PairSourceModel,
    memory: &MemoryChannelModel,
    gates: &GateSpec,
    config: Configuration,
    sel: SlotSelection,
) -> Result<GateModel> {
    source.validate()?;
    memory.validate()?;
    gates.validate(source.trigger_period_ps())?;
    if source.n_max > MAX_ENUMERATED_PAIRS {
        return Err(PhotonError::Config(format!(
            "n_max = {} exceeds the enumeration limit {MAX_ENUMERATED_PAIRS}",
            source.n_max
        )));
    }
    let split = source.post_memory_split();
    let cutoff = source.jitter_cutoff_ps();
    let mut y = [0.0; 2];
    let mut background: Vec<(u64, [f64; 2])> = Vec::new();
    for r in signal_routes(source, memory, config) {
        let Some((offset, gate)) = gates.landing(r.delay_ps, cutoff)? else { continue };
        if gate != sel.gate {
            continue;
        }
        let add = [r.prob * split[0], r.prob * split[1]];
        let slot = if offset == sel.order {
            &mut y
        } else {
            match background.iter_mut().find(|(o, _)| *o == offset) {
                Some((_, b)) => b,
                None => {
                    background.push((offset, [0.0; 2]));
                    &mut background.last_mut().unwrap().1
                }
            }
        };
        slot[0] += add[0];
        slot[1] += add[1];
    }
    let noise = active_noise(memory, config).filter(|_| sel.gate == GateKind::Out).map(|n| (n, split));
    let width = |g: GateKind| gates.width(g) * 1e-12;
    let dark = [
        source.dark_rate_hz[0] * width(GateKind::In),
        source.dark_rate_hz[1] * width(sel.gate),
        source.dark_rate_hz[2] * width(sel.gate),
    ];
    Ok(GateModel {
        pairs: source.pair_distribution(),
        idler: source.idler_detection(),
        y,
        background: background.into_iter().map(|(_, b)| b).collect(),
        noise,
        dark,
    })
}

impl GateModel {
    /// ln Σₙ P(n)(1 − x)ⁿ, accurate when x is tiny.
    fn ln_sum_pn(&self, x: f64) -> f64 {
        let lm = (-x).ln_1p();
        let fire: f64 = self.pairs.iter().enumerate().skip(1).map(|(n, p)| -p * (n as f64 * lm).exp_m1()).sum();
        (-fire).ln_1p()
    }

    /// ln P(no detector in `mask` fires) (bits: i, s1, s2).
    fn ln_p0(&self, mask: [bool; 3]) -> f64 {
        let on = |d: Detector| mask[d.index()];
        let s = |v: [f64; 2]| f64::from(on(Detector::S1)) * v[0] + f64::from(on(Detector::S2)) * v[1];
        let a = if on(Detector::I) { self.idler } else { 0.0 };
        let sy = s(self.y);
        let mut l = self.ln_sum_pn(a + sy - a * sy);
        for &b in &self.background {
            l += self.ln_sum_pn(s(b));
        }
        if let Some((n, x)) = self.noise {
            l += n.ln_no_click(s(x));
        }
        for d in Detector::ALL {
            if on(d) {
                l -= self.dark[d.index()];
            }
        }
        l
    }

    /// P(some detector in `mask` fires). Kept in complement form so the
    /// inclusion–exclusion sums do not cancel against unity.
    fn q(&self, mask: [bool; 3]) -> f64 {
        -self.ln_p0(mask).exp_m1()
    }

    fn factorial_moments(&self) -> (f64, f64, f64, f64) {
        let (mut e1, mut e2, mut ef2, mut e3) = (0.0, 0.0, 0.0, 0.0);
        for (n, p) in self.pairs.iter().enumerate() {
            let n = n as f64;
            e1 += p * n;
            e2 += p * n * n;
            ef2 += p * n * (n - 1.0);
            e3 += p * n * n * (n - 1.0);
        }
        (e1, e2, ef2, e3)
    }
}

pub fn exact_click_probabilities(
    source: &PairSourceModel,
    memory: &MemoryChannelModel,
    gates: &GateSpec,
    config: Configuration,
    sel: SlotSelection,
) -> Result<OracleProbabilities> {
    let m = build(source, memory, gates, config, sel)?;
    let q = |i: bool, s1: bool, s2: bool| m.q([i, s1, s2]);
    let (qi, q1, q2) = (q(true, false, false), q(false, true, false), q(false, false, true));
    let (qi1, qi2, q12, qi12) = (q(true, true, false), q(true, false, true), q(false, true, true), q(true, true, true));
    Ok(OracleProbabilities {
        p_i: qi,
        p_s1: q1,
        p_s2: q2,
        p_s1i: qi + q1 - qi1,
        p_s2i: qi + q2 - qi2,
        p_trip: qi12 - qi1 - qi2 - q12 + qi + q1 + q2,
        truncation_error: source.truncation_error(),
    })
}

/// Exact photon-number moments for the same gate pair.
pub fn exact_moments(
    source: &PairSourceModel,
    memory: &MemoryChannelModel,
    gates: &GateSpec,
    config: Configuration,
    sel: SlotSelection,
) -> Result<OracleMoments> {
    let m = build(source, memory, gates, config, sel)?;
    let (e1, e2, ef2, e3) = m.factorial_moments();
    let a = m.idler;
    let [y1, y2] = m.y;

    // independent contributions to the signal gate: mean on s1, s2 and
    // the excess of E[b1 b2] over E[b1]E[b2]
    let mut b = [0.0; 2];
    let mut cov = 0.0;
    for &[x1, x2] in &m.background {
        b[0] += x1 * e1;
        b[1] += x2 * e1;
        cov += x1 * x2 * (ef2 - e1 * e1);
    }
    if let Some((n, [x1, x2])) = m.noise {
        let (mean, f2) = n.moments();
        b[0] += x1 * mean;
        b[1] += x2 * mean;
        cov += x1 * x2 * (f2 - mean * mean);
    }
    b[0] += m.dark[1];
    b[1] += m.dark[2];
    let bb = b[0] * b[1] + cov;

    let ni = a * e1;
    let (c1, c2, c12) = (y1 * e1, y2 * e1, y1 * y2 * ef2);
    let (ic1, ic2, ic12) = (a * y1 * e2, a * y2 * e2, a * y1 * y2 * e3);
    let di = m.dark[0];
    let s12 = c12 + c1 * b[1] + c2 * b[0] + bb;
    Ok(OracleMoments {
        m_i: ni + di,
        m_s1: c1 + b[0],
        m_s2: c2 + b[1],
        m_s1i: ic1 + ni * b[0] + di * (c1 + b[0]),
        m_s2i: ic2 + ni * b[1] + di * (c2 + b[1]),
        m_trip: ic12 + ic1 * b[1] + ic2 * b[0] + ni * bb + di * s12,
    })
}
