//! Time gating and coincidence counting.
//!
//! A detector "clicks in a gate" when at least one of its records falls in
//! that gate window; several records in one window count once. The herald
//! gate is always the read-in gate of slot j. The signal gate of a
//! [`SlotSelection`] is the chosen gate of slot j + k.

use serde::{Deserialize, Serialize};

use crate::model::{Detector, GateKind, GateSpec, SlotSelection};
use crate::stream::EventStream;
use crate::{PhotonError, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSummary {
    pub r_i: u64,
    pub r_s1: u64,
    pub r_s2: u64,
    /// r_s1 + r_s2.
    pub r_s: u64,
    pub r_s1i: u64,
    pub r_s2i: u64,
    /// r_s1i + r_s2i.
    pub r_si: u64,
    pub r_trip: u64,
    /// Number of herald/signal gate pairs examined.
    pub r_t: u64,
}

/// Per-slot click flags for both gates, built once per stream.
#[derive(Clone, Debug)]
pub struct GatedHits {
    slots: u64,
    /// Sorted by slot; bit d set when detector d clicked.
    read_in: Vec<(u64, u8)>,
    read_out: Vec<(u64, u8)>,
}

fn bit(d: Detector) -> u8 {
    1 << d.index()
}

fn collapse(mut v: Vec<(u64, u8)>) -> Vec<(u64, u8)> {
    v.sort_unstable();
    let mut out: Vec<(u64, u8)> = Vec::with_capacity(v.len());
    for (s, b) in v {
        match out.last_mut() {
            Some(last) if last.0 == s => last.1 |= b,
            _ => out.push((s, b)),
        }
    }
    out
}

impl GatedHits {
    pub fn new(stream: &EventStream, gates: &GateSpec) -> Result<Self> {
        gates.validate(stream.trigger_period_ps as f64)?;
        let sp = gates.slot_period_ps;
        let slots = (stream.total_triggers as f64 * stream.trigger_period_ps as f64 / sp).round() as u64;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for r in &stream.records {
            let t = stream.absolute_ps(r) as f64;
            let slot = (t / sp).floor();
            match gates.classify(t - slot * sp) {
                Some(GateKind::In) => a.push((slot as u64, bit(r.detector))),
                Some(GateKind::Out) => b.push((slot as u64, bit(r.detector))),
                None => {}
            }
        }
        Ok(Self { slots, read_in: collapse(a), read_out: collapse(b) })
    }

    pub fn slots(&self) -> u64 {
        self.slots
    }

    pub fn counts(&self, sel: SlotSelection) -> Result<CountSummary> {
        let k = sel.order;
        if k >= self.slots {
            return Err(PhotonError::Config(format!("slot order {k} exceeds the {} recorded slots", self.slots)));
        }
        let pairs = self.slots - k;
        let heralds: Vec<u64> = self
            .read_in
            .iter()
            .filter(|(s, b)| *s < pairs && b & bit(Detector::I) != 0)
            .map(|(s, _)| *s)
            .collect();
        let sig = match sel.gate {
            GateKind::In => &self.read_in,
            GateKind::Out => &self.read_out,
        };
        let signal: Vec<(u64, u8)> =
            sig.iter().filter(|(s, _)| *s >= k && *s - k < pairs).map(|(s, b)| (s - k, *b)).collect();

        let mut c = CountSummary { r_i: heralds.len() as u64, r_t: pairs, ..Default::default() };
        for &(_, b) in &signal {
            c.r_s1 += u64::from(b & bit(Detector::S1) != 0);
            c.r_s2 += u64::from(b & bit(Detector::S2) != 0);
        }
        let mut it = signal.iter().peekable();
        for h in heralds {
            while it.peek().is_some_and(|(s, _)| *s < h) {
                it.next();
            }
            if let Some(&&(s, b)) = it.peek() {
                if s == h {
                    let one = b & bit(Detector::S1) != 0;
                    let two = b & bit(Detector::S2) != 0;
                    c.r_s1i += u64::from(one);
                    c.r_s2i += u64::from(two);
                    c.r_trip += u64::from(one && two);
                }
            }
        }
        c.r_s = c.r_s1 + c.r_s2;
        c.r_si = c.r_s1i + c.r_s2i;
        Ok(c)
    }
}

/// Counts for one slot selection. Builds the gate tables each call; use
/// [`GatedHits`] directly for several selections on one stream.
pub fn gated_counts(stream: &EventStream, gates: &GateSpec, sel: SlotSelection) -> Result<CountSummary> {
    GatedHits::new(stream, gates)?.counts(sel)
}
