//! Cross-correlation and heralded autocorrelation from gated counts.
//!
//! Uncertainties are first-order Poisson propagation on the raw counts,
//! treating the counts as independent. A zero numerator count is given the
//! error of a single count so that the interval is not degenerate.

use serde::{Deserialize, Serialize};

use crate::gating::{CountSummary, GatedHits};
use crate::model::{Configuration, GateKind, GateSpec, SlotSelection};
use crate::stream::EventStream;
use crate::{PhotonError, Result};

/// g(1,1) above this cannot come from classical fields.
pub const G11_CLASSICAL_BOUND: f64 = 2.0;
/// g(2)_h below this is sub-Poissonian.
pub const G2H_POISSON_BOUND: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub value: f64,
    pub sigma: f64,
    pub counts: CountSummary,
    pub threshold: f64,
    /// g11 above its threshold, or g2h below it.
    pub nonclassical: bool,
}

fn ratio(num: &[u64], den: &[u64]) -> (f64, f64) {
    let prod = |v: &[u64], floor: bool| v.iter().map(|&x| if floor { x.max(1) } else { x } as f64).product::<f64>();
    let value = prod(num, false) / prod(den, false);
    let scale = prod(num, true) / prod(den, false);
    let rel2: f64 = num.iter().chain(den).map(|&x| 1.0 / x.max(1) as f64).sum();
    (value, scale * rel2.sqrt())
}

/// g(1,1) = R_si·R_T / (R_s·R_i).
pub fn g11(counts: &CountSummary) -> Result<CorrelationResult> {
    if counts.r_s == 0 || counts.r_i == 0 {
        return Err(PhotonError::Undefined(format!(
            "g11 needs signal and idler clicks (R_s = {}, R_i = {})",
            counts.r_s, counts.r_i
        )));
    }
    let (value, sigma) = ratio(&[counts.r_si, counts.r_t], &[counts.r_s, counts.r_i]);
    Ok(CorrelationResult {
        value,
        sigma,
        counts: *counts,
        threshold: G11_CLASSICAL_BOUND,
        nonclassical: value > G11_CLASSICAL_BOUND,
    })
}

/// g(2)_h = R_trip·R_i / (R_s1i·R_s2i).
pub fn g2h(counts: &CountSummary) -> Result<CorrelationResult> {
    if counts.r_s1i == 0 || counts.r_s2i == 0 {
        return Err(PhotonError::Undefined(format!(
            "g2h needs heralded clicks on both signal detectors (R_s1i = {}, R_s2i = {})",
            counts.r_s1i, counts.r_s2i
        )));
    }
    let (value, sigma) = ratio(&[counts.r_trip, counts.r_i], &[counts.r_s1i, counts.r_s2i]);
    Ok(CorrelationResult {
        value,
        sigma,
        counts: *counts,
        threshold: G2H_POISSON_BOUND,
        nonclassical: value < G2H_POISSON_BOUND,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesEntry {
    pub delay_ns: f64,
    pub selection: SlotSelection,
    pub g11: Option<CorrelationResult>,
    /// Why `g11` is absent.
    pub note: Option<String>,
}

/// g(1,1) at herald-to-gate delays 0, 3.5, 12.5, 16, 25 and 28.5 ns.
///
/// Read-out gates only carry signal in the MEM setting; for other settings
/// those entries are left undefined.
pub fn readout_series(stream: &EventStream, gates: &GateSpec) -> Result<Vec<SeriesEntry>> {
    let hits = GatedHits::new(stream, gates)?;
    let mut out = Vec::new();
    for order in 0..3 {
        for gate in [GateKind::In, GateKind::Out] {
            let selection = SlotSelection::new(order, gate);
            let delay_ns = selection.delay_ps(gates) * 1e-3;
            let (g, note) = if gate == GateKind::Out && stream.config != Configuration::Mem {
                (None, Some(format!("no read-out in the {} setting", stream.config)))
            } else {
                match hits.counts(selection).and_then(|c| g11(&c)) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            };
            out.push(SeriesEntry { delay_ns, selection, g11: g, note });
        }
    }
    Ok(out)
}
