//! Heralding-efficiency bookkeeping for the source loss chain.
//!
//! Stage names: `eta_k` (Klyshko efficiency), `eta_det` (signal detector),
//! `eta_s_add` (transmission after the filter stage) and `eta_s_total`
//! (source to detectors). Other named stages are echoed and multiplied into
//! `chain_product`.

use serde::Serialize;

use crate::{PhotonError, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeraldingBudget {
    pub stages: Vec<(String, f64)>,
    pub chain_product: f64,
    pub eta_k: Option<f64>,
    /// η_k/η_det/η_s,add: heralding efficiency in front of the memory.
    pub eta_herald: Option<f64>,
    /// η_k/η_det/η_s,total: heralding efficiency right after the waveguide.
    pub eta_s_waveguide: Option<f64>,
}

pub fn heralding_budget(chain: &[(String, f64)]) -> Result<HeraldingBudget> {
    for (name, v) in chain {
        if !(*v > 0.0 && *v <= 1.0) {
            return Err(PhotonError::Config(format!("stage {name} = {v} is outside (0, 1]")));
        }
    }
    let get = |n: &str| chain.iter().find(|(k, _)| k == n).map(|(_, v)| *v);
    let eta_k = get("eta_k");
    let det = get("eta_det");
    let quotient = |stage: Option<f64>| match (eta_k, det, stage) {
        (Some(k), Some(d), Some(s)) => Some(k / d / s),
        _ => None,
    };
    Ok(HeraldingBudget {
        stages: chain.to_vec(),
        chain_product: chain.iter().map(|(_, v)| v).product(),
        eta_k,
        eta_herald: quotient(get("eta_s_add")),
        eta_s_waveguide: quotient(get("eta_s_total")),
    })
}
