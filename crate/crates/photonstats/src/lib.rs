//! Photon-counting side of the memory experiment.
//!
//! A phenomenological pair source and memory channel drive a Monte Carlo
//! generator of time-tagged detector clicks for the four shutter settings.
//! The analysis side histograms the clicks, applies time gates and forms the
//! g(1,1) and heralded g(2) estimators. Every estimator has an exact oracle
//! computed from the same model by summing over photon numbers.

pub mod budget;
pub mod estimators;
pub mod gating;
pub mod histogram;
pub mod model;
pub mod oracle;
pub mod simulate;
pub mod stream;

pub use budget::{heralding_budget, HeraldingBudget};
pub use estimators::{g11, g2h, readout_series, CorrelationResult, SeriesEntry};
pub use gating::{gated_counts, CountSummary, GatedHits};
pub use histogram::{arrival_histogram, startstop_histogram, Histogram, StopChannel};
pub use model::{
    AddedNoise, Configuration, Detector, GateKind, GateSpec, MemoryChannelModel, NoiseKind, PairSourceModel, ReadoutSlot,
    SlotSelection,
};
pub use oracle::{exact_click_probabilities, exact_moments, OracleMoments, OracleProbabilities};
pub use simulate::{simulate_configuration, simulate_event_streams, StreamSet};
pub use stream::{EventStream, Record};

#[derive(Debug, thiserror::Error)]
pub enum PhotonError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("undefined result: {0}")]
    Undefined(String),
    #[error("photon-number truncation error {error:e} exceeds {tolerance:e}; raise n_max")]
    Truncation { error: f64, tolerance: f64 },
    #[error("malformed event stream at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PhotonError>;
