//! Time-tagged click records and their text file format.
//!
//! ```text
//! #trigger_period_ps 1000000
//! #total_triggers 25000
//! #config MEM
//! i 17 14001
//! s1 17 17493
//! ```
//!
//! Lines starting with `##` are free-form comments.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::model::{Configuration, Detector};
use crate::{PhotonError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Record {
    pub trigger: u64,
    /// Integer picoseconds from the trigger, like a TDC tag.
    pub time_ps: u64,
    pub detector: Detector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    /// Sorted by (trigger, time, detector).
    pub records: Vec<Record>,
    pub trigger_period_ps: u64,
    pub total_triggers: u64,
    pub config: Configuration,
}

impl EventStream {
    /// Sorts the records and checks the frame invariants.
    pub fn new(mut records: Vec<Record>, trigger_period_ps: u64, total_triggers: u64, config: Configuration) -> Result<Self> {
        if trigger_period_ps == 0 || total_triggers == 0 {
            return Err(PhotonError::Config("trigger period and trigger count must be positive".into()));
        }
        if let Some(r) = records.iter().find(|r| r.time_ps >= trigger_period_ps || r.trigger >= total_triggers) {
            return Err(PhotonError::Config(format!("record {r:?} lies outside the acquisition")));
        }
        records.sort_unstable();
        Ok(Self { records, trigger_period_ps, total_triggers, config })
    }

    pub fn duration_s(&self) -> f64 {
        self.total_triggers as f64 * self.trigger_period_ps as f64 * 1e-12
    }

    /// Time since the first trigger.
    pub fn absolute_ps(&self, r: &Record) -> u64 {
        r.trigger * self.trigger_period_ps + r.time_ps
    }

    pub fn count(&self, detector: Detector) -> usize {
        self.records.iter().filter(|r| r.detector == detector).count()
    }

    /// Absolute times of one detector, ascending.
    pub fn times(&self, detector: Detector) -> Vec<u64> {
        self.records.iter().filter(|r| r.detector == detector).map(|r| self.absolute_ps(r)).collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#trigger_period_ps {}", self.trigger_period_ps)?;
        writeln!(w, "#total_triggers {}", self.total_triggers)?;
        writeln!(w, "#config {}", self.config)?;
        for r in &self.records {
            writeln!(w, "{} {} {}", r.detector.label(), r.trigger, r.time_ps)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let (mut period, mut total, mut config) = (None, None, None);
        let mut records = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            let bad = |msg: String| PhotonError::Parse { line: n + 1, msg };
            if line.is_empty() || line.starts_with("##") {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let (k, v) = h.split_once(' ').ok_or_else(|| bad(format!("header '{line}' has no value")))?;
                let v = v.trim();
                match k {
                    "trigger_period_ps" => period = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                    "total_triggers" => total = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
                    "config" => config = Some(v.parse::<Configuration>().map_err(|e| bad(e.to_string()))?),
                    _ => return Err(bad(format!("unknown header '{k}'"))),
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", f.len())));
            }
            records.push(Record {
                detector: f[0].parse().map_err(|e: PhotonError| bad(e.to_string()))?,
                trigger: f[1].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                time_ps: f[2].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            });
        }
        let missing = |h: &str| PhotonError::Parse { line: 0, msg: format!("missing header #{h}") };
        Self::new(
            records,
            period.ok_or_else(|| missing("trigger_period_ps"))?,
            total.ok_or_else(|| missing("total_triggers"))?,
            config.ok_or_else(|| missing("config"))?,
        )
    }
}
