//! Arrival-time and start-stop histograms.

use std::fmt::Write as _;

use serde::Serialize;

use crate::model::Detector;
use crate::stream::EventStream;
use crate::{PhotonError, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    /// Left edge of bin 0.
    pub start_ps: i64,
    pub bin_ps: u64,
    pub counts: Vec<u64>,
    /// Acquisition time used for rate normalization.
    pub duration_s: f64,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_start(&self, k: usize) -> i64 {
        self.start_ps + (k as u64 * self.bin_ps) as i64
    }

    /// Counts per second of acquisition in each bin.
    pub fn rates_hz(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.duration_s).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_start_ps,counts,rate_hz\n");
        for (k, (&c, r)) in self.counts.iter().zip(self.rates_hz()).enumerate() {
            let _ = writeln!(s, "{},{},{:e}", self.bin_start(k), c, r);
        }
        s
    }
}

/// Histogram of one detector's times within the trigger frame.
pub fn arrival_histogram(stream: &EventStream, detector: Detector, bin_ps: u64) -> Result<Histogram> {
    if bin_ps == 0 || stream.trigger_period_ps % bin_ps != 0 {
        return Err(PhotonError::Config(format!(
            "bin width {bin_ps} ps does not divide the trigger period {} ps",
            stream.trigger_period_ps
        )));
    }
    let mut counts = vec![0u64; (stream.trigger_period_ps / bin_ps) as usize];
    for r in stream.records.iter().filter(|r| r.detector == detector) {
        counts[(r.time_ps / bin_ps) as usize] += 1;
    }
    Ok(Histogram { start_ps: 0, bin_ps, counts, duration_s: stream.duration_s() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StopChannel {
    S1,
    S2,
    /// s1 and s2 both firing within the coincidence window; the stop time is
    /// the mean of the two clicks.
    S1S2,
}

fn coincident_stops(s1: &[u64], s2: &[u64], window_ps: u64) -> Vec<u64> {
    let half = window_ps / 2;
    let mut out = Vec::new();
    let mut lo = 0;
    for &a in s1 {
        while lo < s2.len() && s2[lo] + half < a {
            lo += 1;
        }
        let mut j = lo;
        while j < s2.len() && s2[j] <= a + half {
            out.push((a + s2[j]) / 2);
            j += 1;
        }
    }
    out.sort_unstable();
    out
}

/// Idler-started histogram of stop − start over [range.0, range.1).
pub fn startstop_histogram(
    stream: &EventStream,
    stop: StopChannel,
    bin_ps: u64,
    range_ps: (i64, i64),
    coincidence_window_ps: u64,
) -> Result<Histogram> {
    let (lo, hi) = range_ps;
    if bin_ps == 0 || hi <= lo || (hi - lo) as u64 % bin_ps != 0 {
        return Err(PhotonError::Config(format!("bin width {bin_ps} ps does not divide the range [{lo}, {hi}) ps")));
    }
    let starts = stream.times(Detector::I);
    let stops = match stop {
        StopChannel::S1 => stream.times(Detector::S1),
        StopChannel::S2 => stream.times(Detector::S2),
        StopChannel::S1S2 => {
            coincident_stops(&stream.times(Detector::S1), &stream.times(Detector::S2), coincidence_window_ps)
        }
    };
    let mut counts = vec![0u64; ((hi - lo) as u64 / bin_ps) as usize];
    for &t in &starts {
        let t = t as i64;
        let first = stops.partition_point(|&s| (s as i64) < t + lo);
        for &s in stops[first..].iter().take_while(|&&s| (s as i64) < t + hi) {
            counts[((s as i64 - t - lo) as u64 / bin_ps) as usize] += 1;
        }
    }
    Ok(Histogram { start_ps: lo, bin_ps, counts, duration_s: stream.duration_s() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Configuration;
    use crate::stream::Record;

    fn stream(recs: Vec<Record>) -> EventStream {
        EventStream::new(recs, 1_000_000, 10, Configuration::Sig).unwrap()
    }

    #[test]
    fn single_record_single_bin() {
        let s = stream(vec![Record { trigger: 2, time_ps: 4321, detector: Detector::S1 }]);
        let h = arrival_histogram(&s, Detector::S1, 200).unwrap();
        assert_eq!(h.total(), 1);
        assert_eq!(h.counts[21], 1);
        assert!((h.rates_hz()[21] - 1.0 / 1e-5).abs() < 1e-6);
        assert!(arrival_histogram(&s, Detector::S1, 300).is_err());
    }

    #[test]
    fn perfect_pairs_peak_at_zero() {
        let mut recs = Vec::new();
        for k in 0..5 {
            for d in Detector::ALL {
                recs.push(Record { trigger: k, time_ps: 2000, detector: d });
            }
        }
        let s = stream(recs);
        for stop in [StopChannel::S1, StopChannel::S2, StopChannel::S1S2] {
            let h = startstop_histogram(&s, stop, 100, (-5000, 5000), 3500).unwrap();
            assert_eq!(h.total(), 5);
            assert_eq!(h.counts[50], 5);
        }
    }

    #[test]
    fn s1s2_needs_both_within_window() {
        let s = stream(vec![
            Record { trigger: 0, time_ps: 1000, detector: Detector::I },
            Record { trigger: 0, time_ps: 5000, detector: Detector::S1 },
            Record { trigger: 0, time_ps: 9000, detector: Detector::S2 },
        ]);
        let h = startstop_histogram(&s, StopChannel::S1S2, 100, (-5000, 45000), 3500).unwrap();
        assert_eq!(h.total(), 0);
    }
}
