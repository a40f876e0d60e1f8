use serde::{Deserialize, Serialize};

use crate::AnalyticError;

/// Relative direction of signal and control beams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    #[default]
    CounterPropagating,
    CoPropagating,
}

impl std::str::FromStr for Geometry {
    type Err = AnalyticError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "counter" | "counter-propagating" => Ok(Geometry::CounterPropagating),
            "co" | "co-propagating" => Ok(Geometry::CoPropagating),
            other => Err(AnalyticError::Domain(format!("unknown geometry '{other}'"))),
        }
    }
}

/// Spherical components (−1, 0, +1) of the signal and control polarizations
/// in the frame whose quantization axis is the beam axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polarization {
    pub signal: i32,
    pub control: i32,
}

impl Default for Polarization {
    fn default() -> Self {
        Polarization { signal: 0, control: 0 }
    }
}

impl Polarization {
    pub fn new(signal: i32, control: i32) -> Result<Self, AnalyticError> {
        if signal.abs() > 1 || control.abs() > 1 {
            return Err(AnalyticError::Domain(format!("spherical components must be -1, 0 or 1, got ({signal}, {control})")));
        }
        Ok(Polarization { signal, control })
    }

    /// Mirror symmetry m → −m leaves every observable unchanged.
    pub fn is_mirror_symmetric(&self) -> bool {
        self.signal == 0 && self.control == 0
    }
}

impl std::str::FromStr for Polarization {
    type Err = AnalyticError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let q = |t: &str| match t {
            "pi" => Ok(0),
            "sigma+" => Ok(1),
            "sigma-" => Ok(-1),
            other => Err(AnalyticError::Domain(format!("unknown polarization component '{other}'"))),
        };
        let (a, b) = s
            .split_once(['/', ','])
            .ok_or_else(|| AnalyticError::Domain(format!("polarization must be 'signal/control', got '{s}'")))?;
        Polarization::new(q(a.trim())?, q(b.trim())?)
    }
}
