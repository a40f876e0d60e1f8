use mbsolver::MemoryError;
use photonstats::PhotonError;

/// Failure classes, mapped onto process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum OrcaError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl OrcaError {
    pub fn exit_code(&self) -> i32 {
        match self {
            OrcaError::Config(_) | OrcaError::Io(_) => 2,
            OrcaError::Numerical(_) => 3,
        }
    }
}

impl From<MemoryError> for OrcaError {
    fn from(e: MemoryError) -> Self {
        match e {
            MemoryError::Config(_) | MemoryError::Domain(_) => OrcaError::Config(e.to_string()),
            MemoryError::Atom(atomphys::AtomError::InvalidSpecies(_) | atomphys::AtomError::Domain(_)) => OrcaError::Config(e.to_string()),
            _ => OrcaError::Numerical(e.to_string()),
        }
    }
}

impl From<PhotonError> for OrcaError {
    fn from(e: PhotonError) -> Self {
        match e {
            PhotonError::Undefined(_) => OrcaError::Numerical(e.to_string()),
            PhotonError::Io(io) => OrcaError::Io(io),
            _ => OrcaError::Config(e.to_string()),
        }
    }
}

impl From<atomphys::AtomError> for OrcaError {
    fn from(e: atomphys::AtomError) -> Self {
        match e {
            atomphys::AtomError::FitNonConvergence { .. } => OrcaError::Numerical(e.to_string()),
            _ => OrcaError::Config(e.to_string()),
        }
    }
}

impl From<analytic::AnalyticError> for OrcaError {
    fn from(e: analytic::AnalyticError) -> Self {
        match e {
            analytic::AnalyticError::Domain(_) => OrcaError::Config(e.to_string()),
            _ => OrcaError::Numerical(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, OrcaError>;
