use thiserror::Error;

/// Errors raised anywhere in the link simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode {0} appears more than once")]
    DuplicateMode(String),
    #[error("states share mode {0}; tensor product needs disjoint mode sets")]
    OverlappingModes(String),
    #[error("no optical modes for path `{0}`")]
    UnknownPath(String),
    #[error("mode {0} is a memory mode and cannot pass through optical elements")]
    MemoryModeInOptics(String),
    #[error("truncation overflow: {detail}")]
    TruncationOverflow { detail: String },
    #[error("element `{0}` is not unitary; apply it to a mixed state")]
    NotUnitary(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("ensemble probabilities sum to {0}, expected 1")]
    EnsembleNotNormalized(f64),
    #[error("ensemble members act on different mode sets")]
    EnsembleModeMismatch,
    #[error("detector `{label}`: {reason}")]
    InvalidDetector { label: String, reason: String },
    #[error("no probability mass survives post-selection")]
    NoPostSelectedMass,
    #[error("outcome has zero probability")]
    ZeroProbabilityOutcome,
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("parameter `{name}` out of range: {reason}")]
    OutOfRange { name: &'static str, reason: String },
    #[error("tomography input: {0}")]
    Tomography(String),
    #[error("memory slot {0} is already occupied")]
    SlotOccupied(usize),
    #[error("memory slot {0} is empty")]
    SlotEmpty(usize),
    #[error("memory slot {slot} out of range (register holds {capacity})")]
    SlotOutOfRange { slot: usize, capacity: usize },
    #[error("zero singles probability; g2 undefined")]
    ZeroSingles,
    #[error("fit did not converge: {0}")]
    FitFailed(String),
    #[error("scenario `{path}`: {reason}")]
    Scenario { path: String, reason: String },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_unit_interval<T: crate::Real>(name: &'static str, x: T) -> Result<()> {
    if x.is_nan() || x < T::zero() || x > T::one() {
        return Err(Error::OutOfRange {
            name,
            reason: format!("{x} not in [0, 1]"),
        });
    }
    Ok(())
}
