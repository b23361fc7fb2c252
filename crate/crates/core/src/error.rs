use std::path::PathBuf;

/// Errors produced by the chain library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("coupling index {index} is outside the table")]
    CouplingOutOfRange { index: i64 },

    #[error("volume half-width {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("reflection symmetry I(k) = I(1-k) fails at k = {indices:?}")]
    SymmetryViolated { indices: Vec<i64> },

    #[error("interface index {twice}/2 is not a valid point for half-width {n}")]
    InvalidInterface { twice: i64, n: usize },

    #[error("{twice}/2 is not an interface point of the configuration")]
    NotAnInterface { twice: i64 },

    #[error("contour set [{left}, {right}] is not inside the volume of half-width {n}")]
    ContourOutsideVolume { left: i64, right: i64, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid coupling family spec {spec:?}: {reason}")]
    InvalidFamily { spec: String, reason: String },

    #[error("cached energy drifted by {drift:e} from the recomputed value")]
    EnergyDrift { drift: f64 },

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse coupling table {path}: {reason}")]
    Table { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
