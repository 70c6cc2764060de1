use thiserror::Error;

/// Errors produced by the benchmark pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit id {id} out of range for a topology with {count} qubits")]
    QubitOutOfRange { id: u32, count: u32 },

    #[error("({a}, {b}) is not a coupler of the Chimera graph")]
    NotACoupler { a: u32, b: u32 },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("spin configuration has {got} spins, expected {expected}")]
    ConfigLength { expected: usize, got: usize },

    #[error("spin at position {index} is {value}, expected +1 or -1")]
    InvalidSpin { index: usize, value: i8 },

    #[error("exact enumeration limited to {limit} qubits, problem has {qubits}; use a sampling backend")]
    TooLargeForExact { qubits: usize, limit: usize },

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("sample set is inconsistent with the problem: {0}")]
    CorruptSampleSet(String),

    #[error("{problems} problems but {sample_sets} sample sets")]
    BatchMismatch { problems: usize, sample_sets: usize },

    #[error("no instances retained by the {0} filter")]
    NoRetainedInstances(&'static str),

    #[error("instance with seed {seed:#018x} failed: {source}")]
    Instance {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than I/O failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io(_) => false,
            Error::Instance { source, .. } => source.is_validation(),
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
