use thiserror::Error;

/// Errors surfaced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "node {node} has {neighbors} neighbors but screening with b = {b} \
         requires at least {min}"
    )]
    InsufficientNeighbors {
        node: usize,
        neighbors: usize,
        b: usize,
        min: usize,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty test set")]
    EmptyTestSet,

    #[error("nonconvex objective family not supported by this operation")]
    NonconvexFamily,

    #[error("singular linear system (rank-deficient and unregularized)")]
    SingularSystem,

    #[error("enumeration budget exceeded: {required} reduced graphs > cap {cap}")]
    BudgetExceeded { required: u128, cap: u128 },

    #[error("bad magic {found:#010x} in {path}: expected {expected:#010x}")]
    BadMagic {
        path: String,
        found: u32,
        expected: u32,
    },

    #[error("truncated file {path}: expected {expected} bytes of payload, found {found}")]
    TruncatedFile {
        path: String,
        expected: usize,
        found: usize,
    },

    #[error("count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("coordinated strategy requires a target vector")]
    MissingTarget,

    #[error("all diameters in the fit window are zero: exact consensus reached")]
    DegenerateConsensusWindow,

    #[error(
        "non-finite iterate at node {node} after round {round}; the run is \
         diverging (step schedule too aggressive for the objective)"
    )]
    NonFiniteState { node: usize, round: u64 },

    #[error("graph generation exhausted {attempts} resamples without passing the min-degree heuristic")]
    GraphGenerationExhausted { attempts: usize },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("malformed graph file {path}: {reason}")]
    MalformedGraphFile { path: String, reason: String },

    #[error("malformed dataset file {path}: {reason}")]
    MalformedDatasetFile { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
