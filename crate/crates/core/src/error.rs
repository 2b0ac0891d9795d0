use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Variants are grouped loosely by the layer that raises them. [`Error::is_input_error`]
/// splits them into caller mistakes (bad shapes, bad files, bad flags) and numerical
/// failures, which is the distinction the command line exit codes rely on.
#[derive(Debug, Error)]
pub enum Error {
    // tensors
    #[error("shape {shape:?} needs {expected} entries, got {got}")]
    ShapeMismatch {
        shape: Vec<usize>,
        expected: usize,
        got: usize,
    },
    #[error("axis extents must be at least 1, got {0:?}")]
    InvalidExtent(Vec<usize>),
    #[error("contracted axes disagree: {0}")]
    AxisMismatch(String),
    #[error("axis {axis} out of range for rank {rank}")]
    AxisOutOfRange { axis: usize, rank: usize },
    #[error("axis {0} listed more than once")]
    DuplicateAxis(usize),
    #[error("shape error: {0}")]
    ShapeError(String),

    // networks and paths
    #[error("network too large for {strategy} search: {tensors} tensors (limit {limit})")]
    TooLarge {
        strategy: &'static str,
        tensors: usize,
        limit: usize,
    },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("invalid contraction path: {0}")]
    PathInvalid(String),

    // circuits
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate `{name}` acts on {expected} wire(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("gate `{0}` needs an angle parameter")]
    MissingParam(String),
    #[error("gate `{0}` takes no parameter")]
    UnexpectedParam(String),
    #[error("matrix is not unitary within {0:e}")]
    NotUnitary(f64),
    #[error("{n} qubits exceeds the limit of {limit} for this operation")]
    TooManyQubits { n: usize, limit: usize },
    #[error("wire {wire} out of range for {n} qubits")]
    WireOutOfRange { wire: usize, n: usize },
    #[error("gates on {0} wires are not supported here")]
    UnsupportedArity(usize),
    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    // observables and density operators
    #[error("expectation value has imaginary residue {0:e}")]
    NonHermitianResidue(f64),
    #[error("keep set is empty")]
    EmptyKeepSet,
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("keep set of {size} qubits exceeds the limit of {limit}")]
    KeepTooLarge { size: usize, limit: usize },
    #[error("operator is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("qubit sets overlap")]
    OverlappingSets,
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    // differentiation and optimization
    #[error("expected {expected} parameters, got {got}")]
    ParamCountMismatch { expected: usize, got: usize },
    #[error("gate `{0}` has no parameter-shift rule")]
    UnsupportedGateForShift(String),
    #[error("optimizer diverged at iteration {0}")]
    DivergenceDetected(usize),

    // graphs
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("self loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("assignment entries must be +1 or -1, got {0}")]
    InvalidLabel(i64),
    #[error("{0} vertices exceeds the brute-force limit")]
    TooManyVertices(usize),

    #[error("allocated {used} bytes, above the {limit}-byte envelope")]
    MemoryEnvelope { used: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed input rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NonHermitianResidue(_)
                | Error::NotPsd(_)
                | Error::DivergenceDetected(_)
                | Error::MemoryEnvelope { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
