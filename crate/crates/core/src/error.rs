use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("empty input")]
    EmptyInput,
    #[error("{width} qubits exceeds the dense limit of {limit}")]
    TooWide { width: usize, limit: usize },
    #[error("width mismatch: expected at least {expected} qubits, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("correlation requires two distinct sites")]
    SameSite,
    #[error("singular parameters: {0}")]
    SingularParameters(String),
    #[error("parameter `{0}` is unbound")]
    UnboundParameter(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid T2 = {t2} us for T1 = {t1} us (requires 0 < T2 <= 2*T1)")]
    InvalidT2 { t1: f64, t2: f64 },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("spin-labelled pools need an even qubit count, got {0}")]
    OddWidth(usize),
    #[error("electron count {n_electrons} outside 0..={n_qubits}")]
    ElectronCountOutOfRange { n_electrons: usize, n_qubits: usize },
    #[error("coupling map is disconnected")]
    DisconnectedMap,
    #[error("coupling map has {found} qubits, need at least {needed}")]
    TooSmallMap { needed: usize, found: usize },
    #[error("eigensolver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("value {0} must be positive")]
    NonPositiveValue(f64),
    #[error("operator is not Hermitian (largest imaginary coefficient {0:e})")]
    NotHermitian(f64),
    #[error("reference value is zero")]
    ZeroReference,
    #[error("unsupported ansatz: {0}")]
    UnsupportedAnsatz(String),
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn check_index(index: usize, bound: usize) -> Result<()> {
        if index < bound {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, bound })
        }
    }
}
