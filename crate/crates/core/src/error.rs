use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed arguments or inputs that do not match their declared shape.
    Input,
    /// Reading or writing files failed.
    Io,
    /// The inputs are well formed but the math is undefined for them.
    Math,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("descriptor mismatch: expected {expected}, found {found}")]
    DescriptorMismatch { expected: String, found: String },

    #[error("dimension mismatch: expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("product manifold needs at least one component")]
    EmptyProduct,

    #[error("invalid point: {invariant} violated (residual {residual:e})")]
    InvalidPoint { invariant: String, residual: f64 },

    #[error("tangent norm {norm} reaches injectivity radius {limit}")]
    InjectivityExceeded { norm: f64, limit: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("need at least 2 basis functions, got {0}")]
    InvalidBasisCount(usize),

    #[error("gain {name} must be positive and finite, got {value}")]
    InvalidGain { name: &'static str, value: f64 },

    #[error("timestamps must be strictly increasing (sample {index})")]
    NonMonotonicTime { index: usize },

    #[error("trajectory has {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("start-goal scaling is singular")]
    SingularScaling,

    #[error("composite parts must share gains")]
    GainMismatch,

    #[error("composite parts must share the basis set")]
    BasisMismatch,

    #[error("target ({x}, {y}) is outside the reachable radius {reach}")]
    Unreachable { x: f64, y: f64, reach: f64 },

    #[error("inverse kinematics did not converge (residual {residual:e})")]
    IkDiverged { residual: f64 },

    #[error("matrix is not symmetric positive definite: {0}")]
    NonSpdInput(String),

    #[error("gain matrix is not symmetric positive definite: {0}")]
    NonSpdGain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("{0}: file is empty")]
    EmptyFile(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } | Error::EmptyFile(_) => ErrorKind::Io,
            Error::DescriptorMismatch { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidDescriptor(_)
            | Error::EmptyProduct
            | Error::InvalidBasisCount(_)
            | Error::InvalidGain { .. }
            | Error::NonMonotonicTime { .. }
            | Error::TooShort { .. }
            | Error::GainMismatch
            | Error::BasisMismatch
            | Error::InvalidArgument(_)
            | Error::Format(_) => ErrorKind::Input,
            Error::InvalidPoint { .. }
            | Error::InjectivityExceeded { .. }
            | Error::DegenerateInput(_)
            | Error::SingularScaling
            | Error::Unreachable { .. }
            | Error::IkDiverged { .. }
            | Error::NonSpdInput(_)
            | Error::NonSpdGain(_) => ErrorKind::Math,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
