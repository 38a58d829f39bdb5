use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("point ({x}, {y}) lies outside the unit square")]
    OutsideDomain { x: f64, y: f64 },

    #[error("unsupported space: form degree {k}, order {r}")]
    UnsupportedSpace { k: usize, r: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("incompatible spaces: {0}")]
    IncompatibleSpaces(String),

    #[error("matrix is singular at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("symmetric factorization requested for a nonsymmetric matrix")]
    NotSymmetric,

    #[error("malformed sparse matrix: {0}")]
    MalformedMatrix(String),

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("block ({row}, {col}) is {got_rows}x{got_cols}, slot requires {want_rows}x{want_cols}")]
    BlockShape {
        row: usize,
        col: usize,
        got_rows: usize,
        got_cols: usize,
        want_rows: usize,
        want_cols: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing start level: {0}")]
    MissingStartLevel(String),

    #[error("time level mismatch: {0}")]
    TimeLevel(String),

    #[error("solution became non-finite at step {step}")]
    Diverged { step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for configuration problems, 3 for failures
    /// while assembling, solving or writing output.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::MissingStartLevel(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
