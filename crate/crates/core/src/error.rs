use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is not a power of two")]
    NotQubitDimension(usize),

    #[error("{qubits} qubits exceeds the configured cap of {max}")]
    TooManyQubits { qubits: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not in su(N) (deviation {0:.3e})")]
    NotInLieAlgebra(f64),

    #[error("{what} requires {expected} qubit count, got n = {n}")]
    Parity {
        what: &'static str,
        expected: &'static str,
        n: usize,
    },

    #[error("zero state vector")]
    ZeroVector,

    #[error("the identity Pauli string has no Cartan class")]
    IdentityPauli,

    #[error("invalid Pauli letter {0:?}")]
    InvalidPauli(char),

    #[error("structure violation: {0}")]
    Structure(String),

    #[error("no convergence after {iterations} iterations ({what})")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("{what}: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    Tolerance {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
