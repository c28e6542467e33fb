use thiserror::Error;

/// Errors produced by the screenbem pipeline.
///
/// The variants split into two families that the CLI maps onto distinct
/// exit codes: input/validation problems and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unknown geometry `{0}`")]
    UnknownGeometry(String),

    #[error("point contact at vertex {0} is not supported")]
    PointContact(usize),

    #[error("coplanar facets {0} and {1} overlap at a shared edge")]
    AngularTie(usize, usize),

    #[error("dof ({vertex}, {branch}) is not a jump degree of freedom")]
    NotAJumpDof { vertex: usize, branch: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("broken nesting: {0}")]
    Nesting(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {0:?} lies on the screen")]
    PointOnScreen([f64; 3]),

    #[error("quadrature produced a non-finite value for facets {0} and {1}")]
    Quadrature(usize, usize),

    #[error("non-finite data: {0}")]
    NonFinite(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("conjugate gradient breakdown at iteration {0}")]
    Breakdown(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the numerics rather than by the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(..)
                | Error::NonFinite(_)
                | Error::NotPositiveDefinite(_)
                | Error::Breakdown(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
