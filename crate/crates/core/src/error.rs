use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tensor is singular (|det| = {det:e})")]
    SingularTensor { det: f64 },

    #[error("tensor is not symmetric positive definite (det = {det:e})")]
    NonSpd { det: f64 },

    #[error("inverted element: det F = {det:e}")]
    InvertedElement { det: f64 },

    #[error("volume ratio must be positive, got J = {0:e}")]
    NonPositiveJ(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation not supported by material model {0}")]
    UnsupportedModel(&'static str),

    #[error("regime {regime} does not support {what}")]
    UnsupportedRegime { regime: &'static str, what: &'static str },

    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),

    #[error("invalid solver settings: {0}")]
    InvalidSettings(String),

    #[error("out-of-plane stress did not vanish after {iters} iterations (|S33| = {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("out-of-plane stretch driven non-positive (C33 = {c33:e})")]
    NonPhysicalRoot { c33: f64 },

    #[error("condensation is singular: dS33/dC33 = {0:e}")]
    SingularCondensation(f64),

    #[error("element {element}, quadrature point {qp}: {source}")]
    AtQuadraturePoint {
        element: usize,
        qp: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("conflicting Dirichlet values on dof {dof}: {a} vs {b}")]
    ConstraintConflict { dof: usize, a: f64, b: f64 },

    #[error("unknown boundary set '{0}'")]
    UnknownSet(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("no mesh node at probe point {0:?}")]
    ProbeNotFound([f64; 3]),

    #[error("inclusion placement failed after {0} attempts")]
    PlacementFailed(usize),

    #[error("Newton iteration diverged in load step {step} after {iters} iterations (|R| = {residual:e})")]
    NewtonDiverged { step: usize, iters: usize, residual: f64 },

    #[error("linear system is singular or could not be factorized: {0}")]
    SingularSystem(String),

    #[error("linear solve inaccurate: relative residual {0:e}")]
    LinearSolveFailed(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(self, element: usize, qp: usize) -> Self {
        Error::AtQuadraturePoint { element, qp, source: Box::new(self) }
    }
}
