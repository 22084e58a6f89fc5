use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("non-closing face {face}: {detail}")]
    NonClosingFace { face: i64, detail: String },

    #[error("non-positive weight: {0}")]
    NonPositiveWeight(String),

    #[error("dangling edge {edge}: references unknown vertex {vertex}")]
    DanglingEdge { edge: i64, vertex: i64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unknown catalogue entry '{0}'")]
    UnknownManifold(String),

    #[error("resolution below minimum: {0}")]
    ResolutionTooLow(String),

    #[error("mixed face arities are not supported by refinement")]
    MixedArity,

    #[error("homology degree {0} outside 0..=2")]
    InvalidDegree(usize),

    #[error("chain is not a cycle")]
    NotACycle,

    #[error("non-integral flux: total/2π = {0}")]
    NonIntegralFlux(f64),

    #[error("no cycle to thread: mesh is simply connected")]
    NoCycle,

    #[error("topology mismatch: {0}")]
    Topology(String),

    #[error("flux bound violated: face {face} would carry |flux| = {flux} ≥ π")]
    FluxBound { face: usize, flux: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("broken antisymmetry on edge {0}")]
    BrokenAntisymmetry(i64),

    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("mismatched manifolds: '{0}' vs '{1}'")]
    ManifoldMismatch(String, String),

    #[error("character {0} has a nonzero Chern class and cannot be flat")]
    NonFlatCharacter(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
