use crate::solver::SolitonCert;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate polytope: affine hull has dimension {found}, expected {expected}")]
    DegeneratePolytope { expected: usize, found: usize },

    #[error("polytope has no points")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("inconsistent polytope representations: {0}")]
    InconsistentPolytope(String),

    #[error("degree {degree} exceeds the configured maximum {max}")]
    DegreeOverflow { degree: usize, max: usize },

    #[error("quadrature tolerance not met: bound {bound:e} > target {target:e} after {evals} evaluations")]
    ToleranceNotMet { bound: f64, target: f64, evals: usize },

    #[error("weight is not admissible: {0}")]
    NotAdmissible(String),

    #[error("derivative of the weight vanishes identically")]
    EmptyDerivative,

    #[error("coweight is zero; the pushforward is an atom")]
    ZeroTwist,

    #[error("H^g is not coercive: the origin is not interior (facet {facet} has offset {offset})")]
    NotCoercive { facet: usize, offset: String },

    #[error("beta is not coercive along the ray: A = {a} is not below the support maximum {sup}")]
    NonCoercive { a: f64, sup: f64 },

    #[error("Newton iteration did not converge after {} iterations", .0.iterations)]
    NoConvergence(Box<SolitonCert>),

    #[error("rescaling bracket did not close below a_max = {0}")]
    BracketNotClosed(f64),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("parse error: {0}")]
    Parse(String),
}
