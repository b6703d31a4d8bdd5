use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown map `{0}` (expected forward, inverse, orbit-flip or generic)")]
    UnknownMap(String),

    #[error("operation not supported for map `{0}`")]
    UnsupportedMap(&'static str),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Newton matrix (condition number {0:e})")]
    SingularJacobian(f64),

    #[error("orbit escaped after {0} steps")]
    Escaped(usize),

    #[error("the -1 multiplier pair is semi-simple (no Jordan block), defect {0:e}")]
    SemiSimple(f64),

    #[error("normal form chart is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("multipliers are not close to (-1, -1, +1): {0}")]
    NotDegenerate(String),

    #[error("resonant monomials do not complement the homological range ({0})")]
    ResonanceRank(String),

    #[error("non-finite state encountered")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, Error>;
