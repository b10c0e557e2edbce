use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("point is not on the unit sphere (norm {norm})")]
    NotOnSphere { norm: f64 },
    #[error("not a norm: {0}")]
    NotANorm(String),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("space is not uniformly convex")]
    NotUniformlyConvex,
    #[error("lattice is not uniformly monotone at epsilon = {epsilon}")]
    NotUniformlyMonotone { epsilon: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("oracle for component {component} violated its contract: {detail}")]
    OracleViolation { component: usize, detail: String },
    #[error("internal invariant broken: {0}")]
    InternalInvariant(String),
    #[error("no witness found: {0}")]
    WitnessSearchFailed(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("instance generation failed: {0}")]
    GenerationFailed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}
