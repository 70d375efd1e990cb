use thiserror::Error;

use crate::dynamics::RunReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid of {grid} points on axis {axis} aliases products of band {band} (need more than {needed})")]
    Aliasing {
        axis: usize,
        grid: usize,
        band: usize,
        needed: usize,
    },

    #[error("fields live on different domains")]
    DomainMismatch,

    #[error("retained band {band} does not contain the critical wavenumber candidates (need {needed})")]
    BandTooSmall { band: usize, needed: usize },

    #[error("critical eigenvalue is attained by distinct wavenumbers {0:?}; bifurcation analysis needs a clean critical space")]
    ExplicitDegeneracy(Vec<f64>),

    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64, report: Box<RunReport> },

    #[error("Newton did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linear solver stagnated (relative residual {0:e}); Jacobian is numerically singular")]
    SingularJacobian(f64),

    #[error("eigensolver did not converge: {0}")]
    EigsNoConvergence(String),

    #[error("state has an eigenvalue {0:e} within the degeneracy threshold")]
    DegenerateState(f64),

    #[error("quadratic coefficient vanishes (alpha * mu = {0})")]
    DegenerateQuadratic(f64),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
