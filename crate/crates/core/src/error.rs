use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("node {0} is on the truncation boundary")]
    BoundaryNode(usize),

    #[error("domain too small: {0}")]
    DomainTooSmall(String),

    #[error("boundary data {value} at node {node} is below the obstacle {obstacle}")]
    BoundaryBelowObstacle { node: usize, value: f64, obstacle: f64 },

    #[error("boundary data does not cover every boundary node ({given} given, {expected} expected)")]
    IncompleteBoundary { given: usize, expected: usize },

    #[error("solver did not converge after {iterations} sweeps (change {change:.3e}, residual {residual:.3e})")]
    NotConverged {
        iterations: usize,
        change: f64,
        residual: f64,
    },

    #[error("point lies outside the grid")]
    OutsideGrid,

    #[error("lattice of {cells} cells exceeds the budget of {budget}; {suggestion}")]
    LatticeTooLarge {
        cells: usize,
        budget: usize,
        suggestion: String,
    },

    #[error("{0}")]
    EmptySample(String),

    #[error("dimension {d} not supported: {reason}")]
    Dimension { d: usize, reason: String },
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive".into(),
        })
    }
}
