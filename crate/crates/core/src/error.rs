use thiserror::Error;

/// Every failure the laboratory can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("stencil of derivative order {order} needs at least {needed} normal points, grid has {have}")]
    StencilTooWide { order: usize, needed: usize, have: usize },

    #[error("density floor violated: min density {min:.6e} below floor {floor:.6e}")]
    DensityFloorViolation { min: f64, floor: f64 },

    #[error("acoustic solve diverged: {0}")]
    LinearSolveDiverged(String),

    #[error("pressure Poisson solve diverged: {0}")]
    PoissonSolveDiverged(String),

    #[error("decay fit needs positive samples; {0}")]
    NonPositiveSamples(String),

    #[error("zero-mass defect {defect:.3e} exceeds threshold {threshold:.3e}")]
    ZeroMassViolated { defect: f64, threshold: f64 },

    #[error("run failed at t = {t}: {source}; last good state in {}", checkpoint.display())]
    RunFailed { t: f64, checkpoint: std::path::PathBuf, source: Box<Error> },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed data file: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for bad input: configuration, grid or parameter errors.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidGrid(_) | Error::InvalidParams(_))
    }

    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DensityFloorViolation { .. }
                | Error::LinearSolveDiverged(_)
                | Error::PoissonSolveDiverged(_)
                | Error::NonPositiveSamples(_)
                | Error::ZeroMassViolated { .. }
                | Error::RunFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
