use thiserror::Error;

/// Errors surfaced by the library.
///
/// Degenerate densities encountered *mid-chain* are not errors: samplers
/// treat a non-finite candidate density as a rejection. `DensityUnderflow`
/// is only raised by the direct evaluation entry points.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("density underflow at theta={theta:?}, subset={subset}")]
    DensityUnderflow { theta: Vec<f64>, subset: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("enumeration budget exceeded: {0}")]
    EnumerationBudget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
