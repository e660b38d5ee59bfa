use crate::poly::ExpansionOrder;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("expansion orders differ: {0} vs {1}")]
    OrderMismatch(ExpansionOrder, ExpansionOrder),
    #[error("series division by a vanishing constant term (|c00| = {0:e})")]
    DivisionSingular(f64),
    #[error("phase index m = {m} outside 0..={n}")]
    PhaseIndex { m: i64, n: usize },
    #[error("scale parameter must be positive, got {0}")]
    Scale(f64),
    #[error("squeezing parameter must lie in [0,1), got {0}")]
    Squeezing(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("no built-in detector for number-sum {0}")]
    UnsupportedDetector(usize),
    #[error("detector does not single out the target Bell state (residual {0:e})")]
    NotSelective(f64),
    #[error("ideal outcome has zero amplitude; manipulation is degenerate")]
    Degenerate,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
