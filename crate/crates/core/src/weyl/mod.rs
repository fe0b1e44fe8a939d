//! The formal Weyl algebra bundle: truncated series in `ν`, fiber variables
//! `y` and forms `dx`, the Weyl–Moyal product, the `δ`-complex with its
//! homotopy, and the lift of a contact connection.

mod algebra;
mod element;

pub use algebra::WeylAlgebra;
pub use element::{Key, WeylElement, EXACT};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeylError {
    #[error("Weyl elements belong to different charts")]
    ChartMismatch,
    #[error("the Reeb field is not a coordinate vector field; the chart is not adapted")]
    NotAdapted,
    #[error("charts with {0} coordinates are not supported (at most 32)")]
    TooManyCoordinates(usize),
    #[error("fiber index along the Reeb direction: {0}")]
    NotTransverse(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("internal consistency failure: {identity} ({detail})")]
    Invariant { identity: String, detail: String },
}
