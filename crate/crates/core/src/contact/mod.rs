//! Contact geometry of a single adapted chart: the contact form and the
//! objects derived from it (ω, Reeb field ξ, bivector π, projector P), the
//! Jacobi bracket, and contact connections parametrized by symmetric
//! ξ-transverse tensors.

pub mod calculus;
mod characteristic;
mod connection;
mod geometry;

pub use characteristic::{characteristic_curve, ClosedCharacteristic};
pub use connection::{build_connection, ContactConnection, STensors};
pub use geometry::{jacobi_bracket, schouten_check, validate_contact, Chart, ContactData, SchoutenReport};

use thiserror::Error;

use crate::coeffring::CoeffError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContactError {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    /// The input does not describe an admissible adapted chart.
    #[error("spec rejected: {0}")]
    Rejected(String),
    /// A theorem-level identity failed; indicates a bug, not bad input.
    #[error("internal consistency failure: {identity} ({detail})")]
    Invariant { identity: String, detail: String },
}

impl ContactError {
    pub(crate) fn invariant(identity: &str, detail: impl Into<String>) -> Self {
        ContactError::Invariant {
            identity: identity.to_string(),
            detail: detail.into(),
        }
    }
}
