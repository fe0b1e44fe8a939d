//! Exact coefficient ring: rationals and multivariate polynomials over them.
//!
//! Every geometric quantity in the crate (tensor components, Weyl algebra
//! coefficients, observables) is a [`MultiPoly`] in the chart coordinates.
//! Equality tests are exact, so identities are checked as literal zeros.

mod parse;
mod poly;
mod rational;

pub use parse::parse_poly;
pub use poly::{Monomial, MultiPoly, Vars};
pub use rational::{parse_rational, rat, rat_int, Rational};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("variable lists differ: [{left}] vs [{right}]")]
    VarMismatch { left: String, right: String },
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("division by a non-constant or zero polynomial")]
    NonUnitDivision,
}
