//! Exact symbolic Fedosov quantization of contact manifolds.
//!
//! The pipeline runs bottom-up: [`coeffring`] supplies exact polynomial
//! coefficients, [`contact`] builds the contact geometry and contact
//! connections of a single adapted chart, [`weyl`] implements the
//! truncated Weyl algebra bundle with its δ-complex, [`fedosov`] solves for
//! the abelian connection and derives the quantum lift, `Δ` and the star
//! product, and [`obstruct`] evaluates the invariants that decide whether a
//! classical observable can be quantized.

pub mod coeffring;
pub mod contact;
pub mod fedosov;
pub mod obstruct;
pub mod tensor;
pub mod weyl;
