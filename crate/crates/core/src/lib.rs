//! Abelian extensions of imaginary quadratic fields by complex multiplication.
//!
//! The crate computes class groups and ray class groups of imaginary
//! quadratic fields, Hilbert class polynomials, division polynomials and ray
//! class polynomials, and class invariants of higher level through the
//! Shimura reciprocity action on modular functions.

pub mod arith;
pub mod cmcurve;
pub mod error;
pub mod hilbert;
pub mod modfunc;
pub mod numerics;
pub mod quadforms;
pub mod rayclass;
pub mod shimura;

pub use error::{Error, Result};
