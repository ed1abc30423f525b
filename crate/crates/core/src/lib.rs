//! Exact computations with (φ,∇)-modules over truncated Robba-type rings
//! and the Weil–Deligne representations attached to them.
//!
//! Linear algebra is generic over the [`scalar::Ring`] / [`scalar::Field`]
//! traits; the concrete matrix types used throughout are re-exported here.

pub mod diagnostics;
pub mod error;
pub mod json;
pub mod marmora;
pub mod matrix;
pub mod module;
pub mod oracle_kit;
pub mod padic;
pub mod poly;
pub mod quadratic;
pub mod scalar;
pub mod series;
pub mod weil_deligne;

pub use error::{Error, Result};
pub use matrix::{Matrix, Subspace};
pub use module::{PadicMatrix, PhiNablaModule, QMatrix, SeriesMatrix};
pub use padic::PadicNumber;
pub use quadratic::Quadratic;
pub use series::{LaurentElement, RingMode, RingParams};
pub use weil_deligne::{Convention, QuadMatrix, WeilDeligneRep};

/// Exact rationals.
pub type Rational = num_rational::BigRational;
