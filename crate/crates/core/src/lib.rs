//! Hypergeometric smoothing and Hahn-polynomial bounds for symmetric
//! `(k, delta)`-wise indistinguishable distributions over `{0,1}^n`, plus an
//! exact rational LP oracle for the true maximal `t`-wise advantage.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod approximation;
pub mod arith;
pub mod bound;
pub mod distributions;
pub mod error;
pub mod hahn;
pub mod oracle;
mod qnum;
pub mod simplex;
pub mod smoothing;

pub use arith::{Mode, Rational, Scalar};
pub use bound::{best_s, theorem_bound, BoundParams, BoundValue};
pub use distributions::SymmetricDistribution;
pub use error::{Error, Result};
pub use hahn::{DampingSpectrum, FloatHahnTable, HahnTable};
pub use oracle::{OracleMode, OracleResult};
pub use smoothing::SmoothingMatrix;
