//! Gap statistics of zeta-zero ordinates.
//!
//! The crate reads tables of ordinates `γ_n`, counts runs of moderate gaps,
//! compares empirical spacing statistics with the pair-correlation function
//! and with sine-kernel (GUE) predictions, measures window counts, and locates
//! critical points of ξ between consecutive ordinates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cache;
pub mod cli;
pub mod error;
pub mod gaps;
pub mod gue;
pub mod quadrature;
pub mod windows;
pub mod xi;
pub mod zeros;

pub use error::{Error, Result};
pub use zeros::{OrdinateTable, TextFormat};
