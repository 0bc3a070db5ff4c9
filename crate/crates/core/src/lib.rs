//! Blind time reversal of optical pulse envelopes by short-pump frequency
//! conversion.
//!
//! The crate integrates the local-time coupled-mode equations, evaluates the
//! closed-form beam-splitter map they reduce to for an impulsive pump, and
//! adds the perturbative spectral picture, a temporal-mode quantum layer and
//! dispersion-based device design.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod envelope;
pub mod pulse;
pub mod analytic;
pub mod solver;
pub mod perturbative;
pub mod quantum;
pub mod dispersion;
pub mod scenario;

pub use error::{Error, Result};
