//! Infinite-width ReLU networks on a ball: Radon-domain densities of
//! spectrally sparse functions, their norms, random-feature sparsification,
//! harmonic null spaces, and a two-dimensional Radon transform toolkit.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cli;
pub mod error;
pub mod harmonics;
pub mod nullspace;
pub mod quadrature;
pub mod radon2d;
pub mod radon_measure;
pub mod sparsifier;
pub mod spectrum;

pub use error::{Error, Result};
