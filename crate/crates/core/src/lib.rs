//! Derivative pre-processing receivers for diffusion-based molecular communication.
//!
//! The crate covers the point-transmitter / absorbing-sphere channel, on-off
//! keyed emissions with Poisson arrivals, the m-th order discrete derivative
//! pre-processor, six detectors (exhaustive and banded MLSD, MLDA, MaTD, FSTD,
//! FTD), closed-form BER of the threshold detectors, an SINR objective for
//! choosing the derivative order, and a Monte Carlo harness.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod cli;
pub mod conditional;
pub mod derivative;
pub mod detectors;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod signal;
pub mod special;

pub use error::{Error, Result};
