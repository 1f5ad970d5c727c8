//! Statistics of one symbol's samples conditioned on the bits that can reach it.
//!
//! Window bit strings are ordered oldest first; the last bit is the symbol
//! whose samples are described. A window of `w` bits covers lags `w-1..=0`.

use nalgebra::{DMatrix, DVector};

use crate::channel::ChannelVector;
use crate::derivative::{check_order, transform_stats, truncate_stats};
use crate::error::{Error, Result};
use crate::signal::{BitSequence, GaussianStats};

/// Mean and diagonal covariance of the last symbol's `N` samples given an `L`-bit string.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalStats {
    /// Per-sample means `H_L x_L + lambda j_N`.
    pub mean: Vec<f64>,
    /// The `L - 1` interfering bits, oldest first.
    pub interference: BitSequence,
    /// The intended bit.
    pub intended: bool,
}

impl ConditionalStats {
    /// `Sigma_L = diag(mu_L)` packaged with the mean.
    pub fn gaussian(&self) -> GaussianStats {
        gaussian_diag(&self.mean)
    }

    /// After `D^m` on the symbol's `N` samples and dropping the last `m`.
    pub fn post_derivative(&self, order: usize) -> Result<GaussianStats> {
        post_derivative_stats(&self.mean, order)
    }
}

fn gaussian_diag(mean: &[f64]) -> GaussianStats {
    let mu = DVector::from_column_slice(mean);
    let cov = DMatrix::from_diagonal(&mu);
    GaussianStats {
        mean: mu,
        covariance: cov,
    }
}

/// `D^m` (N x N) on Poisson-diagonal statistics with mean `mean`, truncated to `N - m`.
pub fn post_derivative_stats(mean: &[f64], order: usize) -> Result<GaussianStats> {
    check_order(order, mean.len())?;
    truncate_stats(&transform_stats(&gaussian_diag(mean), order), order)
}

/// `lambda + sum_j bit_j M h[lag_j N + n]` for the last symbol of `window`.
pub fn window_mean(window: &[bool], channel: &ChannelVector, molecules: f64, noise_rate: f64) -> Vec<f64> {
    let n = channel.samples_per_symbol();
    let mut mean = vec![noise_rate; n];
    let w = window.len();
    for (pos, &bit) in window.iter().enumerate() {
        if bit {
            add_lag(&mut mean, channel, w - 1 - pos, molecules);
        }
    }
    mean
}

/// Adds `weight * h[lag N + n]` to each of the `N` samples.
pub fn add_lag(mean: &mut [f64], channel: &ChannelVector, lag: usize, weight: f64) {
    let n = channel.samples_per_symbol();
    let base = lag * n;
    for (k, v) in mean.iter_mut().enumerate() {
        *v += weight * channel.tap(base + k);
    }
}

/// Expected contribution of equiprobable symbols at lags `first_lag..first_lag + count`.
pub fn expected_tail(channel: &ChannelVector, molecules: f64, first_lag: usize, count: usize) -> Vec<f64> {
    let mut tail = vec![0.0; channel.samples_per_symbol()];
    for lag in first_lag..first_lag + count {
        add_lag(&mut tail, channel, lag, molecules / 2.0);
    }
    tail
}

/// Conditional statistics of the `L`-th symbol given `s_L` (`L` bits, oldest first).
pub fn conditional_stats(
    bits: &BitSequence,
    channel: &ChannelVector,
    molecules: f64,
    noise_rate: f64,
) -> Result<ConditionalStats> {
    if bits.is_empty() || bits.len() > channel.memory() {
        return Err(Error::Config(format!(
            "conditioning string must have 1..={} bits, got {}",
            channel.memory(),
            bits.len()
        )));
    }
    let mean = window_mean(bits.bits(), channel, molecules, noise_rate);
    let (interference, intended) = bits.bits().split_at(bits.len() - 1);
    Ok(ConditionalStats {
        mean,
        interference: BitSequence::new(interference.to_vec()),
        intended: intended[0],
    })
}
