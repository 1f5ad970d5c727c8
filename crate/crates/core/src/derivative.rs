//! The m-th order discrete forward-derivative pre-processor.
//!
//! `D` is the square forward-difference matrix with `-1` on the diagonal and
//! `+1` on the superdiagonal, so its last output is `-y[n-1]`. `D^m` is applied
//! as `m` in-place differencing passes; the dense matrix exists for tests and
//! small covariance blocks only.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelVector;
use crate::error::{Error, Result};
use crate::signal::GaussianStats;
use crate::special::binomial;

/// Derivative order `m`, validated against the samples per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DerivativeOrder(usize);

impl DerivativeOrder {
    /// Truncation must leave at least one sample per symbol, so `m < N`.
    pub fn new(order: usize, samples_per_symbol: usize) -> Result<Self> {
        check_order(order, samples_per_symbol)?;
        Ok(Self(order))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

pub(crate) fn check_order(order: usize, samples_per_symbol: usize) -> Result<()> {
    if order >= samples_per_symbol {
        return Err(Error::Config(format!(
            "derivative order {order} leaves no samples out of {samples_per_symbol} per symbol"
        )));
    }
    Ok(())
}

/// One forward-difference pass in place.
#[inline]
fn difference_in_place(buf: &mut [f64]) {
    let n = buf.len();
    if n == 0 {
        return;
    }
    for i in 0..n - 1 {
        buf[i] = buf[i + 1] - buf[i];
    }
    buf[n - 1] = -buf[n - 1];
}

/// `D^m` applied in place, `O(m n)`.
pub fn apply_derivative_in_place(buf: &mut [f64], order: usize) {
    for _ in 0..order {
        difference_in_place(buf);
    }
}

/// `D^m y`.
pub fn apply_derivative(samples: &[f64], order: usize) -> Vec<f64> {
    let mut out = samples.to_vec();
    apply_derivative_in_place(&mut out, order);
    out
}

/// Dense `n x n` matrix of `D^m`: row `i` holds `(-1)^(m-k) C(m,k)` at column `i + k`.
pub fn derivative_matrix(dim: usize, order: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j < i || j - i > order {
            0.0
        } else {
            let k = j - i;
            let sign = if (order - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(order, k)
        }
    })
}

/// `(D^m mu, D^m Sigma (D^m)^T)`.
pub fn transform_stats(stats: &GaussianStats, order: usize) -> GaussianStats {
    if order == 0 {
        return stats.clone();
    }
    let n = stats.dim();
    let mut mean: Vec<f64> = stats.mean.iter().copied().collect();
    apply_derivative_in_place(&mut mean, order);

    // Columns first (D^m Sigma), then rows ((D^m Sigma) D^mT).
    let mut cov = stats.covariance.clone();
    for mut col in cov.column_iter_mut() {
        apply_derivative_in_place(col.as_mut_slice(), order);
    }
    let mut cov = cov.transpose();
    for mut col in cov.column_iter_mut() {
        apply_derivative_in_place(col.as_mut_slice(), order);
    }
    // Symmetrize away rounding asymmetry.
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianStats {
        mean: nalgebra::DVector::from_vec(mean),
        covariance: cov,
    }
    .leading(n)
}

/// Drops the last `m` post-derivative samples of a symbol, which depend on the next symbol.
pub fn truncate_noncausal(symbol_samples: &[f64], order: usize) -> Result<&[f64]> {
    check_order(order, symbol_samples.len())?;
    Ok(&symbol_samples[..symbol_samples.len() - order])
}

/// Principal `(N-m)` block of per-symbol statistics.
pub fn truncate_stats(stats: &GaussianStats, order: usize) -> Result<GaussianStats> {
    check_order(order, stats.dim())?;
    Ok(stats.leading(stats.dim() - order))
}

/// Post-derivative expected signal of a bit-1 symbol on its own samples,
/// `D^m (M h[1..N])` truncated to `N - m` entries.
pub fn intended_mean(h: &ChannelVector, molecules: f64, order: usize) -> Result<Vec<f64>> {
    let n = h.samples_per_symbol();
    check_order(order, n)?;
    let mut mu: Vec<f64> = h.symbol_taps(0).iter().map(|t| molecules * t).collect();
    apply_derivative_in_place(&mut mu, order);
    mu.truncate(n - order);
    Ok(mu)
}
