//! Gaussian approximation of the maximum of correlated Gaussians.
//!
//! Variables are absorbed left to right: the running maximum `Z` and the next
//! variable `X` are combined with the two-variable moment formulas, `Z` is
//! then treated as Gaussian again, and its covariance with every remaining
//! variable follows the linear rule
//! `cov(max(Z, X), X_k) = cov(Z, X_k) Q(-alpha) + cov(X, X_k) Q(alpha)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::special::{normal_pdf, q_function};

/// Mean and variance of the approximated maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarkResult {
    pub mean: f64,
    pub variance: f64,
    /// Steps whose variance came out slightly negative and was clamped to zero.
    pub clamped_steps: u32,
}

impl ClarkResult {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Moments of `max(X_1, ..., X_n)` under the recursive Gaussian approximation.
pub fn clark_max_stats(mean: &[f64], covariance: &DMatrix<f64>) -> Result<ClarkResult> {
    let n = mean.len();
    if n == 0 {
        return Err(Error::Dimension { expected: 1, actual: 0 });
    }
    if covariance.nrows() != n || covariance.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: covariance.nrows(),
        });
    }
    let mut mu_z = mean[0];
    let mut var_z = covariance[(0, 0)];
    // cov(Z, X_k) for the variables not yet absorbed.
    let mut cov_z: Vec<f64> = (0..n).map(|k| covariance[(0, k)]).collect();
    let mut clamped_steps = 0;

    for i in 1..n {
        let mu_x = mean[i];
        let var_x = covariance[(i, i)];
        let a2 = var_z + var_x - 2.0 * cov_z[i];
        if a2 <= 1e-14 * (var_z.abs() + var_x.abs()) || a2 <= 0.0 {
            // Z - X is (numerically) deterministic: the larger one dominates.
            if mu_x > mu_z {
                mu_z = mu_x;
                var_z = var_x;
                for (k, c) in cov_z.iter_mut().enumerate().skip(i + 1) {
                    *c = covariance[(i, k)];
                }
            }
            continue;
        }
        let a = a2.sqrt();
        let alpha = (mu_z - mu_x) / a;
        let p_z = q_function(-alpha);
        let p_x = q_function(alpha);
        let density = normal_pdf(alpha);
        // Work relative to mu_z to keep the second moment well conditioned.
        let dx = mu_x - mu_z;
        let nu1 = dx * p_x + a * density;
        let nu2 = var_z * p_z + (dx * dx + var_x) * p_x + dx * a * density;
        let mut var = nu2 - nu1 * nu1;
        if var < 0.0 {
            var = 0.0;
            clamped_steps += 1;
        }
        for k in i + 1..n {
            cov_z[k] = cov_z[k] * p_z + covariance[(i, k)] * p_x;
        }
        mu_z += nu1;
        var_z = var;
    }
    Ok(ClarkResult {
        mean: mu_z,
        variance: var_z,
        clamped_steps,
    })
}
