//! Gaussian negative log-likelihood with a Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::signal::GaussianStats;

/// Precomputed `(mu, Sigma^-1 via Cholesky, ln|Sigma|)` for repeated scoring.
#[derive(Debug, Clone)]
pub struct GaussianScorer {
    mean: DVector<f64>,
    factor: Cholesky<f64, Dyn>,
    log_det: f64,
}

impl GaussianScorer {
    /// Factorizes `Sigma`; on failure retries once with `1e-9 * trace / dim` added to the diagonal.
    pub fn new(stats: &GaussianStats) -> Result<Self> {
        let dim = stats.dim();
        if dim == 0 {
            return Err(Error::Dimension { expected: 1, actual: 0 });
        }
        let factor = match Cholesky::new(stats.covariance.clone()) {
            Some(f) => f,
            None => {
                let load = 1e-9 * stats.covariance.trace().abs() / dim as f64;
                let loaded = &stats.covariance + DMatrix::identity(dim, dim) * load.max(f64::MIN_POSITIVE);
                Cholesky::new(loaded)
                    .ok_or_else(|| Error::Numerical("covariance is singular even after diagonal loading".into()))?
            }
        };
        let log_det = 2.0 * factor.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::Numerical("non-finite covariance log-determinant".into()));
        }
        Ok(Self {
            mean: stats.mean.clone(),
            factor,
            log_det,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `(y - mu)^T Sigma^-1 (y - mu)`.
    pub fn quadratic_form(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.dim());
        let mut r = DVector::from_iterator(y.len(), y.iter().zip(self.mean.iter()).map(|(a, b)| a - b));
        // Forward substitution with L only: |L^-1 r|^2.
        let l = self.factor.l_dirty();
        let n = r.len();
        for i in 0..n {
            let mut acc = r[i];
            for j in 0..i {
                acc -= l[(i, j)] * r[j];
            }
            r[i] = acc / l[(i, i)];
        }
        r.norm_squared()
    }

    /// `ln|Sigma| + (y - mu)^T Sigma^-1 (y - mu)`: twice the negative log-likelihood up to a constant.
    pub fn cost(&self, y: &[f64]) -> f64 {
        self.log_det + self.quadratic_form(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_cost() {
        let g = GaussianStats::new(DVector::from_vec(vec![2.0]), DMatrix::from_element(1, 1, 4.0)).unwrap();
        let s = GaussianScorer::new(&g).unwrap();
        assert!((s.cost(&[4.0]) - (4f64.ln() + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn matches_explicit_inverse() {
        let cov = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let mean = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let g = GaussianStats::new(mean.clone(), cov.clone()).unwrap();
        let s = GaussianScorer::new(&g).unwrap();
        let y = [0.3, 0.7, -2.0];
        let r = DVector::from_row_slice(&y) - mean;
        let want = cov.determinant().ln() + (r.transpose() * cov.try_inverse().unwrap() * &r)[0];
        assert!((s.cost(&y) - want).abs() < 1e-12);
    }

    #[test]
    fn loads_semidefinite_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let g = GaussianStats::new(DVector::zeros(2), cov).unwrap();
        let s = GaussianScorer::new(&g).unwrap();
        assert!(s.cost(&[0.0, 0.0]).is_finite());
    }

    #[test]
    fn rejects_hopeless_covariance() {
        let g = GaussianStats::new(DVector::zeros(2), DMatrix::from_element(2, 2, -1.0)).unwrap();
        assert!(matches!(GaussianScorer::new(&g), Err(Error::Numerical(_))));
    }
}
