//! Exhaustive threshold search and derivative-order selection.

use serde::Serialize;

use crate::detectors::DetectorConfig;
use crate::error::{Error, Result};

use super::ber::ThresholdTheory;
use super::sinr::{sinr, SinrReport};

/// Something that maps a threshold to a bit-error rate.
pub trait BerObjective {
    /// Closed interval the search scans.
    fn search_interval(&self) -> Result<(f64, f64)>;

    fn ber(&self, threshold: f64) -> Result<f64>;
}

impl BerObjective for ThresholdTheory {
    fn search_interval(&self) -> Result<(f64, f64)> {
        Ok(ThresholdTheory::search_interval(self))
    }

    fn ber(&self, threshold: f64) -> Result<f64> {
        Ok(self.error_probability(threshold))
    }
}

/// Error counts of recorded decision statistics as a function of the threshold.
#[derive(Debug, Clone)]
pub struct EmpiricalBer {
    zeros: Vec<f64>,
    ones: Vec<f64>,
}

impl EmpiricalBer {
    /// `zeros` / `ones`: statistics observed when a 0 / 1 was sent.
    pub fn new(mut zeros: Vec<f64>, mut ones: Vec<f64>) -> Result<Self> {
        if zeros.is_empty() || ones.is_empty() {
            return Err(Error::Config(
                "empirical BER needs statistics for both bit values".into(),
            ));
        }
        zeros.sort_by(f64::total_cmp);
        ones.sort_by(f64::total_cmp);
        Ok(Self { zeros, ones })
    }

    pub fn samples(&self) -> usize {
        self.zeros.len() + self.ones.len()
    }

    /// Bit errors at `threshold` (decide 1 iff statistic > threshold).
    pub fn errors(&self, threshold: f64) -> usize {
        let misses = self.ones.partition_point(|v| *v <= threshold);
        let false_alarms = self.zeros.len() - self.zeros.partition_point(|v| *v <= threshold);
        misses + false_alarms
    }

    fn moments(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }
}

impl BerObjective for EmpiricalBer {
    fn search_interval(&self) -> Result<(f64, f64)> {
        let (m0, s0) = Self::moments(&self.zeros);
        let (m1, s1) = Self::moments(&self.ones);
        let sd = s0.max(s1);
        Ok((m0.min(m1) - 4.0 * sd, m0.max(m1) + 4.0 * sd))
    }

    fn ber(&self, threshold: f64) -> Result<f64> {
        Ok(self.errors(threshold) as f64 / self.samples() as f64)
    }
}

/// Grid resolution and number of zoom passes of the threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdSearch {
    pub points: usize,
    /// Each pass rescans `[best - step, best + step]` with the same number of points.
    pub refinements: usize,
}

impl Default for ThresholdSearch {
    fn default() -> Self {
        Self {
            points: 201,
            refinements: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdChoice {
    pub threshold: f64,
    pub ber: f64,
    pub interval: (f64, f64),
}

/// Exhaustive scan for the BER-minimizing threshold; ties go to the smaller threshold.
pub fn optimize_threshold<O: BerObjective + ?Sized>(objective: &O, search: ThresholdSearch) -> Result<ThresholdChoice> {
    if search.points < 2 {
        return Err(Error::Config("threshold search needs at least two grid points".into()));
    }
    let (lo, hi) = objective.search_interval()?;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::Numerical(format!("bad threshold search interval [{lo}, {hi}]")));
    }
    let mut best_gamma = lo;
    let mut best_ber = objective.ber(lo)?;
    let (mut a, mut b) = (lo, hi);
    for pass in 0..=search.refinements {
        let step = (b - a) / (search.points - 1) as f64;
        for k in 0..search.points {
            let gamma = if k + 1 == search.points { b } else { a + step * k as f64 };
            let ber = objective.ber(gamma)?;
            if ber < best_ber || (ber == best_ber && gamma < best_gamma) {
                best_ber = ber;
                best_gamma = gamma;
            }
        }
        if step == 0.0 || pass == search.refinements {
            break;
        }
        a = (best_gamma - step).max(lo);
        b = (best_gamma + step).min(hi);
    }
    Ok(ThresholdChoice {
        threshold: best_gamma,
        ber: best_ber,
        interval: (lo, hi),
    })
}

/// Theory-optimized threshold for FSTD or MaTD.
pub fn optimize_theory_threshold(
    cfg: &DetectorConfig,
    memory: usize,
    search: ThresholdSearch,
) -> Result<ThresholdChoice> {
    let theory = match cfg.kind {
        crate::detectors::DetectorKind::Fstd => ThresholdTheory::fstd(cfg, memory)?,
        crate::detectors::DetectorKind::Matd => ThresholdTheory::matd(cfg, memory)?,
        other => {
            return Err(Error::Config(format!("no closed-form BER for detector {other}")));
        }
    };
    optimize_threshold(&theory, search)
}

/// Outcome of the derivative-order selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderChoice {
    pub order: usize,
    pub reports: Vec<SinrReport>,
}

/// `argmax_m SINR_{L'}(m)` over `m = 0..=max_order`; ties go to the smaller order.
pub fn optimize_derivative_order(cfg: &DetectorConfig, max_order: usize, window: usize) -> Result<OrderChoice> {
    if max_order >= cfg.samples_per_symbol() {
        return Err(Error::Config(format!(
            "maximum order {max_order} must be below N = {}",
            cfg.samples_per_symbol()
        )));
    }
    let reports = (0..=max_order)
        .map(|m| sinr(cfg, window, m))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (m, r) in reports.iter().enumerate() {
        if r.value > reports[best].value {
            best = m;
        }
    }
    Ok(OrderChoice { order: best, reports })
}
