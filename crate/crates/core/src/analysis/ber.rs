//! Closed-form error probability of the threshold detectors, averaged over
//! all `2^(L-1)` interference strings.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::derivative::{check_order, derivative_matrix};
use crate::detectors::{fstd_select_sample, DetectorConfig, FstdSample};
use crate::error::{Error, Result};
use crate::special::{binomial, q_function, CompensatedSum};

use super::clark::clark_max_stats;
use super::enumerate::InterferenceEnumerator;

/// Largest channel memory whose interference strings are enumerated.
pub const MAX_ENUMERATED_MEMORY: usize = 24;

/// Decision statistic of one conditional under one hypothesis, `N(mean, sd^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticMoments {
    pub mean: f64,
    pub std_dev: f64,
}

impl StatisticMoments {
    /// `P(X > threshold)`; a degenerate variable compares deterministically.
    pub fn prob_above(&self, threshold: f64) -> f64 {
        if self.std_dev > 0.0 {
            q_function((threshold - self.mean) / self.std_dev)
        } else if self.mean > threshold {
            1.0
        } else {
            0.0
        }
    }
}

/// One interference string's statistics under both hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalPair {
    pub zero: StatisticMoments,
    pub one: StatisticMoments,
}

impl ConditionalPair {
    /// `(A_1 + A_0) / 2`: miss given bit-1 plus false alarm given bit-0.
    pub fn error_probability(&self, threshold: f64) -> f64 {
        let miss = 1.0 - self.one.prob_above(threshold);
        let false_alarm = self.zero.prob_above(threshold);
        0.5 * (miss + false_alarm)
    }
}

/// Conditional statistics of a threshold detector's decision variable.
#[derive(Debug, Clone)]
pub struct ThresholdTheory {
    pairs: Vec<ConditionalPair>,
    degenerate: bool,
}

fn check_memory(cfg: &DetectorConfig, memory: usize) -> Result<()> {
    cfg.validate()?;
    if memory == 0 || memory > cfg.channel.memory() {
        return Err(Error::Config(format!(
            "memory must be in 1..={}, got {memory}",
            cfg.channel.memory()
        )));
    }
    if memory > MAX_ENUMERATED_MEMORY {
        return Err(Error::Config(format!(
            "memory {memory} exceeds the enumeration limit {MAX_ENUMERATED_MEMORY}"
        )));
    }
    Ok(())
}

/// `(-1)^(m-k) C(m,k)` for `k = 0..=m`.
fn derivative_row(order: usize) -> Vec<f64> {
    (0..=order)
        .map(|k| {
            let sign = if (order - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binomial(order, k)
        })
        .collect()
}

impl ThresholdTheory {
    /// FSTD: `B y_(m)[q]` at the fixed sample.
    pub fn fstd(cfg: &DetectorConfig, memory: usize) -> Result<Self> {
        check_memory(cfg, memory)?;
        if cfg.molecules == 0.0 {
            return Ok(Self::degenerate());
        }
        let FstdSample { index, sign } = fstd_select_sample(&cfg.channel, cfg.molecules, cfg.order)?;
        let b = f64::from(sign);
        let row = derivative_row(cfg.order);
        let intended: Vec<f64> = cfg.channel.symbol_taps(0).iter().map(|t| cfg.molecules * t).collect();
        let moments = |mean: &[f64], extra: &[f64]| {
            let mut mu = 0.0;
            let mut var = 0.0;
            for (k, c) in row.iter().enumerate() {
                let v = mean[index + k] + extra[index + k];
                mu += c * v;
                var += c * c * v;
            }
            StatisticMoments {
                mean: b * mu,
                std_dev: var.max(0.0).sqrt(),
            }
        };
        let zeros = vec![0.0; intended.len()];
        let enumerator = InterferenceEnumerator::new(&cfg.channel, cfg.molecules, cfg.noise_rate, memory - 1);
        let pairs = enumerator
            .fold_chunks(Vec::new, |acc: &mut Vec<ConditionalPair>, _, mean| {
                acc.push(ConditionalPair {
                    zero: moments(mean, &zeros),
                    one: moments(mean, &intended),
                });
            })
            .into_iter()
            .flatten()
            .collect();
        Ok(Self {
            pairs,
            degenerate: false,
        })
    }

    /// MaTD: maximum of the `N - m` causal samples via the Clark recursion.
    pub fn matd(cfg: &DetectorConfig, memory: usize) -> Result<Self> {
        check_memory(cfg, memory)?;
        if cfg.molecules == 0.0 {
            return Ok(Self::degenerate());
        }
        let n = cfg.samples_per_symbol();
        check_order(cfg.order, n)?;
        let keep = n - cfg.order;
        let d = derivative_matrix(n, cfg.order).rows(0, keep).into_owned();
        let intended: Vec<f64> = cfg.channel.symbol_taps(0).iter().map(|t| cfg.molecules * t).collect();
        let stats = |mean: &[f64], extra: &[f64]| -> Result<StatisticMoments> {
            let raw: Vec<f64> = mean.iter().zip(extra).map(|(a, b)| a + b).collect();
            let mu: Vec<f64> = (0..keep).map(|i| (0..n).map(|j| d[(i, j)] * raw[j]).sum()).collect();
            let cov = DMatrix::from_fn(keep, keep, |i, j| (0..n).map(|k| d[(i, k)] * d[(j, k)] * raw[k]).sum());
            let r = clark_max_stats(&mu, &cov)?;
            Ok(StatisticMoments {
                mean: r.mean,
                std_dev: r.std_dev(),
            })
        };
        let zeros = vec![0.0; n];
        let enumerator = InterferenceEnumerator::new(&cfg.channel, cfg.molecules, cfg.noise_rate, memory - 1);
        let pairs = enumerator
            .fold_chunks(Vec::new, |acc: &mut Vec<Result<ConditionalPair>>, _, mean| {
                acc.push(stats(mean, &zeros).and_then(|zero| {
                    Ok(ConditionalPair {
                        zero,
                        one: stats(mean, &intended)?,
                    })
                }));
            })
            .into_iter()
            .flatten()
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            pairs,
            degenerate: false,
        })
    }

    fn degenerate() -> Self {
        Self {
            pairs: Vec::new(),
            degenerate: true,
        }
    }

    pub fn conditionals(&self) -> &[ConditionalPair] {
        &self.pairs
    }

    /// Averaged error probability at `threshold`.
    pub fn error_probability(&self, threshold: f64) -> f64 {
        if self.degenerate {
            return 0.5;
        }
        let parts: Vec<CompensatedSum> = self
            .pairs
            .par_chunks(4096)
            .map(|chunk| chunk.iter().map(|p| p.error_probability(threshold)).collect())
            .collect();
        let mut total = CompensatedSum::new();
        for p in parts {
            total.add(p.value());
        }
        (total.value() / self.pairs.len() as f64).clamp(0.0, 1.0)
    }

    /// `[min mean - 4 sd_max, max mean + 4 sd_max]` over all conditionals and hypotheses.
    pub fn search_interval(&self) -> (f64, f64) {
        if self.degenerate {
            return (0.0, 0.0);
        }
        let all = self.pairs.iter().flat_map(|p| [p.zero, p.one]);
        let (lo, hi, sd) = all.fold((f64::INFINITY, f64::NEG_INFINITY, 0.0f64), |(lo, hi, sd), s| {
            (lo.min(s.mean), hi.max(s.mean), sd.max(s.std_dev))
        });
        (lo - 4.0 * sd, hi + 4.0 * sd)
    }
}

/// Theoretical FSTD bit-error probability at `cfg.threshold` for channel memory `memory`.
pub fn fstd_theoretical_ber(cfg: &DetectorConfig, memory: usize) -> Result<f64> {
    Ok(ThresholdTheory::fstd(cfg, memory)?.error_probability(cfg.threshold))
}

/// Theoretical MaTD bit-error probability (Clark approximation of the maximum).
pub fn matd_theoretical_ber(cfg: &DetectorConfig, memory: usize) -> Result<f64> {
    Ok(ThresholdTheory::matd(cfg, memory)?.error_probability(cfg.threshold))
}
