//! Memoryless threshold detectors: fixed-sample (FSTD), max-sample (MaTD)
//! and total-count (FTD).

use serde::{Deserialize, Serialize};

use crate::channel::ChannelVector;
use crate::derivative::{apply_derivative, intended_mean};
use crate::error::{Error, Result};
use crate::signal::BitSequence;

use super::{symbol_count, symbol_samples, Detector, DetectorConfig, DetectorKind};

/// Sample FSTD compares against the threshold, and the sign applied to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FstdSample {
    /// Zero-based index into the `N - m` causal post-derivative samples.
    pub index: usize,
    /// `+1` or `-1`: sign of the expected post-derivative signal at `index`.
    pub sign: i8,
}

impl FstdSample {
    pub fn sign_f64(self) -> f64 {
        f64::from(self.sign)
    }
}

/// Picks the causal sample with the largest absolute expected signal.
/// Ties go to the earlier sample; a zero-valued winner is an error.
pub fn fstd_select_sample(h: &ChannelVector, molecules: f64, order: usize) -> Result<FstdSample> {
    let mu = intended_mean(h, molecules, order)?;
    let mut best = 0;
    for (q, v) in mu.iter().enumerate() {
        if v.abs() > mu[best].abs() {
            best = q;
        }
    }
    if mu[best] == 0.0 || !mu[best].is_finite() {
        return Err(Error::NoSignal);
    }
    Ok(FstdSample {
        index: best,
        sign: if mu[best] >= 0.0 { 1 } else { -1 },
    })
}

/// Per-symbol decision statistics compared against the threshold.
pub trait ThresholdStatistic: Send + Sync {
    fn statistics(&self, y: &[f64]) -> Result<Vec<f64>>;
}

fn decide(stats: Vec<f64>, threshold: f64) -> BitSequence {
    BitSequence::new(stats.into_iter().map(|v| v > threshold).collect())
}

/// FSTD: `B * y_(m)[(i-1)N + q] > gamma`.
#[derive(Debug, Clone)]
pub struct FixedSample {
    sample: FstdSample,
    samples_per_symbol: usize,
    order: usize,
    threshold: f64,
}

impl FixedSample {
    pub fn new(cfg: &DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            sample: fstd_select_sample(&cfg.channel, cfg.molecules, cfg.order)?,
            samples_per_symbol: cfg.samples_per_symbol(),
            order: cfg.order,
            threshold: cfg.threshold,
        })
    }

    /// Builds with an explicit sample choice instead of the channel-derived one.
    pub fn with_sample(sample: FstdSample, samples_per_symbol: usize, order: usize, threshold: f64) -> Self {
        Self {
            sample,
            samples_per_symbol,
            order,
            threshold,
        }
    }

    pub fn sample(&self) -> FstdSample {
        self.sample
    }
}

impl ThresholdStatistic for FixedSample {
    fn statistics(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.samples_per_symbol;
        let symbols = symbol_count(y.len(), n)?;
        let y_m = apply_derivative(y, self.order);
        let b = self.sample.sign_f64();
        Ok((0..symbols).map(|i| b * y_m[i * n + self.sample.index]).collect())
    }
}

impl Detector for FixedSample {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Fstd
    }

    fn detect(&self, y: &[f64]) -> Result<BitSequence> {
        Ok(decide(self.statistics(y)?, self.threshold))
    }
}

/// MaTD: `max` of the `N - m` causal post-derivative samples `> gamma`.
#[derive(Debug, Clone)]
pub struct MaxSample {
    samples_per_symbol: usize,
    order: usize,
    threshold: f64,
}

impl MaxSample {
    pub fn new(cfg: &DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            samples_per_symbol: cfg.samples_per_symbol(),
            order: cfg.order,
            threshold: cfg.threshold,
        })
    }
}

impl ThresholdStatistic for MaxSample {
    fn statistics(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.samples_per_symbol;
        let symbols = symbol_count(y.len(), n)?;
        let y_m = apply_derivative(y, self.order);
        Ok((0..symbols)
            .map(|i| {
                symbol_samples(&y_m, i, n, self.order)
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect())
    }
}

impl Detector for MaxSample {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Matd
    }

    fn detect(&self, y: &[f64]) -> Result<BitSequence> {
        Ok(decide(self.statistics(y)?, self.threshold))
    }
}

/// FTD: total raw count over the symbol `> gamma`. Ignores the derivative order.
#[derive(Debug, Clone)]
pub struct FixedTotal {
    samples_per_symbol: usize,
    threshold: f64,
}

impl FixedTotal {
    pub fn new(cfg: &DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            samples_per_symbol: cfg.samples_per_symbol(),
            threshold: cfg.threshold,
        })
    }
}

impl ThresholdStatistic for FixedTotal {
    fn statistics(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.samples_per_symbol;
        symbol_count(y.len(), n)?;
        Ok(y.chunks_exact(n).map(|c| c.iter().sum()).collect())
    }
}

impl Detector for FixedTotal {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Ftd
    }

    fn detect(&self, y: &[f64]) -> Result<BitSequence> {
        Ok(decide(self.statistics(y)?, self.threshold))
    }
}
