//! Exhaustive maximum-likelihood sequence detection (test-scale blocks only).

use crate::derivative::{apply_derivative, transform_stats};
use crate::error::{Error, Result};
use crate::linalg::GaussianScorer;
use crate::signal::{modulate_bcsk, received_stats, BitSequence};

use super::window::{TailModel, WindowModel};
use super::{symbol_count, symbol_samples, Detector, DetectorConfig, DetectorKind};

/// Largest block length the enumeration accepts.
pub const MAX_ENUMERATED_SYMBOLS: usize = 20;

/// What the exhaustive search scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlsdObservation {
    /// The whole `S N` post-derivative block with its full covariance.
    FullBlock,
    /// Each symbol's `N - m` causal samples, scored independently given the
    /// `L` bits that reach it. This is the observation banded MLSD uses.
    PerSymbol,
}

#[derive(Debug, Clone)]
pub struct Mlsd {
    cfg: DetectorConfig,
    observation: MlsdObservation,
    per_symbol: Option<WindowModel>,
}

impl Mlsd {
    pub fn new(cfg: &DetectorConfig, observation: MlsdObservation) -> Result<Self> {
        cfg.validate()?;
        let per_symbol = match observation {
            MlsdObservation::FullBlock => None,
            MlsdObservation::PerSymbol => Some(WindowModel::new(cfg, cfg.channel.memory(), TailModel::Ignore)?),
        };
        Ok(Self {
            cfg: cfg.clone(),
            observation,
            per_symbol,
        })
    }

    fn full_block_cost(&self, candidate: &BitSequence, y_m: &[f64]) -> Result<f64> {
        let x = modulate_bcsk(candidate, self.cfg.molecules, self.cfg.samples_per_symbol())?;
        let stats = transform_stats(
            &received_stats(&x, &self.cfg.channel, self.cfg.noise_rate)?,
            self.cfg.order,
        );
        Ok(GaussianScorer::new(&stats)?.cost(y_m))
    }

    fn per_symbol_cost(&self, model: &WindowModel, word: u64, symbols: usize, y_m: &[f64]) -> Result<f64> {
        let n = self.cfg.samples_per_symbol();
        let width = model.width();
        let mut total = 0.0;
        for i in 0..symbols {
            // Bit j of the window index is symbol i - j; word holds symbol 0 as its MSB.
            let mut idx = 0usize;
            for j in 0..width.min(i + 1) {
                let bit = (word >> (symbols - 1 - (i - j))) & 1;
                idx |= (bit as usize) << j;
            }
            total += model.scorer(i, idx)?.cost(symbol_samples(y_m, i, n, self.cfg.order));
        }
        Ok(total)
    }
}

impl Detector for Mlsd {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Mlsd
    }

    fn detect(&self, y: &[f64]) -> Result<BitSequence> {
        let symbols = symbol_count(y.len(), self.cfg.samples_per_symbol())?;
        if symbols > MAX_ENUMERATED_SYMBOLS {
            return Err(Error::Config(format!(
                "exhaustive MLSD limited to {MAX_ENUMERATED_SYMBOLS} symbols, got {symbols}"
            )));
        }
        let y_m = apply_derivative(y, self.cfg.order);
        let mut best: Option<(f64, u64)> = None;
        for word in 0..(1u64 << symbols) {
            let cost = match (&self.per_symbol, self.observation) {
                (Some(model), MlsdObservation::PerSymbol) => self.per_symbol_cost(model, word, symbols, &y_m)?,
                _ => self.full_block_cost(&BitSequence::from_word(word, symbols), &y_m)?,
            };
            // Strict improvement keeps the lexicographically smallest minimizer.
            if best.is_none_or(|(b, _)| cost < b) {
                best = Some((cost, word));
            }
        }
        Ok(best
            .map(|(_, w)| BitSequence::from_word(w, symbols))
            .unwrap_or_default())
    }
}

/// Full-block MLSD of an `S`-symbol block.
pub fn mlsd_detect(y: &[f64], cfg: &DetectorConfig, symbols: usize) -> Result<BitSequence> {
    let expected = symbols * cfg.samples_per_symbol();
    if y.len() != expected {
        return Err(Error::Dimension {
            expected,
            actual: y.len(),
        });
    }
    Mlsd::new(cfg, MlsdObservation::FullBlock)?.detect(y)
}
