//! Memory-limited decision-aided detection: symbol-by-symbol ML with the
//! interference mean rebuilt from the last `L' - 1` decisions and the
//! expected emission `M/2` for older symbols.

use crate::derivative::apply_derivative;
use crate::error::Result;
use crate::signal::BitSequence;

use super::window::{TailModel, WindowModel};
use super::{symbol_count, symbol_samples, Detector, DetectorConfig, DetectorKind};

#[derive(Debug, Clone)]
pub struct Mlda {
    model: WindowModel,
    samples_per_symbol: usize,
    order: usize,
}

impl Mlda {
    pub fn new(cfg: &DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            model: WindowModel::new(cfg, cfg.window, TailModel::Expected)?,
            samples_per_symbol: cfg.samples_per_symbol(),
            order: cfg.order,
        })
    }

    /// Hypothesis means (`bit-0`, `bit-1`) for symbol `index` given the feedback window.
    pub fn hypothesis_means(&self, index: usize, history: usize) -> (Vec<f64>, Vec<f64>) {
        let tail = self.model.tail_count(index);
        let base = history << 1;
        (self.model.raw_mean(tail, base), self.model.raw_mean(tail, base | 1))
    }
}

impl Detector for Mlda {
    fn kind(&self) -> DetectorKind {
        DetectorKind::Mlda
    }

    fn detect(&self, y: &[f64]) -> Result<BitSequence> {
        let n = self.samples_per_symbol;
        let symbols = symbol_count(y.len(), n)?;
        let y_m = apply_derivative(y, self.order);
        let history_mask = (1usize << (self.model.width() - 1)) - 1;
        let mut history = 0usize;
        let mut decided = Vec::with_capacity(symbols);
        for i in 0..symbols {
            let samples = symbol_samples(&y_m, i, n, self.order);
            let base = (history << 1) & ((1 << self.model.width()) - 1);
            let cost0 = self.model.scorer(i, base)?.cost(samples);
            let cost1 = self.model.scorer(i, base | 1)?.cost(samples);
            // Log-likelihood ratio is (cost0 - cost1) / 2; ties go to 0.
            let bit = cost0 > cost1;
            decided.push(bit);
            history = ((history << 1) | bit as usize) & history_mask;
        }
        Ok(BitSequence::new(decided))
    }
}
