use serde::{Deserialize, Serialize};
use std::borrow::Cow;

use crate::conditional::{expected_tail, post_derivative_stats, window_mean};
use crate::error::Result;
use crate::linalg::GaussianScorer;

use super::DetectorConfig;

/// Treatment of symbols older than the receiver window but within channel memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailModel {
    /// Older symbols contribute their expected emission `M/2` to the mean and variance.
    #[default]
    Expected,
    /// Older symbols are dropped from the model.
    Ignore,
}

/// Above this many cached scorers only the steady-state set is kept.
const EAGER_CACHE_LIMIT: usize = 1 << 15;

/// Post-derivative likelihoods of one symbol's samples for every `L'`-bit window.
///
/// Window index bit `j` is the bit `j` symbols before the described one.
#[derive(Debug, Clone)]
pub struct WindowModel {
    width: usize,
    order: usize,
    max_tail: usize,
    tail: TailModel,
    cfg_channel: crate::channel::ChannelVector,
    molecules: f64,
    noise_rate: f64,
    /// `cache[t][idx]` for tail counts `t`, or only the steady state when `early` is false.
    cache: Vec<Vec<GaussianScorer>>,
    early_cached: bool,
}

impl WindowModel {
    pub fn new(cfg: &DetectorConfig, width: usize, tail: TailModel) -> Result<Self> {
        let max_tail = match tail {
            TailModel::Expected => cfg.channel.memory().saturating_sub(width),
            TailModel::Ignore => 0,
        };
        let mut model = Self {
            width,
            order: cfg.order,
            max_tail,
            tail,
            cfg_channel: cfg.channel.clone(),
            molecules: cfg.molecules,
            noise_rate: cfg.noise_rate,
            cache: Vec::new(),
            early_cached: false,
        };
        let windows = 1usize << width;
        model.early_cached = (max_tail + 1) * windows <= EAGER_CACHE_LIMIT;
        let tails: Vec<usize> = if model.early_cached {
            (0..=max_tail).collect()
        } else {
            vec![max_tail]
        };
        model.cache = tails
            .into_iter()
            .map(|t| (0..windows).map(|idx| model.build(t, idx)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(model)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn windows(&self) -> usize {
        1 << self.width
    }

    /// Mean of the described symbol's `N` raw samples for window `idx` with `tail` older symbols.
    pub fn raw_mean(&self, tail: usize, idx: usize) -> Vec<f64> {
        let bits: Vec<bool> = (0..self.width)
            .map(|pos| (idx >> (self.width - 1 - pos)) & 1 == 1)
            .collect();
        let mut mean = window_mean(&bits, &self.cfg_channel, self.molecules, self.noise_rate);
        if tail > 0 {
            let extra = expected_tail(&self.cfg_channel, self.molecules, self.width, tail);
            for (m, e) in mean.iter_mut().zip(extra) {
                *m += e;
            }
        }
        mean
    }

    fn build(&self, tail: usize, idx: usize) -> Result<GaussianScorer> {
        GaussianScorer::new(&post_derivative_stats(&self.raw_mean(tail, idx), self.order)?)
    }

    /// Number of older-than-window symbols present before symbol `index` of a block.
    pub fn tail_count(&self, index: usize) -> usize {
        match self.tail {
            TailModel::Ignore => 0,
            TailModel::Expected => (index + 1).saturating_sub(self.width).min(self.max_tail),
        }
    }

    pub fn scorer(&self, index: usize, idx: usize) -> Result<Cow<'_, GaussianScorer>> {
        let t = self.tail_count(index);
        if self.early_cached {
            Ok(Cow::Borrowed(&self.cache[t][idx]))
        } else if t == self.max_tail {
            Ok(Cow::Borrowed(&self.cache[0][idx]))
        } else {
            self.build(t, idx).map(Cow::Owned)
        }
    }

    /// Costs `ln|Sigma| + quad` of `samples` for every window, written into `out`.
    pub fn costs(&self, index: usize, samples: &[f64], out: &mut [f64]) -> Result<()> {
        for (idx, slot) in out.iter_mut().enumerate().take(self.windows()) {
            *slot = self.scorer(index, idx)?.cost(samples);
        }
        Ok(())
    }
}
