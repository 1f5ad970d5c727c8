//! Banded MLSD: Viterbi search over `2^(L'-1)` states of recent decisions.

use crate::derivative::apply_derivative;
use crate::error::{Error, Result};
use crate::signal::BitSequence;

use super::window::WindowModel;
use super::{symbol_count, symbol_samples, Detector, DetectorConfig, DetectorKind};

#[derive(Debug, Clone)]
pub struct BandedMlsd {
    model: WindowModel,
    samples_per_symbol: usize,
    order: usize,
    traceback: usize,
}

impl BandedMlsd {
    pub fn new(cfg: &DetectorConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            model: WindowModel::new(cfg, cfg.window, cfg.tail)?,
            samples_per_symbol: cfg.samples_per_symbol(),
            order: cfg.order,
            traceback: 5 * cfg.window,
        })
    }

    /// Decision delay in symbols.
    pub fn traceback_depth(&self) -> usize {
        self.traceback
    }

    pub fn with_traceback_depth(mut self, depth: usize) -> Self {
        self.traceback = depth.max(1);
        self
    }

    pub fn window_model(&self) -> &WindowModel {
        &self.model
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

impl Detector for BandedMlsd {
    fn kind(&self) -> DetectorKind {
        DetectorKind::BandedMlsd
    }

    fn detect(&self, y: &[f64]) -> Result<BitSequence> {
        let n = self.samples_per_symbol;
        let symbols = symbol_count(y.len(), n)?;
        let y_m = apply_derivative(y, self.order);
        let width = self.model.width();
        let states = 1usize << (width - 1);
        let state_mask = states - 1;

        // Silent past: only the all-zero history is reachable at the start.
        let mut metric = vec![f64::INFINITY; states];
        metric[0] = 0.0;
        let mut next = vec![f64::INFINITY; states];
        let mut branch = vec![0.0; 1 << width];
        // survivors[t][s] = (predecessor << 1) | bit for state s after symbol t.
        let mut survivors: Vec<Vec<u32>> = Vec::with_capacity(symbols);
        let mut decided = vec![false; symbols];

        // Bit decided for symbol `from_step - steps` on the path ending in `state`.
        let trace = |survivors: &[Vec<u32>], from_step: usize, state: usize, steps: usize| -> bool {
            let mut s = state;
            let mut t = from_step;
            for _ in 0..steps {
                s = (survivors[t][s] >> 1) as usize;
                t -= 1;
            }
            survivors[t][s] & 1 == 1
        };

        for t in 0..symbols {
            let samples = symbol_samples(&y_m, t, n, self.order);
            self.model.costs(t, samples, &mut branch)?;
            next.iter_mut().for_each(|v| *v = f64::INFINITY);
            let mut pred = vec![0u32; states];
            for (prev, &base) in metric.iter().enumerate() {
                if !base.is_finite() {
                    continue;
                }
                for bit in 0..2usize {
                    let window = (prev << 1) | bit;
                    let to = window & state_mask;
                    let cand = base + branch[window];
                    if cand < next[to] {
                        next[to] = cand;
                        pred[to] = ((prev << 1) | bit) as u32;
                    }
                }
            }
            if next.iter().all(|v| !v.is_finite()) {
                return Err(Error::Numerical(format!("all Viterbi paths diverged at symbol {t}")));
            }
            let floor = next.iter().copied().fold(f64::INFINITY, f64::min);
            for v in next.iter_mut() {
                *v -= floor;
            }
            std::mem::swap(&mut metric, &mut next);
            survivors.push(pred);

            if t >= self.traceback {
                let best = argmin(&metric);
                decided[t - self.traceback] = trace(&survivors, t, best, self.traceback);
            }
        }

        // Flush: full traceback from the best final state.
        if symbols > 0 {
            let first_pending = symbols.saturating_sub(self.traceback);
            let mut s = argmin(&metric);
            for t in (first_pending..symbols).rev() {
                decided[t] = survivors[t][s] & 1 == 1;
                s = (survivors[t][s] >> 1) as usize;
            }
        }
        Ok(BitSequence::new(decided))
    }
}
