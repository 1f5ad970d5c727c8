//! Streaming enumeration of interference strings.
//!
//! Strings are visited in Gray-code order so each step adds or removes a
//! single symbol's taps. The index range is cut into fixed-size chunks that
//! are evaluated in parallel and returned in chunk order, so reductions are
//! independent of the worker count.

use rayon::prelude::*;

use crate::channel::ChannelVector;
use crate::conditional::add_lag;

const CHUNK: usize = 1 << 12;

/// Interference means (noise included) of one symbol's `N` samples.
#[derive(Debug, Clone)]
pub struct InterferenceEnumerator<'a> {
    channel: &'a ChannelVector,
    molecules: f64,
    noise_rate: f64,
    /// Number of interfering symbols, at lags `1..=lags`.
    lags: usize,
}

impl<'a> InterferenceEnumerator<'a> {
    pub fn new(channel: &'a ChannelVector, molecules: f64, noise_rate: f64, lags: usize) -> Self {
        Self {
            channel,
            molecules,
            noise_rate,
            lags,
        }
    }

    pub fn count(&self) -> usize {
        1usize << self.lags
    }

    fn mean_for(&self, word: usize) -> Vec<f64> {
        let mut mean = vec![self.noise_rate; self.channel.samples_per_symbol()];
        for bit in 0..self.lags {
            if (word >> bit) & 1 == 1 {
                add_lag(&mut mean, self.channel, bit + 1, self.molecules);
            }
        }
        mean
    }

    /// Folds `step(acc, word, mean)` over every string, one accumulator per chunk.
    ///
    /// Bit `b` of `word` set means the symbol at lag `b + 1` was a one.
    pub fn fold_chunks<A, I, F>(&self, init: I, step: F) -> Vec<A>
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, usize, &[f64]) + Sync,
    {
        let total = self.count();
        let chunks = total.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(total);
                let mut acc = init();
                let mut word = start ^ (start >> 1);
                let mut mean = self.mean_for(word);
                step(&mut acc, word, &mean);
                for k in start + 1..end {
                    let bit = k.trailing_zeros() as usize;
                    word ^= 1 << bit;
                    let sign = if (word >> bit) & 1 == 1 { 1.0 } else { -1.0 };
                    add_lag(&mut mean, self.channel, bit + 1, sign * self.molecules);
                    step(&mut acc, word, &mean);
                }
                acc
            })
            .collect()
    }
}
