//! Block Monte Carlo with per-block random streams and order-stable reduction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::EmpiricalBer;
use crate::channel::ChannelVector;
use crate::detectors::{Detector, ThresholdStatistic};
use crate::error::{Error, Result};
use crate::signal::{modulate_bcsk, received_mean, sample_count, ArrivalModel, BitSequence};

/// Environment variable capping the worker count of the CLI.
pub const WORKERS_ENV: &str = "MCDIFF_WORKERS";

const CALIBRATION_SALT: u64 = 0x5bd1_e995_7f4a_7c15;

/// One operating point of the physical link.
#[derive(Debug, Clone)]
pub struct LinkPoint {
    pub channel: ChannelVector,
    pub molecules: f64,
    pub noise_rate: f64,
    pub arrival: ArrivalModel,
}

/// Block layout, stopping rule and seeding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub block_symbols: usize,
    /// Leading symbols per block whose decisions are not counted.
    pub warmup: usize,
    pub bit_budget: u64,
    pub target_errors: u64,
    pub seed: u64,
    /// Replace arrivals by their expected values.
    pub noiseless: bool,
}

impl MonteCarlo {
    pub fn counted_bits(&self) -> usize {
        self.block_symbols.saturating_sub(self.warmup)
    }

    fn check(&self) -> Result<()> {
        if self.counted_bits() == 0 {
            return Err(Error::Config("blocks have no counted symbols after warm-up".into()));
        }
        Ok(())
    }
}

/// Bits and errors accumulated by one detector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub bits: u64,
    pub errors: u64,
}

impl Tally {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream key of a molecule count; all detectors at one `M` share it.
pub fn point_key(molecules: f64) -> u64 {
    splitmix(molecules.to_bits())
}

pub(crate) fn calibration_key(key: u64) -> u64 {
    splitmix(key ^ CALIBRATION_SALT)
}

fn block_rng(seed: u64, key: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(key)));
    rng.set_stream(block);
    rng
}

/// Transmitted bits and received samples of one block.
pub fn draw_block(link: &LinkPoint, mc: &MonteCarlo, key: u64, block: u64) -> Result<(BitSequence, Vec<f64>)> {
    let mut rng = block_rng(mc.seed, key, block);
    let bits = BitSequence::random(mc.block_symbols, &mut rng);
    let x = modulate_bcsk(&bits, link.molecules, link.channel.samples_per_symbol())?;
    let rates = received_mean(&x, &link.channel, link.noise_rate)?;
    let y = if mc.noiseless {
        rates
    } else {
        rates
            .into_iter()
            .map(|r| sample_count(r, link.arrival, &mut rng))
            .collect()
    };
    Ok((bits, y))
}

fn batch_size() -> usize {
    2 * rayon::current_num_threads().max(1)
}

/// Runs blocks `0, 1, ...` for every detector until each reaches the error
/// target or the bit budget. Blocks are computed in parallel batches and
/// folded in block order, so the result does not depend on the worker count.
pub fn count_errors(detectors: &[&dyn Detector], link: &LinkPoint, mc: &MonteCarlo, key: u64) -> Result<Vec<Tally>> {
    mc.check()?;
    let counted = mc.counted_bits();
    let mut tallies = vec![Tally::default(); detectors.len()];
    let mut active: Vec<bool> = vec![true; detectors.len()];
    let mut next_block = 0u64;
    while active.iter().any(|a| *a) {
        let batch = batch_size() as u64;
        let results: Vec<Result<Vec<Option<u64>>>> = (next_block..next_block + batch)
            .into_par_iter()
            .map(|block| {
                let (bits, y) = draw_block(link, mc, key, block)?;
                detectors
                    .iter()
                    .zip(&active)
                    .map(|(d, on)| {
                        if !on {
                            return Ok(None);
                        }
                        let decided = d.detect(&y)?;
                        let errors = decided.bits()[mc.warmup..]
                            .iter()
                            .zip(&bits.bits()[mc.warmup..])
                            .filter(|(a, b)| a != b)
                            .count();
                        Ok(Some(errors as u64))
                    })
                    .collect()
            })
            .collect();
        next_block += batch;
        for block in results {
            let block = block?;
            for (k, errors) in block.into_iter().enumerate() {
                let (Some(errors), true) = (errors, active[k]) else {
                    continue;
                };
                tallies[k].bits += counted as u64;
                tallies[k].errors += errors;
                if tallies[k].errors >= mc.target_errors || tallies[k].bits >= mc.bit_budget {
                    active[k] = false;
                }
            }
        }
    }
    Ok(tallies)
}

/// Statistics of one source split into (bit 0, bit 1).
type SplitStats = (Vec<f64>, Vec<f64>);

/// Records decision statistics split by the transmitted bit, over at least
/// `bits` counted symbols, for empirical threshold optimization.
pub fn collect_statistics(
    sources: &[&dyn ThresholdStatistic],
    link: &LinkPoint,
    mc: &MonteCarlo,
    key: u64,
    bits: u64,
) -> Result<Vec<EmpiricalBer>> {
    mc.check()?;
    let counted = mc.counted_bits() as u64;
    let blocks = bits.div_ceil(counted).max(1);
    let per_block: Vec<Result<Vec<SplitStats>>> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let (sent, y) = draw_block(link, mc, key, block)?;
            sources
                .iter()
                .map(|s| {
                    let stats = s.statistics(&y)?;
                    let mut split = (Vec::new(), Vec::new());
                    for (v, b) in stats[mc.warmup..].iter().zip(&sent.bits()[mc.warmup..]) {
                        if *b {
                            split.1.push(*v);
                        } else {
                            split.0.push(*v);
                        }
                    }
                    Ok(split)
                })
                .collect()
        })
        .collect();
    let mut merged = vec![(Vec::new(), Vec::new()); sources.len()];
    for block in per_block {
        for (acc, (zeros, ones)) in merged.iter_mut().zip(block?) {
            acc.0.extend(zeros);
            acc.1.extend(ones);
        }
    }
    merged.into_iter().map(|(z, o)| EmpiricalBer::new(z, o)).collect()
}
