//! Receiver decision rules operating on raw received samples.
//!
//! Every detector takes the received block `y` (one value per slot, `S * N`
//! values) and applies `D^m` itself, so detectors with different orders can
//! share one simulated block.

mod mlda;
mod mlsd;
mod threshold;
mod viterbi;
mod window;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::channel::ChannelVector;
use crate::derivative::check_order;
use crate::error::{Error, Result};
use crate::signal::BitSequence;

pub use mlda::Mlda;
pub use mlsd::{mlsd_detect, Mlsd, MlsdObservation};
pub use threshold::{fstd_select_sample, FixedSample, FixedTotal, FstdSample, MaxSample, ThresholdStatistic};
pub use viterbi::BandedMlsd;
pub use window::{TailModel, WindowModel};

/// Which decision rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Mlsd,
    BandedMlsd,
    Mlda,
    Matd,
    Fstd,
    Ftd,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::Mlsd,
        DetectorKind::BandedMlsd,
        DetectorKind::Mlda,
        DetectorKind::Matd,
        DetectorKind::Fstd,
        DetectorKind::Ftd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorKind::Mlsd => "mlsd",
            DetectorKind::BandedMlsd => "banded-mlsd",
            DetectorKind::Mlda => "mlda",
            DetectorKind::Matd => "matd",
            DetectorKind::Fstd => "fstd",
            DetectorKind::Ftd => "ftd",
        }
    }

    /// Threshold detectors need a `gamma`; the others ignore it.
    pub fn uses_threshold(self) -> bool {
        matches!(self, DetectorKind::Matd | DetectorKind::Fstd | DetectorKind::Ftd)
    }

    /// Detectors that use a receiver memory window `L'`.
    pub fn uses_window(self) -> bool {
        matches!(self, DetectorKind::BandedMlsd | DetectorKind::Mlda)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown detector {s:?}")))
    }
}

/// Everything a detector needs to know about the link and itself.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    /// Derivative order `m`.
    pub order: usize,
    /// Receiver memory `L'` in symbols.
    pub window: usize,
    /// Decision threshold `gamma` in post-derivative count units.
    pub threshold: f64,
    /// Channel taps; its memory is the `L` the receiver assumes.
    pub channel: ChannelVector,
    /// External noise rate per slot.
    pub noise_rate: f64,
    /// Molecules per bit-1 emission.
    pub molecules: f64,
    /// How banded MLSD accounts for symbols older than its window.
    pub tail: TailModel,
}

impl DetectorConfig {
    pub fn new(kind: DetectorKind, channel: ChannelVector, molecules: f64, noise_rate: f64) -> Self {
        Self {
            kind,
            order: 0,
            window: 1,
            threshold: 0.0,
            channel,
            noise_rate,
            molecules,
            tail: TailModel::default(),
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = tail;
        self
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.channel.samples_per_symbol()
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.order, self.samples_per_symbol())?;
        if !(self.molecules >= 0.0 && self.molecules.is_finite()) {
            return Err(Error::Config(format!(
                "molecule count must be >= 0, got {}",
                self.molecules
            )));
        }
        if !(self.noise_rate >= 0.0 && self.noise_rate.is_finite()) {
            return Err(Error::Config(format!(
                "noise rate must be >= 0, got {}",
                self.noise_rate
            )));
        }
        if self.kind.uses_threshold() && !self.threshold.is_finite() {
            return Err(Error::Config("threshold must be finite".into()));
        }
        if self.kind.uses_window() {
            if self.window == 0 {
                return Err(Error::Config("receiver memory L' must be at least 1".into()));
            }
            if self.window > self.channel.memory() {
                return Err(Error::Config(format!(
                    "receiver memory L'={} exceeds channel memory L={}",
                    self.window,
                    self.channel.memory()
                )));
            }
            if self.window > 20 {
                return Err(Error::Config(format!(
                    "receiver memory L'={} is not enumerable",
                    self.window
                )));
            }
        }
        Ok(())
    }
}

/// A decision rule ready to run on received blocks.
pub trait Detector: Send + Sync {
    fn kind(&self) -> DetectorKind;

    /// Decides every symbol of `y`; `y.len()` must be a multiple of `N`.
    fn detect(&self, y: &[f64]) -> Result<BitSequence>;
}

/// Builds a detector, eagerly computing any cached statistics.
pub fn build_detector(cfg: &DetectorConfig) -> Result<Box<dyn Detector>> {
    cfg.validate()?;
    Ok(match cfg.kind {
        DetectorKind::Mlsd => Box::new(Mlsd::new(cfg, MlsdObservation::FullBlock)?),
        DetectorKind::BandedMlsd => Box::new(BandedMlsd::new(cfg)?),
        DetectorKind::Mlda => Box::new(Mlda::new(cfg)?),
        DetectorKind::Matd => Box::new(MaxSample::new(cfg)?),
        DetectorKind::Fstd => Box::new(FixedSample::new(cfg)?),
        DetectorKind::Ftd => Box::new(FixedTotal::new(cfg)?),
    })
}

pub(crate) fn symbol_count(len: usize, samples_per_symbol: usize) -> Result<usize> {
    if !len.is_multiple_of(samples_per_symbol) {
        return Err(Error::Dimension {
            expected: (len / samples_per_symbol + 1) * samples_per_symbol,
            actual: len,
        });
    }
    Ok(len / samples_per_symbol)
}

/// The `N - m` causal post-derivative samples of symbol `i`.
#[inline]
pub(crate) fn symbol_samples(y_m: &[f64], index: usize, samples_per_symbol: usize, order: usize) -> &[f64] {
    let start = index * samples_per_symbol;
    &y_m[start..start + samples_per_symbol - order]
}
