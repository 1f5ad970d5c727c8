//! Hit statistics of a point transmitter and an absorbing spherical receiver,
//! and their discretization into per-slot channel coefficients.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::erfc;

/// Geometry and diffusion constant of the link.
///
/// Units follow the usual convention for this setting: distances in µm,
/// diffusion coefficient in µm²/s, times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    /// Transmitter to receiver-center distance.
    pub r0: f64,
    /// Receiver radius.
    pub rr: f64,
    /// Diffusion coefficient.
    pub diffusion: f64,
}

impl Topology {
    pub fn new(r0: f64, rr: f64, diffusion: f64) -> Result<Self> {
        let topo = Self { r0, rr, diffusion };
        topo.validate()?;
        Ok(topo)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rr > 0.0 && self.r0 > self.rr && self.r0.is_finite()) {
            return Err(Error::Config(format!(
                "topology needs r0 > rr > 0, got r0={}, rr={}",
                self.r0, self.rr
            )));
        }
        if !(self.diffusion > 0.0 && self.diffusion.is_finite()) {
            return Err(Error::Config(format!(
                "diffusion coefficient must be positive, got {}",
                self.diffusion
            )));
        }
        Ok(())
    }

    /// Fraction of molecules that are eventually absorbed, `rr / r0`.
    pub fn capture_probability(&self) -> f64 {
        self.rr / self.r0
    }

    fn gap(&self) -> f64 {
        self.r0 - self.rr
    }
}

/// First-arrival density at time `t > 0`.
pub fn hit_density(t: f64, topo: &Topology) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("hit density needs t > 0, got {t}")));
    }
    let d = topo.gap();
    let scale = topo.capture_probability() / (4.0 * PI * topo.diffusion * t).sqrt();
    Ok(scale * (d / t) * (-(d * d) / (4.0 * topo.diffusion * t)).exp())
}

/// Probability that a molecule has been absorbed by time `t >= 0`.
pub fn hit_cdf(t: f64, topo: &Topology) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::Domain(format!("hit cdf needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let arg = topo.gap() / (4.0 * topo.diffusion * t).sqrt();
    Ok(topo.capture_probability() * erfc(arg))
}

/// Time at which the hit density peaks, `(r0 - rr)^2 / (6 D)`.
pub fn peak_time(topo: &Topology) -> f64 {
    topo.gap().powi(2) / (6.0 * topo.diffusion)
}

/// Time slotting of the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotGrid {
    slot_duration: f64,
    samples_per_symbol: usize,
    memory: usize,
}

impl SlotGrid {
    pub fn new(slot_duration: f64, samples_per_symbol: usize, memory: usize) -> Result<Self> {
        if !(slot_duration > 0.0 && slot_duration.is_finite()) {
            return Err(Error::Config(format!(
                "slot duration must be positive, got {slot_duration}"
            )));
        }
        if samples_per_symbol == 0 {
            return Err(Error::Config("need at least one sample per symbol".into()));
        }
        if memory == 0 {
            return Err(Error::Config("channel memory must be at least one symbol".into()));
        }
        Ok(Self {
            slot_duration,
            samples_per_symbol,
            memory,
        })
    }

    /// Slot duration `ts`.
    pub fn slot_duration(&self) -> f64 {
        self.slot_duration
    }

    /// Samples per symbol `N`.
    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    /// Channel memory `L` in symbols.
    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Symbol duration `N * ts`.
    pub fn symbol_duration(&self) -> f64 {
        self.samples_per_symbol as f64 * self.slot_duration
    }

    /// Same slot timing with a different channel memory.
    pub fn with_memory(&self, memory: usize) -> Result<Self> {
        Self::new(self.slot_duration, self.samples_per_symbol, memory)
    }
}

/// Slot grid whose symbol duration is `rate_ratio` channel peak times.
pub fn grid_from_rate(topo: &Topology, rate_ratio: f64, samples_per_symbol: usize, memory: usize) -> Result<SlotGrid> {
    if !(rate_ratio > 0.0 && rate_ratio.is_finite()) {
        return Err(Error::Config(format!(
            "symbol-to-peak-time ratio must be positive, got {rate_ratio}"
        )));
    }
    let symbol_duration = rate_ratio * peak_time(topo);
    SlotGrid::new(symbol_duration / samples_per_symbol as f64, samples_per_symbol, memory)
}

/// Discretized impulse response: `taps[n]` is the probability of a molecule
/// emitted at the start of slot 0 being absorbed during slot `n`
/// (zero-based, so `taps[0]` corresponds to `h[1]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelVector {
    taps: Vec<f64>,
    grid: SlotGrid,
}

impl ChannelVector {
    /// Builds a channel from explicit taps. The length must be `L * N`.
    pub fn from_taps(taps: Vec<f64>, grid: SlotGrid) -> Result<Self> {
        let expected = grid.memory() * grid.samples_per_symbol();
        if taps.len() != expected {
            return Err(Error::Dimension {
                expected,
                actual: taps.len(),
            });
        }
        if let Some(bad) = taps.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Config(format!(
                "channel taps must be finite and >= 0, got {bad}"
            )));
        }
        Ok(Self { taps, grid })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn grid(&self) -> &SlotGrid {
        &self.grid
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.grid.samples_per_symbol()
    }

    pub fn memory(&self) -> usize {
        self.grid.memory()
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Tap at zero-based index `n`, zero beyond the stored memory.
    #[inline]
    pub fn tap(&self, n: usize) -> f64 {
        self.taps.get(n).copied().unwrap_or(0.0)
    }

    /// The `N` taps seen by the symbol `lag` symbols after emission.
    pub fn symbol_taps(&self, lag: usize) -> &[f64] {
        let n = self.samples_per_symbol();
        let start = (lag * n).min(self.taps.len());
        let end = ((lag + 1) * n).min(self.taps.len());
        &self.taps[start..end]
    }

    /// Truncates (or keeps) the channel to `memory` symbols.
    pub fn truncated(&self, memory: usize) -> Result<Self> {
        if memory > self.memory() {
            return Err(Error::Config(format!(
                "cannot extend a channel of memory {} to {memory}",
                self.memory()
            )));
        }
        let grid = self.grid.with_memory(memory)?;
        Ok(Self {
            taps: self.taps[..memory * self.samples_per_symbol()].to_vec(),
            grid,
        })
    }
}

/// Per-slot absorption probabilities over `L * N` slots.
pub fn channel_vector(topo: &Topology, grid: &SlotGrid) -> Result<ChannelVector> {
    topo.validate()?;
    let len = grid.memory() * grid.samples_per_symbol();
    let ts = grid.slot_duration();
    let mut taps = Vec::with_capacity(len);
    let mut prev = 0.0;
    for n in 1..=len {
        let cur = hit_cdf(n as f64 * ts, topo)?;
        taps.push((cur - prev).max(0.0));
        prev = cur;
    }
    ChannelVector::from_taps(taps, *grid)
}
