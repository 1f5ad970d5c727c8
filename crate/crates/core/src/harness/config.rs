//! JSON experiment configuration.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::channel::{channel_vector, grid_from_rate, ChannelVector, Topology};
use crate::detectors::{DetectorKind, TailModel};
use crate::error::{Error, Result};
use crate::signal::ArrivalModel;

pub const SCHEMA_VERSION: u32 = 1;

/// Molecules-per-bit grid: explicit values or log-spaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MoleculeGrid {
    Values(Vec<f64>),
    LogSpaced {
        log10_start: f64,
        log10_stop: f64,
        points: usize,
    },
}

impl MoleculeGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            MoleculeGrid::Values(v) => v.clone(),
            MoleculeGrid::LogSpaced {
                log10_start,
                log10_stop,
                points,
            } => match *points {
                0 => Vec::new(),
                1 => vec![10f64.powf(*log10_start)],
                p => (0..p)
                    .map(|k| 10f64.powf(log10_start + (log10_stop - log10_start) * k as f64 / (p - 1) as f64))
                    .collect(),
            },
        }
    }
}

/// How thresholds of FSTD / MaTD / FTD are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaPolicy {
    Fixed(f64),
    /// Minimize the closed-form BER; detectors without one fall back to the empirical search.
    OptimizeTheory,
    /// Minimize BER measured on an independent calibration run.
    OptimizeEmpirical,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}
fn default_block() -> usize {
    1000
}
fn default_target_errors() -> u64 {
    100
}
fn default_points() -> usize {
    201
}
fn default_refinements() -> usize {
    2
}
fn default_gamma() -> GammaPolicy {
    GammaPolicy::OptimizeTheory
}

/// A full experiment: link, receiver choices and Monte Carlo budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub topology: Topology,
    /// Symbol duration over channel peak time.
    pub rate_ratio: f64,
    pub samples_per_symbol: usize,
    /// Channel memory `L` in symbols.
    pub memory: usize,
    /// Receiver memory `L'` for banded MLSD, MLDA and SINR.
    pub window: usize,
    /// Extra receiver memories for window sweeps.
    #[serde(default)]
    pub windows: Vec<usize>,
    pub orders: Vec<usize>,
    pub molecules: MoleculeGrid,
    pub snr_db: f64,
    pub detectors: Vec<DetectorKind>,
    pub bit_budget: u64,
    #[serde(default = "default_target_errors")]
    pub target_errors: u64,
    #[serde(default = "default_block")]
    pub block_symbols: usize,
    /// Leading symbols of each block excluded from error counts; defaults to `memory`.
    #[serde(default)]
    pub warmup_symbols: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub arrival_model: ArrivalModel,
    #[serde(default = "default_gamma")]
    pub gamma_policy: GammaPolicy,
    #[serde(default = "default_points")]
    pub threshold_points: usize,
    #[serde(default = "default_refinements")]
    pub threshold_refinements: usize,
    /// Bits in the calibration run of the empirical threshold search; defaults to the bit budget.
    #[serde(default)]
    pub calibration_bits: Option<u64>,
    #[serde(default)]
    pub tail_model: TailModel,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.topology.validate()?;
        if self.bit_budget < 10_000 {
            return Err(Error::Config(format!(
                "bit budget must be at least 1e4, got {}",
                self.bit_budget
            )));
        }
        let grid = self.molecules.values();
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("molecule grid must be strictly ascending".into()));
        }
        if grid.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::Config("molecule counts must be finite and >= 0".into()));
        }
        if let Some(bad) = self.orders.iter().find(|&&m| m >= self.samples_per_symbol) {
            return Err(Error::Config(format!(
                "derivative order {bad} must be below N = {}",
                self.samples_per_symbol
            )));
        }
        if self.memory == 0 || self.samples_per_symbol == 0 {
            return Err(Error::Config("memory and samples per symbol must be positive".into()));
        }
        for &w in std::iter::once(&self.window).chain(&self.windows) {
            if w == 0 || w > self.memory {
                return Err(Error::Config(format!(
                    "receiver memory {w} must be in 1..={}",
                    self.memory
                )));
            }
        }
        if self.block_symbols <= self.warmup() {
            return Err(Error::Config(format!(
                "block of {} symbols leaves nothing after {} warm-up symbols",
                self.block_symbols,
                self.warmup()
            )));
        }
        if self.threshold_points < 2 {
            return Err(Error::Config("threshold_points must be at least 2".into()));
        }
        if self.target_errors == 0 {
            return Err(Error::Config("target_errors must be positive".into()));
        }
        if let GammaPolicy::Fixed(g) = self.gamma_policy {
            if !g.is_finite() {
                return Err(Error::Config("fixed threshold must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn warmup(&self) -> usize {
        self.warmup_symbols.unwrap_or(self.memory)
    }

    pub fn channel(&self) -> Result<ChannelVector> {
        let grid = grid_from_rate(&self.topology, self.rate_ratio, self.samples_per_symbol, self.memory)?;
        channel_vector(&self.topology, &grid)
    }

    pub fn molecule_values(&self) -> Vec<f64> {
        self.molecules.values()
    }

    /// Receiver memories to sweep: `windows` if given, else just `window`.
    pub fn window_list(&self) -> Vec<usize> {
        if self.windows.is_empty() {
            vec![self.window]
        } else {
            self.windows.clone()
        }
    }
}
