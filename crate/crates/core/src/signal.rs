//! On-off keying of molecule emissions, the Poisson arrival model and its
//! Gaussian (mean, covariance) description.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelVector;
use crate::error::{Error, Result};

/// Binary symbols of one transmission block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSequence(Vec<bool>);

impl BitSequence {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Builds from 0/1 integers; anything else is rejected.
    pub fn from_binary(values: &[u8]) -> Result<Self> {
        values
            .iter()
            .map(|&v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Config(format!("bit values must be 0 or 1, got {other}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    /// The `len` low bits of `word`, most significant first.
    pub fn from_word(word: u64, len: usize) -> Self {
        Self((0..len).map(|k| (word >> (len - 1 - k)) & 1 == 1).collect())
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.random::<bool>()).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }

    /// Number of positions where the two sequences differ, over their common prefix.
    pub fn hamming_distance(&self, other: &Self) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl From<Vec<bool>> for BitSequence {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

/// Per-slot molecule emissions of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionVector {
    counts: Vec<f64>,
    molecules: f64,
    samples_per_symbol: usize,
}

impl EmissionVector {
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn molecules(&self) -> f64 {
        self.molecules
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn symbols(&self) -> usize {
        self.counts.len() / self.samples_per_symbol
    }
}

/// Emits `molecules` at the first slot of every bit-1 symbol.
pub fn modulate_bcsk(bits: &BitSequence, molecules: f64, samples_per_symbol: usize) -> Result<EmissionVector> {
    if !(molecules >= 0.0 && molecules.is_finite()) {
        return Err(Error::Config(format!("molecule count must be >= 0, got {molecules}")));
    }
    if samples_per_symbol == 0 {
        return Err(Error::Config("need at least one sample per symbol".into()));
    }
    let mut counts = vec![0.0; bits.len() * samples_per_symbol];
    for (k, &bit) in bits.bits().iter().enumerate() {
        if bit {
            counts[k * samples_per_symbol] = molecules;
        }
    }
    Ok(EmissionVector {
        counts,
        molecules,
        samples_per_symbol,
    })
}

/// Mean and covariance of a Gaussian vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianStats {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if covariance.nrows() != mean.len() || covariance.ncols() != mean.len() {
            return Err(Error::Dimension {
                expected: mean.len(),
                actual: covariance.nrows().max(covariance.ncols()),
            });
        }
        Ok(Self { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Symmetry and the PSD tolerance `eigmin >= -1e-9 * trace / dim`.
    pub fn check(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Ok(());
        }
        let scale = self.covariance.amax().max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (self.covariance[(i, j)] - self.covariance[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Numerical(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let trace = self.covariance.trace();
        let eig = self.covariance.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min < -1e-9 * trace.abs() / n as f64 {
            return Err(Error::Numerical(format!(
                "covariance not PSD: smallest eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// Leading `keep` coordinates (principal sub-block of the covariance).
    pub fn leading(&self, keep: usize) -> Self {
        let keep = keep.min(self.dim());
        Self {
            mean: self.mean.rows(0, keep).into_owned(),
            covariance: self.covariance.view((0, 0), (keep, keep)).into_owned(),
        }
    }
}

/// `lambda + (h * x)[n]` for every slot of the block.
///
/// Emissions are sparse (one per bit-1 symbol), so this walks the nonzero
/// emissions rather than forming the Toeplitz matrix.
pub fn received_mean(x: &EmissionVector, h: &ChannelVector, noise_rate: f64) -> Result<Vec<f64>> {
    check_compatible(x, h, noise_rate)?;
    let len = x.len();
    let mut mean = vec![noise_rate; len];
    for (i, &count) in x.counts().iter().enumerate() {
        if count == 0.0 {
            continue;
        }
        for (out, tap) in mean[i..].iter_mut().zip(h.taps()) {
            *out += count * tap;
        }
    }
    Ok(mean)
}

fn check_compatible(x: &EmissionVector, h: &ChannelVector, noise_rate: f64) -> Result<()> {
    if x.samples_per_symbol() != h.samples_per_symbol() {
        return Err(Error::Dimension {
            expected: h.samples_per_symbol(),
            actual: x.samples_per_symbol(),
        });
    }
    if !(noise_rate >= 0.0 && noise_rate.is_finite()) {
        return Err(Error::Config(format!("noise rate must be >= 0, got {noise_rate}")));
    }
    Ok(())
}

/// Gaussian description of the arrivals: `mu = H x + lambda j`, `Sigma = diag(H x) + lambda I`.
pub fn received_stats(x: &EmissionVector, h: &ChannelVector, noise_rate: f64) -> Result<GaussianStats> {
    let mean = DVector::from_vec(received_mean(x, h, noise_rate)?);
    let covariance = DMatrix::from_diagonal(&mean);
    GaussianStats::new(mean, covariance)
}

/// How per-slot counts are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalModel {
    /// Poisson counts; exact up to [`EXACT_POISSON_LIMIT`], rounded normal above.
    #[default]
    Poisson,
    /// Real-valued `N(rate, rate)` samples.
    Gaussian,
}

/// Largest rate for which counts are drawn from an exact Poisson sampler.
pub const EXACT_POISSON_LIMIT: f64 = 1e4;

/// Received samples, one per slot.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReceivedSequence(Vec<f64>);

impl ReceivedSequence {
    pub fn new(samples: Vec<f64>) -> Self {
        Self(samples)
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Draws one sample with the given rate.
pub fn sample_count<R: Rng + ?Sized>(rate: f64, model: ArrivalModel, rng: &mut R) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    match model {
        ArrivalModel::Poisson if rate <= EXACT_POISSON_LIMIT => {
            // Poisson::new only fails for non-positive or non-finite rates.
            Poisson::new(rate).map(|d| d.sample(rng)).unwrap_or(0.0)
        }
        ArrivalModel::Poisson => {
            let z: f64 = StandardNormal.sample(rng);
            (rate + rate.sqrt() * z).round().max(0.0)
        }
        ArrivalModel::Gaussian => {
            let z: f64 = StandardNormal.sample(rng);
            rate + rate.sqrt() * z
        }
    }
}

/// Independent per-slot arrivals with rate `lambda + (h * x)[n]`.
pub fn simulate_arrivals<R: Rng + ?Sized>(
    x: &EmissionVector,
    h: &ChannelVector,
    noise_rate: f64,
    model: ArrivalModel,
    rng: &mut R,
) -> Result<ReceivedSequence> {
    let rates = received_mean(x, h, noise_rate)?;
    Ok(ReceivedSequence(
        rates.into_iter().map(|r| sample_count(r, model, rng)).collect(),
    ))
}

/// External noise rate per slot for a target SNR: `M / (2 N 10^(snr/10))`.
pub fn snr_to_noise_rate(snr_db: f64, molecules: f64, samples_per_symbol: usize) -> Result<f64> {
    if !(molecules > 0.0) {
        return Err(Error::Config(format!("SNR normalization needs M > 0, got {molecules}")));
    }
    if samples_per_symbol == 0 {
        return Err(Error::Config("need at least one sample per symbol".into()));
    }
    Ok(molecules / (2.0 * samples_per_symbol as f64 * 10f64.powf(snr_db / 10.0)))
}
