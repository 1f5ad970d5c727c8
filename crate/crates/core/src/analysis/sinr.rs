//! Signal-to-interference-plus-noise ratio of the FSTD decision sample, used
//! to rank derivative orders without running a threshold search.

use serde::Serialize;

use crate::derivative::check_order;
use crate::detectors::{fstd_select_sample, DetectorConfig};
use crate::error::{Error, Result};
use crate::special::{binomial, CompensatedSum};

use super::enumerate::InterferenceEnumerator;

/// SINR and its three variance/power components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinrReport {
    pub order: usize,
    pub window: usize,
    /// Zero-based FSTD sample the ratio is evaluated at.
    pub sample: usize,
    /// `E[(s mu_s,(m)[q])^2] = mu_s,(m)[q]^2 / 2`.
    pub signal_power: f64,
    /// Noise variance caused by the intended symbol, `Sigma_s,(m)[q,q] / 2`.
    pub intended_noise: f64,
    /// Variance due to interference and external noise.
    pub interference_noise: f64,
    pub value: f64,
}

impl SinrReport {
    pub fn db(&self) -> f64 {
        10.0 * self.value.log10()
    }
}

/// SINR of `D^m`-FSTD using a receiver memory of `window` symbols.
pub fn sinr(cfg: &DetectorConfig, window: usize, order: usize) -> Result<SinrReport> {
    let n = cfg.samples_per_symbol();
    check_order(order, n)?;
    if window == 0 || window > 25 {
        return Err(Error::Config(format!("SINR window must be in 1..=25, got {window}")));
    }
    let row: Vec<f64> = (0..=order)
        .map(|k| if (order - k).is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(order, k))
        .collect();
    let sample = match fstd_select_sample(&cfg.channel, cfg.molecules, order) {
        Ok(s) => s.index,
        Err(Error::NoSignal) => {
            return Ok(SinrReport {
                order,
                window,
                sample: 0,
                signal_power: 0.0,
                intended_noise: 0.0,
                interference_noise: 0.0,
                value: 0.0,
            })
        }
        Err(e) => return Err(e),
    };
    let at_sample = |raw: &[f64]| -> (f64, f64) {
        let mut mu = 0.0;
        let mut var = 0.0;
        for (k, c) in row.iter().enumerate() {
            mu += c * raw[sample + k];
            var += c * c * raw[sample + k];
        }
        (mu, var)
    };
    let intended: Vec<f64> = cfg.channel.symbol_taps(0).iter().map(|t| cfg.molecules * t).collect();
    let (mu_s, var_s) = at_sample(&intended);
    let signal_power = 0.5 * mu_s * mu_s;
    let intended_noise = 0.5 * var_s;

    let enumerator = InterferenceEnumerator::new(&cfg.channel, cfg.molecules, cfg.noise_rate, window - 1);
    let count = enumerator.count() as f64;
    let per_chunk = enumerator.fold_chunks(
        || (CompensatedSum::new(), CompensatedSum::new()),
        |acc, _, mean| {
            let (mu, var) = at_sample(mean);
            acc.0.add(mu);
            acc.1.add(var);
        },
    );
    let mean_mu = per_chunk.iter().map(|c| c.0.value()).sum::<f64>() / count;
    let mean_var = per_chunk.iter().map(|c| c.1.value()).sum::<f64>() / count;
    // Second pass: spread of the interference mean around its average.
    let spread = enumerator
        .fold_chunks(CompensatedSum::new, |acc, _, mean| {
            let d = at_sample(mean).0 - mean_mu;
            acc.add(d * d);
        })
        .iter()
        .map(|c| c.value())
        .sum::<f64>()
        / count;
    let interference_noise = (mean_var + spread).max(0.0);
    let denominator = intended_noise + interference_noise;
    let value = if signal_power == 0.0 {
        0.0
    } else if denominator > 0.0 {
        signal_power / denominator
    } else {
        f64::INFINITY
    };
    Ok(SinrReport {
        order,
        window,
        sample,
        signal_power,
        intended_noise,
        interference_noise,
        value,
    })
}
