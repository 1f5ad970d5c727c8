//! Per-point evaluation and figure grids.

use serde::Serialize;
use std::str::FromStr;
use std::time::Instant;

use crate::analysis::{
    optimize_derivative_order, optimize_threshold, sinr, ThresholdChoice, ThresholdSearch, ThresholdTheory,
    MAX_ENUMERATED_MEMORY,
};
use crate::detectors::{
    build_detector, fstd_select_sample, Detector, DetectorConfig, DetectorKind, FixedSample, FixedTotal, FstdSample,
    MaxSample, ThresholdStatistic,
};
use crate::error::{Error, Result};
use crate::signal::snr_to_noise_rate;

use super::config::{ExperimentConfig, GammaPolicy};
use super::montecarlo::{calibration_key, collect_statistics, count_errors, point_key, LinkPoint, MonteCarlo};
use super::table::{fmt_f64, fmt_opt, Table};

/// One Monte Carlo result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRecord {
    pub detector: DetectorKind,
    pub m: usize,
    /// Receiver memory; `None` for memoryless detectors.
    pub l_prime: Option<usize>,
    pub molecules: f64,
    /// Threshold; `None` for likelihood-based detectors.
    pub gamma: Option<f64>,
    pub ber: f64,
    pub std_error: f64,
    pub bits_simulated: u64,
    pub bit_errors: u64,
    /// Seconds spent on the whole operating point.
    pub wall_time: f64,
}

impl BerRecord {
    fn new(spec: &EvalSpec, molecules: f64, gamma: Option<f64>, bits: u64, errors: u64, wall_time: f64) -> Self {
        let (ber, std_error) = binomial_estimate(errors, bits);
        Self {
            detector: spec.kind,
            m: spec.order,
            l_prime: spec.window,
            molecules,
            gamma,
            ber,
            std_error,
            bits_simulated: bits,
            bit_errors: errors,
            wall_time,
        }
    }
}

/// `(k/n, sqrt(p(1-p)/n))`.
pub fn binomial_estimate(errors: u64, bits: u64) -> (f64, f64) {
    if bits == 0 {
        return (0.0, 0.0);
    }
    let n = bits as f64;
    let p = errors as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

/// A simulated row plus model-based columns where they exist.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub record: BerRecord,
    /// Closed-form BER at the same threshold (FSTD, MaTD).
    pub ber_theory: Option<f64>,
    /// `SINR_{L'}` in dB of the FSTD decision sample.
    pub sinr_db: Option<f64>,
}

pub const RECORD_COLUMNS: [&str; 10] = [
    "detector",
    "m",
    "L_prime",
    "M",
    "gamma",
    "ber",
    "std_error",
    "bits_simulated",
    "bit_errors",
    "wall_time",
];

/// CSV of sweep rows. Wall time is omitted unless `timing`, keeping output reproducible.
pub fn rows_table(rows: &[SweepRow], timing: bool) -> Table {
    let mut header: Vec<&str> = RECORD_COLUMNS.to_vec();
    if !timing {
        header.retain(|c| *c != "wall_time");
    }
    header.extend(["ber_theory", "sinr_db"]);
    let mut table = Table::new(header);
    for row in rows {
        let r = &row.record;
        let mut cells = vec![
            r.detector.to_string(),
            r.m.to_string(),
            fmt_opt(r.l_prime),
            fmt_f64(r.molecules),
            r.gamma.map(fmt_f64).unwrap_or_default(),
            fmt_f64(r.ber),
            fmt_f64(r.std_error),
            r.bits_simulated.to_string(),
            r.bit_errors.to_string(),
        ];
        if timing {
            cells.push(format!("{:.3}", r.wall_time));
        }
        cells.push(row.ber_theory.map(fmt_f64).unwrap_or_default());
        cells.push(row.sinr_db.map(fmt_f64).unwrap_or_default());
        table.push(cells);
    }
    table
}

/// Which detector variant to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalSpec {
    pub kind: DetectorKind,
    pub order: usize,
    pub window: Option<usize>,
}

impl EvalSpec {
    pub fn new(kind: DetectorKind, order: usize, window: usize) -> Self {
        Self {
            kind,
            order,
            window: kind.uses_window().then_some(window),
        }
    }
}

/// Figure grids the sweep command knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Threshold detectors vs. `M` with theory columns.
    Fig4,
    /// As `Fig4` plus the SINR of every FSTD row.
    Fig5,
    /// Memory-aided detectors over every configured `L'`.
    Fig7,
    /// All configured detectors vs. `M` at one `L'`.
    Fig8,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "fig7" => Ok(Figure::Fig7),
            "fig8" => Ok(Figure::Fig8),
            _ => Err(Error::Parse(format!(
                "unknown figure {s:?} (expected fig4, fig5, fig7 or fig8)"
            ))),
        }
    }
}

/// Link at one molecule count; `M = 0` has no external noise either.
pub fn link_point(cfg: &ExperimentConfig, molecules: f64) -> Result<LinkPoint> {
    let noise_rate = if molecules > 0.0 {
        snr_to_noise_rate(cfg.snr_db, molecules, cfg.samples_per_symbol)?
    } else {
        0.0
    };
    Ok(LinkPoint {
        channel: cfg.channel()?,
        molecules,
        noise_rate,
        arrival: cfg.arrival_model,
    })
}

pub fn monte_carlo(cfg: &ExperimentConfig) -> MonteCarlo {
    MonteCarlo {
        block_symbols: cfg.block_symbols,
        warmup: cfg.warmup(),
        bit_budget: cfg.bit_budget,
        target_errors: cfg.target_errors,
        seed: cfg.seed,
        noiseless: false,
    }
}

fn search(cfg: &ExperimentConfig) -> ThresholdSearch {
    ThresholdSearch {
        points: cfg.threshold_points,
        refinements: cfg.threshold_refinements,
    }
}

fn detector_config(cfg: &ExperimentConfig, link: &LinkPoint, spec: &EvalSpec) -> DetectorConfig {
    DetectorConfig::new(spec.kind, link.channel.clone(), link.molecules, link.noise_rate)
        .with_order(spec.order)
        .with_window(spec.window.unwrap_or(cfg.window))
        .with_tail(cfg.tail_model)
}

/// Closed-form model, if one exists for this detector and memory.
pub fn theory_for(dcfg: &DetectorConfig) -> Result<Option<ThresholdTheory>> {
    if dcfg.channel.memory() > MAX_ENUMERATED_MEMORY {
        return Ok(None);
    }
    match dcfg.kind {
        DetectorKind::Fstd => ThresholdTheory::fstd(dcfg, dcfg.channel.memory()).map(Some),
        DetectorKind::Matd => ThresholdTheory::matd(dcfg, dcfg.channel.memory()).map(Some),
        _ => Ok(None),
    }
}

/// FSTD sample for the channel, or the first sample when there is no signal.
fn fstd_sample(dcfg: &DetectorConfig) -> Result<FstdSample> {
    match fstd_select_sample(&dcfg.channel, dcfg.molecules, dcfg.order) {
        Err(Error::NoSignal) => Ok(FstdSample { index: 0, sign: 1 }),
        other => other,
    }
}

fn threshold_detector(dcfg: &DetectorConfig) -> Result<Box<dyn ThresholdDetector>> {
    dcfg.validate()?;
    let n = dcfg.samples_per_symbol();
    Ok(match dcfg.kind {
        DetectorKind::Fstd => Box::new(FixedSample::with_sample(
            fstd_sample(dcfg)?,
            n,
            dcfg.order,
            dcfg.threshold,
        )),
        DetectorKind::Matd => Box::new(MaxSample::new(dcfg)?),
        DetectorKind::Ftd => Box::new(FixedTotal::new(dcfg)?),
        other => return Err(Error::Config(format!("{other} has no threshold"))),
    })
}

trait ThresholdDetector: Detector + ThresholdStatistic {
    fn as_detector(&self) -> &dyn Detector;
    fn as_statistic(&self) -> &dyn ThresholdStatistic;
}

impl<T: Detector + ThresholdStatistic> ThresholdDetector for T {
    fn as_detector(&self) -> &dyn Detector {
        self
    }
    fn as_statistic(&self) -> &dyn ThresholdStatistic {
        self
    }
}

/// Threshold choice of one detector at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdOutcome {
    pub choice: ThresholdChoice,
    /// `true` if chosen on the closed-form BER, `false` if on a calibration run.
    pub from_theory: bool,
}

/// Chooses thresholds for the threshold detectors among `specs` per the
/// configured policy; other entries get `None`.
pub fn choose_thresholds(
    cfg: &ExperimentConfig,
    link: &LinkPoint,
    specs: &[EvalSpec],
) -> Result<Vec<Option<ThresholdOutcome>>> {
    let mut out = vec![None; specs.len()];
    let mut empirical = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        if !spec.kind.uses_threshold() {
            continue;
        }
        let dcfg = detector_config(cfg, link, spec);
        match cfg.gamma_policy {
            GammaPolicy::Fixed(g) => {
                out[k] = Some(ThresholdOutcome {
                    choice: ThresholdChoice {
                        threshold: g,
                        ber: f64::NAN,
                        interval: (g, g),
                    },
                    from_theory: false,
                })
            }
            GammaPolicy::OptimizeTheory => match theory_for(&dcfg)? {
                Some(theory) => {
                    out[k] = Some(ThresholdOutcome {
                        choice: optimize_threshold(&theory, search(cfg))?,
                        from_theory: true,
                    })
                }
                None => empirical.push(k),
            },
            GammaPolicy::OptimizeEmpirical => empirical.push(k),
        }
    }
    if !empirical.is_empty() {
        let stats = empirical
            .iter()
            .map(|&k| threshold_detector(&detector_config(cfg, link, &specs[k])))
            .collect::<Result<Vec<_>>>()?;
        let sources: Vec<&dyn ThresholdStatistic> = stats.iter().map(|s| s.as_statistic()).collect();
        let mc = monte_carlo(cfg);
        let bits = cfg.calibration_bits.unwrap_or(cfg.bit_budget);
        let objectives = collect_statistics(&sources, link, &mc, calibration_key(point_key(link.molecules)), bits)?;
        for (&k, obj) in empirical.iter().zip(&objectives) {
            out[k] = Some(ThresholdOutcome {
                choice: optimize_threshold(obj, search(cfg))?,
                from_theory: false,
            });
        }
    }
    Ok(out)
}

/// Model-based columns requested for a point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Extras {
    pub theory: bool,
    pub sinr: bool,
}

/// Simulates every spec at one molecule count on shared random blocks.
pub fn run_point(cfg: &ExperimentConfig, molecules: f64, specs: &[EvalSpec], extras: Extras) -> Result<Vec<SweepRow>> {
    run_point_with(cfg, molecules, specs, extras, monte_carlo(cfg))
}

pub fn run_point_with(
    cfg: &ExperimentConfig,
    molecules: f64,
    specs: &[EvalSpec],
    extras: Extras,
    mc: MonteCarlo,
) -> Result<Vec<SweepRow>> {
    let start = Instant::now();
    let link = link_point(cfg, molecules)?;
    let thresholds = choose_thresholds(cfg, &link, specs)?;
    let mut detectors: Vec<Box<dyn Detector>> = Vec::with_capacity(specs.len());
    let mut theory_col = Vec::with_capacity(specs.len());
    let mut sinr_col = Vec::with_capacity(specs.len());
    for (spec, th) in specs.iter().zip(&thresholds) {
        let mut dcfg = detector_config(cfg, &link, spec);
        if let Some(th) = th {
            dcfg = dcfg.with_threshold(th.choice.threshold);
        }
        let detector: Box<dyn Detector> = if spec.kind.uses_threshold() {
            let d = threshold_detector(&dcfg)?;
            Box::new(BoxedThreshold(d))
        } else {
            build_detector(&dcfg)?
        };
        detectors.push(detector);
        theory_col.push(match (extras.theory, th) {
            (true, Some(th)) if th.from_theory => Some(th.choice.ber),
            (true, Some(th)) => theory_for(&dcfg)?.map(|t| t.error_probability(th.choice.threshold)),
            _ => None,
        });
        sinr_col.push(if extras.sinr && spec.kind == DetectorKind::Fstd {
            Some(sinr(&dcfg, cfg.window, spec.order)?.db())
        } else {
            None
        });
    }
    let refs: Vec<&dyn Detector> = detectors.iter().map(|d| d.as_ref()).collect();
    let tallies = count_errors(&refs, &link, &mc, point_key(molecules))?;
    let wall = start.elapsed().as_secs_f64();
    Ok(specs
        .iter()
        .zip(tallies)
        .zip(thresholds)
        .zip(theory_col.into_iter().zip(sinr_col))
        .map(|(((spec, t), th), (ber_theory, sinr_db))| SweepRow {
            record: BerRecord::new(spec, molecules, th.map(|c| c.choice.threshold), t.bits, t.errors, wall),
            ber_theory,
            sinr_db,
        })
        .collect())
}

struct BoxedThreshold(Box<dyn ThresholdDetector>);

impl Detector for BoxedThreshold {
    fn kind(&self) -> DetectorKind {
        self.0.as_detector().kind()
    }

    fn detect(&self, y: &[f64]) -> Result<crate::signal::BitSequence> {
        self.0.as_detector().detect(y)
    }
}

/// BER of one detector at one molecule count.
pub fn run_ber_point(
    cfg: &ExperimentConfig,
    detector: DetectorKind,
    order: usize,
    molecules: f64,
) -> Result<BerRecord> {
    cfg.validate()?;
    let spec = EvalSpec::new(detector, order, cfg.window);
    let mut rows = run_point(cfg, molecules, &[spec], Extras::default())?;
    Ok(rows.remove(0).record)
}

/// Detector grid of a figure at one molecule count. FTD ignores the order and is listed once.
pub fn figure_specs(cfg: &ExperimentConfig, figure: Figure) -> Vec<EvalSpec> {
    let windows = match figure {
        Figure::Fig7 => cfg.window_list(),
        _ => vec![cfg.window],
    };
    let mut specs = Vec::new();
    for &kind in &cfg.detectors {
        let orders: &[usize] = if kind == DetectorKind::Ftd { &[0] } else { &cfg.orders };
        for &order in orders {
            if kind.uses_window() {
                specs.extend(windows.iter().map(|&w| EvalSpec::new(kind, order, w)));
            } else {
                specs.push(EvalSpec::new(kind, order, cfg.window));
            }
        }
    }
    specs
}

/// Full grid of a figure, ordered by molecule count then detector grid.
pub fn run_figure_sweep(cfg: &ExperimentConfig, figure: Figure) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let specs = figure_specs(cfg, figure);
    if specs.is_empty() {
        return Ok(Vec::new());
    }
    let extras = Extras {
        theory: true,
        sinr: figure == Figure::Fig5,
    };
    let mut rows = Vec::new();
    for molecules in cfg.molecule_values() {
        rows.extend(run_point(cfg, molecules, &specs, extras)?);
    }
    Ok(rows)
}

/// Closed-form BER table `(m, M, gamma, ber_theory)` with theory-optimized thresholds.
pub fn theory_table(cfg: &ExperimentConfig, detector: DetectorKind, orders: &[usize]) -> Result<Table> {
    if !matches!(detector, DetectorKind::Fstd | DetectorKind::Matd) {
        return Err(Error::Config(format!("no closed-form BER for detector {detector}")));
    }
    if cfg.memory > MAX_ENUMERATED_MEMORY {
        return Err(Error::Config(format!(
            "closed-form BER enumerates 2^(L-1) strings; L = {} exceeds {MAX_ENUMERATED_MEMORY}",
            cfg.memory
        )));
    }
    let mut table = Table::new(["m", "M", "gamma", "ber_theory"]);
    for molecules in cfg.molecule_values() {
        let link = link_point(cfg, molecules)?;
        for &m in orders {
            let dcfg = detector_config(cfg, &link, &EvalSpec::new(detector, m, cfg.window));
            let theory = theory_for(&dcfg)?.ok_or_else(|| Error::Config("no closed-form BER".into()))?;
            let c = optimize_threshold(&theory, search(cfg))?;
            table.push(vec![
                m.to_string(),
                fmt_f64(molecules),
                fmt_f64(c.threshold),
                fmt_f64(c.ber),
            ]);
        }
    }
    Ok(table)
}

/// SINR components per `(m, M)`.
pub fn sinr_table(cfg: &ExperimentConfig, orders: &[usize]) -> Result<Table> {
    let mut table = Table::new([
        "m",
        "M",
        "L_prime",
        "sample",
        "signal_power",
        "intended_noise",
        "interference_noise",
        "sinr",
        "sinr_db",
    ]);
    for molecules in cfg.molecule_values() {
        let link = link_point(cfg, molecules)?;
        let dcfg = detector_config(cfg, &link, &EvalSpec::new(DetectorKind::Fstd, 0, cfg.window));
        for &m in orders {
            let r = sinr(&dcfg, cfg.window, m)?;
            table.push(vec![
                m.to_string(),
                fmt_f64(molecules),
                cfg.window.to_string(),
                r.sample.to_string(),
                fmt_f64(r.signal_power),
                fmt_f64(r.intended_noise),
                fmt_f64(r.interference_noise),
                fmt_f64(r.value),
                fmt_f64(r.db()),
            ]);
        }
    }
    Ok(table)
}

/// `m*` per molecule count with the SINR of every candidate order.
pub fn order_table(cfg: &ExperimentConfig, max_order: usize) -> Result<Table> {
    let mut header = vec!["M".to_string(), "m_star".to_string()];
    header.extend((0..=max_order).map(|m| format!("sinr_db_m{m}")));
    let mut table = Table::new(header);
    for molecules in cfg.molecule_values() {
        let link = link_point(cfg, molecules)?;
        let dcfg = detector_config(cfg, &link, &EvalSpec::new(DetectorKind::Fstd, 0, cfg.window));
        let choice = optimize_derivative_order(&dcfg, max_order, cfg.window)?;
        let mut row = vec![fmt_f64(molecules), choice.order.to_string()];
        row.extend(choice.reports.iter().map(|r| fmt_f64(r.db())));
        table.push(row);
    }
    Ok(table)
}

/// Optimized threshold of every threshold detector and order, per the configured policy.
pub fn threshold_table(cfg: &ExperimentConfig, orders: &[usize]) -> Result<Table> {
    let mut table = Table::new([
        "detector",
        "m",
        "M",
        "gamma",
        "ber",
        "interval_lo",
        "interval_hi",
        "objective",
    ]);
    for molecules in cfg.molecule_values() {
        let link = link_point(cfg, molecules)?;
        let specs: Vec<EvalSpec> = cfg
            .detectors
            .iter()
            .filter(|k| k.uses_threshold())
            .flat_map(|&k| orders.iter().map(move |&m| EvalSpec::new(k, m, cfg.window)))
            .collect();
        for (spec, th) in specs.iter().zip(choose_thresholds(cfg, &link, &specs)?) {
            let Some(th) = th else { continue };
            let objective = match (cfg.gamma_policy, th.from_theory) {
                (GammaPolicy::Fixed(_), _) => "fixed",
                (_, true) => "theory",
                (_, false) => "empirical",
            };
            table.push(vec![
                spec.kind.to_string(),
                spec.order.to_string(),
                fmt_f64(molecules),
                fmt_f64(th.choice.threshold),
                fmt_f64(th.choice.ber),
                fmt_f64(th.choice.interval.0),
                fmt_f64(th.choice.interval.1),
                objective.to_string(),
            ]);
        }
    }
    Ok(table)
}
