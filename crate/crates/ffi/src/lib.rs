//! C interface to `mcdiff`.
//!
//! Objects are exposed as opaque handles created by `*_new` functions and
//! released by the matching `*_free`. Every fallible call returns an
//! [`McdiffStatus`]; on failure the message is available from
//! [`mcdiff_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mcdiff::analysis::{optimize_derivative_order, optimize_theory_threshold, ThresholdSearch};
use mcdiff::channel::{channel_vector, grid_from_rate, ChannelVector, Topology};
use mcdiff::detectors::{build_detector, Detector, DetectorConfig, DetectorKind};
use mcdiff::error::Error;
use mcdiff::harness::{rows_table, run_figure_sweep, ExperimentConfig, Figure};
use mcdiff::signal::snr_to_noise_rate;

/// Result codes. `MCDIFF_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McdiffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Dimension = 4,
    Numerical = 5,
    NoSignal = 6,
    Io = 7,
    Parse = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McdiffDetectorKind {
    Mlsd = 0,
    BandedMlsd = 1,
    Mlda = 2,
    Matd = 3,
    Fstd = 4,
    Ftd = 5,
}

impl From<McdiffDetectorKind> for DetectorKind {
    fn from(k: McdiffDetectorKind) -> Self {
        match k {
            McdiffDetectorKind::Mlsd => DetectorKind::Mlsd,
            McdiffDetectorKind::BandedMlsd => DetectorKind::BandedMlsd,
            McdiffDetectorKind::Mlda => DetectorKind::Mlda,
            McdiffDetectorKind::Matd => DetectorKind::Matd,
            McdiffDetectorKind::Fstd => DetectorKind::Fstd,
            McdiffDetectorKind::Ftd => DetectorKind::Ftd,
        }
    }
}

/// Discretized channel impulse response.
pub struct McdiffChannel(ChannelVector);

/// A configured detector.
pub struct McdiffDetector {
    inner: Box<dyn Detector>,
    samples_per_symbol: usize,
}

/// A parsed and validated experiment configuration.
pub struct McdiffExperiment(ExperimentConfig);

struct Failure(McdiffStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => McdiffStatus::InvalidArgument,
            Error::Config(_) => McdiffStatus::Config,
            Error::Dimension { .. } => McdiffStatus::Dimension,
            Error::Numerical(_) => McdiffStatus::Numerical,
            Error::NoSignal => McdiffStatus::NoSignal,
            Error::Io(_) => McdiffStatus::Io,
            Error::Parse(_) => McdiffStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> McdiffStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => McdiffStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            McdiffStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(McdiffStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(McdiffStatus::InvalidArgument, msg.into())
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mcdiff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread; empty if none. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn mcdiff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the channel for topology `(r0, rr, diffusion)` sampled at `N` slots per
/// symbol with symbol duration `rate_ratio` times the peak time.
///
/// # Safety
/// `out` must be a valid pointer. On success `*out` owns a handle to free with
/// [`mcdiff_channel_free`].
#[no_mangle]
pub unsafe extern "C" fn mcdiff_channel_new(
    r0: f64,
    rr: f64,
    diffusion: f64,
    rate_ratio: f64,
    samples_per_symbol: usize,
    memory: usize,
    out: *mut *mut McdiffChannel,
) -> McdiffStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let topo = Topology::new(r0, rr, diffusion)?;
        let grid = grid_from_rate(&topo, rate_ratio, samples_per_symbol, memory)?;
        *out = Box::into_raw(Box::new(McdiffChannel(channel_vector(&topo, &grid)?)));
        Ok(())
    })
}

/// Number of taps (`L N`); zero for a null handle.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_channel_len(channel: *const McdiffChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.0.len())
}

/// Copies the taps into `out`, which must hold exactly [`mcdiff_channel_len`] values.
///
/// # Safety
/// `channel` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_channel_taps(channel: *const McdiffChannel, out: *mut f64, len: usize) -> McdiffStatus {
    guard(|| {
        let ch = borrow(channel, "channel")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != ch.0.len() {
            return Err(Error::Dimension {
                expected: ch.0.len(),
                actual: len,
            }
            .into());
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(ch.0.taps());
        Ok(())
    })
}

/// # Safety
/// `channel` must be null or a handle from [`mcdiff_channel_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_channel_free(channel: *mut McdiffChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// External noise rate per slot for a target SNR in dB.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_snr_to_noise_rate(
    snr_db: f64,
    molecules: f64,
    samples_per_symbol: usize,
    out: *mut f64,
) -> McdiffStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = snr_to_noise_rate(snr_db, molecules, samples_per_symbol)?;
        Ok(())
    })
}

fn detector_config(
    channel: &McdiffChannel,
    kind: McdiffDetectorKind,
    order: usize,
    window: usize,
    molecules: f64,
    noise_rate: f64,
) -> DetectorConfig {
    DetectorConfig::new(kind.into(), channel.0.clone(), molecules, noise_rate)
        .with_order(order)
        .with_window(window)
}

/// Creates a detector. `window` is `L'` for banded MLSD and MLDA; `threshold`
/// is used by the threshold detectors. Other detectors ignore either value.
///
/// # Safety
/// `channel` must be a live handle and `out` a valid pointer. On success `*out`
/// owns a handle to free with [`mcdiff_detector_free`].
#[no_mangle]
pub unsafe extern "C" fn mcdiff_detector_new(
    channel: *const McdiffChannel,
    kind: McdiffDetectorKind,
    order: usize,
    window: usize,
    molecules: f64,
    noise_rate: f64,
    threshold: f64,
    out: *mut *mut McdiffDetector,
) -> McdiffStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let ch = borrow(channel, "channel")?;
        let cfg = detector_config(ch, kind, order, window, molecules, noise_rate).with_threshold(threshold);
        let det = McdiffDetector {
            inner: build_detector(&cfg)?,
            samples_per_symbol: ch.0.samples_per_symbol(),
        };
        *out = Box::into_raw(Box::new(det));
        Ok(())
    })
}

/// Decides every symbol of `samples` (length a multiple of `N`), writing 0 or 1
/// to `bits`, which must hold `samples_len / N` bytes.
///
/// # Safety
/// `detector` must be a live handle, `samples` must point to `samples_len`
/// doubles and `bits` to `bits_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_detector_detect(
    detector: *const McdiffDetector,
    samples: *const f64,
    samples_len: usize,
    bits: *mut u8,
    bits_len: usize,
) -> McdiffStatus {
    guard(|| {
        let det = borrow(detector, "detector")?;
        if samples.is_null() {
            return Err(null("samples"));
        }
        if bits.is_null() {
            return Err(null("bits"));
        }
        let symbols = samples_len / det.samples_per_symbol;
        if bits_len != symbols {
            return Err(Error::Dimension {
                expected: symbols,
                actual: bits_len,
            }
            .into());
        }
        let y = std::slice::from_raw_parts(samples, samples_len);
        let decided = det.inner.detect(y)?;
        let out = std::slice::from_raw_parts_mut(bits, bits_len);
        for (o, &b) in out.iter_mut().zip(decided.bits()) {
            *o = b as u8;
        }
        Ok(())
    })
}

/// # Safety
/// `detector` must be null or a handle from [`mcdiff_detector_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_detector_free(detector: *mut McdiffDetector) {
    if !detector.is_null() {
        drop(Box::from_raw(detector));
    }
}

/// Closed-form BER of FSTD or MaTD at the threshold that minimizes it, over the
/// channel's full memory.
///
/// # Safety
/// `channel` must be a live handle; `threshold` and `ber` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_theory_ber(
    channel: *const McdiffChannel,
    kind: McdiffDetectorKind,
    order: usize,
    molecules: f64,
    noise_rate: f64,
    threshold: *mut f64,
    ber: *mut f64,
) -> McdiffStatus {
    guard(|| {
        let ch = borrow(channel, "channel")?;
        let threshold = out_ref(threshold, "threshold")?;
        let ber = out_ref(ber, "ber")?;
        if !matches!(kind, McdiffDetectorKind::Fstd | McdiffDetectorKind::Matd) {
            return Err(invalid("closed-form BER exists for FSTD and MaTD only"));
        }
        let cfg = detector_config(ch, kind, order, 1, molecules, noise_rate);
        let choice = optimize_theory_threshold(&cfg, ch.0.memory(), ThresholdSearch::default())?;
        *threshold = choice.threshold;
        *ber = choice.ber;
        Ok(())
    })
}

/// SINR-maximizing derivative order in `0..=max_order` with receiver memory `window`.
///
/// # Safety
/// `channel` must be a live handle and `order` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_optimal_order(
    channel: *const McdiffChannel,
    molecules: f64,
    noise_rate: f64,
    max_order: usize,
    window: usize,
    order: *mut usize,
) -> McdiffStatus {
    guard(|| {
        let ch = borrow(channel, "channel")?;
        let order = out_ref(order, "order")?;
        let cfg = detector_config(ch, McdiffDetectorKind::Fstd, 0, window, molecules, noise_rate);
        *order = optimize_derivative_order(&cfg, max_order, window)?.order;
        Ok(())
    })
}

fn validated(cfg: ExperimentConfig) -> Result<*mut McdiffExperiment, Failure> {
    cfg.validate()?;
    Ok(Box::into_raw(Box::new(McdiffExperiment(cfg))))
}

/// Parses and validates an experiment from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer. On success
/// `*out` owns a handle to free with [`mcdiff_experiment_free`].
#[no_mangle]
pub unsafe extern "C" fn mcdiff_experiment_from_json(
    json: *const c_char,
    out: *mut *mut McdiffExperiment,
) -> McdiffStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        *out = validated(ExperimentConfig::from_json(c_str(json, "json")?)?)?;
        Ok(())
    })
}

/// Reads, parses and validates an experiment file.
///
/// # Safety
/// As [`mcdiff_experiment_from_json`], with `path` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_experiment_load(path: *const c_char, out: *mut *mut McdiffExperiment) -> McdiffStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        *out = validated(ExperimentConfig::load(Path::new(c_str(path, "path")?))?)?;
        Ok(())
    })
}

/// Overrides the master seed.
///
/// # Safety
/// `experiment` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_experiment_set_seed(experiment: *mut McdiffExperiment, seed: u64) -> McdiffStatus {
    guard(|| {
        out_ref(experiment, "experiment")?.0.seed = seed;
        Ok(())
    })
}

/// Runs a figure sweep (`"fig4"`, `"fig5"`, `"fig7"` or `"fig8"`) and returns the
/// CSV as a newly allocated string to release with [`mcdiff_string_free`].
///
/// # Safety
/// `experiment` must be a live handle, `figure` a NUL-terminated string and
/// `csv` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_experiment_sweep(
    experiment: *const McdiffExperiment,
    figure: *const c_char,
    timing: bool,
    csv: *mut *mut c_char,
) -> McdiffStatus {
    guard(|| {
        let csv = out_ref(csv, "csv")?;
        *csv = ptr::null_mut();
        let exp = borrow(experiment, "experiment")?;
        let figure: Figure = c_str(figure, "figure")?.parse()?;
        let rows = run_figure_sweep(&exp.0, figure)?;
        let text = rows_table(&rows, timing).to_csv_string();
        *csv = CString::new(text).map_err(|_| invalid("CSV contains NUL"))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `experiment` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_experiment_free(experiment: *mut McdiffExperiment) {
    if !experiment.is_null() {
        drop(Box::from_raw(experiment));
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mcdiff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
