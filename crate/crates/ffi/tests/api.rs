use std::ffi::{CStr, CString};
use std::ptr;

use mcdiff_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mcdiff_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn channel(rate: f64, n: usize, memory: usize) -> *mut McdiffChannel {
    let mut ch = ptr::null_mut();
    let status = unsafe { mcdiff_channel_new(15.0, 5.0, 100.0, rate, n, memory, &mut ch) };
    assert_eq!(status, McdiffStatus::Ok);
    ch
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(mcdiff_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn channel_taps_telescope_to_capture_fraction() {
    let ch = channel(4.0, 50, 20);
    let len = unsafe { mcdiff_channel_len(ch) };
    assert_eq!(len, 1000);
    let mut taps = vec![0.0; len];
    assert_eq!(
        unsafe { mcdiff_channel_taps(ch, taps.as_mut_ptr(), len) },
        McdiffStatus::Ok
    );
    let total: f64 = taps.iter().sum();
    assert!(taps.iter().all(|&t| t >= 0.0));
    assert!(total > 0.0 && total < 5.0 / 15.0);
    assert_eq!(
        unsafe { mcdiff_channel_taps(ch, taps.as_mut_ptr(), len - 1) },
        McdiffStatus::Dimension
    );
    unsafe { mcdiff_channel_free(ch) };
}

#[test]
fn invalid_topology_reports_message() {
    let mut ch = ptr::null_mut();
    let status = unsafe { mcdiff_channel_new(5.0, 15.0, 100.0, 0.5, 5, 10, &mut ch) };
    assert_eq!(status, McdiffStatus::Config);
    assert!(ch.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert_eq!(
            mcdiff_channel_new(15.0, 5.0, 100.0, 0.5, 5, 10, ptr::null_mut()),
            McdiffStatus::NullPointer
        );
        assert_eq!(mcdiff_channel_len(ptr::null()), 0);
        let mut x = 0.0;
        let mut y = 0.0;
        assert_eq!(
            mcdiff_theory_ber(ptr::null(), McdiffDetectorKind::Fstd, 0, 1e4, 1.0, &mut x, &mut y),
            McdiffStatus::NullPointer
        );
        assert!(last_error().contains("channel"));
        mcdiff_channel_free(ptr::null_mut());
        mcdiff_detector_free(ptr::null_mut());
        mcdiff_experiment_free(ptr::null_mut());
        mcdiff_string_free(ptr::null_mut());
    }
}

#[test]
fn detector_recovers_noiseless_bits() {
    let ch = channel(0.5, 5, 4);
    let molecules = 1e7;
    let mut noise = 0.0;
    assert_eq!(
        unsafe { mcdiff_snr_to_noise_rate(10.0, molecules, 5, &mut noise) },
        McdiffStatus::Ok
    );
    assert!((noise - 1e5).abs() < 1e-6);

    let mut taps = vec![0.0; 20];
    unsafe { mcdiff_channel_taps(ch, taps.as_mut_ptr(), 20) };
    let bits = [1u8, 0, 1, 1, 0, 0, 1, 0];
    let mut y = vec![noise; bits.len() * 5];
    for (i, &b) in bits.iter().enumerate() {
        if b == 1 {
            for (k, t) in taps.iter().enumerate() {
                if let Some(v) = y.get_mut(i * 5 + k) {
                    *v += molecules * t;
                }
            }
        }
    }
    for kind in [McdiffDetectorKind::BandedMlsd, McdiffDetectorKind::Mlda] {
        let mut det = ptr::null_mut();
        let status = unsafe { mcdiff_detector_new(ch, kind, 1, 4, molecules, noise, 0.0, &mut det) };
        assert_eq!(status, McdiffStatus::Ok);
        let mut out = vec![9u8; bits.len()];
        let status = unsafe { mcdiff_detector_detect(det, y.as_ptr(), y.len(), out.as_mut_ptr(), out.len()) };
        assert_eq!(status, McdiffStatus::Ok);
        assert_eq!(out, bits);
        let status = unsafe { mcdiff_detector_detect(det, y.as_ptr(), y.len(), out.as_mut_ptr(), 3) };
        assert_eq!(status, McdiffStatus::Dimension);
        unsafe { mcdiff_detector_free(det) };
    }
    unsafe { mcdiff_channel_free(ch) };
}

#[test]
fn theory_and_order_selection() {
    let ch = channel(0.5, 5, 10);
    let (mut gamma, mut ber) = (0.0, 0.0);
    let status = unsafe { mcdiff_theory_ber(ch, McdiffDetectorKind::Fstd, 1, 1e6, 1e4, &mut gamma, &mut ber) };
    assert_eq!(status, McdiffStatus::Ok);
    assert!(ber > 0.0 && ber < 0.5 && gamma.is_finite());
    let status = unsafe { mcdiff_theory_ber(ch, McdiffDetectorKind::Mlda, 1, 1e6, 1e4, &mut gamma, &mut ber) };
    assert_eq!(status, McdiffStatus::InvalidArgument);
    let mut order = 99;
    assert_eq!(
        unsafe { mcdiff_optimal_order(ch, 1e6, 1e4, 3, 10, &mut order) },
        McdiffStatus::Ok
    );
    assert_eq!(order, 1);
    unsafe { mcdiff_channel_free(ch) };
}

const CONFIG: &str = r#"{
    "schema_version": 1,
    "topology": {"r0": 15.0, "rr": 5.0, "diffusion": 100.0},
    "rate_ratio": 0.5,
    "samples_per_symbol": 5,
    "memory": 4,
    "window": 2,
    "orders": [1],
    "molecules": [1e5],
    "snr_db": 10.0,
    "detectors": ["fstd", "mlda"],
    "bit_budget": 20000,
    "seed": 5
}"#;

#[test]
fn experiment_sweep_is_deterministic() {
    let json = CString::new(CONFIG).unwrap();
    let mut exp = ptr::null_mut();
    assert_eq!(
        unsafe { mcdiff_experiment_from_json(json.as_ptr(), &mut exp) },
        McdiffStatus::Ok
    );
    let fig = CString::new("fig8").unwrap();
    let sweep = || {
        let mut csv = ptr::null_mut();
        assert_eq!(
            unsafe { mcdiff_experiment_sweep(exp, fig.as_ptr(), false, &mut csv) },
            McdiffStatus::Ok
        );
        let text = unsafe { CStr::from_ptr(csv) }.to_string_lossy().into_owned();
        unsafe { mcdiff_string_free(csv) };
        text
    };
    let first = sweep();
    assert_eq!(first.lines().count(), 3);
    assert!(first.starts_with("detector,m,L_prime,M,"));
    assert_eq!(first, sweep());
    assert_eq!(unsafe { mcdiff_experiment_set_seed(exp, 6) }, McdiffStatus::Ok);
    assert_ne!(first, sweep());

    let bad = CString::new("fig6").unwrap();
    let mut csv = ptr::null_mut();
    assert_eq!(
        unsafe { mcdiff_experiment_sweep(exp, bad.as_ptr(), false, &mut csv) },
        McdiffStatus::Parse
    );
    assert!(csv.is_null());
    unsafe { mcdiff_experiment_free(exp) };
}

#[test]
fn experiment_load_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    std::fs::write(&path, CONFIG.replace("\"orders\": [1]", "\"orders\": [7]")).unwrap();
    let c = CString::new(path.to_str().unwrap()).unwrap();
    let mut exp = ptr::null_mut();
    assert_eq!(
        unsafe { mcdiff_experiment_load(c.as_ptr(), &mut exp) },
        McdiffStatus::Config
    );
    assert!(exp.is_null());
    let missing = CString::new("/nonexistent/exp.json").unwrap();
    assert_eq!(
        unsafe { mcdiff_experiment_load(missing.as_ptr(), &mut exp) },
        McdiffStatus::Io
    );
    let junk = CString::new("{").unwrap();
    assert_eq!(
        unsafe { mcdiff_experiment_from_json(junk.as_ptr(), &mut exp) },
        McdiffStatus::Parse
    );
}
