use ookpolar_core::channel::db_to_linear;
use ookpolar_core::construction::{build_code_spec, estimate_stats, CodeParams};
use ookpolar_core::decoder::DecodeConfig;
use ookpolar_core::encoder::Encoder;
use ookpolar_core::seed::rng_for;
use ookpolar_core::{CodeSpec, CrcConfig, EncodeRule};
use ookpolar_sim::harness::{
    empirical_p, fer_inversions, normalize_amplitude, run_fer_point, snr_at_fer, PowerConvention, SimRecord,
    StopRule,
};
use proptest::prelude::*;
use rand::Rng;

fn code(len: usize, rate: f64, p: f64, d: usize, crc: CrcConfig) -> CodeSpec {
    let stats = estimate_stats(len, p, 4.0, 300, 2000, 2).unwrap();
    build_code_spec(&CodeParams { len, rate, p, dynamic_len: d, crc, design_snr_db: 4.0, seed: 2 }, &stats).unwrap()
}

#[test]
fn uniform_power_audit() {
    let spec = code(1024, 0.5, 0.5, 0, CrcConfig::none());
    let p_hat = empirical_p(&spec, EncodeRule::Argmax, 3).unwrap();
    let snr_db = 2.0;
    let a = normalize_amplitude(snr_db, p_hat, PowerConvention::SecondMoment).unwrap();
    let mut enc = Encoder::new(&spec, EncodeRule::Argmax).unwrap();
    let mut energy = 0.0;
    let mut symbols = 0usize;
    for frame in 0..1000 {
        let mut rng = rng_for(17, 0, frame);
        let payload: Vec<u8> = (0..spec.payload_len()).map(|_| rng.random::<bool>() as u8).collect();
        let x = enc.encode(&payload).unwrap().x;
        energy += x.iter().map(|&b| (a * f64::from(b)).powi(2)).sum::<f64>();
        symbols += x.len();
    }
    assert!(symbols >= 1_000_000);
    let power = energy / symbols as f64;
    let gamma = db_to_linear(snr_db);
    assert!((power / gamma - 1.0).abs() < 0.01, "power {power} vs {gamma}");
}

#[test]
fn high_snr_is_error_free() {
    let spec = code(1024, 0.5, 0.3, 200, CrcConfig::crc16_ccitt());
    let stop = StopRule { max_frames: 1000, min_frame_errors: 1 };
    let r = run_fer_point(&spec, EncodeRule::Argmax, DecodeConfig::sc(), 40.0, stop, 8).unwrap();
    assert_eq!((r.frames, r.frame_errors, r.bit_errors), (1000, 0, 0));
}

#[test]
fn stop_rule_and_record_invariants() {
    let spec = code(64, 0.5, 0.3, 10, CrcConfig::none());
    let stop = StopRule { max_frames: 5000, min_frame_errors: 25 };
    let r = run_fer_point(&spec, EncodeRule::Argmax, DecodeConfig::sc(), 0.0, stop, 4).unwrap();
    assert_eq!(r.frame_errors, 25);
    assert!(r.frames <= stop.max_frames);
    assert!(r.bit_errors >= r.frame_errors);
    assert_eq!(r.fer(), 25.0 / r.frames as f64);
    let again = run_fer_point(&spec, EncodeRule::Argmax, DecodeConfig::sc(), 0.0, stop, 4).unwrap();
    assert_eq!(again.csv_row(), r.csv_row());
}

#[test]
fn list_codes_simulate() {
    let spec = code(128, 0.5, 0.3, 20, CrcConfig::crc8());
    let stop = StopRule { max_frames: 200, min_frame_errors: 1000 };
    let sc = run_fer_point(&spec, EncodeRule::List { list_size: 4 }, DecodeConfig::sc(), 5.0, stop, 6).unwrap();
    let scl = run_fer_point(&spec, EncodeRule::List { list_size: 4 }, DecodeConfig::list(8), 5.0, stop, 6).unwrap();
    assert_eq!(sc.frames, 200);
    assert!(scl.frame_errors <= sc.frame_errors);
}

fn record(snr_db: f64, frames: u64, frame_errors: u64) -> SimRecord {
    SimRecord {
        config_hash: String::new(),
        code_id: String::new(),
        len: 64,
        rate: 0.5,
        dynamic_len: 0,
        rule: "argmax".into(),
        list_enc: 1,
        list_dec: 1,
        crc: 0,
        snr_db,
        amplitude: 1.0,
        empirical_p: 0.5,
        frames,
        frame_errors,
        bit_errors: frame_errors,
        seed: 0,
        wall_time_s: 0.0,
    }
}

#[test]
fn inversions_are_flagged() {
    let rs = [record(1.0, 1000, 100), record(2.0, 1000, 10), record(3.0, 1000, 50)];
    assert_eq!(fer_inversions(&rs), vec![(2.0, 3.0)]);
    let noisy = [record(1.0, 1000, 10), record(2.0, 1000, 11)];
    assert!(fer_inversions(&noisy).is_empty());
}

proptest! {
    #[test]
    fn amplitude_meets_power(p in 0.01f64..1.0, snr_db in -20.0f64..30.0) {
        let gamma = db_to_linear(snr_db);
        let a = normalize_amplitude(snr_db, p, PowerConvention::SecondMoment).unwrap();
        prop_assert!((p * a * a / gamma - 1.0).abs() < 1e-12);
        let a = normalize_amplitude(snr_db, p, PowerConvention::SquaredMean).unwrap();
        prop_assert!(((p * a).powi(2) / gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_lies_in_bracket(f0 in 0.02f64..1.0, f1 in 1e-4f64..0.009, s0 in -5.0f64..5.0, step in 0.1f64..1.0) {
        let s = snr_at_fer(&[(s0, f0), (s0 + step, f1)], 0.01).unwrap();
        prop_assert!(s >= s0 && s <= s0 + step);
    }
}
