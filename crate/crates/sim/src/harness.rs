//! Monte Carlo FER simulation: encode, OOK over AWGN, decode.
//!
//! Frame `k` of a point draws its payload, randomized-rounding seed and
//! noise from counter-based streams of the master seed, so every frame is
//! reproducible alone and counts do not depend on the worker count. Frames
//! run in batches; errors are tallied in frame order and the point stops at
//! the first frame that satisfies the stop rule.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::path::Path;
use std::time::Instant;

use ookpolar_core::channel::{add_noise, channel_llrs, db_to_linear, ChannelParams};
use ookpolar_core::decoder::{mimic_encoder_decode, DecodeConfig, Decoder};
use ookpolar_core::encoder::{mean_ones_fraction, Encoder};
use ookpolar_core::seed::{derive_seed, rng_for, stream};
use ookpolar_core::{CodeSpec, EncodeRule, LLR_CLIP};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SweepConfig;
use crate::construct::cached_stats;
use crate::error::{Error, Result};
use crate::spec_io::{hex, StatsCache, StatsKey};

/// Frames used to measure the empirical ones-fraction of a (code, rule) pair.
pub const PROBE_FRAMES: u64 = 128;

/// Frames per worker per batch.
const FRAMES_PER_WORKER: u64 = 16;

pub const CSV_HEADER: [&str; 16] = [
    "config_hash",
    "N",
    "R",
    "D",
    "rule",
    "list_enc",
    "list_dec",
    "crc",
    "snr_db",
    "amplitude",
    "frames",
    "frame_errors",
    "bit_errors",
    "fer",
    "ber",
    "seed",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerConvention {
    /// `gamma = p a^2`, the mean symbol energy.
    #[default]
    SecondMoment,
    /// `gamma = (a p)^2`, the squared mean amplitude.
    SquaredMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopRule {
    pub max_frames: u64,
    pub min_frame_errors: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_frames: 1_000_000, min_frame_errors: 100 }
    }
}

/// Amplitude `a` that puts the transmitted signal at `snr_db`.
pub fn normalize_amplitude(snr_db: f64, empirical_p: f64, convention: PowerConvention) -> Result<f64> {
    if !(empirical_p > 0.0 && empirical_p <= 1.0) {
        return Err(ookpolar_core::Error::InvalidProbability(empirical_p).into());
    }
    let gamma = db_to_linear(snr_db);
    Ok(match convention {
        PowerConvention::SecondMoment => (gamma / empirical_p).sqrt(),
        PowerConvention::SquaredMean => gamma.sqrt() / empirical_p,
    })
}

/// Mean ones-fraction over [`PROBE_FRAMES`] frames from a probe stream of `seed`.
pub fn empirical_p(spec: &CodeSpec, rule: EncodeRule, seed: u64) -> Result<f64> {
    Ok(mean_ones_fraction(spec, rule, PROBE_FRAMES, derive_seed(seed, stream::PROBE, 0))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub config_hash: String,
    pub code_id: String,
    #[serde(rename = "N")]
    pub len: usize,
    #[serde(rename = "R")]
    pub rate: f64,
    #[serde(rename = "D")]
    pub dynamic_len: usize,
    pub rule: String,
    pub list_enc: usize,
    pub list_dec: usize,
    pub crc: usize,
    pub snr_db: f64,
    pub amplitude: f64,
    pub empirical_p: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub bit_errors: u64,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl SimRecord {
    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.frames.max(1) as f64
    }

    pub fn ber(&self, payload_len: usize) -> f64 {
        self.bit_errors as f64 / (self.frames.max(1) * payload_len.max(1) as u64) as f64
    }

    /// Payload length recovered from the code parameters.
    fn payload_len(&self) -> usize {
        (ookpolar_core::code::info_len_for(self.len, self.rate)).saturating_sub(self.crc)
    }

    pub fn csv_row(&self) -> [String; 16] {
        [
            self.config_hash.clone(),
            self.len.to_string(),
            self.rate.to_string(),
            self.dynamic_len.to_string(),
            self.rule.clone(),
            self.list_enc.to_string(),
            self.list_dec.to_string(),
            self.crc.to_string(),
            self.snr_db.to_string(),
            self.amplitude.to_string(),
            self.frames.to_string(),
            self.frame_errors.to_string(),
            self.bit_errors.to_string(),
            self.fer().to_string(),
            self.ber(self.payload_len()).to_string(),
            self.seed.to_string(),
        ]
    }
}

/// A code, an encoding rule and a decoder, ready to simulate at any SNR.
#[derive(Debug, Clone)]
pub struct FerSetup {
    pub spec: CodeSpec,
    pub rule: EncodeRule,
    pub decode: DecodeConfig,
    pub mimic: bool,
    pub power: PowerConvention,
    pub empirical_p: f64,
}

#[derive(Serialize)]
struct HashInput<'a> {
    spec: &'a CodeSpec,
    rule: EncodeRule,
    decode: DecodeConfig,
    mimic: bool,
    power: PowerConvention,
    stop: StopRule,
    seed: u64,
}

fn digest16(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))[..16].to_string()
}

impl FerSetup {
    /// Validates the combination and measures the empirical ones-fraction
    /// with a probe stream of `seed`.
    pub fn new(
        spec: &CodeSpec,
        rule: EncodeRule,
        decode: DecodeConfig,
        mimic: bool,
        power: PowerConvention,
        seed: u64,
    ) -> Result<Self> {
        Encoder::new(spec, rule)?;
        Decoder::new(spec, decode)?;
        if mimic && !matches!(rule, EncodeRule::RandomizedRounding { .. }) {
            return Err(Error::Config("mimic decoding requires randomized rounding".into()));
        }
        let empirical_p = empirical_p(spec, rule, seed)?;
        Ok(Self { spec: spec.clone(), rule, decode, mimic, power, empirical_p })
    }

    /// Hash of the code.
    pub fn code_id(&self) -> String {
        digest16(serde_json::to_string(&self.spec).expect("spec serializes").as_bytes())
    }

    /// Hash of everything that determines the counts at a given SNR.
    pub fn config_hash(&self, stop: StopRule, seed: u64) -> String {
        let input = HashInput {
            spec: &self.spec,
            rule: self.rule,
            decode: self.decode,
            mimic: self.mimic,
            power: self.power,
            stop,
            seed,
        };
        digest16(serde_json::to_string(&input).expect("hash input serializes").as_bytes())
    }

    pub fn run_point(&self, snr_db: f64, stop: StopRule, seed: u64) -> Result<SimRecord> {
        let started = Instant::now();
        let amplitude = normalize_amplitude(snr_db, self.empirical_p, self.power)?;
        let channel = ChannelParams::new(amplitude, self.spec.p)?;
        let threads = rayon::current_num_threads().max(1);
        let mut workers = (0..threads).map(|_| Worker::new(self)).collect::<Result<Vec<_>>>()?;
        let batch = FRAMES_PER_WORKER * threads as u64;

        let (mut frames, mut frame_errors, mut bit_errors) = (0u64, 0u64, 0u64);
        let mut start = 0u64;
        'outer: while start < stop.max_frames {
            let end = (start + batch).min(stop.max_frames);
            let per = (end - start).div_ceil(threads as u64);
            let results: Vec<Vec<(bool, u64)>> = workers
                .par_iter_mut()
                .enumerate()
                .map(|(w, worker)| {
                    let a = (start + w as u64 * per).min(end);
                    let b = (a + per).min(end);
                    (a..b).map(|f| worker.frame(self, &channel, seed, f)).collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            for (error, bits) in results.into_iter().flatten() {
                frames += 1;
                frame_errors += error as u64;
                bit_errors += bits;
                if frame_errors >= stop.min_frame_errors {
                    break 'outer;
                }
            }
            start = end;
        }

        Ok(SimRecord {
            config_hash: self.config_hash(stop, seed),
            code_id: self.code_id(),
            len: self.spec.len,
            rate: self.spec.rate,
            dynamic_len: self.spec.dynamic_len,
            rule: self.rule.name().to_string(),
            list_enc: self.rule.list_size(),
            list_dec: self.decode.list_size,
            crc: self.spec.crc.width(),
            snr_db,
            amplitude,
            empirical_p: self.empirical_p,
            frames,
            frame_errors,
            bit_errors,
            seed,
            wall_time_s: started.elapsed().as_secs_f64(),
        })
    }
}

struct Worker {
    encoder: Encoder,
    decoder: Decoder,
    payload: Vec<u8>,
    y: Vec<f64>,
    llrs: Vec<f64>,
}

impl Worker {
    fn new(setup: &FerSetup) -> Result<Self> {
        Ok(Self {
            encoder: Encoder::new(&setup.spec, setup.rule)?,
            decoder: Decoder::new(&setup.spec, setup.decode)?,
            payload: vec![0; setup.spec.payload_len()],
            y: Vec::with_capacity(setup.spec.len),
            llrs: Vec::with_capacity(setup.spec.len),
        })
    }

    /// Frame error flag and payload bit errors of frame `frame`.
    fn frame(&mut self, setup: &FerSetup, channel: &ChannelParams, seed: u64, frame: u64) -> Result<(bool, u64)> {
        let mut rng = rng_for(seed, stream::PAYLOAD, frame);
        self.payload.iter_mut().for_each(|b| *b = rng.random::<bool>() as u8);
        let encoder_seed = derive_seed(seed, stream::ENCODER, frame);
        self.encoder.set_seed(encoder_seed);
        let encoded = self.encoder.encode(&self.payload)?;

        let mut rng = rng_for(seed, stream::NOISE, frame);
        add_noise(&encoded.x, channel.amplitude, &mut rng, &mut self.y);
        channel_llrs(&self.y, channel, true, LLR_CLIP, &mut self.llrs);

        let decoded = if setup.mimic {
            let u = mimic_encoder_decode(&self.llrs, &setup.spec, encoder_seed)?;
            let mut info = setup.spec.extract_info(&u);
            info.truncate(self.payload.len());
            info
        } else {
            self.decoder.decode(&self.llrs)?.payload
        };
        let bits = decoded.iter().zip(&self.payload).filter(|(a, b)| a != b).count() as u64;
        Ok((bits > 0, bits))
    }
}

/// Simulates `spec` at one SNR with a fresh probe of the ones-fraction.
pub fn run_fer_point(
    spec: &CodeSpec,
    rule: EncodeRule,
    decode: DecodeConfig,
    snr_db: f64,
    stop: StopRule,
    seed: u64,
) -> Result<SimRecord> {
    FerSetup::new(spec, rule, decode, false, PowerConvention::default(), seed)?.run_point(snr_db, stop, seed)
}

/// Builds the code described by `cfg`, reusing cached statistics.
pub fn build_spec(cfg: &SweepConfig, cache: Option<&StatsCache>) -> Result<CodeSpec> {
    let params = cfg.code_params().map_err(|e| Error::Config(format!("code: {e}")))?;
    let key = StatsKey {
        len: params.len,
        p: params.p,
        design_snr_db: params.design_snr_db,
        seed: params.seed,
        source_trials: cfg.code.trials.source,
        channel_trials: cfg.code.trials.channel,
    };
    let stats = cached_stats(&key, cache)?;
    ookpolar_core::construction::build_code_spec(&params, &stats).map_err(|e| Error::Config(format!("code: {e}")))
}

/// Runs every SNR point of `cfg`, appending rows to the CSV at `out`.
/// Points whose (config_hash, snr_db) row already exists are skipped.
/// `on_record` sees each new record after its row is written.
pub fn run_sweep(
    cfg: &SweepConfig,
    out: &Path,
    cache: Option<&StatsCache>,
    mut on_record: impl FnMut(&SimRecord),
) -> Result<Vec<SimRecord>> {
    let spec = build_spec(cfg, cache)?;
    let setup = FerSetup::new(&spec, cfg.encode.rule(), cfg.decode.config(), cfg.decode.mimic, cfg.power_convention, cfg.seed)?;
    let hash = setup.config_hash(cfg.stop, cfg.seed);
    let done = existing_points(out)?;

    let fresh = !out.exists() || std::fs::metadata(out).map_err(Error::io(out))?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(out).map_err(Error::io(out))?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        writer.write_record(CSV_HEADER)?;
        writer.flush().map_err(Error::io(out))?;
    }

    let mut records = Vec::new();
    for &snr_db in &cfg.sweep.snr_db {
        if done.contains(&(hash.clone(), snr_db.to_string())) {
            continue;
        }
        let record = setup.run_point(snr_db, cfg.stop, cfg.seed)?;
        writer.write_record(record.csv_row())?;
        writer.flush().map_err(Error::io(out))?;
        on_record(&record);
        records.push(record);
    }
    Ok(records)
}

/// (config_hash, snr_db) pairs already present in the CSV at `path`.
fn existing_points(path: &Path) -> Result<HashSet<(String, String)>> {
    let mut done = HashSet::new();
    let Ok(file) = File::open(path) else {
        return Ok(done);
    };
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    if !headers.is_empty() && headers.iter().ne(CSV_HEADER) {
        return Err(Error::Config(format!("{}: existing file has unexpected columns", path.display())));
    }
    for row in reader.records() {
        let row = row?;
        done.insert((row[0].to_string(), row[8].to_string()));
    }
    Ok(done)
}

/// Writes records to a fresh CSV.
pub fn write_csv(path: &Path, records: &[SimRecord]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(CSV_HEADER)?;
    for r in records {
        writer.write_record(r.csv_row())?;
    }
    writer.flush().map_err(Error::io(path))?;
    Ok(())
}

/// SNR at which the FER curve crosses `target`, by linear interpolation of
/// `log10 FER` between the first bracketing pair of points. Points must be
/// sorted by SNR; points with zero errors are ignored.
pub fn snr_at_fer(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(_, f)| f > 0.0).collect();
    pts.windows(2).find_map(|w| {
        let ((s0, f0), (s1, f1)) = (w[0], w[1]);
        if f0 >= target && f1 <= target && f0 > f1 {
            let t = (f0.log10() - target.log10()) / (f0.log10() - f1.log10());
            Some(s0 + t * (s1 - s0))
        } else if f0 == target {
            Some(s0)
        } else {
            None
        }
    })
}

/// Adjacent SNR pairs where the FER rises by more than the combined binomial
/// standard error. Monotonicity is only flagged, never enforced.
pub fn fer_inversions(records: &[SimRecord]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<&SimRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    sorted
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0], w[1]);
            let var = |r: &SimRecord| r.fer() * (1.0 - r.fer()) / r.frames.max(1) as f64;
            b.fer() - a.fer() > (var(a) + var(b)).sqrt()
        })
        .map(|w| (w[0].snr_db, w[1].snr_db))
        .collect()
}
