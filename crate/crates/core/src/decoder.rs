//! Decoding of shaped polar codewords.
//!
//! The default decoders treat dynamic positions like information positions:
//! only frozen positions are forced. [`mimic_encoder_decode`] instead
//! rebuilds dynamic bits by replaying the encoder's prior-only recursion and
//! randomized-rounding draws on the decoded prefix.

use alloc::vec::Vec;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::channel::prior_llr;
use crate::code::{CodeSpec, IndexClass};
use crate::encoder::{check_list_size, randomized_round};
use crate::kernel::{hard_decision, prob_zero, CheckNode, Metric, ScState};
use crate::list::{ListEngine, Slot};
use crate::seed::SimRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub list_size: usize,
    #[serde(default)]
    pub check_node: CheckNode,
    #[serde(default)]
    pub metric: Metric,
}

impl DecodeConfig {
    pub fn sc() -> Self {
        Self::list(1)
    }

    pub fn list(list_size: usize) -> Self {
        Self { list_size, check_node: CheckNode::Exact, metric: Metric::Exact }
    }
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self::sc()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutput {
    pub u: Vec<u8>,
    /// Information bits with the CRC removed.
    pub payload: Vec<u8>,
    /// CRC verdict on the returned path; true when the code has no CRC.
    pub crc_ok: bool,
}

/// Reusable SC / CRC-aided SCL decoder for one code. Input LLRs must
/// include the prior term.
pub struct Decoder {
    spec: CodeSpec,
    config: DecodeConfig,
    frozen: Vec<u8>,
    sc: ScState,
    list: Option<ListEngine>,
}

impl Decoder {
    pub fn new(spec: &CodeSpec, config: DecodeConfig) -> Result<Self> {
        spec.validate()?;
        check_list_size(config.list_size)?;
        let list = (config.list_size > 1)
            .then(|| ListEngine::new(spec.len, config.list_size, config.check_node, config.metric));
        Ok(Self {
            spec: spec.clone(),
            config,
            frozen: spec.frozen_map(),
            sc: ScState::new(spec.len, config.check_node)?,
            list,
        })
    }

    pub fn config(&self) -> DecodeConfig {
        self.config
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<DecodeOutput> {
        if llrs.len() != self.spec.len {
            return Err(Error::LengthMismatch { expected: self.spec.len, got: llrs.len() });
        }
        match self.list.as_mut() {
            None => {
                let u = successive_cancellation(&mut self.sc, &self.spec, &self.frozen, llrs);
                Ok(finish(&self.spec, u))
            }
            Some(engine) => {
                let survivors = run_list(engine, &self.spec, &self.frozen, llrs);
                let crc = &self.spec.crc;
                let pick = survivors.iter().position(|s| crc.check(&self.spec.extract_info(&s.u)));
                let (index, crc_ok) = match pick {
                    Some(i) => (i, true),
                    None => (0, false),
                };
                let u = survivors.into_iter().nth(index).expect("non-empty list").u;
                let mut out = finish(&self.spec, u);
                out.crc_ok = crc_ok;
                Ok(out)
            }
        }
    }
}

fn successive_cancellation(sc: &mut ScState, spec: &CodeSpec, frozen: &[u8], llrs: &[f64]) -> Vec<u8> {
    sc.reset(llrs);
    let mut u = alloc::vec![0u8; spec.len];
    for (i, bit) in u.iter_mut().enumerate() {
        let l = sc.decision_llr();
        *bit = match spec.classes[i] {
            IndexClass::Frozen => frozen[i],
            _ => hard_decision(l),
        };
        sc.push_bit(*bit);
    }
    u
}

fn run_list(engine: &mut ListEngine, spec: &CodeSpec, frozen: &[u8], llrs: &[f64]) -> Vec<crate::list::Survivor> {
    engine.run(llrs, |i| match spec.classes[i] {
        IndexClass::Frozen => Slot::Fixed(frozen[i]),
        _ => Slot::Free,
    })
}

fn finish(spec: &CodeSpec, u: Vec<u8>) -> DecodeOutput {
    let mut info = spec.extract_info(&u);
    let crc_ok = spec.crc.check(&info);
    info.truncate(spec.payload_len());
    DecodeOutput { u, payload: info, crc_ok }
}

/// SC decoding; frozen positions forced, everything else hard-decided.
pub fn sc_decode(llrs: &[f64], spec: &CodeSpec) -> Result<DecodeOutput> {
    Decoder::new(spec, DecodeConfig::sc())?.decode(llrs)
}

/// CRC-aided SCL decoding: the lowest-metric path whose information bits
/// pass the CRC, else the lowest-metric path with `crc_ok = false`.
pub fn scl_decode(llrs: &[f64], spec: &CodeSpec, list_size: usize) -> Result<DecodeOutput> {
    Decoder::new(spec, DecodeConfig::list(list_size))?.decode(llrs)
}

/// Decoding with dynamic positions reconstructed from the encoder's
/// randomized-rounding recursion seeded with `shared_seed`.
pub fn mimic_encoder_decode(llrs: &[f64], spec: &CodeSpec, shared_seed: u64) -> Result<Vec<u8>> {
    mimic(llrs, spec, shared_seed, None)
}

/// `flip` inverts the decision at one information index, for demonstrating
/// error propagation.
fn mimic(llrs: &[f64], spec: &CodeSpec, shared_seed: u64, flip: Option<usize>) -> Result<Vec<u8>> {
    spec.validate()?;
    if llrs.len() != spec.len {
        return Err(Error::LengthMismatch { expected: spec.len, got: llrs.len() });
    }
    let frozen = spec.frozen_map();
    let mut channel = ScState::new(spec.len, CheckNode::Exact)?;
    let mut source = ScState::new(spec.len, CheckNode::Exact)?;
    channel.reset(llrs);
    source.reset_constant(prior_llr(spec.p));
    let mut rng = SimRng::seed_from_u64(shared_seed);
    let mut u = alloc::vec![0u8; spec.len];
    for (i, bit) in u.iter_mut().enumerate() {
        let l_channel = channel.decision_llr();
        let l_source = source.decision_llr();
        *bit = match spec.classes[i] {
            IndexClass::Frozen => frozen[i],
            IndexClass::Information => hard_decision(l_channel) ^ (flip == Some(i)) as u8,
            IndexClass::Dynamic => randomized_round(prob_zero(l_source), &mut rng),
        };
        channel.push_bit(*bit);
        source.push_bit(*bit);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{channel_llrs, ChannelParams, LLR_CLIP};
    use crate::construction::{build_code_spec, estimate_stats, CodeParams};
    use crate::crc::CrcConfig;
    use crate::encoder::{shaped_encode, EncodeRule};
    use crate::polar::polar_transform;
    use crate::seed::rng_for;
    use alloc::vec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn spec(len: usize, rate: f64, p: f64, d: usize, crc: CrcConfig, snr_db: f64) -> CodeSpec {
        let stats = estimate_stats(len, p, snr_db, 500, 1000, 31).unwrap();
        build_code_spec(&CodeParams { len, rate, p, dynamic_len: d, crc, design_snr_db: snr_db, seed: 31 }, &stats)
            .unwrap()
    }

    fn random_bits(len: usize, seed: u64) -> Vec<u8> {
        let mut rng = rng_for(seed, 100, 0);
        (0..len).map(|_| rng.random::<bool>() as u8).collect()
    }

    fn noiseless(x: &[u8]) -> Vec<f64> {
        x.iter().map(|&b| if b == 0 { LLR_CLIP } else { -LLR_CLIP }).collect()
    }

    fn noisy(x: &[u8], spec: &CodeSpec, snr_db: f64, seed: u64) -> Vec<f64> {
        let params = ChannelParams::from_snr(crate::channel::db_to_linear(snr_db), spec.p).unwrap();
        let mut rng = rng_for(seed, 101, 0);
        let y: Vec<f64> = x
            .iter()
            .map(|&b| params.amplitude * f64::from(b) + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mut llrs = Vec::new();
        channel_llrs(&y, &params, true, LLR_CLIP, &mut llrs);
        llrs
    }

    #[test]
    fn noiseless_recovery_all_decoders() {
        let s = spec(128, 0.5, 0.25, 40, CrcConfig::crc8(), 2.0);
        for seed in 0..10 {
            let data = random_bits(s.payload_len(), seed);
            let enc = shaped_encode(&data, &s, EncodeRule::Argmax).unwrap();
            let llrs = noiseless(&enc.x);
            let sc = sc_decode(&llrs, &s).unwrap();
            assert_eq!(sc.u, enc.u);
            assert_eq!(sc.payload, data);
            assert!(sc.crc_ok);
            let scl = scl_decode(&llrs, &s, 8).unwrap();
            assert_eq!(scl.u, enc.u);
            assert!(scl.crc_ok);
        }
    }

    #[test]
    fn zero_llrs_keep_frozen_values() {
        let s = spec(64, 0.5, 0.3, 10, CrcConfig::none(), 2.0);
        let out = sc_decode(&vec![0.0; 64], &s).unwrap();
        let frozen = s.frozen_map();
        for i in s.frozen_positions() {
            assert_eq!(out.u[i], frozen[i]);
        }
        let out = scl_decode(&vec![0.0; 64], &s, 4).unwrap();
        for i in s.frozen_positions() {
            assert_eq!(out.u[i], frozen[i]);
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let s = spec(64, 0.5, 0.3, 10, CrcConfig::none(), 2.0);
        assert!(sc_decode(&[0.0; 32], &s).is_err());
        assert!(scl_decode(&[0.0; 64], &s, 3).is_err());
    }

    #[test]
    fn list_engine_of_one_equals_sc() {
        let s = spec(256, 0.5, 0.2, 80, CrcConfig::none(), 1.0);
        let frozen = s.frozen_map();
        let mut engine = ListEngine::new(256, 1, CheckNode::Exact, Metric::Exact);
        for seed in 0..30 {
            let data = random_bits(s.payload_len(), seed);
            let enc = shaped_encode(&data, &s, EncodeRule::Argmax).unwrap();
            let llrs = noisy(&enc.x, &s, -1.0, seed);
            let sc = sc_decode(&llrs, &s).unwrap();
            let list = run_list(&mut engine, &s, &frozen, &llrs);
            assert_eq!(list.len(), 1);
            assert_eq!(list[0].u, sc.u, "seed {seed}");
        }
    }

    /// Exhaustive MAP search over all inputs consistent with the frozen
    /// values, using Gaussian densities and the codeword prior directly.
    fn brute_force_ml(s: &CodeSpec, y: &[f64], amplitude: f64) -> Vec<u8> {
        let free: Vec<usize> = (0..s.len).filter(|&i| s.classes[i] != IndexClass::Frozen).collect();
        let frozen = s.frozen_map();
        let mut best = (f64::NEG_INFINITY, Vec::new());
        for m in 0..(1usize << free.len()) {
            let mut u = frozen.clone();
            for (k, &i) in free.iter().enumerate() {
                u[i] = ((m >> k) & 1) as u8;
            }
            // Dense GF(2) product, independent of the butterfly.
            let x: Vec<u8> = (0..s.len)
                .map(|c| (0..s.len).fold(0u8, |acc, r| acc ^ (u[r] & ((r & c) == c) as u8)))
                .collect();
            let score: f64 = x
                .iter()
                .zip(y)
                .map(|(&b, &v)| {
                    let mean = amplitude * f64::from(b);
                    let prior = if b == 1 { s.p } else { 1.0 - s.p };
                    libm::log(prior) - 0.5 * (v - mean) * (v - mean)
                })
                .sum();
            if score > best.0 {
                best = (score, u);
            }
        }
        best.1
    }

    #[test]
    fn dense_generator_matches_transform() {
        let u = random_bits(16, 3);
        let x: Vec<u8> = (0..16)
            .map(|c| (0..16).fold(0u8, |acc, r| acc ^ (u[r] & ((r & c) == c) as u8)))
            .collect();
        assert_eq!(x, polar_transform(&u).unwrap());
    }

    #[test]
    fn full_list_is_maximum_likelihood() {
        let s = spec(16, 0.5, 0.3, 2, CrcConfig::none(), 1.0);
        let free = s.len - s.frozen_len();
        let list_size = (1usize << free).next_power_of_two();
        let params = ChannelParams::from_snr(crate::channel::db_to_linear(1.0), s.p).unwrap();
        let mut dec = Decoder::new(&s, DecodeConfig::list(list_size)).unwrap();
        for seed in 0..50 {
            let data = random_bits(s.payload_len(), seed);
            let enc = shaped_encode(&data, &s, EncodeRule::Argmax).unwrap();
            let y = crate::channel::channel_sample(&enc.x, &params, seed);
            let mut llrs = Vec::new();
            channel_llrs(&y, &params, true, LLR_CLIP, &mut llrs);
            assert_eq!(dec.decode(&llrs).unwrap().u, brute_force_ml(&s, &y, params.amplitude), "seed {seed}");
        }
    }

    #[test]
    fn crc_passing_path_preferred() {
        let s = spec(128, 0.5, 0.3, 20, CrcConfig::crc16_ccitt(), 0.0);
        let mut dec = Decoder::new(&s, DecodeConfig::list(16)).unwrap();
        let mut engine = ListEngine::new(128, 16, CheckNode::Exact, Metric::Exact);
        let frozen = s.frozen_map();
        for seed in 0..40 {
            let data = random_bits(s.payload_len(), seed);
            let enc = shaped_encode(&data, &s, EncodeRule::Argmax).unwrap();
            let llrs = noisy(&enc.x, &s, -2.0, seed);
            let out = dec.decode(&llrs).unwrap();
            let any_pass = run_list(&mut engine, &s, &frozen, &llrs)
                .iter()
                .any(|p| s.crc.check(&s.extract_info(&p.u)));
            assert_eq!(out.crc_ok, any_pass);
        }
    }

    #[test]
    fn mimic_decoder_noiseless_and_propagation() {
        let s = spec(256, 0.5, 0.2, 90, CrcConfig::none(), 2.0);
        let data = random_bits(s.payload_len(), 8);
        let enc = shaped_encode(&data, &s, EncodeRule::RandomizedRounding { seed: 55 }).unwrap();
        let llrs = noiseless(&enc.x);
        let u = mimic_encoder_decode(&llrs, &s, 55).unwrap();
        assert_eq!(u, enc.u);
        assert_eq!(sc_decode(&llrs, &s).unwrap().u, u);

        let first_info = s.info_positions()[0];
        let broken = mimic(&llrs, &s, 55, Some(first_info)).unwrap();
        let diverged = s
            .dynamic_positions()
            .into_iter()
            .filter(|&i| i > first_info && broken[i] != enc.u[i])
            .count();
        assert!(diverged > 0);
    }
}
