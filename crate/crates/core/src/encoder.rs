//! Successive shaped encoding.
//!
//! Information positions take payload followed by CRC in ascending index
//! order, frozen positions take the code's frozen values, and each dynamic
//! position is set from `P(U_i | u_0^{i-1})` as returned by the prior-only SC
//! recursion. The codeword is `x = u G_n`.

use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::channel::prior_llr;
use crate::code::{CodeSpec, IndexClass};
use crate::kernel::{hard_decision, prob_zero, CheckNode, Metric, ScState};
use crate::list::{ListEngine, Slot};
use crate::polar::polar_transform;
use crate::seed::{rng_for, stream, SimRng};
use crate::{Error, Result};

/// How dynamic positions are set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum EncodeRule {
    /// Sample each dynamic bit from its conditional distribution, one RNG
    /// draw per dynamic position.
    RandomizedRounding { seed: u64 },
    /// Take the more likely value; 0 on ties.
    Argmax,
    /// Branch on every dynamic bit, keep the `list_size` most likely paths
    /// and output the codeword whose ones-fraction is closest to the target.
    List { list_size: usize },
}

impl EncodeRule {
    pub fn name(&self) -> &'static str {
        match self {
            EncodeRule::RandomizedRounding { .. } => "randomized",
            EncodeRule::Argmax => "argmax",
            EncodeRule::List { .. } => "list",
        }
    }

    pub fn list_size(&self) -> usize {
        match self {
            EncodeRule::List { list_size } => *list_size,
            _ => 1,
        }
    }
}

/// Validates a list size: a power of two in `1..=1024`.
pub fn check_list_size(list_size: usize) -> Result<()> {
    if list_size.is_power_of_two() && list_size <= 1024 {
        Ok(())
    } else {
        Err(Error::InvalidListSize(list_size))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub u: Vec<u8>,
    pub x: Vec<u8>,
}

impl Encoded {
    pub fn ones_fraction(&self) -> f64 {
        ones_fraction(&self.x)
    }
}

pub fn ones_fraction(x: &[u8]) -> f64 {
    x.iter().map(|&b| b as usize).sum::<usize>() as f64 / x.len() as f64
}

/// Bernoulli draw: 0 with probability `prob_zero`. Consumes exactly one
/// `f64` from `rng`.
pub fn randomized_round(prob_zero: f64, rng: &mut SimRng) -> u8 {
    let r: f64 = rng.random();
    if r < prob_zero {
        0
    } else {
        1
    }
}

/// Reusable encoder for one code.
pub struct Encoder {
    spec: CodeSpec,
    rule: EncodeRule,
    prior: f64,
    frozen: Vec<u8>,
    sc: ScState,
    list: Option<ListEngine>,
    prior_llrs: Vec<f64>,
}

impl Encoder {
    pub fn new(spec: &CodeSpec, rule: EncodeRule) -> Result<Self> {
        spec.validate()?;
        let list = match rule {
            EncodeRule::List { list_size } => {
                check_list_size(list_size)?;
                Some(ListEngine::new(spec.len, list_size, CheckNode::Exact, Metric::Exact))
            }
            _ => None,
        };
        let prior = prior_llr(spec.p);
        Ok(Self {
            spec: spec.clone(),
            rule,
            prior,
            frozen: spec.frozen_map(),
            sc: ScState::new(spec.len, CheckNode::Exact)?,
            list,
            prior_llrs: vec![prior; spec.len],
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn rule(&self) -> EncodeRule {
        self.rule
    }

    /// Replaces the randomized-rounding seed; other rules ignore it.
    pub fn set_seed(&mut self, seed: u64) {
        if let EncodeRule::RandomizedRounding { seed: s } = &mut self.rule {
            *s = seed;
        }
    }

    /// Payload followed by its CRC, checked for length.
    fn info_bits(&self, payload: &[u8]) -> Result<Vec<u8>> {
        let expected = self.spec.payload_len();
        if payload.len() != expected {
            return Err(Error::LengthMismatch { expected, got: payload.len() });
        }
        self.spec.crc.append(payload)
    }

    pub fn encode(&mut self, payload: &[u8]) -> Result<Encoded> {
        let info = self.info_bits(payload)?;
        match self.rule {
            EncodeRule::List { .. } => Ok(self.list_candidates_inner(&info).swap_remove(0)),
            EncodeRule::Argmax => Ok(self.successive(&info, None)),
            EncodeRule::RandomizedRounding { seed } => {
                let mut rng = SimRng::seed_from_u64(seed);
                Ok(self.successive(&info, Some(&mut rng)))
            }
        }
    }

    /// All final list-encoder candidates, best first (closest ones-fraction,
    /// then smaller metric, then lower path slot). Requires the list rule.
    pub fn list_candidates(&mut self, payload: &[u8]) -> Result<Vec<Encoded>> {
        let info = self.info_bits(payload)?;
        if self.list.is_none() {
            return Err(Error::InvalidListSize(0));
        }
        Ok(self.list_candidates_inner(&info))
    }

    fn successive(&mut self, info: &[u8], mut rng: Option<&mut SimRng>) -> Encoded {
        let len = self.spec.len;
        let mut u = vec![0u8; len];
        let mut next_info = info.iter();
        self.sc.reset_constant(self.prior);
        for (i, bit) in u.iter_mut().enumerate() {
            *bit = match self.spec.classes[i] {
                IndexClass::Information => *next_info.next().expect("info length checked"),
                IndexClass::Frozen => self.frozen[i],
                IndexClass::Dynamic => {
                    let l = self.sc.decision_llr();
                    match rng.as_deref_mut() {
                        Some(r) => randomized_round(prob_zero(l), r),
                        None => hard_decision(l),
                    }
                }
            };
            self.sc.push_bit(*bit);
        }
        let x = self.sc.codeword().expect("all bits pushed").to_vec();
        Encoded { u, x }
    }

    fn list_candidates_inner(&mut self, info: &[u8]) -> Vec<Encoded> {
        let spec = &self.spec;
        let frozen = &self.frozen;
        let mut slots = Vec::with_capacity(spec.len);
        let mut next_info = info.iter();
        for (i, class) in spec.classes.iter().enumerate() {
            slots.push(match class {
                IndexClass::Information => Slot::Fixed(*next_info.next().expect("info length checked")),
                IndexClass::Frozen => Slot::Fixed(frozen[i]),
                IndexClass::Dynamic => Slot::Free,
            });
        }
        let engine = self.list.as_mut().expect("list rule");
        let survivors = engine.run(&self.prior_llrs, |i| slots[i]);
        let target = spec.p;
        let mut scored: Vec<(f64, f64, usize, Encoded)> = survivors
            .into_iter()
            .map(|s| {
                let x = polar_transform(&s.u).expect("power-of-two length");
                let dist = (ones_fraction(&x) - target).abs();
                (dist, s.metric, s.slot, Encoded { u: s.u, x })
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        scored.into_iter().map(|t| t.3).collect()
    }
}

/// Encodes `payload` under `spec` with `rule`.
pub fn shaped_encode(payload: &[u8], spec: &CodeSpec, rule: EncodeRule) -> Result<Encoded> {
    Encoder::new(spec, rule)?.encode(payload)
}

/// List encoding with `list_size` paths.
pub fn list_encode(payload: &[u8], spec: &CodeSpec, list_size: usize) -> Result<Encoded> {
    shaped_encode(payload, spec, EncodeRule::List { list_size })
}

/// Mean ones-fraction of `frames` codewords carrying uniformly random
/// payloads drawn from `seed`. Randomized rounding uses a per-frame seed.
pub fn mean_ones_fraction(spec: &CodeSpec, rule: EncodeRule, frames: u64, seed: u64) -> Result<f64> {
    let mut encoder = Encoder::new(spec, rule)?;
    let mut payload = vec![0u8; spec.payload_len()];
    let mut total = 0.0;
    for frame in 0..frames {
        let mut rng = rng_for(seed, stream::PAYLOAD, frame);
        payload.iter_mut().for_each(|b| *b = rng.random::<bool>() as u8);
        encoder.set_seed(crate::seed::derive_seed(seed, stream::ENCODER, frame));
        total += encoder.encode(&payload)?.ones_fraction();
    }
    Ok(total / frames.max(1) as f64)
}
