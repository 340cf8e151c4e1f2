//! Successive-cancellation list engine shared by list encoding and
//! CRC-aided list decoding.
//!
//! Per-layer LLR and partial-sum arrays live in pools with reference counts.
//! Forking a path only bumps counts; a path gets a private array the first
//! time it writes to a shared one. Every write covers a whole array, so no
//! copy is ever needed. With at most `capacity` live paths a pool of
//! `capacity` arrays per layer is always enough.

use alloc::vec;
use alloc::vec::Vec;

use crate::kernel::{f_layer, g_layer, hard_decision, penalty, CheckNode, Metric};

/// What the engine does at one input index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    /// Every path takes this bit.
    Fixed(u8),
    /// Every path branches on both values.
    Free,
}

struct Pool<T> {
    size: usize,
    data: Vec<T>,
    refs: Vec<u32>,
    free: Vec<usize>,
}

impl<T: Copy + Default> Pool<T> {
    fn new(size: usize, capacity: usize) -> Self {
        Self {
            size,
            data: vec![T::default(); size * capacity],
            refs: vec![0; capacity],
            free: (0..capacity).rev().collect(),
        }
    }

    fn reset(&mut self) {
        self.refs.fill(0);
        self.free.clear();
        self.free.extend((0..self.refs.len()).rev());
    }

    fn alloc(&mut self) -> usize {
        let id = self.free.pop().expect("array pool exhausted");
        self.refs[id] = 1;
        id
    }

    fn release(&mut self, id: usize) {
        self.refs[id] -= 1;
        if self.refs[id] == 0 {
            self.free.push(id);
        }
    }

    /// Returns an array id exclusively owned by the caller, replacing `id`
    /// if it is shared.
    fn exclusive(&mut self, id: usize) -> usize {
        if self.refs[id] > 1 {
            self.refs[id] -= 1;
            self.alloc()
        } else {
            id
        }
    }

    fn get(&self, id: usize) -> &[T] {
        &self.data[id * self.size..(id + 1) * self.size]
    }

    fn get_mut(&mut self, id: usize) -> &mut [T] {
        &mut self.data[id * self.size..(id + 1) * self.size]
    }
}

/// A surviving path at the end of a run.
#[derive(Debug, Clone)]
pub(crate) struct Survivor {
    pub slot: usize,
    pub metric: f64,
    pub u: Vec<u8>,
}

pub(crate) struct ListEngine {
    layers: u32,
    len: usize,
    capacity: usize,
    mode: CheckNode,
    metric_kind: Metric,
    channel: Vec<f64>,
    llr: Vec<Pool<f64>>,
    partial: Vec<Pool<u8>>,
    active: Vec<bool>,
    llr_ids: Vec<usize>,
    partial_ids: Vec<usize>,
    metric: Vec<f64>,
    bits: Vec<u64>,
    words: usize,
    scratch: Vec<u8>,
    decision: Vec<f64>,
    candidates: Vec<(f64, usize, u8, bool)>,
    survive: Vec<[bool; 2]>,
}

impl ListEngine {
    /// `len` must be a power of two of at least 2.
    pub fn new(len: usize, capacity: usize, mode: CheckNode, metric_kind: Metric) -> Self {
        assert!(len.is_power_of_two() && len >= 2);
        assert!(capacity >= 1);
        let layers = len.trailing_zeros();
        let words = len.div_ceil(64);
        let nl = layers as usize;
        Self {
            layers,
            len,
            capacity,
            mode,
            metric_kind,
            channel: vec![0.0; len],
            llr: (0..layers).map(|k| Pool::new(1 << k, capacity)).collect(),
            partial: (0..layers).map(|k| Pool::new(1 << k, capacity)).collect(),
            active: vec![false; capacity],
            llr_ids: vec![0; capacity * nl],
            partial_ids: vec![0; capacity * nl],
            metric: vec![0.0; capacity],
            bits: vec![0; capacity * words],
            words,
            scratch: vec![0; len],
            decision: vec![0.0; capacity],
            candidates: Vec::with_capacity(2 * capacity),
            survive: vec![[false; 2]; capacity],
        }
    }

    fn reset(&mut self, llrs: &[f64]) {
        assert_eq!(llrs.len(), self.len);
        self.channel.copy_from_slice(llrs);
        for pool in &mut self.llr {
            pool.reset();
        }
        for pool in &mut self.partial {
            pool.reset();
        }
        self.active.fill(false);
        self.active[0] = true;
        self.metric[0] = 0.0;
        self.bits[..self.words].fill(0);
        let nl = self.layers as usize;
        for k in 0..nl {
            self.llr_ids[k] = self.llr[k].alloc();
            self.partial_ids[k] = self.partial[k].alloc();
        }
    }

    fn fork(&mut self, from: usize, to: usize) {
        let nl = self.layers as usize;
        for k in 0..nl {
            let l = self.llr_ids[from * nl + k];
            let p = self.partial_ids[from * nl + k];
            self.llr[k].refs[l] += 1;
            self.partial[k].refs[p] += 1;
            self.llr_ids[to * nl + k] = l;
            self.partial_ids[to * nl + k] = p;
        }
        self.metric[to] = self.metric[from];
        let w = self.words;
        self.bits.copy_within(from * w..(from + 1) * w, to * w);
        self.active[to] = true;
    }

    fn kill(&mut self, path: usize) {
        let nl = self.layers as usize;
        for k in 0..nl {
            self.llr[k].release(self.llr_ids[path * nl + k]);
            self.partial[k].release(self.partial_ids[path * nl + k]);
        }
        self.active[path] = false;
    }

    fn compute_llr(&mut self, path: usize, index: usize) -> f64 {
        let nl = self.layers as usize;
        let top = if index == 0 { self.layers } else { index.trailing_zeros() + 1 };
        for k in (0..top as usize).rev() {
            let id = self.llr[k].exclusive(self.llr_ids[path * nl + k]);
            self.llr_ids[path * nl + k] = id;
            let (lower, upper) = self.llr.split_at_mut(k + 1);
            let dst = lower[k].get_mut(id);
            let src: &[f64] = if k + 1 == nl {
                &self.channel
            } else {
                upper[0].get(self.llr_ids[path * nl + k + 1])
            };
            if index != 0 && k == top as usize - 1 {
                let left = self.partial[k].get(self.partial_ids[path * nl + k]);
                g_layer(dst, src, left);
            } else {
                f_layer(dst, src, self.mode);
            }
        }
        self.llr[0].get(self.llr_ids[path * nl])[0]
    }

    fn push_bit(&mut self, path: usize, index: usize, u: u8) {
        let nl = self.layers as usize;
        if u == 1 {
            self.bits[path * self.words + index / 64] |= 1u64 << (index % 64);
        }
        self.scratch[0] = u;
        for k in 0..nl {
            let size = 1usize << k;
            if (index >> k) & 1 == 0 {
                let id = self.partial[k].exclusive(self.partial_ids[path * nl + k]);
                self.partial_ids[path * nl + k] = id;
                self.partial[k].get_mut(id).copy_from_slice(&self.scratch[..size]);
                return;
            }
            let left = self.partial[k].get(self.partial_ids[path * nl + k]);
            let (cur, upper) = self.scratch.split_at_mut(size);
            upper[..size].copy_from_slice(cur);
            for (c, &l) in cur.iter_mut().zip(left) {
                *c ^= l;
            }
        }
    }

    /// Runs the list over all indices and returns the surviving paths sorted
    /// by metric, ties by slot.
    pub fn run(&mut self, llrs: &[f64], mut slot_at: impl FnMut(usize) -> Slot) -> Vec<Survivor> {
        self.reset(llrs);
        for index in 0..self.len {
            for path in 0..self.capacity {
                if self.active[path] {
                    self.decision[path] = self.compute_llr(path, index);
                }
            }
            match slot_at(index) {
                Slot::Fixed(bit) => {
                    for path in 0..self.capacity {
                        if self.active[path] {
                            self.metric[path] += penalty(self.decision[path], bit, self.metric_kind);
                            self.push_bit(path, index, bit);
                        }
                    }
                }
                Slot::Free => self.branch(index),
            }
        }
        let mut out: Vec<Survivor> = (0..self.capacity)
            .filter(|&p| self.active[p])
            .map(|p| Survivor {
                slot: p,
                metric: self.metric[p],
                u: (0..self.len)
                    .map(|i| ((self.bits[p * self.words + i / 64] >> (i % 64)) & 1) as u8)
                    .collect(),
            })
            .collect();
        out.sort_by(|a, b| a.metric.total_cmp(&b.metric).then(a.slot.cmp(&b.slot)));
        out
    }

    fn branch(&mut self, index: usize) {
        self.candidates.clear();
        for path in 0..self.capacity {
            if self.active[path] {
                let l = self.decision[path];
                let hard = hard_decision(l);
                for bit in 0..2u8 {
                    let m = self.metric[path] + penalty(l, bit, self.metric_kind);
                    self.candidates.push((m, path, bit, bit != hard));
                }
            }
        }
        self.survive.fill([false; 2]);
        let kept = if self.candidates.len() <= self.capacity {
            self.candidates.len()
        } else {
            // Metric first, then slot, then agreement with the hard decision.
            self.candidates
                .sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.3.cmp(&b.3)));
            self.capacity
        };
        for &(_, p, b, _) in &self.candidates[..kept] {
            self.survive[p][b as usize] = true;
        }
        for path in 0..self.capacity {
            if self.active[path] && self.survive[path] == [false, false] {
                self.kill(path);
            }
        }
        for path in 0..self.capacity {
            if !self.active[path] || self.survive[path] == [false, false] {
                continue;
            }
            let l = self.decision[path];
            let bit = if self.survive[path][0] { 0 } else { 1 };
            if self.survive[path] == [true, true] {
                let twin = (0..self.capacity).find(|&q| !self.active[q]).expect("free path slot");
                self.fork(path, twin);
                self.metric[twin] += penalty(l, 1, self.metric_kind);
                self.push_bit(twin, index, 1);
            }
            self.metric[path] += penalty(l, bit, self.metric_kind);
            self.push_bit(path, index, bit);
        }
    }
}
