//! Drift evaluation for one-dimensional data by sorted block expansion.
//!
//! The data are sorted and cut into short blocks of half-width `h = 0.1·√s`
//! around centres `c_J`, where `s = T - t` is the remaining bridge time. With
//! `δ = z - c_J` and `u = x - c_J`,
//!
//! ```text
//! exp(o - (z - x)²/2s) = exp(-u²/2s) · exp(o - δ²/2s) · exp(δ u / s),
//! ```
//!
//! and the last factor is expanded as a truncated power series in `u/s`. The
//! per-block moments depend on `s` but not on `x`, so they are built once per
//! Euler step and shared by every particle. Blocks far from `x` (where the
//! series would converge slowly) are summed directly, and blocks whose total
//! weight is provably negligible are skipped.

use crate::error::{Error, Result};

use super::DriftSpec;

const ORDER: usize = 20;
const HALF_WIDTH: f64 = 0.1;
// Blocks whose weight is below e^-40 of the running total are skipped.
const PRUNE_NATS: f64 = 40.0;

#[derive(Debug, Clone)]
struct Block {
    start: usize,
    end: usize,
    centre: f64,
    lo: f64,
    hi: f64,
    scale: f64,
    moments: [f64; ORDER + 1],
}

/// Per-step evaluator of `Σ p_i z_i` for scalar data.
#[derive(Debug, Clone)]
pub struct SortedDrift1d {
    z: Vec<f64>,
    offset: Vec<f64>,
    tail: f64,
    blocks: Vec<Block>,
    // running max of offsets over blocks 0..=J and J.., and point counts
    max_left: Vec<f64>,
    max_right: Vec<f64>,
    count_left: Vec<usize>,
}

impl SortedDrift1d {
    pub fn new(spec: &DriftSpec) -> Self {
        assert_eq!(spec.data.dim(), 1, "sorted evaluator needs scalar data");
        let mut pairs: Vec<(f64, f64)> = spec
            .data
            .as_slice()
            .iter()
            .zip(&spec.offsets)
            .filter(|(_, c)| **c > f64::NEG_INFINITY)
            .map(|(z, c)| (*z, *c))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (z, offset) = pairs.into_iter().unzip();
        Self {
            z,
            offset,
            tail: f64::NAN,
            blocks: Vec::new(),
            max_left: Vec::new(),
            max_right: Vec::new(),
            count_left: Vec::new(),
        }
    }

    /// Rebuild the block moments for remaining time `tail = T - t`.
    pub fn prepare(&mut self, tail: f64) {
        if tail == self.tail {
            return;
        }
        self.tail = tail;
        self.blocks.clear();
        let mut tops = Vec::new();
        let width = 2.0 * HALF_WIDTH * tail.sqrt();
        let inv = 0.5 / tail;
        let n = self.z.len();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && self.z[end] - self.z[start] <= width {
                end += 1;
            }
            let lo = self.z[start];
            let hi = self.z[end - 1];
            let centre = 0.5 * (lo + hi);
            let mut scale = f64::NEG_INFINITY;
            let mut top = f64::NEG_INFINITY;
            for i in start..end {
                let d = self.z[i] - centre;
                scale = scale.max(self.offset[i] - d * d * inv);
                top = top.max(self.offset[i]);
            }
            let mut moments = [0.0; ORDER + 1];
            for i in start..end {
                let d = self.z[i] - centre;
                let mut term = (self.offset[i] - d * d * inv - scale).exp();
                for (q, m) in moments.iter_mut().enumerate() {
                    *m += term;
                    term *= d / (q + 1) as f64;
                }
            }
            self.blocks.push(Block {
                start,
                end,
                centre,
                lo,
                hi,
                scale,
                moments,
            });
            tops.push(top);
            start = end;
        }
        let nb = self.blocks.len();
        self.max_left = tops
            .iter()
            .scan(f64::NEG_INFINITY, |m, v| {
                *m = v.max(*m);
                Some(*m)
            })
            .collect();
        self.max_right = vec![f64::NEG_INFINITY; nb];
        let mut m = f64::NEG_INFINITY;
        for j in (0..nb).rev() {
            m = m.max(tops[j]);
            self.max_right[j] = m;
        }
        self.count_left = self.blocks.iter().map(|b| b.end).collect();
    }

    /// `Σ p_i z_i` at position `x` for the prepared `tail`.
    pub fn weighted_mean(&self, x: f64) -> Result<f64> {
        if self.blocks.is_empty() {
            return Err(Error::DegenerateWeights);
        }
        let mut acc = Accumulator::default();
        let nb = self.blocks.len();
        let first = self.blocks.partition_point(|b| b.hi < x).min(nb - 1);
        self.add_block(first, x, &mut acc);

        let inv = 0.5 / self.tail;
        let n = self.z.len();
        for j in (0..first).rev() {
            let gap = x - self.blocks[j].hi;
            let bound = (self.count_left[j] as f64).ln() + self.max_left[j] - gap * gap * inv;
            if bound < acc.log_total() - PRUNE_NATS {
                break;
            }
            self.add_block(j, x, &mut acc);
        }
        for j in first + 1..nb {
            let gap = self.blocks[j].lo - x;
            let rest = n - self.blocks[j].start;
            let bound = (rest as f64).ln() + self.max_right[j] - gap * gap * inv;
            if bound < acc.log_total() - PRUNE_NATS {
                break;
            }
            self.add_block(j, x, &mut acc);
        }
        if !(acc.s0 > 0.0) {
            return Err(Error::DegenerateWeights);
        }
        Ok(acc.s1 / acc.s0)
    }

    fn add_block(&self, j: usize, x: f64, acc: &mut Accumulator) {
        let b = &self.blocks[j];
        let s = self.tail;
        let u = x - b.centre;
        let v = u / s;
        if (HALF_WIDTH * s.sqrt() * v).abs() <= 1.0 {
            let mut p0 = 0.0;
            let mut p1 = 0.0;
            for q in (0..ORDER).rev() {
                p0 = p0 * v + b.moments[q];
                p1 = p1 * v + (q + 1) as f64 * b.moments[q + 1];
            }
            let log_scale = b.scale - u * u / (2.0 * s);
            acc.add(log_scale, p0, b.centre * p0 + p1);
        } else {
            let inv = 0.5 / s;
            let mut top = f64::NEG_INFINITY;
            for i in b.start..b.end {
                let r = self.z[i] - x;
                top = top.max(self.offset[i] - r * r * inv);
            }
            let mut s0 = 0.0;
            let mut s1 = 0.0;
            for i in b.start..b.end {
                let r = self.z[i] - x;
                let w = (self.offset[i] - r * r * inv - top).exp();
                s0 += w;
                s1 += w * self.z[i];
            }
            acc.add(top, s0, s1);
        }
    }
}

/// Sums `exp(log_scale)·(s0, s1)` with a moving reference scale.
#[derive(Debug)]
struct Accumulator {
    scale: f64,
    s0: f64,
    s1: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self {
            scale: f64::NEG_INFINITY,
            s0: 0.0,
            s1: 0.0,
        }
    }
}

impl Accumulator {
    fn add(&mut self, log_scale: f64, s0: f64, s1: f64) {
        if log_scale == f64::NEG_INFINITY {
            return;
        }
        if log_scale > self.scale {
            let r = (self.scale - log_scale).exp();
            self.s0 *= r;
            self.s1 *= r;
            self.scale = log_scale;
        }
        let r = (log_scale - self.scale).exp();
        self.s0 += r * s0;
        self.s1 += r * s1;
    }

    fn log_total(&self) -> f64 {
        self.scale + self.s0.ln()
    }
}
