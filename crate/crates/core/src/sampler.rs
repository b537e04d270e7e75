//! Exact inverse-CDF samplers for the discrete laws of this crate.
//!
//! The CDF is tabulated lazily: the table starts small and doubles whenever a
//! uniform draw lands beyond it, up to [`MAX_TABLE_LEN`] entries. Draws past
//! the full table are resolved exactly by a per-family tail method:
//!
//! * geometric-dominated rejection when `P(n + 1)/P(n) ≤ r < 1` beyond the
//!   table (log-series, extended Sibuya, offspring law);
//! * survival-function inversion for the Sibuya law, whose tail decays only
//!   polynomially and admits no geometric envelope.

use rand::Rng;
use serde::Serialize;

use crate::model::ModelParams;
use crate::zoo::{self, ExtendedSibuyaParams, LogSeriesParams, SibuyaParams};

const INITIAL_TABLE_LEN: usize = 32;
pub const MAX_TABLE_LEN: usize = 4096;
/// Largest value a Sibuya draw can take; larger draws saturate here.
pub const SIBUYA_SATURATION: u64 = 1 << 62;

/// The laws that can be sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Law {
    Sibuya(SibuyaParams),
    ExtendedSibuya(ExtendedSibuyaParams),
    LogSeries(LogSeriesParams),
    /// Offspring count `η` of the branching mechanism.
    Offspring(ModelParams),
}

impl Law {
    /// First support point: 0 for the offspring law, 1 otherwise.
    pub fn support_offset(&self) -> u64 {
        match self {
            Law::Offspring(_) => 0,
            _ => 1,
        }
    }

    pub fn pmf(&self, n: u64) -> f64 {
        if n < self.support_offset() {
            return 0.0;
        }
        match self {
            Law::Sibuya(p) => zoo::sibuya_pmf(p, n),
            Law::ExtendedSibuya(p) => zoo::extended_sibuya_pmf(p, n),
            Law::LogSeries(p) => zoo::log_series_pmf(p, n),
            Law::Offspring(p) => p.offspring_pmf(n),
        }
    }

    /// First `n` for which [`Law::ratio`] is the rational recurrence.
    fn ratio_start(&self) -> u64 {
        match self {
            Law::Offspring(_) => 2,
            _ => 1,
        }
    }

    /// `P(n + 1)/P(n)` for `n ≥ ratio_start()`.
    fn ratio(&self, n: u64) -> f64 {
        match self {
            Law::Sibuya(p) => p.ratio(n),
            Law::ExtendedSibuya(p) => p.ratio(n),
            Law::LogSeries(p) => p.ratio(n),
            Law::Offspring(p) => {
                let nf = n as f64;
                p.alpha() * (nf - 1.0) / (nf + 1.0)
            }
        }
    }

    /// Geometric bound `r` on the ratio, valid for `n ≥ ratio_start()`.
    fn ratio_bound(&self) -> Option<f64> {
        match self {
            Law::Sibuya(_) => None,
            Law::ExtendedSibuya(p) => Some(p.b()),
            Law::LogSeries(p) => Some(p.alpha()),
            Law::Offspring(p) => Some(p.alpha()),
        }
    }
}

/// Inverse-CDF sampler with a lazily grown table.
///
/// The table is owned by the sampler; clone it per thread rather than share.
#[derive(Debug, Clone)]
pub struct Sampler {
    law: Law,
    cdf: Vec<f64>,
    last_pmf: f64,
}

impl Sampler {
    pub fn new(law: Law) -> Self {
        let mut s = Self {
            law,
            cdf: Vec::with_capacity(INITIAL_TABLE_LEN),
            last_pmf: 0.0,
        };
        s.grow_to(INITIAL_TABLE_LEN);
        s
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    /// Current number of tabulated support points.
    pub fn table_len(&self) -> usize {
        self.cdf.len()
    }

    fn grow_to(&mut self, len: usize) {
        let offset = self.law.support_offset();
        let mut acc = self.cdf.last().copied().unwrap_or(0.0);
        while self.cdf.len() < len {
            let n = offset + self.cdf.len() as u64;
            let p = if n <= self.law.ratio_start() {
                self.law.pmf(n)
            } else {
                self.last_pmf * self.law.ratio(n - 1)
            };
            acc += p;
            self.last_pmf = p;
            self.cdf.push(acc);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        loop {
            let last = *self.cdf.last().expect("table is never empty");
            if u < last {
                let idx = self.cdf.partition_point(|&c| c <= u);
                return self.law.support_offset() + idx as u64;
            }
            if self.cdf.len() >= MAX_TABLE_LEN {
                break;
            }
            let next = (self.cdf.len() * 2).min(MAX_TABLE_LEN);
            self.grow_to(next);
        }
        let first_beyond = self.law.support_offset() + self.cdf.len() as u64;
        match self.law {
            Law::Sibuya(p) => sibuya_tail(&p, first_beyond, 1.0 - u),
            _ => self.geometric_tail(first_beyond, rng),
        }
    }

    /// Exact draw from the law conditioned on `X ≥ start`, by rejection from
    /// the envelope `P(start)·r^{n − start}`.
    fn geometric_tail<R: Rng + ?Sized>(&self, start: u64, rng: &mut R) -> u64 {
        let r = self.law.ratio_bound().expect("family has a geometric bound");
        let ln_r = r.ln();
        loop {
            let v: f64 = 1.0 - rng.random::<f64>();
            let jump = (v.ln() / ln_r).floor() as u64;
            // accept with probability Π_{k=start}^{n−1} ratio(k)/r
            let mut ln_accept = 0.0;
            for k in start..start + jump {
                ln_accept += (self.law.ratio(k) / r).ln();
            }
            let w: f64 = rng.random();
            if w.ln() < ln_accept {
                return start + jump;
            }
        }
    }
}

/// Smallest `n ≥ start` with `P(X > n) < v`, by exponential then binary search
/// on the closed-form survival function.
fn sibuya_tail(p: &SibuyaParams, start: u64, v: f64) -> u64 {
    let ln_v = v.ln();
    let below = |n: u64| zoo::sibuya_ln_survival(p, n) < ln_v;
    let mut lo = start.saturating_sub(1);
    let mut hi = start.max(1);
    while !below(hi) {
        if hi >= SIBUYA_SATURATION {
            return SIBUYA_SATURATION;
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(SIBUYA_SATURATION);
    }
    // invariant: !below(lo) (or lo < start), below(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
