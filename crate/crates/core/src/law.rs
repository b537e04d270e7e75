use serde::Serialize;

use crate::error::{Error, Result};

/// Hard cap on table length; hit only by pathological parameters.
const MAX_TABLE_LEN: usize = 1 << 22;

/// Finite table of a discrete law on `{offset, offset + 1, …}`.
///
/// `tail_mass` is a certified upper bound on the probability of the support
/// beyond the table, so `Σ probs + tail_mass` brackets the total mass from
/// above.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteLaw {
    support_offset: u64,
    probs: Vec<f64>,
    tail_mass: f64,
}

impl DiscreteLaw {
    /// Tabulates `pmf` from `support_offset` until the geometric tail bound
    /// `pmf(n)·r/(1 − r)` drops below `tail_bound`.
    ///
    /// `ratio_bound = r < 1` must satisfy `pmf(k + 1) ≤ r·pmf(k)` for every
    /// `k ≥ ratio_from`.
    pub fn tabulate(
        support_offset: u64,
        ratio_from: u64,
        ratio_bound: f64,
        tail_bound: f64,
        pmf: impl Fn(u64) -> f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&ratio_bound) {
            return Err(Error::Domain(format!(
                "geometric ratio bound {ratio_bound} must lie in [0, 1)"
            )));
        }
        if tail_bound.is_nan() || tail_bound <= 0.0 {
            return Err(Error::Domain(format!("tail bound {tail_bound} must be positive")));
        }
        let mut probs = Vec::new();
        let mut n = support_offset;
        loop {
            let p = pmf(n);
            probs.push(p);
            if n >= ratio_from {
                let tail = p * ratio_bound / (1.0 - ratio_bound);
                if tail < tail_bound {
                    return Ok(Self {
                        support_offset,
                        probs,
                        tail_mass: tail,
                    });
                }
            }
            if probs.len() >= MAX_TABLE_LEN {
                return Err(Error::PrecisionLoss(format!(
                    "tail did not fall below {tail_bound} within {MAX_TABLE_LEN} terms"
                )));
            }
            n += 1;
        }
    }

    /// A law given explicitly, with no mass beyond the table.
    pub fn from_probs(support_offset: u64, probs: Vec<f64>) -> Self {
        Self {
            support_offset,
            probs,
            tail_mass: 0.0,
        }
    }

    /// Point mass at `n`.
    pub fn degenerate(n: u64) -> Self {
        Self::from_probs(n, vec![1.0])
    }

    pub fn support_offset(&self) -> u64 {
        self.support_offset
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Last tabulated support point.
    pub fn max_support(&self) -> u64 {
        self.support_offset + self.probs.len() as u64 - 1
    }

    /// Tabulated probability of `n`; zero outside the table.
    pub fn prob(&self, n: u64) -> f64 {
        n.checked_sub(self.support_offset)
            .and_then(|i| self.probs.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }

    /// `(n, P(n))` pairs over the table.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        (self.support_offset..).zip(self.probs.iter().copied())
    }

    pub fn table_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `|Σ probs + tail_mass − 1|`.
    pub fn normalization_error(&self) -> f64 {
        (self.table_mass() + self.tail_mass - 1.0).abs()
    }

    /// Total-variation distance, `½ Σ |p(n) − q(n)|`, with both tails
    /// counted in full so the value is an upper bound.
    pub fn total_variation(&self, other: &DiscreteLaw) -> f64 {
        let lo = self.support_offset.min(other.support_offset);
        let hi = self.max_support().max(other.max_support());
        let l1: f64 = (lo..=hi).map(|n| (self.prob(n) - other.prob(n)).abs()).sum();
        0.5 * (l1 + self.tail_mass + other.tail_mass)
    }

    /// `Σ n·P(n)` over the table.
    pub fn table_mean(&self) -> f64 {
        self.iter().map(|(n, p)| n as f64 * p).sum()
    }
}
