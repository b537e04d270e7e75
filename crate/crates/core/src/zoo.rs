//! Sibuya, extended Sibuya and logarithmic-series laws on the positive integers.
//!
//! | law              | p.g.f.                                   |
//! |------------------|------------------------------------------|
//! | Sibuya(γ)        | `1 − (1 − s)^γ`                          |
//! | ExtSibuya(γ, b)  | `(1 − (1 − bs)^γ) / (1 − (1 − b)^γ)`     |
//! | LogSeries(α)     | `−log(1 − αs) / A`, `A = −log(1 − α)`    |
//!
//! Probabilities are built from the successive ratios `P(n + 1)/P(n)`, which
//! are rational in `n` for all three families, and accumulated in log space.

use std::cell::Cell;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::law::DiscreteLaw;
use crate::model::check_unit_disk;

fn open_unit(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(Error::Domain(format!("{name} = {x} must lie in (0, 1)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SibuyaParams {
    gamma: f64,
}

impl SibuyaParams {
    pub fn new(gamma: f64) -> Result<Self> {
        Ok(Self {
            gamma: open_unit("gamma", gamma)?,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `P(n + 1)/P(n) = (n − γ)/(n + 1)`.
    pub fn ratio(&self, n: u64) -> f64 {
        let nf = n as f64;
        (nf - self.gamma) / (nf + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtendedSibuyaParams {
    gamma: f64,
    b: f64,
}

impl ExtendedSibuyaParams {
    /// `b = 1` (the plain Sibuya law) is excluded; use [`SibuyaParams`].
    pub fn new(gamma: f64, b: f64) -> Result<Self> {
        Ok(Self {
            gamma: open_unit("gamma", gamma)?,
            b: open_unit("b", b)?,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `1 − (1 − b)^γ`.
    fn normalizer(&self) -> f64 {
        -(self.gamma * (-self.b).ln_1p()).exp_m1()
    }

    /// `P(n + 1)/P(n) = b(n − γ)/(n + 1) ≤ b`.
    pub fn ratio(&self, n: u64) -> f64 {
        let nf = n as f64;
        self.b * (nf - self.gamma) / (nf + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSeriesParams {
    alpha: f64,
    a_const: f64,
}

impl LogSeriesParams {
    pub fn new(alpha: f64) -> Result<Self> {
        let alpha = open_unit("alpha", alpha)?;
        Ok(Self {
            alpha,
            a_const: -(-alpha).ln_1p(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `A = −log(1 − α)`.
    pub fn a_const(&self) -> f64 {
        self.a_const
    }

    /// `P(n + 1)/P(n) = αn/(n + 1) ≤ α`.
    pub fn ratio(&self, n: u64) -> f64 {
        let nf = n as f64;
        self.alpha * nf / (nf + 1.0)
    }
}

/// `ln P(n)` for Sibuya(γ), by the ratio recurrence from `P(1) = γ`.
fn sibuya_ln_pmf(gamma: f64, n: u64) -> f64 {
    assert!(n >= 1, "Sibuya support starts at 1");
    let mut ln_p = gamma.ln();
    for k in 1..n {
        let kf = k as f64;
        ln_p += ((kf - gamma) / (kf + 1.0)).ln();
    }
    ln_p
}

/// Sibuya p.m.f., `P(n) = (−1)^{n−1} C(γ, n)`, `n ≥ 1`.
pub fn sibuya_pmf(p: &SibuyaParams, n: u64) -> f64 {
    sibuya_ln_pmf(p.gamma, n).exp()
}

/// `1 − (1 − s)^γ`.
pub fn sibuya_pgf(p: &SibuyaParams, s: f64) -> Result<f64> {
    check_unit_disk(s)?;
    Ok(-(p.gamma * (-s).ln_1p()).exp_m1())
}

/// `ln Γ(x + a) − ln Γ(x)`, with an asymptotic expansion for large `x`
/// where the direct difference would cancel.
pub(crate) fn ln_gamma_shift(x: f64, a: f64) -> f64 {
    if x < 1000.0 {
        return ln_gamma(x + a) - ln_gamma(x);
    }
    let a2 = a * a;
    let a3 = a2 * a;
    let a4 = a3 * a;
    a * x.ln() + (a2 - a) / (2.0 * x) - (a3 - 1.5 * a2 + 0.5 * a) / (6.0 * x * x)
        + (a4 - 2.0 * a3 + a2) / (12.0 * x * x * x)
}

/// `ln P(X > n) = ln Γ(n + 1 − γ) − ln Γ(1 − γ) − ln Γ(n + 1)` for Sibuya(γ).
pub fn sibuya_ln_survival(p: &SibuyaParams, n: u64) -> f64 {
    ln_gamma_shift(n as f64 + 1.0, -p.gamma) - ln_gamma(1.0 - p.gamma)
}

/// Extended Sibuya p.m.f., `n ≥ 1`.
pub fn extended_sibuya_pmf(p: &ExtendedSibuyaParams, n: u64) -> f64 {
    (sibuya_ln_pmf(p.gamma, n) + n as f64 * p.b.ln() - p.normalizer().ln()).exp()
}

/// `(1 − (1 − bs)^γ)/(1 − (1 − b)^γ)`.
pub fn extended_sibuya_pgf(p: &ExtendedSibuyaParams, s: f64) -> Result<f64> {
    check_unit_disk(s)?;
    let num = (p.gamma * (-p.b * s).ln_1p()).exp_m1();
    let den = (p.gamma * (-p.b).ln_1p()).exp_m1();
    Ok(num / den)
}

/// `γb(1 − b)^{γ−1}/(1 − (1 − b)^γ)`.
pub fn extended_sibuya_mean(p: &ExtendedSibuyaParams) -> f64 {
    p.gamma * p.b * ((p.gamma - 1.0) * (-p.b).ln_1p()).exp() / p.normalizer()
}

/// `αⁿ/(A·n)`, `n ≥ 1`.
pub fn log_series_pmf(p: &LogSeriesParams, n: u64) -> f64 {
    assert!(n >= 1, "log-series support starts at 1");
    let nf = n as f64;
    (nf * p.alpha.ln() - (p.a_const * nf).ln()).exp()
}

/// `−log(1 − αs)/A`.
pub fn log_series_pgf(p: &LogSeriesParams, s: f64) -> Result<f64> {
    check_unit_disk(s)?;
    Ok(-(-p.alpha * s).ln_1p() / p.a_const)
}

/// `α/((1 − α)A)`.
pub fn log_series_mean(p: &LogSeriesParams) -> f64 {
    p.alpha / ((1.0 - p.alpha) * p.a_const)
}

/// Tabulated extended Sibuya law with certified tail.
pub fn extended_sibuya_law(p: &ExtendedSibuyaParams, tail_bound: f64) -> Result<DiscreteLaw> {
    let ln_norm = p.normalizer().ln();
    let ln_b = p.b.ln();
    // (k, ln P_Sibuya(k)), advanced by the ratio recurrence as n increases
    let state = Cell::new((1u64, p.gamma.ln()));
    DiscreteLaw::tabulate(1, 1, p.b, tail_bound, |n| {
        let (mut k, mut ln_sib) = state.get();
        while k < n {
            let kf = k as f64;
            ln_sib += ((kf - p.gamma) / (kf + 1.0)).ln();
            k += 1;
        }
        state.set((k, ln_sib));
        (ln_sib + n as f64 * ln_b - ln_norm).exp()
    })
}

/// Tabulated logarithmic-series law with certified tail.
pub fn log_series_law(p: &LogSeriesParams, tail_bound: f64) -> Result<DiscreteLaw> {
    DiscreteLaw::tabulate(1, 1, p.alpha, tail_bound, |n| log_series_pmf(p, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(pmf: impl Fn(u64) -> f64, s: f64, n_max: u64) -> f64 {
        (1..=n_max).map(|n| pmf(n) * s.powi(n as i32)).sum()
    }

    #[test]
    fn sibuya_small_values() {
        let p = SibuyaParams::new(0.5).unwrap();
        assert!((sibuya_pmf(&p, 1) - 0.5).abs() < 1e-15);
        assert!((sibuya_pmf(&p, 2) - 0.125).abs() < 1e-15);
        // second Taylor coefficient by central difference of the p.g.f. at 0
        let h = 1e-3;
        let g = |s: f64| sibuya_pgf(&p, s).unwrap();
        let d2 = (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h) / 2.0;
        assert!((d2 - 0.125).abs() < 1e-6);
    }

    #[test]
    fn sibuya_pgf_reconstruction() {
        // tail Σ_{n>N} sⁿP(n) ≤ s^{N+1}/(1−s)
        let p = SibuyaParams::new(0.5).unwrap();
        let v = series(|n| sibuya_pmf(&p, n), 0.6, 80);
        assert!((v - (1.0 - 0.4f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn sibuya_heavy_tail_scaling() {
        for &g in &[0.3, 0.5, 0.8] {
            let p = SibuyaParams::new(g).unwrap();
            let r = sibuya_pmf(&p, 20_000) / sibuya_pmf(&p, 10_000);
            let target = 0.5f64.powf(1.0 + g);
            assert!((r / target - 1.0).abs() < 0.05, "gamma {g}: {r} vs {target}");
        }
    }

    #[test]
    fn sibuya_survival_matches_cumulative_sum() {
        let p = SibuyaParams::new(0.35).unwrap();
        let mut cdf = 0.0;
        for n in 1..=3000u64 {
            cdf += sibuya_pmf(&p, n);
            if n % 250 == 0 || n < 5 {
                let s = sibuya_ln_survival(&p, n).exp();
                assert!((s - (1.0 - cdf)).abs() < 1e-12, "n = {n}");
            }
        }
        assert!((sibuya_ln_survival(&p, 0)).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_shift_branches_agree() {
        for &a in &[-0.9, -0.5, -0.1] {
            for &x in &[1000.0, 2500.0, 9000.0] {
                let direct = ln_gamma(x + a) - ln_gamma(x);
                assert!((ln_gamma_shift(x, a) - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn extended_sibuya_first_term_and_mean() {
        let p = ExtendedSibuyaParams::new(0.4, 0.7).unwrap();
        let first = 0.4 * 0.7 / (1.0 - 0.3f64.powf(0.4));
        assert!((extended_sibuya_pmf(&p, 1) - first).abs() < 1e-14);
        let law = extended_sibuya_law(&p, 1e-16).unwrap();
        assert!(law.normalization_error() < 1e-12);
        // Σ_{n>N} nP(n) ≤ tail·(N + 1/(1 − b)) is far below 1e-8
        assert!((law.table_mean() - extended_sibuya_mean(&p)).abs() < 1e-8);
        for (n, q) in law.iter().take(40) {
            assert!((q - extended_sibuya_pmf(&p, n)).abs() < 1e-14 * q.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn extended_sibuya_approaches_sibuya_as_b_to_one() {
        // the normaliser differs from 1 by (1 − b)^γ, below 1e-6 only for γ > 0.6
        let b = 1.0 - 1e-10;
        for &g in &[0.65, 0.8, 0.95] {
            let e = ExtendedSibuyaParams::new(g, b).unwrap();
            let s = SibuyaParams::new(g).unwrap();
            for n in 1..=20 {
                let rel = extended_sibuya_pmf(&e, n) / sibuya_pmf(&s, n) - 1.0;
                assert!(rel.abs() < 1e-6);
            }
        }
    }

    #[test]
    fn extended_sibuya_pgf_endpoints_and_series() {
        let p = ExtendedSibuyaParams::new(0.3, 0.6).unwrap();
        assert_eq!(extended_sibuya_pgf(&p, 0.0).unwrap(), 0.0);
        assert!((extended_sibuya_pgf(&p, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let v = series(|n| extended_sibuya_pmf(&p, n), 0.5, 80);
        assert!((v - extended_sibuya_pgf(&p, 0.5).unwrap()).abs() < 1e-10);
        assert!(extended_sibuya_pgf(&p, 1.2).is_err());
    }

    #[test]
    fn log_series_values() {
        let p = LogSeriesParams::new(0.5).unwrap();
        assert!((log_series_pmf(&p, 1) - 0.721_347_520_444_481_7).abs() < 1e-15);
        let law = log_series_law(&p, 1e-15).unwrap();
        assert!(law.normalization_error() < 1e-12);
        let v = series(|n| log_series_pmf(&p, n), 0.7, 200);
        assert!((v - log_series_pgf(&p, 0.7).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn params_validation() {
        assert!(SibuyaParams::new(1.0).is_err());
        assert!(SibuyaParams::new(0.0).is_err());
        assert!(ExtendedSibuyaParams::new(0.5, 1.0).is_err());
        assert!(ExtendedSibuyaParams::new(0.5, 0.0).is_err());
        assert!(LogSeriesParams::new(1.0).is_err());
        assert!(LogSeriesParams::new(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn pmfs_reconstruct_pgfs(g in 0.05f64..0.95, b in 0.05f64..0.9, a in 0.05f64..0.9) {
            let e = ExtendedSibuyaParams::new(g, b).unwrap();
            let l = LogSeriesParams::new(a).unwrap();
            let sib = SibuyaParams::new(g).unwrap();
            for &s in &[0.1, 0.3, 0.5, 0.7, 0.9] {
                let n_max = 400;
                let es = series(|n| extended_sibuya_pmf(&e, n), s, n_max);
                prop_assert!((es - extended_sibuya_pgf(&e, s).unwrap()).abs() < 1e-10);
                let ls = series(|n| log_series_pmf(&l, n), s, n_max);
                prop_assert!((ls - log_series_pgf(&l, s).unwrap()).abs() < 1e-10);
                let ss = series(|n| sibuya_pmf(&sib, n), s, n_max);
                prop_assert!((ss - sibuya_pgf(&sib, s).unwrap()).abs() < 1e-10);
            }
        }
    }
}
