//! Branching mechanism of the logarithmic-mixture process.
//!
//! A particle lives an exponential lifetime with rate `K` and is then
//! replaced by `η` offspring, where
//!
//! ```text
//! P(η = 0) = α
//! P(η = 1) = 1 − α²(1 + 1/A)
//! P(η = n) = (α/A) · αⁿ / (n(n − 1)),   n ≥ 2,      A = −log(1 − α)
//! ```
//!
//! The reproduction p.g.f. is `h(s) = s + α(1 − αs)(1 + log(1 − αs)/A)` and
//! the infinitesimal generating function is `f(s) = K(h(s) − s)`. The law is
//! a proper subcritical law only for `0 < α < α*`, where `α*` is the root of
//! `α²(1 + 1/A) = 1`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

const ALPHA_STAR_TOL: f64 = 1e-12;
const BRACKET_LO: f64 = 1e-6;
const BRACKET_HI: f64 = 1.0 - 1e-9;

/// `g(x) = x²(1 + 1/(−log(1 − x)))`, strictly increasing on (0, 1).
pub fn critical_function(x: f64) -> f64 {
    let a = -(-x).ln_1p();
    x * x * (1.0 + 1.0 / a)
}

/// Bisection for the root of `g(x) = 1` on (0, 1).
pub fn solve_alpha_star() -> f64 {
    let (mut lo, mut hi) = (BRACKET_LO, BRACKET_HI);
    while hi - lo > ALPHA_STAR_TOL {
        let mid = 0.5 * (lo + hi);
        if critical_function(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Cached upper bound `α*` of the admissible `α` range.
pub fn alpha_star() -> f64 {
    static ALPHA_STAR: OnceLock<f64> = OnceLock::new();
    *ALPHA_STAR.get_or_init(solve_alpha_star)
}

/// Validated model parameters with their derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    alpha: f64,
    rate_k: f64,
    a_const: f64,
    mean_m: f64,
    f_prime_1: f64,
    alpha_star: f64,
}

impl ModelParams {
    /// Rejects `alpha ∉ (0, α*)` and non-positive or non-finite `rate_k`.
    pub fn new(alpha: f64, rate_k: f64) -> Result<Self> {
        let alpha_star = alpha_star();
        if !(alpha.is_finite() && alpha > 0.0 && alpha < alpha_star) {
            return Err(Error::Domain(format!(
                "alpha = {alpha} must lie in (0, alpha*) with alpha* = {alpha_star:.10} \
                 (quoted as 0.772638); larger alpha makes P(eta = 1) non-positive"
            )));
        }
        if !(rate_k.is_finite() && rate_k > 0.0) {
            return Err(Error::Domain(format!("rate K = {rate_k} must be positive and finite")));
        }
        let a_const = -(-alpha).ln_1p();
        let alpha2_over_a = alpha * alpha / a_const;
        Ok(Self {
            alpha,
            rate_k,
            a_const,
            mean_m: 1.0 - alpha2_over_a,
            f_prime_1: -rate_k * alpha2_over_a,
            alpha_star,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rate_k(&self) -> f64 {
        self.rate_k
    }

    /// `A = −log(1 − α)`.
    pub fn a_const(&self) -> f64 {
        self.a_const
    }

    /// Offspring mean `m = h'(1) = 1 − α²/A`.
    pub fn mean_m(&self) -> f64 {
        self.mean_m
    }

    /// `f'(1) = −Kα²/A`, the exponential decay rate of `E[X(t)]`.
    pub fn f_prime_1(&self) -> f64 {
        self.f_prime_1
    }

    pub fn alpha_star(&self) -> f64 {
        self.alpha_star
    }

    /// `log(1 − α)`, i.e. `−A`.
    pub(crate) fn log_one_minus_alpha(&self) -> f64 {
        -self.a_const
    }

    /// `P(η = n)`.
    pub fn offspring_pmf(&self, n: u64) -> f64 {
        let a = self.alpha;
        match n {
            0 => a,
            1 => self.prob_one_child(),
            _ => {
                let nf = n as f64;
                (a / self.a_const) * a.powf(nf) / (nf * (nf - 1.0))
            }
        }
    }

    /// `P(η = 1) = 1 − α²(1 + 1/A)`.
    pub fn prob_one_child(&self) -> f64 {
        1.0 - self.alpha * self.alpha * (1.0 + 1.0 / self.a_const)
    }

    /// Upper bound on `Σ_{k ≥ n} P(η = k)` for `n ≥ 2`: `P(η = n)/(1 − α)`.
    pub fn offspring_tail_bound(&self, n: u64) -> f64 {
        self.offspring_pmf(n.max(2)) / (1.0 - self.alpha)
    }

    /// Smallest `N ≥ 2` whose tail bound falls below `eps`.
    pub fn offspring_truncation_index(&self, eps: f64) -> u64 {
        let mut n = 2;
        while self.offspring_tail_bound(n) >= eps {
            n += 1;
        }
        n
    }

    /// Closed form of `Σ_{n ≥ 2} P(η = n) = (α/A)(α + (1 − α) log(1 − α))`.
    pub fn offspring_multi_child_mass(&self) -> f64 {
        let a = self.alpha;
        (a / self.a_const) * (a + (1.0 - a) * self.log_one_minus_alpha())
    }

    /// Reproduction p.g.f. `h(s)`.
    pub fn reproduction_pgf(&self, s: f64) -> Result<f64> {
        check_unit_disk(s)?;
        let a = self.alpha;
        let log_term = (-a * s).ln_1p();
        Ok(s + a * (1.0 - a * s) * (1.0 + log_term / self.a_const))
    }

    /// `h'(s) = 1 − α² − α²/A − (α²/A)·log(1 − αs)`.
    pub fn reproduction_pgf_derivative(&self, s: f64) -> Result<f64> {
        check_unit_disk(s)?;
        let a2 = self.alpha * self.alpha;
        let a2_over_a = a2 / self.a_const;
        Ok(1.0 - a2 - a2_over_a - a2_over_a * (-self.alpha * s).ln_1p())
    }

    /// Infinitesimal generating function in product form,
    /// `f(s) = (Kα/A)(1 − αs)(A + log(1 − αs))`.
    pub fn infinitesimal_gen(&self, s: f64) -> Result<f64> {
        check_unit_disk(s)?;
        let a = self.alpha;
        Ok((self.rate_k * a / self.a_const) * (1.0 - a * s) * (self.a_const + (-a * s).ln_1p()))
    }

    /// `f(s)` as `K(h(s) − s)`.
    pub fn infinitesimal_gen_via_h(&self, s: f64) -> Result<f64> {
        Ok(self.rate_k * (self.reproduction_pgf(s)? - s))
    }

    /// `f(1 − u)` evaluated without cancellation near `u = 0`:
    /// `(Kα/A)(1 − α + αu)·log(1 + αu/(1 − α))`.
    pub fn infinitesimal_gen_complement(&self, u: f64) -> f64 {
        let a = self.alpha;
        (self.rate_k * a / self.a_const) * (1.0 - a + a * u) * (a * u / (1.0 - a)).ln_1p()
    }
}

pub(crate) fn check_unit_disk(s: f64) -> Result<()> {
    if s.is_finite() && s.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("|s| = {} exceeds 1", s.abs())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn alpha_star_matches_quoted_value_and_solves_equation() {
        let x = solve_alpha_star();
        assert!((x - 0.772638).abs() < 1e-5, "{x}");
        assert!((critical_function(x) - 1.0).abs() < 1e-10);
        // high-precision values: g(0.5) = 0.61067376…, g(0.9) = 1.16177853…
        assert!((critical_function(0.5) - 0.610_673_760_222_240_9).abs() < 1e-12);
        assert!((critical_function(0.9) - 1.161_778_530_341_634).abs() < 1e-12);
    }

    #[test]
    fn derived_constants_at_half() {
        let p = ModelParams::new(0.5, 1.0).unwrap();
        assert!((p.a_const() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((p.mean_m() - 0.639_326_239_777_759_1).abs() < 1e-14);
        assert!((p.f_prime_1() + 0.360_673_760_222_240_9).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_domain_parameters() {
        assert!(ModelParams::new(alpha_star(), 1.0).is_err());
        assert!(ModelParams::new(0.7726401, 1.0).is_err());
        assert!(ModelParams::new(0.9, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1.0).is_err());
        assert!(ModelParams::new(-0.1, 1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0.0).is_err());
        assert!(ModelParams::new(0.5, -2.0).is_err());
        assert!(ModelParams::new(0.5, f64::INFINITY).is_err());
        // below the true root 0.77263998…, so admissible
        let p = ModelParams::new(0.772638, 1.0).unwrap();
        assert!(p.prob_one_child() > 0.0);
    }

    #[test]
    fn one_child_probability_vanishes_at_the_boundary() {
        let p = ModelParams::new(alpha_star() - 1e-6, 1.0).unwrap();
        let p1 = p.prob_one_child();
        assert!(p1 > 0.0 && p1 < 1e-4, "{p1}");
    }

    #[test]
    fn offspring_pmf_values() {
        let p = ModelParams::new(0.5, 1.0).unwrap();
        assert_eq!(p.offspring_pmf(0), 0.5);
        assert!((p.offspring_pmf(2) - 0.090_168_440_055_560_21).abs() < 1e-15);
    }

    #[test]
    fn multi_child_identity_matches_series() {
        for &a in &[1e-4, 0.1, 0.5, 0.77] {
            let p = ModelParams::new(a, 1.0).unwrap();
            let n_max = p.offspring_truncation_index(1e-17);
            let series: f64 = (2..=n_max).map(|n| p.offspring_pmf(n)).sum();
            assert!((series - p.offspring_multi_child_mass()).abs() < 1e-14);
        }
    }

    #[test]
    fn offspring_law_normalises() {
        for &a in &[1e-3, 0.2, 0.5, 0.7, 0.77] {
            let p = ModelParams::new(a, 2.0).unwrap();
            let n = p.offspring_truncation_index(1e-15);
            let partial: f64 = (0..n).map(|k| p.offspring_pmf(k)).sum();
            let tail = p.offspring_tail_bound(n);
            assert!(tail < 1e-15);
            assert!((partial - 1.0).abs() < 1e-12 + tail, "alpha {a}: {partial}");
            assert!((0..n).all(|k| p.offspring_pmf(k) >= 0.0));
        }
    }

    #[test]
    fn pgf_endpoints_and_series() {
        let p = ModelParams::new(0.5, 1.0).unwrap();
        assert_eq!(p.reproduction_pgf(0.0).unwrap(), 0.5);
        assert!((p.reproduction_pgf(1.0).unwrap() - 1.0).abs() < 1e-15);
        let n = p.offspring_truncation_index(1e-16);
        let series: f64 = (0..n).map(|k| p.offspring_pmf(k) * 0.5f64.powi(k as i32)).sum();
        assert!((series - p.reproduction_pgf(0.5).unwrap()).abs() < 1e-10);
        assert!(p.reproduction_pgf(1.0 + 1e-9).is_err());
        assert!(p.infinitesimal_gen(-1.5).is_err());
    }

    #[test]
    fn generator_values() {
        let p = ModelParams::new(0.5, 1.0).unwrap();
        assert!(p.infinitesimal_gen(1.0).unwrap().abs() < 1e-15);
        assert!((p.infinitesimal_gen(0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(p.infinitesimal_gen_complement(0.0).abs() < 1e-300);
    }

    // Richardson-extrapolated one-sided difference at 1⁻.
    fn one_sided_slope(f: impl Fn(f64) -> f64, h: f64) -> f64 {
        let d = |h: f64| (f(1.0) - f(1.0 - h)) / h;
        2.0 * d(h / 2.0) - d(h)
    }

    #[test]
    fn slopes_at_one() {
        for &(a, k) in &[(0.2, 1.0), (0.5, 1.0), (0.7, 3.0)] {
            let p = ModelParams::new(a, k).unwrap();
            let hp = one_sided_slope(|s| p.reproduction_pgf(s).unwrap(), 1e-7);
            assert!((hp - p.mean_m()).abs() < 1e-6, "{hp} vs {}", p.mean_m());
            let fp = one_sided_slope(|s| p.infinitesimal_gen(s).unwrap(), 1e-7);
            assert!((fp - p.f_prime_1()).abs() < 1e-6);
            assert!((p.reproduction_pgf_derivative(1.0).unwrap() - p.mean_m()).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn generator_forms_agree(a in 1e-6f64..0.7726, k in 0.01f64..10.0, s in 0.0f64..=1.0) {
            let p = ModelParams::new(a, k).unwrap();
            let prod = p.infinitesimal_gen(s).unwrap();
            prop_assert!((p.infinitesimal_gen_via_h(s).unwrap() - prod).abs() < 1e-12);
            prop_assert!((p.infinitesimal_gen_complement(1.0 - s) - prod).abs() < 1e-12);
        }

        #[test]
        fn pgf_is_increasing_and_convex(a in 1e-4f64..0.7726) {
            let p = ModelParams::new(a, 1.0).unwrap();
            let h = |s: f64| p.reproduction_pgf(s).unwrap();
            let step = 1.0 / 200.0;
            for i in 1..200 {
                let s = i as f64 * step;
                let (l, c, r) = (h(s - step), h(s), h(s + step));
                prop_assert!(r >= c && c >= l);
                prop_assert!(l - 2.0 * c + r >= -1e-10);
                prop_assert!((0.0..=1.0).contains(&c));
            }
        }
    }
}
