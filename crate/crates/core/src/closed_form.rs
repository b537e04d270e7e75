//! Exact time-`t` law of the process started from one particle.
//!
//! With `M = M(t) = exp(f'(1)·t)` the p.g.f. of `X(t)` is
//!
//! ```text
//! F(t, s) = (1/α)·{1 − (1 − α)·((1 − αs)/(1 − α))^M}
//! ```
//!
//! so that, conditionally on survival, `X(t)` is extended Sibuya with
//! `γ = M` and `b = α`, and unconditionally it carries an extra atom at 0.
//! Every power is evaluated as `exp(M·log(…))` with `ln_1p`/`exp_m1`, and
//! coefficients involving falling factorials `[M]ₙ` are assembled in log
//! space, so the deep-subcritical regime `M → 0` stays accurate.

use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::law::DiscreteLaw;
use crate::magnitude::{falling_factorial, SignedMagnitude};
use crate::model::{check_unit_disk, ModelParams};
use crate::zoo::{self, LogSeriesParams};

/// A process time together with its mean `M(t) = exp(f'(1)·t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimePoint {
    t: f64,
    mean_mt: f64,
}

impl TimePoint {
    pub fn new(params: &ModelParams, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("time t = {t} must be finite and >= 0")));
        }
        Ok(Self {
            t,
            mean_mt: (params.f_prime_1() * t).exp(),
        })
    }

    /// The time at which `M(t)` equals `mean_mt ∈ (0, 1]`.
    pub fn from_mean(params: &ModelParams, mean_mt: f64) -> Result<Self> {
        if !(mean_mt > 0.0 && mean_mt <= 1.0) {
            return Err(Error::Domain(format!("target mean {mean_mt} must lie in (0, 1]")));
        }
        Ok(Self {
            t: mean_mt.ln() / params.f_prime_1(),
            mean_mt,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `M(t) = E[X(t)]`.
    pub fn mean_mt(&self) -> f64 {
        self.mean_mt
    }
}

/// `log((1 − αs)/(1 − α)) = log(1 + α(1 − s)/(1 − α))`.
fn log_base_ratio(params: &ModelParams, s: f64) -> f64 {
    let a = params.alpha();
    (a * (1.0 - s) / (1.0 - a)).ln_1p()
}

/// `1 − F(t, s) = ((1 − α)/α)·(((1 − αs)/(1 − α))^M − 1)`.
pub fn pgf_complement(params: &ModelParams, tp: &TimePoint, s: f64) -> Result<f64> {
    check_unit_disk(s)?;
    let a = params.alpha();
    Ok((1.0 - a) / a * (tp.mean_mt * log_base_ratio(params, s)).exp_m1())
}

/// `F(t, s) = E[s^{X(t)}]`.
pub fn pgf_at(params: &ModelParams, tp: &TimePoint, s: f64) -> Result<f64> {
    Ok(1.0 - pgf_complement(params, tp, s)?)
}

/// `∂F/∂t = (Kα(1 − α)/A)·R^M·log(R^M)` with `R = (1 − αs)/(1 − α)`.
pub fn pgf_time_derivative(params: &ModelParams, tp: &TimePoint, s: f64) -> Result<f64> {
    check_unit_disk(s)?;
    let a = params.alpha();
    let log_rm = tp.mean_mt * log_base_ratio(params, s);
    Ok(params.rate_k() * a * (1.0 - a) / params.a_const() * log_rm.exp() * log_rm)
}

/// `∂F/∂s = M·R^{M − 1}`.
pub fn pgf_s_derivative(params: &ModelParams, tp: &TimePoint, s: f64) -> Result<f64> {
    check_unit_disk(s)?;
    let m = tp.mean_mt;
    Ok(m * ((m - 1.0) * log_base_ratio(params, s)).exp())
}

/// `n`-th derivative in `s`,
/// `−((1 − α)/α)·(1 − αs)^{M − n}·αⁿ(−1)ⁿ[M]ₙ/(1 − α)^M`, in log form.
pub fn pgf_s_derivative_n(params: &ModelParams, tp: &TimePoint, s: f64, n: u64) -> Result<SignedMagnitude> {
    check_unit_disk(s)?;
    if n == 0 {
        return Ok(SignedMagnitude::from_f64(pgf_at(params, tp, s)?));
    }
    let a = params.alpha();
    let m = tp.mean_mt;
    let nf = n as f64;
    let ln_rest = ((1.0 - a) / a).ln() + (m - nf) * (-a * s).ln_1p() + nf * a.ln() + m * params.a_const();
    Ok(alternating(falling_factorial(m, n), n).scale_log(ln_rest))
}

/// `−(−1)ⁿ·x`, i.e. `(−1)^{n+1}·x`.
fn alternating(x: SignedMagnitude, n: u64) -> SignedMagnitude {
    if n.is_multiple_of(2) {
        -x
    } else {
        x
    }
}

/// `(−1)^{n+1}[M]ₙ/n!`, the `n`-th Taylor coefficient of `1 − (1 − x)^M`.
fn sibuya_coefficient(m: f64, n: u64) -> SignedMagnitude {
    alternating(falling_factorial(m, n), n).scale_log(-ln_factorial(n))
}

/// `P(X(t) = 0) = F(t, 0)`.
pub fn extinction_prob(params: &ModelParams, tp: &TimePoint) -> f64 {
    pgf_at(params, tp, 0.0).expect("s = 0 is in the domain")
}

/// `1 − F(t, 0) = ((1 − α)/α)·(exp(M·A) − 1)`.
pub fn survival_prob(params: &ModelParams, tp: &TimePoint) -> f64 {
    let a = params.alpha();
    (1.0 - a) / a * (tp.mean_mt * params.a_const()).exp_m1()
}

/// `P(X(t) = n)`. At `t = 0` this is the point mass at one.
pub fn pmf(params: &ModelParams, tp: &TimePoint, n: u64) -> f64 {
    if tp.t == 0.0 {
        return if n == 1 { 1.0 } else { 0.0 };
    }
    if n == 0 {
        return extinction_prob(params, tp);
    }
    let a = params.alpha();
    let ln_rest = ((1.0 - a) / a).ln() + n as f64 * a.ln() + tp.mean_mt * params.a_const();
    sibuya_coefficient(tp.mean_mt, n).scale_log(ln_rest).to_f64()
}

/// Factorial moment `E[X(t)]ₙ` in log form.
pub fn factorial_moment_log(params: &ModelParams, tp: &TimePoint, n: u64) -> SignedMagnitude {
    let a = params.alpha();
    let ln_rest = ((1.0 - a) / a).ln() + n as f64 * (a / (1.0 - a)).ln();
    alternating(falling_factorial(tp.mean_mt, n), n).scale_log(ln_rest)
}

/// `E[X(t)]ₙ = −((1 − α)/α)·αⁿ(−1)ⁿ[M]ₙ/(1 − α)ⁿ`, `n ≥ 1`. `+inf` past the `f64` range.
pub fn factorial_moment(params: &ModelParams, tp: &TimePoint, n: u64) -> f64 {
    factorial_moment_log(params, tp, n).to_f64()
}

/// `P(X(t) = n | X(t) > 0) = (−1/n!)·αⁿ(−1)ⁿ[M]ₙ/(1 − (1 − α)^M)`, `n ≥ 1`.
pub fn conditional_pmf(params: &ModelParams, tp: &TimePoint, n: u64) -> f64 {
    assert!(n >= 1, "conditional law lives on n >= 1");
    let m = tp.mean_mt;
    let ln_denominator = (-(-m * params.a_const()).exp_m1()).ln();
    let ln_rest = n as f64 * params.alpha().ln() - ln_denominator;
    sibuya_coefficient(m, n).scale_log(ln_rest).to_f64()
}

/// Conditional factorial moment in log form.
pub fn conditional_factorial_moment_log(params: &ModelParams, tp: &TimePoint, n: u64) -> SignedMagnitude {
    let a = params.alpha();
    let m = tp.mean_mt;
    // (1 − α)^M/(1 − (1 − α)^M) = 1/(exp(M·A) − 1)
    let ln_rest = n as f64 * (a / (1.0 - a)).ln() - (m * params.a_const()).exp_m1().ln();
    alternating(falling_factorial(m, n), n).scale_log(ln_rest)
}

/// `E([X(t)]ₙ | X(t) > 0)`, `n ≥ 1`.
pub fn conditional_factorial_moment(params: &ModelParams, tp: &TimePoint, n: u64) -> f64 {
    assert!(n >= 1, "factorial moments are indexed from n = 1");
    conditional_factorial_moment_log(params, tp, n).to_f64()
}

/// `(F(t, s) − F(t, 0))/(1 − F(t, 0)) = (1 − (1 − αs)^M)/(1 − (1 − α)^M)`.
pub fn conditional_pgf(params: &ModelParams, tp: &TimePoint, s: f64) -> Result<f64> {
    check_unit_disk(s)?;
    let a = params.alpha();
    let m = tp.mean_mt;
    let num = (m * (-a * s).ln_1p()).exp_m1();
    let den = (-m * params.a_const()).exp_m1();
    Ok(num / den)
}

/// Conditional limit law `P(ξ = n) = αⁿ/(A·n)`.
pub fn limit_law_pmf(params: &ModelParams, n: u64) -> f64 {
    zoo::log_series_pmf(&limit_law_params(params), n)
}

/// `−log(1 − αs)/A`.
pub fn limit_law_pgf(params: &ModelParams, s: f64) -> Result<f64> {
    zoo::log_series_pgf(&limit_law_params(params), s)
}

fn limit_law_params(params: &ModelParams) -> LogSeriesParams {
    LogSeriesParams::new(params.alpha()).expect("model alpha lies in (0, 1)")
}

/// `E[ξ]ₙ = ((n − 1)!/A)·(α/(1 − α))ⁿ` in log form.
pub fn limit_law_factorial_moment_log(params: &ModelParams, n: u64) -> SignedMagnitude {
    assert!(n >= 1, "factorial moments are indexed from n = 1");
    let a = params.alpha();
    let ln_value = ln_factorial(n - 1) - params.a_const().ln() + n as f64 * (a / (1.0 - a)).ln();
    SignedMagnitude::from_parts(1, ln_value)
}

/// `E[ξ]ₙ`; [`Error::Overflow`] once the value leaves the `f64` range.
pub fn limit_law_factorial_moment(params: &ModelParams, n: u64) -> Result<f64> {
    let v = limit_law_factorial_moment_log(params, n);
    if v.overflows_f64() {
        return Err(Error::Overflow(format!(
            "E[xi]_{n} = exp({:.3}) exceeds f64; use the log-scale accessor",
            v.log_magnitude()
        )));
    }
    Ok(v.to_f64())
}

/// Tabulated law of `X(t)` on `{0, 1, …}`.
///
/// The tail bound uses `P(n + 1)/P(n) = α(n − M)/(n + 1) ≤ α` for `n ≥ 1`.
pub fn time_law(params: &ModelParams, tp: &TimePoint, tail_bound: f64) -> Result<DiscreteLaw> {
    if tp.t == 0.0 {
        return Ok(DiscreteLaw::from_probs(0, vec![0.0, 1.0]));
    }
    DiscreteLaw::tabulate(0, 1, params.alpha(), tail_bound, |n| pmf(params, tp, n))
}

/// Tabulated law of `X(t)` given `X(t) > 0`, on `{1, 2, …}`.
pub fn conditional_law(params: &ModelParams, tp: &TimePoint, tail_bound: f64) -> Result<DiscreteLaw> {
    if tp.t == 0.0 {
        return Ok(DiscreteLaw::degenerate(1));
    }
    DiscreteLaw::tabulate(1, 1, params.alpha(), tail_bound, |n| conditional_pmf(params, tp, n))
}

/// Tabulated logarithmic-series limit law.
pub fn limit_law(params: &ModelParams, tail_bound: f64) -> Result<DiscreteLaw> {
    zoo::log_series_law(&limit_law_params(params), tail_bound)
}
