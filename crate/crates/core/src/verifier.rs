//! Independent numerical checks of the closed forms.
//!
//! The backward equation `∂F/∂t = f(F)`, `F(0, s) = s` is integrated with a
//! fixed-step classical Runge-Kutta scheme. The state is the complement
//! `u = 1 − F`, which obeys `du/dt = −f(1 − u)`. Near the fixed point
//! `F = 1` this keeps full relative precision, so conditional ratios
//! `(F(t, s) − F(t, 0))/(1 − F(t, 0)) = (u₀ − uₛ)/u₀` need no cancellation.

use serde::Serialize;

use crate::closed_form::{self, TimePoint};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Allowed excursion of the numerical solution outside `[0, 1]`.
pub const DIVERGENCE_EPS: f64 = 1e-9;
/// Step used when a caller does not choose one.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Smallest survival probability for which a conditional ratio is formed.
pub const MIN_SURVIVAL: f64 = 1e-12;

/// A subcritical branching mechanism `f(s) = K(h(s) − s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Mechanism {
    /// The logarithmic-mixture reproduction law of [`ModelParams`].
    LogMixture(ModelParams),
    /// `h(s) = 1/(1 + m − ms)`.
    Geometric { m: f64, k: f64 },
    /// `h(s) = 1 + (m/2)(s² − 1)`.
    Binary { m: f64, k: f64 },
    /// `h(s) = 1 − m + ms`.
    Linear { m: f64, k: f64 },
}

fn check_mean_and_rate(m: f64, k: f64) -> Result<()> {
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::Domain(format!("offspring mean must lie in (0, 1), got {m}")));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Domain(format!("rate K must be finite and > 0, got {k}")));
    }
    Ok(())
}

impl Mechanism {
    pub fn log_mixture(params: ModelParams) -> Self {
        Mechanism::LogMixture(params)
    }

    pub fn geometric(m: f64, k: f64) -> Result<Self> {
        check_mean_and_rate(m, k)?;
        Ok(Mechanism::Geometric { m, k })
    }

    pub fn binary(m: f64, k: f64) -> Result<Self> {
        check_mean_and_rate(m, k)?;
        Ok(Mechanism::Binary { m, k })
    }

    /// Binary mechanism from `ϱ = m/(2 − m)`; stored as `m = 2ϱ/(1 + ϱ)`.
    pub fn binary_from_rho(rho: f64, k: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
        }
        Self::binary(2.0 * rho / (1.0 + rho), k)
    }

    pub fn linear(m: f64, k: f64) -> Result<Self> {
        check_mean_and_rate(m, k)?;
        Ok(Mechanism::Linear { m, k })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::LogMixture(_) => "log-mixture",
            Mechanism::Geometric { .. } => "geometric",
            Mechanism::Binary { .. } => "binary",
            Mechanism::Linear { .. } => "linear",
        }
    }

    pub fn rate_k(&self) -> f64 {
        match self {
            Mechanism::LogMixture(p) => p.rate_k(),
            Mechanism::Geometric { k, .. } | Mechanism::Binary { k, .. } | Mechanism::Linear { k, .. } => *k,
        }
    }

    /// `h'(1)`.
    pub fn mean_m(&self) -> f64 {
        match self {
            Mechanism::LogMixture(p) => p.mean_m(),
            Mechanism::Geometric { m, .. } | Mechanism::Binary { m, .. } | Mechanism::Linear { m, .. } => *m,
        }
    }

    /// `f'(1) = K(m − 1)`.
    pub fn f_prime_1(&self) -> f64 {
        self.rate_k() * (self.mean_m() - 1.0)
    }

    /// `ϱ = m/(2 − m)` for the binary mechanism.
    pub fn rho(&self) -> Option<f64> {
        match self {
            Mechanism::Binary { m, .. } => Some(m / (2.0 - m)),
            _ => None,
        }
    }

    /// Reproduction p.g.f. `h(s)` on `[0, 1]`.
    pub fn h(&self, s: f64) -> f64 {
        match *self {
            Mechanism::LogMixture(p) => p.reproduction_pgf(s).expect("s within the unit disk"),
            Mechanism::Geometric { m, .. } => 1.0 / (1.0 + m - m * s),
            Mechanism::Binary { m, .. } => 1.0 + 0.5 * m * (s * s - 1.0),
            Mechanism::Linear { m, .. } => 1.0 - m + m * s,
        }
    }

    /// `f(s) = K(h(s) − s)`.
    pub fn f(&self, s: f64) -> f64 {
        self.f_complement(1.0 - s)
    }

    /// `f(1 − u)`, factored so that it is accurate for small `u`.
    pub fn f_complement(&self, u: f64) -> f64 {
        match *self {
            Mechanism::LogMixture(p) => p.infinitesimal_gen_complement(u),
            Mechanism::Geometric { m, k } => k * u * (1.0 - m + m * u) / (1.0 + m * u),
            Mechanism::Binary { m, k } => k * u * (1.0 - m + 0.5 * m * u),
            Mechanism::Linear { m, k } => k * u * (1.0 - m),
        }
    }

    /// Time at which `M(t) = exp(f'(1)·t)` equals `mean_target`.
    pub fn time_for_mean(&self, mean_target: f64) -> Result<f64> {
        if !(mean_target > 0.0 && mean_target < 1.0) {
            return Err(Error::Domain(format!(
                "target mean must lie in (0, 1), got {mean_target}"
            )));
        }
        Ok(mean_target.ln() / self.f_prime_1())
    }
}

/// Trajectory `t ↦ F(t, s₀)` from [`integrate_backward`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeSolution {
    pub s0: f64,
    /// `(t, F(t, s₀))` after every step, starting with `(0, s₀)`.
    pub grid: Vec<(f64, f64)>,
    pub step: f64,
    /// Excursion outside `[0, 1]` tolerated before reporting divergence.
    pub tolerance: f64,
    /// `1 − F(t_end, s₀)` as integrated, before the subtraction from 1.
    pub end_complement: f64,
}

impl OdeSolution {
    pub fn end_time(&self) -> f64 {
        self.grid.last().map(|p| p.0).unwrap_or(0.0)
    }

    pub fn end_value(&self) -> f64 {
        self.grid.last().map(|p| p.1).unwrap_or(self.s0)
    }
}

fn check_range(u: f64, t: f64) -> Result<f64> {
    if u.is_finite() && (-DIVERGENCE_EPS..=1.0 + DIVERGENCE_EPS).contains(&u) {
        Ok(u)
    } else {
        Err(Error::NumericalDivergence { t, value: 1.0 - u })
    }
}

/// Classical RK4 for `∂F/∂t = f(F)`, `F(0) = s₀`, up to `t_end`.
///
/// The last step is shortened so the grid ends exactly at `t_end`.
pub fn integrate_backward(mech: &Mechanism, s0: f64, t_end: f64, step: f64) -> Result<OdeSolution> {
    if !(0.0..=1.0).contains(&s0) {
        return Err(Error::Domain(format!("s0 must lie in [0, 1], got {s0}")));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Domain(format!("step must be finite and > 0, got {step}")));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Domain(format!("t_end must be finite and > 0, got {t_end}")));
    }
    let rhs = |u: f64| -mech.f_complement(u);
    let steps = (t_end / step - 1e-9).ceil().max(1.0) as u64;
    let mut grid = Vec::with_capacity(steps as usize + 1);
    let mut u = 1.0 - s0;
    grid.push((0.0, s0));
    for i in 0..steps {
        let t = i as f64 * step;
        let t_next = if i + 1 == steps { t_end } else { (i + 1) as f64 * step };
        let h = t_next - t;
        let k1 = rhs(u);
        let k2 = rhs(check_range(u + 0.5 * h * k1, t + 0.5 * h)?);
        let k3 = rhs(check_range(u + 0.5 * h * k2, t + 0.5 * h)?);
        let k4 = rhs(check_range(u + h * k3, t_next)?);
        u = check_range(u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t_next)?;
        grid.push((t_next, 1.0 - u));
    }
    Ok(OdeSolution {
        s0,
        grid,
        step,
        tolerance: DIVERGENCE_EPS,
        end_complement: u,
    })
}

/// Empirical order `log₂(e(h)/e(h/2))` of the integrator against the closed
/// form for the log-mixture mechanism, at `(s₀, t_end)`.
pub fn convergence_order(params: &ModelParams, s0: f64, t_end: f64, step: f64) -> Result<f64> {
    let mech = Mechanism::LogMixture(*params);
    let exact = closed_form::pgf_complement(params, &TimePoint::new(params, t_end)?, s0)?;
    let err = |h: f64| -> Result<f64> { Ok((integrate_backward(&mech, s0, t_end, h)?.end_complement - exact).abs()) };
    Ok((err(step)? / err(step / 2.0)?).log2())
}

/// `log(1 + log(1 − αF)/A) − log(M·(1 + log(1 − αs)/A))` with `F` the closed form.
///
/// Both sides are evaluated through `log(1 + α(1 − x)/(1 − α))`, which is
/// accurate for `x` close to 1.
pub fn check_implicit_solution(params: &ModelParams, tp: &TimePoint, s: f64) -> Result<f64> {
    if !(-1.0..1.0).contains(&s) {
        return Err(Error::Domain(format!(
            "implicit solution is checked for s in [-1, 1), got {s}"
        )));
    }
    let a = params.alpha();
    let ratio = |complement: f64| (a * complement / (1.0 - a)).ln_1p() / params.a_const();
    let u = closed_form::pgf_complement(params, tp, s)?;
    let lhs = ratio(u).ln();
    let rhs = tp.mean_mt().ln() + ratio(1.0 - s).ln();
    Ok(lhs - rhs)
}

/// Conditional p.g.f. `(F(t, s) − F(t, 0))/(1 − F(t, 0))` at `t_big`, each `F`
/// obtained by integrating the backward equation with `step`.
pub fn numeric_conditional_limit_with_step(
    mech: &Mechanism,
    s_grid: &[f64],
    t_big: f64,
    step: f64,
) -> Result<Vec<f64>> {
    let u0 = integrate_backward(mech, 0.0, t_big, step)?.end_complement;
    if u0 < MIN_SURVIVAL {
        return Err(Error::PrecisionLoss(format!(
            "survival probability {u0:e} at t = {t_big} is below {MIN_SURVIVAL:e}"
        )));
    }
    s_grid
        .iter()
        .map(|&s| {
            let us = integrate_backward(mech, s, t_big, step)?.end_complement;
            Ok((u0 - us) / u0)
        })
        .collect()
}

/// [`numeric_conditional_limit_with_step`] with [`DEFAULT_STEP`].
pub fn numeric_conditional_limit(mech: &Mechanism, s_grid: &[f64], t_big: f64) -> Result<Vec<f64>> {
    numeric_conditional_limit_with_step(mech, s_grid, t_big, DEFAULT_STEP)
}

/// Closed-form conditional limit p.g.f. `F*(s)` of each mechanism.
pub fn table1_closed_form(mech: &Mechanism, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("s must lie in [0, 1], got {s}")));
    }
    Ok(match *mech {
        Mechanism::LogMixture(p) => -(-p.alpha() * s).ln_1p() / p.a_const(),
        Mechanism::Geometric { m, .. } => 1.0 - (1.0 - s) / (1.0 - m * s).powf(m),
        Mechanism::Binary { .. } => {
            let rho = mech.rho().expect("binary mechanism");
            (1.0 - rho) * s / (1.0 - rho * s)
        }
        Mechanism::Linear { .. } => s,
    })
}

/// Largest `|numeric − closed form|` of the conditional p.g.f. over `s_grid`
/// at the time where `M(t) = mean_target`.
pub fn table1_gap(mech: &Mechanism, s_grid: &[f64], mean_target: f64) -> Result<f64> {
    let t_big = mech.time_for_mean(mean_target)?;
    let numeric = numeric_conditional_limit(mech, s_grid, t_big)?;
    s_grid.iter().zip(&numeric).try_fold(0.0f64, |acc, (&s, &v)| {
        Ok(acc.max((v - table1_closed_form(mech, s)?).abs()))
    })
}

/// `s ∈ {0, 0.2, …, 1}`.
pub fn table1_grid() -> Vec<f64> {
    (0..=5).map(|i| i as f64 * 0.2).collect()
}

/// `E[X(t)(X(t) − 1)⋯(X(t) − n + 1)]` from finite differences of the closed-form
/// p.g.f. at `s = 1`, refined by Richardson extrapolation.
///
/// Forward differences of `g(u) = 1 − F(t, 1 − u)` with steps
/// `h₀, h₀/2, …` are combined so that the `O(h), …, O(h^{levels−1})` error
/// terms cancel. `F⁽ⁿ⁾(1) = (−1)^{n+1} g⁽ⁿ⁾(0)`.
pub fn factorial_moment_richardson(
    params: &ModelParams,
    tp: &TimePoint,
    n: u32,
    h0: f64,
    levels: usize,
) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    if !(h0 > 0.0 && n as f64 * h0 <= 2.0) || levels == 0 {
        return Err(Error::Domain(format!(
            "need 0 < n·h0 <= 2 and levels >= 1, got n = {n}, h0 = {h0}, levels = {levels}"
        )));
    }
    let g = |u: f64| closed_form::pgf_complement(params, tp, 1.0 - u);
    let binom = |k: u32| -> f64 { (0..k).fold(1.0, |acc, j| acc * f64::from(n - j) / f64::from(j + 1)) };
    let difference = |h: f64| -> Result<f64> {
        let mut sum = 0.0;
        for k in 0..=n {
            let sign = if (n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            sum += sign * binom(k) * g(f64::from(k) * h)?;
        }
        Ok(sum / h.powi(n as i32))
    };
    let mut table: Vec<f64> = (0..levels)
        .map(|j| difference(h0 / 2f64.powi(j as i32)))
        .collect::<Result<_>>()?;
    for order in 1..levels {
        let factor = 2f64.powi(order as i32);
        for j in (order..levels).rev() {
            table[j] = (factor * table[j] - table[j - 1]) / (factor - 1.0);
        }
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok(sign * table[levels - 1])
}

/// [`factorial_moment_richardson`] with `h₀ = min(1/2, (1 − α)/(2α))` and 7
/// levels. The base step shrinks with the distance `(1 − α)/α` from `s = 1` to
/// the singularity of `F` at `s = 1/α`.
pub fn factorial_moment_fd(params: &ModelParams, tp: &TimePoint, n: u32) -> Result<f64> {
    let a = params.alpha();
    let h0 = 0.5 * ((1.0 - a) / a).min(1.0);
    factorial_moment_richardson(params, tp, n, h0, 7)
}
