//! Named verification suites and their verdicts.
//!
//! Each check reports a residual and the tolerance it was held to. Checks
//! within a suite are independent; they run in parallel and the report is
//! sorted by check name so its content never depends on scheduling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{self, TimePoint};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::verifier::{self, Mechanism};
use crate::zoo::{self, ExtendedSibuyaParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckResult {
    /// Passes when `|residual| < tolerance`; NaN fails.
    pub fn below(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: residual.abs() < tolerance,
            residual,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ClosedForm,
    Ode,
    Table1,
    Limit,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["closed-form", "ode", "table1", "limit", "all"];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::ClosedForm => "closed-form",
            Suite::Ode => "ode",
            Suite::Table1 => "table1",
            Suite::Limit => "limit",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(Suite::ClosedForm),
            "ode" => Ok(Suite::Ode),
            "table1" => Ok(Suite::Table1),
            "limit" => Ok(Suite::Limit),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!(
                "unknown suite '{other}', expected one of {}",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

type Check = Box<dyn Fn() -> Result<Vec<CheckResult>> + Send + Sync>;

/// Grid point parameters shared by the closed-form and ODE suites.
pub const ODE_ALPHAS: [f64; 2] = [0.3, 0.6];
pub const ODE_S: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 0.9];
pub const ODE_T: [f64; 4] = [0.5, 1.0, 2.0, 5.0];
pub const ODE_TOLERANCE: f64 = 1e-8;
pub const TABLE1_TOLERANCE: f64 = 1e-4;
pub const LIMIT_MEANS: [f64; 3] = [1e-1, 1e-2, 1e-3];

fn baseline() -> ModelParams {
    ModelParams::new(0.5, 1.0).expect("valid parameters")
}

/// Largest `|F(t + u, s) − F(t, F(u, s))|` over a fixed grid.
pub fn semigroup_residual(params: &ModelParams) -> Result<f64> {
    let times = [0.1, 0.7, 2.0, 6.5];
    let mut worst: f64 = 0.0;
    for &t in &times {
        for &u in &times {
            for &s in &[0.0, 0.3, 0.8, 0.99] {
                let inner = closed_form::pgf_at(params, &TimePoint::new(params, u)?, s)?;
                let lhs = closed_form::pgf_at(params, &TimePoint::new(params, t + u)?, s)?;
                let rhs = closed_form::pgf_at(params, &TimePoint::new(params, t)?, inner)?;
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest implicit-solution residual on a 20 × 20 grid with
/// `t ∈ [0.25, 5]` and `s ∈ [0, 1 − 10⁻⁶]`.
pub fn implicit_grid_residual(params: &ModelParams) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let tp = TimePoint::new(params, 0.25 * (i + 1) as f64)?;
        for j in 0..20 {
            let s = (1.0 - 1e-6) * j as f64 / 19.0;
            worst = worst.max(verifier::check_implicit_solution(params, &tp, s)?.abs());
        }
    }
    Ok(worst)
}

/// Largest relative gap between closed-form factorial moments (n ≤ 4) and
/// their finite-difference estimates.
pub fn factorial_moment_gap(params: &ModelParams, times: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &t in times {
        let tp = TimePoint::new(params, t)?;
        for n in 1..=4u32 {
            let exact = closed_form::factorial_moment(params, &tp, u64::from(n));
            let fd = verifier::factorial_moment_fd(params, &tp, n)?;
            worst = worst.max(((fd - exact) / exact).abs());
        }
    }
    Ok(worst)
}

/// Largest relative violation of `E[X]ₙ = P(X > 0)·E[X | X > 0]ₙ` for `n < 50`.
pub fn conditioning_identity_gap(params: &ModelParams, tp: &TimePoint) -> f64 {
    let surv = closed_form::survival_prob(params, tp);
    (1..50)
        .map(|n| {
            let whole = closed_form::factorial_moment(params, tp, n);
            let cond = closed_form::conditional_factorial_moment(params, tp, n);
            ((surv * cond - whole) / whole).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest gap between the extended Sibuya p.g.f. with `(γ, b) = (M(t), α)`
/// and the conditional p.g.f. of `X(t)`.
pub fn sibuya_bridge_gap(params: &ModelParams, tp: &TimePoint) -> Result<f64> {
    let es = ExtendedSibuyaParams::new(tp.mean_mt(), params.alpha())?;
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let s = -1.0 + 0.1 * i as f64;
        let a = zoo::extended_sibuya_pgf(&es, s)?;
        let b = closed_form::conditional_pgf(params, tp, s)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

/// `|F_closed − F_rk4|` at `(α, s, t)` with `K = 1` and step `10⁻³`.
pub fn ode_residual(alpha: f64, s: f64, t: f64) -> Result<f64> {
    let p = ModelParams::new(alpha, 1.0)?;
    let sol = verifier::integrate_backward(&Mechanism::LogMixture(p), s, t, verifier::DEFAULT_STEP)?;
    let exact = closed_form::pgf_at(&p, &TimePoint::new(&p, t)?, s)?;
    Ok(sol.end_value() - exact)
}

/// The four mechanisms of the `table1` suite with the parameters used there.
pub fn table1_mechanisms() -> Vec<Mechanism> {
    vec![
        Mechanism::LogMixture(baseline()),
        Mechanism::geometric(0.5, 1.0).expect("valid"),
        Mechanism::binary(0.5, 1.0).expect("valid"),
        Mechanism::linear(0.5, 1.0).expect("valid"),
    ]
}

/// Total-variation distance between the conditional law at `M(t) = mean` and
/// the logarithmic-series limit.
pub fn limit_tv(params: &ModelParams, mean: f64) -> Result<f64> {
    let tp = TimePoint::from_mean(params, mean)?;
    let cond = closed_form::conditional_law(params, &tp, 1e-15)?;
    let limit = closed_form::limit_law(params, 1e-15)?;
    Ok(cond.total_variation(&limit))
}

fn closed_form_checks() -> Vec<Check> {
    vec![
        Box::new(|| {
            let r = semigroup_residual(&baseline())?;
            Ok(vec![CheckResult::below("closed-form/semigroup", r, 1e-12)])
        }),
        Box::new(|| {
            let r = implicit_grid_residual(&baseline())?;
            Ok(vec![CheckResult::below("closed-form/implicit-solution", r, 1e-10)])
        }),
        Box::new(|| {
            let mut worst: f64 = 0.0;
            for &a in &[0.3, 0.5, 0.7] {
                worst = worst.max(factorial_moment_gap(&ModelParams::new(a, 1.0)?, &ODE_T)?);
            }
            Ok(vec![CheckResult::below("closed-form/factorial-moments", worst, 1e-4)])
        }),
        Box::new(|| {
            let p = baseline();
            let mut worst: f64 = 0.0;
            for &t in &ODE_T {
                worst = worst.max(conditioning_identity_gap(&p, &TimePoint::new(&p, t)?));
            }
            Ok(vec![CheckResult::below(
                "closed-form/conditioning-identity",
                worst,
                1e-12,
            )])
        }),
        Box::new(|| {
            let p = baseline();
            let mut worst: f64 = 0.0;
            for &t in &ODE_T {
                let law = closed_form::time_law(&p, &TimePoint::new(&p, t)?, 1e-14)?;
                worst = worst.max(law.normalization_error());
            }
            Ok(vec![CheckResult::below("closed-form/normalisation", worst, 1e-10)])
        }),
        Box::new(|| {
            let p = baseline();
            let mut worst: f64 = 0.0;
            for &t in &ODE_T {
                worst = worst.max(sibuya_bridge_gap(&p, &TimePoint::new(&p, t)?)?);
            }
            Ok(vec![CheckResult::below(
                "closed-form/extended-sibuya-bridge",
                worst,
                1e-12,
            )])
        }),
    ]
}

fn ode_checks() -> Vec<Check> {
    let mut checks: Vec<Check> = Vec::new();
    for &alpha in &ODE_ALPHAS {
        for &s in &ODE_S {
            checks.push(Box::new(move || {
                ODE_T
                    .iter()
                    .map(|&t| {
                        let r = ode_residual(alpha, s, t)?;
                        Ok(CheckResult::below(
                            format!("ode/alpha={alpha}/s={s}/t={t}"),
                            r,
                            ODE_TOLERANCE,
                        ))
                    })
                    .collect()
            }));
        }
    }
    checks.push(Box::new(|| {
        // coarse step: at 1e-3 the error already sits at the rounding floor
        let order = verifier::convergence_order(&baseline(), 0.0, 5.0, 0.2)?;
        Ok(vec![CheckResult::below("ode/convergence-order", order - 4.0, 0.3)])
    }));
    checks
}

fn table1_checks() -> Vec<Check> {
    table1_mechanisms()
        .into_iter()
        .map(|mech| -> Check {
            Box::new(move || {
                let gap = verifier::table1_gap(&mech, &verifier::table1_grid(), 1e-3)?;
                Ok(vec![CheckResult::below(
                    format!("table1/{}", mech.name()),
                    gap,
                    TABLE1_TOLERANCE,
                )])
            })
        })
        .collect()
}

fn limit_checks() -> Vec<Check> {
    vec![Box::new(|| {
        let p = baseline();
        let tvs: Vec<f64> = LIMIT_MEANS.iter().map(|&m| limit_tv(&p, m)).collect::<Result<_>>()?;
        let mut out: Vec<CheckResult> = LIMIT_MEANS
            .iter()
            .zip(&tvs)
            .map(|(&m, &tv)| CheckResult::below(format!("limit/tv/M={m:e}"), tv, m))
            .collect();
        let worst_step = tvs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        out.push(CheckResult::below("limit/tv-decreasing", worst_step, 1.0));
        let rates: Vec<f64> = tvs.iter().zip(&LIMIT_MEANS).map(|(tv, m)| tv / m).collect();
        let spread = rates.iter().cloned().fold(0.0, f64::max) / rates.iter().cloned().fold(f64::INFINITY, f64::min);
        out.push(CheckResult::below("limit/tv-rate-spread", spread, 3.0));
        let law = closed_form::limit_law(&p, 1e-15)?;
        out.push(CheckResult::below(
            "limit/normalisation",
            law.normalization_error(),
            1e-10,
        ));
        Ok(out)
    })]
}

/// Runs every check of `suite` and collects the verdicts sorted by name.
pub fn run_suite(suite: Suite) -> Result<VerificationReport> {
    let checks: Vec<Check> = match suite {
        Suite::ClosedForm => closed_form_checks(),
        Suite::Ode => ode_checks(),
        Suite::Table1 => table1_checks(),
        Suite::Limit => limit_checks(),
        Suite::All => {
            let mut all = closed_form_checks();
            all.extend(ode_checks());
            all.extend(table1_checks());
            all.extend(limit_checks());
            all
        }
    };
    let nested: Vec<Vec<CheckResult>> = checks.par_iter().map(|c| c()).collect::<Result<_>>()?;
    let mut results: Vec<CheckResult> = nested.into_iter().flatten().collect();
    results.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(VerificationReport { suite, checks: results })
}
