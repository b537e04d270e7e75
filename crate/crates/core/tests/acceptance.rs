//! Acceptance criteria, one verdict line each.
//!
//! Run with `cargo test -p esibuya --test acceptance -- --nocapture` to see the lines.

use std::cell::Cell;
use std::time::{Duration, Instant};

use esibuya::closed_form::{self, TimePoint};
use esibuya::monte_carlo::{estimate_law, SimConfig};
use esibuya::report::{self, ODE_ALPHAS, ODE_S, ODE_T};
use esibuya::stats::{goodness_of_fit, DEFAULT_MIN_EXPECTED};
use esibuya::verifier;
use esibuya::zoo::{self, ExtendedSibuyaParams};
use esibuya::{solve_alpha_star, ModelParams};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn alpha_star_value() -> Verdict {
    // best of several runs so a cold cache does not dominate
    let mut best = Duration::MAX;
    let mut value = f64::NAN;
    for _ in 0..5 {
        let (v, d) = timed(solve_alpha_star);
        value = v;
        best = best.min(d);
    }
    let gap = (value - 0.772638).abs();
    Verdict::new(
        gap < 1e-5 && best < Duration::from_millis(1),
        format!("alpha* = {value:.10}, |gap| = {gap:.1e}, runtime {best:?}"),
    )
}

fn closed_form_vs_ode() -> Verdict {
    let (worst, elapsed) = timed(|| {
        let mut worst: f64 = 0.0;
        for &a in &ODE_ALPHAS {
            for &s in &ODE_S {
                for &t in &ODE_T {
                    worst = worst.max(report::ode_residual(a, s, t).unwrap().abs());
                }
            }
        }
        worst
    });
    Verdict::new(
        worst < 1e-8 && elapsed < Duration::from_secs(5),
        format!("max |closed - rk4| = {worst:.2e} over 40 points, runtime {elapsed:?}"),
    )
}

fn closed_form_vs_simulation() -> Verdict {
    let p = ModelParams::new(0.5, 1.0).unwrap();
    let tp = TimePoint::new(&p, 1.0).unwrap();
    let cfg = SimConfig::new(p, vec![1.0], 1_000_000, 20_240_601).unwrap();
    let (laws, elapsed) = timed(|| estimate_law(&cfg).unwrap());
    let law = &laws[0];
    let mut expected: Vec<f64> = (0..26).map(|n| closed_form::pmf(&p, &tp, n)).collect();
    expected.push(1.0 - expected.iter().sum::<f64>());
    let gof = goodness_of_fit(&law.binned(0, 26), &expected, DEFAULT_MIN_EXPECTED).unwrap();
    let z = (law.mean() - tp.mean_mt()) / law.mean_std_error();
    Verdict::new(
        gof.passes(1e-3) && z.abs() < 4.0 && elapsed < Duration::from_secs(60),
        format!(
            "chi2 = {:.2} on {} dof, p = {:.3}; mean {:.6} vs M(1) = {:.6} (z = {z:.2}); runtime {elapsed:?}",
            gof.statistic,
            gof.dof,
            gof.p_value,
            law.mean(),
            tp.mean_mt()
        ),
    )
}

fn implicit_solution() -> Verdict {
    let mut worst: f64 = 0.0;
    for &a in &[0.3, 0.5, 0.7] {
        worst = worst.max(report::implicit_grid_residual(&ModelParams::new(a, 1.0).unwrap()).unwrap());
    }
    Verdict::new(
        worst < 1e-10,
        format!("max residual {worst:.2e} on 20x20 grid, alpha in {{0.3, 0.5, 0.7}}"),
    )
}

fn conditional_limit_rate() -> Verdict {
    let means = report::LIMIT_MEANS;
    let worst_spread = Cell::new(0.0f64);
    let result = runner(64).run(&(0.05f64..0.77), |alpha| {
        let p = ModelParams::new(alpha, 1.0).unwrap();
        let tvs: Vec<f64> = means.iter().map(|&m| report::limit_tv(&p, m).unwrap()).collect();
        prop_assert!(tvs.windows(2).all(|w| w[1] < w[0]), "alpha {alpha}: {tvs:?}");
        let rates: Vec<f64> = tvs.iter().zip(&means).map(|(tv, m)| tv / m).collect();
        let spread = rates.iter().cloned().fold(0.0, f64::max) / rates.iter().cloned().fold(f64::INFINITY, f64::min);
        worst_spread.set(worst_spread.get().max(spread));
        prop_assert!(spread <= 3.0, "alpha {alpha}: TV/M = {rates:?}");
        Ok(())
    });
    match result {
        Ok(()) => Verdict::new(
            true,
            format!(
                "64 random alpha: TV decreasing, max TV/M spread {:.4}",
                worst_spread.get()
            ),
        ),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn factorial_moments() -> Verdict {
    let mut fd_gap: f64 = 0.0;
    let mut cond_gap: f64 = 0.0;
    for &a in &[0.3, 0.5, 0.7] {
        let p = ModelParams::new(a, 1.0).unwrap();
        fd_gap = fd_gap.max(report::factorial_moment_gap(&p, &ODE_T).unwrap());
        for &t in &ODE_T {
            cond_gap = cond_gap.max(report::conditioning_identity_gap(&p, &TimePoint::new(&p, t).unwrap()));
        }
    }
    Verdict::new(
        fd_gap < 1e-4 && cond_gap < 1e-12,
        format!("finite-difference relative gap {fd_gap:.2e} (n <= 4); conditioning identity gap {cond_gap:.2e}"),
    )
}

fn table1() -> Verdict {
    let (gaps, elapsed) = timed(|| {
        report::table1_mechanisms()
            .iter()
            .map(|m| {
                (
                    m.name(),
                    verifier::table1_gap(m, &verifier::table1_grid(), 1e-3).unwrap(),
                )
            })
            .collect::<Vec<_>>()
    });
    let passed = gaps.iter().all(|(_, g)| *g < 1e-4) && elapsed < Duration::from_secs(30);
    let listed: Vec<String> = gaps.iter().map(|(n, g)| format!("{n} {g:.2e}")).collect();
    Verdict::new(
        passed,
        format!("sup-norm gaps at M = 1e-3: {}; runtime {elapsed:?}", listed.join(", ")),
    )
}

fn sibuya_bridge() -> Verdict {
    let worst = Cell::new(0.0f64);
    let result = runner(200).run(&(0.01f64..0.77, 0.0f64..20.0, -1.0f64..=1.0), |(alpha, t, s)| {
        let p = ModelParams::new(alpha, 1.0).unwrap();
        let tp = TimePoint::new(&p, t).unwrap();
        let es = ExtendedSibuyaParams::new(tp.mean_mt(), alpha).unwrap();
        let gap = (zoo::extended_sibuya_pgf(&es, s).unwrap() - closed_form::conditional_pgf(&p, &tp, s).unwrap()).abs();
        worst.set(worst.get().max(gap));
        prop_assert!(gap < 1e-12, "alpha {alpha} t {t} s {s}: gap {gap:e}");
        Ok(())
    });
    match result {
        Ok(()) => Verdict::new(true, format!("200 random (alpha, t, s): max gap {:.2e}", worst.get())),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn semigroup() -> Verdict {
    let worst = Cell::new(0.0f64);
    let strategy = (0.01f64..0.77, 0.0f64..10.0, 0.0f64..10.0, -1.0f64..=1.0);
    let result = runner(100).run(&strategy, |(alpha, t, u, s)| {
        let p = ModelParams::new(alpha, 1.0).unwrap();
        let inner = closed_form::pgf_at(&p, &TimePoint::new(&p, u).unwrap(), s).unwrap();
        let lhs = closed_form::pgf_at(&p, &TimePoint::new(&p, t + u).unwrap(), s).unwrap();
        let rhs = closed_form::pgf_at(&p, &TimePoint::new(&p, t).unwrap(), inner).unwrap();
        worst.set(worst.get().max((lhs - rhs).abs()));
        prop_assert!(
            (lhs - rhs).abs() < 1e-12,
            "alpha {alpha} t {t} u {u} s {s}: {lhs} vs {rhs}"
        );
        Ok(())
    });
    match result {
        Ok(()) => Verdict::new(true, format!("100 random triples: max gap {:.2e}", worst.get())),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("alpha* root", alpha_star_value),
        ("closed form vs RK4", closed_form_vs_ode),
        ("closed form vs Monte Carlo", closed_form_vs_simulation),
        ("implicit solution residual", implicit_solution),
        ("conditional limit convergence", conditional_limit_rate),
        ("factorial moments", factorial_moments),
        ("mechanism gallery limits", table1),
        ("extended Sibuya bridge", sibuya_bridge),
        ("semigroup property", semigroup),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = check();
        let tag = if verdict.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}. {name}: {}", i + 1, verdict.detail);
        if !verdict.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
