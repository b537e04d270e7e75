use esibuya::closed_form::{self, TimePoint};
use esibuya::monte_carlo::{estimate_law, SimConfig};
use esibuya::report::{run_suite, Suite};
use esibuya::{ModelParams, Result};

use crate::output::{OutputRecord, Verdict};

/// Tables are cut where the certified remaining mass falls below this.
const TABLE_TAIL_BOUND: f64 = 1e-17;

pub fn pmf(alpha: f64, k: f64, t: f64, n_max: u64, conditional: bool) -> Result<OutputRecord> {
    let params = ModelParams::new(alpha, k)?;
    let tp = TimePoint::new(&params, t)?;
    let column = if conditional { "conditional_pmf" } else { "pmf" };
    let mut rec = OutputRecord::new("pmf", &["n", column])
        .param("alpha", alpha)
        .param("k", k)
        .param("t", t)
        .param("nmax", n_max)
        .param("conditional", conditional)
        .param("mean_mt", tp.mean_mt());
    let (first, law) = if conditional {
        (1, closed_form::conditional_law(&params, &tp, TABLE_TAIL_BOUND)?)
    } else {
        (0, closed_form::time_law(&params, &tp, TABLE_TAIL_BOUND)?)
    };
    for n in first..=n_max {
        let p = if conditional {
            closed_form::conditional_pmf(&params, &tp, n)
        } else {
            closed_form::pmf(&params, &tp, n)
        };
        rec.push_row(&[n as f64, p]);
    }
    rec.tail_mass = Some(tail_beyond(&law, n_max));
    Ok(rec)
}

/// `P(X > n_max)` from a tabulated law, including its certified tail.
fn tail_beyond(law: &esibuya::DiscreteLaw, n_max: u64) -> f64 {
    law.iter().filter(|&(n, _)| n > n_max).map(|(_, p)| p).sum::<f64>() + law.tail_mass()
}

pub fn simulate(
    alpha: f64,
    k: f64,
    times: Vec<f64>,
    replicates: u64,
    seed: u64,
    max_population: u64,
) -> Result<OutputRecord> {
    let params = ModelParams::new(alpha, k)?;
    let cfg = SimConfig::new(params, times.clone(), replicates, seed)?.with_max_population(max_population)?;
    let laws = estimate_law(&cfg)?;
    let mut rec = OutputRecord::new(
        "simulate",
        &[
            "time",
            "n",
            "count",
            "empirical_prob",
            "closed_prob",
            "empirical_mean",
            "closed_mean",
            "mean_stderr",
            "empirical_extinction",
            "closed_extinction",
        ],
    )
    .param("alpha", alpha)
    .param("k", k)
    .param("times", times)
    .param("replicates", replicates)
    .param("seed", seed)
    .param("max_population", max_population);
    for law in &laws {
        let tp = TimePoint::new(&params, law.time())?;
        let summary = [
            law.mean(),
            tp.mean_mt(),
            law.mean_std_error(),
            law.extinction_frequency(),
            closed_form::extinction_prob(&params, &tp),
        ];
        for n in 0..=law.max_count() {
            let mut row = vec![
                law.time(),
                n as f64,
                law.count(n) as f64,
                law.frequency(n),
                closed_form::pmf(&params, &tp, n),
            ];
            row.extend_from_slice(&summary);
            rec.push_row(&row);
        }
    }
    Ok(rec)
}

pub fn verify(suite: Suite) -> Result<(OutputRecord, bool)> {
    let report = run_suite(suite)?;
    let passed = report.all_passed();
    let mut rec = OutputRecord::new("verify", &["residual", "tolerance", "passed"])
        .param("suite", suite.name())
        .param("checks", report.checks.len())
        .param("all_passed", passed);
    let verdicts = report
        .checks
        .iter()
        .map(|c| {
            rec.push_row(&[c.residual, c.tolerance, if c.passed { 1.0 } else { 0.0 }]);
            Verdict {
                check: c.name.clone(),
                passed: c.passed,
                residual: c.residual.is_finite().then_some(c.residual),
                tolerance: c.tolerance,
            }
        })
        .collect();
    rec.verdicts = Some(verdicts);
    Ok((rec, passed))
}

pub fn limit(alpha: f64, n_max: u64) -> Result<OutputRecord> {
    let params = ModelParams::new(alpha, 1.0)?;
    let law = closed_form::limit_law(&params, TABLE_TAIL_BOUND)?;
    let mut rec = OutputRecord::new("limit", &["n", "pmf", "factorial_moment"])
        .param("alpha", alpha)
        .param("nmax", n_max)
        .param("a_const", params.a_const());
    for n in 1..=n_max {
        // past the f64 range the moment is reported as null
        let moment = closed_form::limit_law_factorial_moment(&params, n).unwrap_or(f64::NAN);
        rec.push_row(&[n as f64, closed_form::limit_law_pmf(&params, n), moment]);
    }
    rec.tail_mass = Some(tail_beyond(&law, n_max));
    Ok(rec)
}
