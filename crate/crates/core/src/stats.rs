//! Pearson chi-square tests used to compare simulated histograms with exact laws.
//!
//! Bins whose expected count is below `min_expected` are pooled with their
//! right neighbours (the last pool joins the previous one) before the
//! statistic is formed.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Conventional minimum expected count per pooled bin.
pub const DEFAULT_MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of bins after pooling.
    pub bins: usize,
}

impl ChiSquareTest {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value > significance
    }
}

/// Groups consecutive indices so each group's weight reaches `min_weight`.
fn pool(weights: &[f64], min_weight: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc >= min_weight {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < weights.len() {
        match groups.last_mut() {
            Some(last) => last.end = weights.len(),
            None => groups.push(start..weights.len()),
        }
    }
    groups
}

fn p_value(statistic: f64, dof: usize) -> Result<f64> {
    let dist = ChiSquared::new(dof as f64)
        .map_err(|e| Error::Domain(format!("chi-square with {dof} degrees of freedom: {e}")))?;
    Ok(dist.sf(statistic))
}

/// Goodness of fit of `observed` counts against bin probabilities `expected`.
pub fn goodness_of_fit(observed: &[u64], expected: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    if observed.len() != expected.len() {
        return Err(Error::Domain(format!(
            "{} observed bins vs {} expected bins",
            observed.len(),
            expected.len()
        )));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::Domain("no observations".into()));
    }
    let n = total as f64;
    let exp_counts: Vec<f64> = expected.iter().map(|p| p * n).collect();
    let groups = pool(&exp_counts, min_expected);
    if groups.len() < 2 {
        return Err(Error::Domain("fewer than two bins after pooling".into()));
    }
    let statistic: f64 = groups
        .iter()
        .map(|g| {
            let o: u64 = observed[g.clone()].iter().sum();
            let e: f64 = exp_counts[g.clone()].iter().sum();
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dof = groups.len() - 1;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: p_value(statistic, dof)?,
        bins: groups.len(),
    })
}

/// Two-sample homogeneity test for two binned samples.
pub fn homogeneity(a: &[u64], b: &[u64], min_expected: f64) -> Result<ChiSquareTest> {
    if a.len() != b.len() {
        return Err(Error::Domain("samples have different bin counts".into()));
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Domain("empty sample".into()));
    }
    let total = na + nb;
    // smaller of the two expected counts in each bin drives the pooling
    let weights: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x + y) as f64 * na.min(nb) / total)
        .collect();
    let groups = pool(&weights, min_expected);
    if groups.len() < 2 {
        return Err(Error::Domain("fewer than two bins after pooling".into()));
    }
    let statistic: f64 = groups
        .iter()
        .map(|g| {
            let x: u64 = a[g.clone()].iter().sum();
            let y: u64 = b[g.clone()].iter().sum();
            let col = (x + y) as f64;
            let ea = col * na / total;
            let eb = col * nb / total;
            (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb
        })
        .sum();
    let dof = groups.len() - 1;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: p_value(statistic, dof)?,
        bins: groups.len(),
    })
}
