//! Exact event-driven simulation of `X(t)`.
//!
//! Lifetimes are i.i.d. exponential with rate `K`, so with `n` particles alive
//! the next death comes after an `Exp(K·n)` holding time and strikes a
//! uniformly chosen particle. Only the count matters, and one death event
//! changes it by `η − 1` with `η` drawn from the offspring law.

use std::collections::BTreeMap;

use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng::{derive_stream, Stream};
use crate::sampler::{Law, Sampler};

pub const DEFAULT_MAX_POPULATION: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    params: ModelParams,
    horizon_times: Vec<f64>,
    replicates: u64,
    seed: u64,
    max_population: u64,
}

impl SimConfig {
    pub fn new(params: ModelParams, horizon_times: Vec<f64>, replicates: u64, seed: u64) -> Result<Self> {
        if horizon_times.is_empty() {
            return Err(Error::Config("at least one horizon time is required".into()));
        }
        if !horizon_times.iter().all(|t| t.is_finite() && *t > 0.0) {
            return Err(Error::Config(format!(
                "horizon times must be finite and > 0, got {horizon_times:?}"
            )));
        }
        if !horizon_times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(format!(
                "horizon times must be strictly increasing, got {horizon_times:?}"
            )));
        }
        if replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        Ok(Self {
            params,
            horizon_times,
            replicates,
            seed,
            max_population: DEFAULT_MAX_POPULATION,
        })
    }

    pub fn with_max_population(mut self, max_population: u64) -> Result<Self> {
        if max_population == 0 {
            return Err(Error::Config("max_population must be >= 1".into()));
        }
        self.max_population = max_population;
        Ok(self)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn horizon_times(&self) -> &[f64] {
        &self.horizon_times
    }

    pub fn replicates(&self) -> u64 {
        self.replicates
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn max_population(&self) -> u64 {
        self.max_population
    }
}

/// Simulator state: particle count, clock and private random stream.
#[derive(Debug, Clone)]
pub struct Population {
    count: u64,
    now: f64,
    stream: Stream,
}

impl Population {
    pub fn new(count: u64, stream: Stream) -> Self {
        Self {
            count,
            now: 0.0,
            stream,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn is_extinct(&self) -> bool {
        self.count == 0
    }
}

/// Advances `pop` by one death event.
pub fn step(pop: &mut Population, params: &ModelParams, offspring: &mut Sampler, max_population: u64) -> Result<()> {
    if pop.count == 0 {
        return Err(Error::Absorbed);
    }
    let rate = params.rate_k() * pop.count as f64;
    let holding: f64 = Exp1.sample(&mut pop.stream);
    pop.now += holding / rate;
    let children = offspring.sample(&mut pop.stream);
    let next = pop.count - 1 + children;
    if next > max_population {
        return Err(Error::PopulationCapExceeded {
            count: next,
            cap: max_population,
        });
    }
    pop.count = next;
    Ok(())
}

/// Counts at each horizon for one replicate started from `initial_count` particles.
pub fn run_replicate_from(
    cfg: &SimConfig,
    replicate_id: u64,
    initial_count: u64,
    offspring: &mut Sampler,
) -> Result<Vec<(f64, u64)>> {
    let mut pop = Population::new(initial_count, derive_stream(cfg.seed, replicate_id));
    let mut out = Vec::with_capacity(cfg.horizon_times.len());
    let mut horizons = cfg.horizon_times.iter().copied().peekable();
    while let Some(&h) = horizons.peek() {
        if pop.is_extinct() {
            out.push((h, 0));
            horizons.next();
            continue;
        }
        let before = pop.count;
        step(&mut pop, &cfg.params, offspring, cfg.max_population)?;
        // the count was `before` on [previous event, pop.now)
        while let Some(&h) = horizons.peek() {
            if h < pop.now {
                out.push((h, before));
                horizons.next();
            } else {
                break;
            }
        }
    }
    Ok(out)
}

/// Counts at each horizon for one replicate started from a single particle.
pub fn run_replicate(cfg: &SimConfig, replicate_id: u64) -> Result<Vec<(f64, u64)>> {
    let mut offspring = Sampler::new(Law::Offspring(cfg.params));
    run_replicate_from(cfg, replicate_id, 1, &mut offspring)
}

/// Histogram of simulated counts at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalLaw {
    time: f64,
    counts_histogram: BTreeMap<u64, u64>,
    replicates: u64,
}

impl EmpiricalLaw {
    pub fn new(time: f64, counts_histogram: BTreeMap<u64, u64>) -> Self {
        let replicates = counts_histogram.values().sum();
        Self {
            time,
            counts_histogram,
            replicates,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn histogram(&self) -> &BTreeMap<u64, u64> {
        &self.counts_histogram
    }

    pub fn replicates(&self) -> u64 {
        self.replicates
    }

    pub fn count(&self, n: u64) -> u64 {
        self.counts_histogram.get(&n).copied().unwrap_or(0)
    }

    pub fn frequency(&self, n: u64) -> f64 {
        self.count(n) as f64 / self.replicates as f64
    }

    pub fn max_count(&self) -> u64 {
        self.counts_histogram.keys().next_back().copied().unwrap_or(0)
    }

    /// Sample mean of `X(t)`; the sums are exact integers.
    pub fn mean(&self) -> f64 {
        let sum: u128 = self
            .counts_histogram
            .iter()
            .map(|(&n, &c)| u128::from(n) * u128::from(c))
            .sum();
        sum as f64 / self.replicates as f64
    }

    pub fn variance(&self) -> f64 {
        if self.replicates < 2 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self
            .counts_histogram
            .iter()
            .map(|(&n, &c)| c as f64 * (n as f64 - mean).powi(2))
            .sum();
        ss / (self.replicates - 1) as f64
    }

    /// Standard error of [`EmpiricalLaw::mean`].
    pub fn mean_std_error(&self) -> f64 {
        (self.variance() / self.replicates as f64).sqrt()
    }

    pub fn extinction_frequency(&self) -> f64 {
        self.frequency(0)
    }

    /// Binomial standard error of [`EmpiricalLaw::extinction_frequency`].
    pub fn extinction_std_error(&self) -> f64 {
        let q = self.extinction_frequency();
        (q * (1.0 - q) / self.replicates as f64).sqrt()
    }

    /// Counts in bins `{first}, {first + 1}, …, {last − 1}` and `{last, last + 1, …}`.
    pub fn binned(&self, first: u64, last: u64) -> Vec<u64> {
        let mut bins = vec![0u64; (last - first + 1) as usize];
        for (&n, &c) in self.counts_histogram.range(first..) {
            bins[(n.min(last) - first) as usize] += c;
        }
        bins
    }

    fn merge(mut self, other: &EmpiricalLaw) -> Self {
        for (&n, &c) in &other.counts_histogram {
            *self.counts_histogram.entry(n).or_insert(0) += c;
        }
        self.replicates += other.replicates;
        self
    }
}

/// Simulates every replicate (in parallel) and aggregates one histogram per horizon.
///
/// Replicate `i` always uses stream `i`, and the merge is a sum of counts, so
/// the result does not depend on the number of worker threads.
pub fn estimate_law(cfg: &SimConfig) -> Result<Vec<EmpiricalLaw>> {
    let empty = || -> Vec<EmpiricalLaw> {
        cfg.horizon_times
            .iter()
            .map(|&t| EmpiricalLaw::new(t, BTreeMap::new()))
            .collect()
    };
    (0..cfg.replicates)
        .into_par_iter()
        .map_init(
            || Sampler::new(Law::Offspring(cfg.params)),
            |sampler, id| run_replicate_from(cfg, id, 1, sampler),
        )
        .try_fold(empty, |mut acc, obs| {
            for (law, (_, n)) in acc.iter_mut().zip(obs?) {
                *law.counts_histogram.entry(n).or_insert(0) += 1;
                law.replicates += 1;
            }
            Ok::<_, Error>(acc)
        })
        .try_reduce(empty, |a, b| {
            Ok(a.into_iter().zip(&b).map(|(x, y)| x.merge(y)).collect())
        })
}
