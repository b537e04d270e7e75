use esibuya::rng::derive_stream;
use esibuya::sampler::{Law, Sampler};
use esibuya::stats::{goodness_of_fit, DEFAULT_MIN_EXPECTED};
use esibuya::zoo::{ExtendedSibuyaParams, LogSeriesParams, SibuyaParams};
use esibuya::ModelParams;

const DRAWS: u64 = 1_000_000;
const SIGNIFICANCE: f64 = 1e-3;

/// Draws `DRAWS` variates and bins them as `{first}, …, {last − 1}, {last, …}`.
fn draw_binned(law: Law, seed: u64, first: u64, last: u64) -> Vec<u64> {
    let mut sampler = Sampler::new(law);
    let mut rng = derive_stream(seed, 0);
    let mut bins = vec![0u64; (last - first + 1) as usize];
    for _ in 0..DRAWS {
        let x = sampler.sample(&mut rng);
        assert!(x >= first, "{x} below support");
        bins[(x.min(last) - first) as usize] += 1;
    }
    bins
}

fn expected_bins(law: &Law, first: u64, last: u64) -> Vec<f64> {
    let mut probs: Vec<f64> = (first..last).map(|n| law.pmf(n)).collect();
    let head: f64 = probs.iter().sum();
    probs.push((1.0 - head).max(0.0));
    probs
}

fn assert_fits(law: Law, seed: u64, first: u64, last: u64) {
    let observed = draw_binned(law, seed, first, last);
    let expected = expected_bins(&law, first, last);
    let test = goodness_of_fit(&observed, &expected, DEFAULT_MIN_EXPECTED).unwrap();
    assert!(test.passes(SIGNIFICANCE), "{law:?}: {test:?}");
}

#[test]
fn log_series_half_fits_bins_to_thirty() {
    assert_fits(Law::LogSeries(LogSeriesParams::new(0.5).unwrap()), 101, 1, 30);
}

#[test]
fn log_series_heavy_parameter_fits() {
    assert_fits(Law::LogSeries(LogSeriesParams::new(0.95).unwrap()), 102, 1, 60);
}

#[test]
fn sibuya_fits_including_far_tail() {
    // P(X ≥ 200) ≈ 0.08 at γ = 0.4, so the last bin is well populated
    assert_fits(Law::Sibuya(SibuyaParams::new(0.4).unwrap()), 103, 1, 200);
}

#[test]
fn extended_sibuya_fits() {
    assert_fits(
        Law::ExtendedSibuya(ExtendedSibuyaParams::new(0.3, 0.8).unwrap()),
        104,
        1,
        40,
    );
    assert_fits(
        Law::ExtendedSibuya(ExtendedSibuyaParams::new(0.9, 0.6).unwrap()),
        105,
        1,
        30,
    );
}

#[test]
fn offspring_law_fits() {
    for (i, &alpha) in [0.3, 0.5, 0.77].iter().enumerate() {
        assert_fits(
            Law::Offspring(ModelParams::new(alpha, 1.0).unwrap()),
            106 + i as u64,
            0,
            25,
        );
    }
}

#[test]
fn offspring_zero_frequency_matches_alpha() {
    let p = ModelParams::new(0.5, 1.0).unwrap();
    let bins = draw_binned(Law::Offspring(p), 110, 0, 1);
    let freq = bins[0] as f64 / DRAWS as f64;
    let se = (0.25 / DRAWS as f64).sqrt();
    assert!((freq - p.offspring_pmf(0)).abs() < 4.0 * se, "{freq}");
}

#[test]
fn geometric_tail_path_is_exercised() {
    // with α = 0.999 the mass beyond the full CDF table is about 3%
    let law = Law::LogSeries(LogSeriesParams::new(0.999).unwrap());
    let mut sampler = Sampler::new(law);
    let mut rng = derive_stream(111, 0);
    let beyond = (0..200_000).filter(|_| sampler.sample(&mut rng) > 4096).count();
    let expected: f64 = 1.0 - (1..=4096).map(|n| law.pmf(n)).sum::<f64>();
    let freq = beyond as f64 / 200_000.0;
    let se = (expected * (1.0 - expected) / 200_000.0).sqrt();
    assert!((freq - expected).abs() < 4.0 * se, "{freq} vs {expected}");
}
