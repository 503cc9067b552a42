use cot_core::workload::{zipf_cdf, Sampler, WorkloadSpec};

const DRAWS: usize = 1_000_000;
/// Upper 0.1% normal quantile.
const Z_999: f64 = 3.090_232;

/// Wilson-Hilferty approximation of the chi-square quantile.
fn chi_square_critical(df: f64) -> f64 {
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + Z_999 * a.sqrt()).powi(3)
}

fn chi_square(spec: &WorkloadSpec, expected_p: &[f64], seed: u64) -> (f64, f64) {
    let sampler = Sampler::new(spec).unwrap();
    let mut counts = vec![0u64; expected_p.len()];
    for e in sampler.generator(seed, 0).take(DRAWS) {
        counts[(e.key.0 - 1) as usize] += 1;
    }
    let stat = counts
        .iter()
        .zip(expected_p)
        .map(|(&o, &p)| {
            let e = p * DRAWS as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    (stat, chi_square_critical(expected_p.len() as f64 - 1.0))
}

fn zipf_probabilities(n: usize, s: f64) -> Vec<f64> {
    let w: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-s)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

#[test]
fn zipf_draws_pass_chi_square() {
    for (s, seed) in [(0.9, 1u64), (0.99, 2), (1.2, 3)] {
        let spec = WorkloadSpec::zipfian(s, 1000);
        let (stat, critical) = chi_square(&spec, &zipf_probabilities(1000, s), seed);
        assert!(stat < critical, "s = {s}: chi-square {stat:.1} >= {critical:.1}");
    }
}

#[test]
fn uniform_draws_pass_chi_square() {
    let spec = WorkloadSpec::uniform(500);
    let (stat, critical) = chi_square(&spec, &vec![1.0 / 500.0; 500], 9);
    assert!(stat < critical, "chi-square {stat:.1} >= {critical:.1}");
}

#[test]
fn zipf_cdf_matches_direct_sum() {
    for s in [0.5, 0.9, 0.99, 1.0, 1.2, 1.5] {
        let p = zipf_probabilities(5000, s);
        for c in [0usize, 1, 7, 64, 512, 4999, 5000] {
            let direct: f64 = p[..c].iter().sum();
            let got = zipf_cdf(5000, s, c as u64);
            assert!((got - direct).abs() < 1e-9, "s = {s}, c = {c}: {got} vs {direct}");
        }
    }
}

#[test]
fn streams_are_reproducible_and_distinct_per_front_end() {
    let sampler = Sampler::new(&WorkloadSpec::zipfian(1.2, 100_000)).unwrap();
    let a: Vec<_> = sampler.generator(7, 3).take(1000).collect();
    let b: Vec<_> = sampler.generator(7, 3).take(1000).collect();
    let c: Vec<_> = sampler.generator(7, 4).take(1000).collect();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
