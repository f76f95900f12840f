use dpp_rigidity::kernels::KernelSpec;
use dpp_rigidity::rigidity::Taper;
use dpp_rigidity::spectral::{
    brute_force_law, discretize, eigendecompose, fredholm_det, fredholm_det_multi, resolved_spectrum,
    sample_many, WeightedRegion,
};
use dpp_rigidity::stats::{mean, standard_error_of_mean, standard_error_of_variance, variance};
use dpp_rigidity::variance::{variance_regions, DEFAULT_ACCURACY};
use num_complex::Complex64;

const SAMPLES: usize = 10_000;

#[test]
fn count_moments_match_the_spectrum() {
    let spec = KernelSpec::bessel(0.0).unwrap();
    let sd = resolved_spectrum(&spec, (0.0, 20.0), 20).unwrap();
    let counts: Vec<f64> = sample_many(&sd, 1, SAMPLES).unwrap().iter().map(|c| c.len() as f64).collect();
    let (m, v) = (mean(&counts), variance(&counts));
    let trace = sd.expected_count();
    let spread = sd.count_variance();
    assert!((m - trace).abs() < 3.0 * standard_error_of_mean(&counts), "{m} vs {trace}");
    assert!((v - spread).abs() < 3.0 * standard_error_of_variance(&counts), "{v} vs {spread}");
}

#[test]
fn generating_function_matches_samples() {
    let spec = KernelSpec::bessel(0.0).unwrap();
    let sd = resolved_spectrum(&spec, (0.0, 10.0), 20).unwrap();
    let samples = sample_many(&sd, 2, SAMPLES).unwrap();

    let z = 0.7;
    let det = fredholm_det(&sd, |_| z, (0.0, 5.0));
    let powers: Vec<f64> = samples.iter().map(|c| z.powi(c.count_in(0.0, 5.0) as i32)).collect();
    assert!((mean(&powers) - det).abs() < 3.0 * standard_error_of_mean(&powers));

    let regions = [
        WeightedRegion { lo: 0.0, hi: 3.0, z: 0.6 },
        WeightedRegion { lo: 5.0, hi: 8.0, z: 1.3 },
    ];
    let det = fredholm_det_multi(&sd, &regions).unwrap();
    let joint: Vec<f64> = samples
        .iter()
        .map(|c| regions.iter().map(|r| r.z.powi(c.count_in(r.lo, r.hi) as i32)).product())
        .collect();
    assert!((mean(&joint) - det).abs() < 3.0 * standard_error_of_mean(&joint));
}

#[test]
fn subset_frequencies_match_the_exact_law() {
    let spec = KernelSpec::gamma(Complex64::new(0.3, 0.5), Complex64::new(0.3, -0.5)).unwrap();
    let op = discretize(&spec, (-4.0, 4.0), 0).unwrap();
    let law = brute_force_law(&op).unwrap();
    let sd = eigendecompose(&op).unwrap();
    let n = 100_000;
    let mut freq = vec![0usize; law.probabilities.len()];
    for c in sample_many(&sd, 3, n).unwrap() {
        let subset = c.points.iter().fold(0u32, |m, &x| m | law.mask(x, x));
        freq[subset as usize] += 1;
    }
    for (s, (&k, &p)) in freq.iter().zip(&law.probabilities).enumerate() {
        let sigma = (p.max(1.0 / n as f64) * (1.0 - p) / n as f64).sqrt();
        let observed = k as f64 / n as f64;
        assert!((observed - p).abs() <= 4.0 * sigma, "subset {s:#b}: {observed} vs {p}");
    }
}

#[test]
fn taper_variance_matches_samples() {
    let spec = KernelSpec::bessel(0.0).unwrap();
    let taper = Taper::symmetric(1.0, 100.0).unwrap();
    let formula = variance_regions(&spec, &taper, DEFAULT_ACCURACY).unwrap().value;
    let sd = resolved_spectrum(&spec, (0.0, 100.0), 40).unwrap();
    let values: Vec<f64> = sample_many(&sd, 4, SAMPLES)
        .unwrap()
        .iter()
        .map(|c| c.additive(|x| taper.eval(x)))
        .collect();
    let v = variance(&values);
    assert!((v - formula).abs() < 3.0 * standard_error_of_variance(&values), "{v} vs {formula}");
}

#[test]
fn integrable_sampler_matches_the_exact_law() {
    use dpp_rigidity::spectral::IntegrableSampler;
    let cases = [
        KernelSpec::gamma(Complex64::new(0.2, 0.0), Complex64::new(0.7, 0.0)).unwrap(),
        KernelSpec::gamma(Complex64::new(-0.4, 0.8), Complex64::new(-0.4, -0.8)).unwrap(),
    ];
    let n = 100_000;
    for (case, spec) in cases.iter().enumerate() {
        let window = (-4.0, 4.0);
        let law = brute_force_law(&discretize(spec, window, 0).unwrap()).unwrap();
        let sampler = IntegrableSampler::new(spec, window).unwrap();
        let mut freq = vec![0usize; law.probabilities.len()];
        for c in sample_many(&sampler, 10 + case as u64, n).unwrap() {
            let subset = c.points.iter().fold(0u32, |m, &x| m | law.mask(x, x));
            freq[subset as usize] += 1;
        }
        for (s, (&k, &p)) in freq.iter().zip(&law.probabilities).enumerate() {
            let sigma = (p.max(1.0 / n as f64) * (1.0 - p) / n as f64).sqrt();
            let observed = k as f64 / n as f64;
            assert!((observed - p).abs() <= 4.0 * sigma, "case {case}, subset {s:#b}: {observed} vs {p}");
        }
    }
}

#[test]
fn integrable_and_spectral_samplers_agree() {
    use dpp_rigidity::spectral::IntegrableSampler;
    let spec = KernelSpec::gamma(Complex64::new(0.2, 0.0), Complex64::new(0.7, 0.0)).unwrap();
    let window = (-60.0, 60.0);
    let sd = eigendecompose(&discretize(&spec, window, 0).unwrap()).unwrap();
    let fast = IntegrableSampler::new(&spec, window).unwrap();
    assert!((fast.expected_count() - sd.expected_count()).abs() < 1e-9);
    let taper = Taper::symmetric(4.5, 60.0).unwrap();
    let stat = |cs: Vec<dpp_rigidity::spectral::Configuration>| -> Vec<f64> {
        cs.iter().map(|c| c.additive(|x| taper.eval(x))).collect()
    };
    let slow = stat(sample_many(&sd, 5, SAMPLES).unwrap());
    let quick = stat(sample_many(&fast, 6, SAMPLES).unwrap());
    let se = (standard_error_of_mean(&slow).powi(2) + standard_error_of_mean(&quick).powi(2)).sqrt();
    assert!((mean(&slow) - mean(&quick)).abs() < 3.0 * se);
    let se = (standard_error_of_variance(&slow).powi(2) + standard_error_of_variance(&quick).powi(2)).sqrt();
    assert!((variance(&slow) - variance(&quick)).abs() < 3.0 * se);
}
