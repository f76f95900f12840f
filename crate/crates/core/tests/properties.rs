use dpp_rigidity::kernels::KernelSpec;
use dpp_rigidity::rigidity::Taper;
use dpp_rigidity::spectral::{discretize, eigendecompose, fredholm_det, sample_many, IntegrableSampler};
use dpp_rigidity::specfun::{bessel_j, log_gamma};
use num_complex::Complex64;
use proptest::prelude::*;

fn gamma_kernel() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (-2i32..2, 0.05..0.45, 0.55..0.95).prop_map(|(m, a, b)| {
            let (z, zp) = if a < b { (m as f64 + a, m as f64 + b) } else { (m as f64 + b, m as f64 + a) };
            KernelSpec::gamma(Complex64::new(z, 0.0), Complex64::new(zp, 0.0)).unwrap()
        }),
        (-1.5..1.5, 0.1..2.0).prop_map(|(re, im)| {
            let z = Complex64::new(re, im);
            KernelSpec::gamma(z, z.conj()).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_gamma_recurrence(re in 0.1..30.0f64, im in -30.0..30.0f64) {
        let z = Complex64::new(re, im);
        let step = log_gamma(z + 1.0).unwrap().value - log_gamma(z).unwrap().value;
        let target = z.ln();
        // equal modulo 2πi
        let turns = (step.im - target.im) / std::f64::consts::TAU;
        prop_assert!((step.re - target.re).abs() < 1e-10 * (1.0 + target.norm()));
        prop_assert!((turns - turns.round()).abs() < 1e-10);
    }

    #[test]
    fn bessel_three_term_recurrence(s in 1.0..6.0f64, x in 0.5..80.0f64) {
        let lhs = bessel_j(s - 1.0, x).unwrap().value + bessel_j(s + 1.0, x).unwrap().value;
        let rhs = 2.0 * s / x * bessel_j(s, x).unwrap().value;
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + 2.0 * s / x), "{lhs} vs {rhs}");
    }

    #[test]
    fn continuous_kernels_are_symmetric(x in 0.01..40.0f64, y in 0.01..40.0f64, s in -0.5..3.0f64) {
        let bessel = KernelSpec::bessel(s).unwrap();
        let (a, b) = (bessel.evaluate(x, y).unwrap().value, bessel.evaluate(y, x).unwrap().value);
        prop_assert!((a - b).abs() < 1e-12);
        let airy = KernelSpec::airy();
        let (a, b) = (airy.evaluate(-x, 2.0 - y).unwrap().value, airy.evaluate(2.0 - y, -x).unwrap().value);
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn gamma_windows_have_projection_spectra(spec in gamma_kernel(), lo in -40i32..40, len in 1usize..60) {
        let lo = lo as f64;
        let op = discretize(&spec, (lo, lo + len as f64), 0).unwrap();
        let sd = eigendecompose(&op).unwrap();
        prop_assert!(sd.clip <= 1e-10, "clip {:e}", sd.clip);
        prop_assert!((sd.eigenvalues.iter().sum::<f64>() - op.trace()).abs() < 1e-9);
    }

    #[test]
    fn count_generating_function_increases_in_z(spec in gamma_kernel(), z1 in 0.0..1.0f64, z2 in 0.0..1.0f64) {
        let sd = eigendecompose(&discretize(&spec, (-6.0, 6.0), 0).unwrap()).unwrap();
        let (lo, hi) = if z1 < z2 { (z1, z2) } else { (z2, z1) };
        let (g_lo, g_hi) = (fredholm_det(&sd, |_| lo, (-3.0, 3.0)), fredholm_det(&sd, |_| hi, (-3.0, 3.0)));
        prop_assert!(g_lo <= g_hi + 1e-12);
        prop_assert!(g_hi <= 1.0 + 1e-12 && g_lo >= -1e-12);
        prop_assert!((fredholm_det(&sd, |_| 1.0, (-3.0, 3.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn taper_is_monotone_and_bounded(r in 0.5..10.0f64, ratio in 1.5..1e4f64, x in 0.0..1e5f64, dx in 0.0..100.0f64) {
        let taper = Taper::symmetric(r, r * ratio).unwrap();
        let (a, b) = (taper.eval(x), taper.eval(x + dx));
        prop_assert!((0.0..=1.0).contains(&a) && b <= a);
        prop_assert_eq!(taper.eval(-x), a);
        prop_assert_eq!(taper.eval(r * 0.99), 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn integrable_sampler_stays_on_the_window(spec in gamma_kernel(), lo in -30i32..10, len in 1usize..40, seed: u64) {
        let window = (lo as f64, lo as f64 + len as f64);
        let sampler = IntegrableSampler::new(&spec, window).unwrap();
        for c in sample_many(&sampler, seed, 20).unwrap() {
            prop_assert!(c.points.windows(2).all(|w| w[0] < w[1]));
            for &x in &c.points {
                prop_assert!(x >= window.0 && x <= window.1 && (x - 0.5).fract() == 0.0);
            }
        }
    }
}
