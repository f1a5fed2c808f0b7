use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tweezer_sta::model::{TrapParams, BOLTZMANN};
use tweezer_sta::thermometry::*;

const T: f64 = 27e-6;

/// Inverse-CDF draws from the three-dimensional Maxwell–Boltzmann energy law.
fn mb_samples(n: usize, temperature: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| mb_quantile(rng.random::<f64>(), temperature)).collect()
}

fn depth() -> f64 {
    TrapParams::nominal().depth()
}

#[test]
fn cdf_limits() {
    assert_eq!(mb_cdf(0.0, T), 0.0);
    assert!((mb_cdf(1e3 * BOLTZMANN * T, T) - 1.0).abs() < 1e-15);
}

#[test]
fn inverse_cdf_samples_have_the_gamma_mean() {
    // The cdf is a Gamma(3, kT) law: total energy in a 3D harmonic well, mean 3kT,
    // of which the kinetic half is 3kT/2.
    let e = mb_samples(100_000, T, 11);
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    let expect = 3.0 * BOLTZMANN * T;
    assert!((0.5 * mean / (1.5 * BOLTZMANN * T) - 1.0).abs() < 0.02);
    assert!((mean / expect - 1.0).abs() < 0.02, "{mean} vs {expect}");
}

#[test]
fn synthetic_curve_lies_within_binomial_bands() {
    let n = 10_000;
    let curve = survival_curve(&mb_samples(n, T, 3), &default_cutoffs(depth())).unwrap();
    for (e, p) in curve.cutoffs.iter().zip(&curve.survival) {
        let q = mb_cdf(*e, T);
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((p - q).abs() <= 3.0 * sigma + 1e-12, "E_c={e}: {p} vs {q}");
    }
}

#[test]
fn samples_below_the_grid_give_a_step() {
    let cutoffs = default_cutoffs(depth());
    let curve = survival_curve(&[-1.0, -2.0, -0.5], &cutoffs).unwrap();
    assert_eq!(curve.survival[0], 1.0);
    assert!(curve.survival.iter().all(|&p| p == 1.0));
    let curve = survival_curve(&[cutoffs[5]; 4], &cutoffs).unwrap();
    assert!(curve.survival[..=5].iter().all(|&p| p == 0.0));
    assert!(curve.survival[6..].iter().all(|&p| p == 1.0));
}

#[test]
fn empty_sample_set_is_rejected() {
    assert!(survival_curve(&[], &default_cutoffs(depth())).is_err());
}

#[test]
fn fit_recovers_synthetic_temperature() {
    let curve = survival_curve(&mb_samples(10_000, T, 5), &default_cutoffs(depth())).unwrap();
    let fit = fit_temperature(&curve).unwrap();
    assert!((fit.temperature / T - 1.0).abs() < 0.05, "{}", fit.temperature);
    assert!(fit.thermal);
    assert!(fit.stderr > 0.0);
}

#[test]
fn uniform_energies_are_non_thermal() {
    let d = depth();
    let e: Vec<f64> = (0..2000).map(|i| d * (i as f64 + 0.5) / 2000.0).collect();
    let fit = fit_temperature(&survival_curve(&e, &default_cutoffs(d)).unwrap()).unwrap();
    assert!(!fit.thermal, "sup residual {}", fit.sup_residual);
}

#[test]
fn fit_error_bars_cover_the_truth() {
    let cutoffs = default_cutoffs(depth());
    let mut misses = Vec::new();
    for seed in 0..50 {
        let curve = survival_curve(&mb_samples(500, T, 1000 + seed), &cutoffs).unwrap();
        let fit = fit_temperature(&curve).unwrap();
        if (fit.temperature - T).abs() > 3.0 * fit.stderr {
            misses.push((seed, fit.temperature, fit.stderr));
        }
    }
    assert!(misses.is_empty(), "{misses:?}");
}

#[test]
fn reference_piecewise_form_is_a_fixed_point() {
    let d = depth();
    let cutoffs = default_cutoffs(d);
    let r = PiecewiseLinear::REFERENCE;
    let survival: Vec<f64> = cutoffs.iter().map(|e| r.eval(e / d)).collect();
    let curve = SurvivalCurve {
        counts: vec![0; cutoffs.len()],
        cutoffs,
        survival,
        total: 1,
    };
    let cmp = piecewise_linear_compare(&curve, d);
    assert!(cmp.rms_residual < 1e-12);
    assert!(cmp.sup_distance < 1e-12, "{:?}", cmp.fit);
    assert!((cmp.fit.slope - r.slope).abs() < 1e-9);
    assert!((cmp.fit.intercept - r.intercept).abs() < 1e-9);
    assert!((cmp.fit.plateau - r.plateau).abs() < 1e-12);
}

proptest! {
    #[test]
    fn cdf_is_a_distribution(e in 0.0..2e-27f64, de in 1e-32..1e-28f64, t in 1e-6..1e-4f64, dt in 1e-9..1e-5f64) {
        let p = mb_cdf(e, t);
        prop_assert!((0.0..=1.0).contains(&p));
        // Non-negative density and colder atoms survive more.
        prop_assert!(mb_cdf(e + de, t) >= p);
        prop_assert!(mb_cdf(e, t + dt) <= p);
    }

    #[test]
    fn curve_is_monotone_and_permutation_invariant(
        mut e in prop::collection::vec(0.0..1.5e-26f64, 1..200),
        unit in 1e-30..1e-20f64,
    ) {
        let d = depth();
        let cutoffs = default_cutoffs(d);
        let a = survival_curve(&e, &cutoffs).unwrap();
        prop_assert!(a.survival.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(a.survival.iter().all(|p| (0.0..=1.0).contains(p)));
        e.reverse();
        let k = e.len() / 3;
        e.rotate_left(k);
        let b = survival_curve(&e, &cutoffs).unwrap();
        prop_assert_eq!(&a.counts, &b.counts);
        // Same curve whether energies are in joules or in some other unit.
        let scaled: Vec<f64> = e.iter().map(|x| x / unit).collect();
        let c = survival_curve(&scaled, &a.rescaled(unit).cutoffs).unwrap();
        for (x, y) in a.counts.iter().zip(&c.counts) {
            // Division can move a sample that sits exactly on a cut-off; none do here.
            prop_assert_eq!(x, y);
        }
    }
}
