use tweezer_sta::model::{TrapModel, TrapParams, BOLTZMANN};
use tweezer_sta::montecarlo::*;
use tweezer_sta::stats::wilson_interval;
use tweezer_sta::thermometry::{mb_cdf, piecewise_linear_compare};
use tweezer_sta::trajectory::*;

fn fig1(kind_cv: bool) -> CompositePath {
    let bc = BoundaryConditions::rest_to_rest(12.6e-6, 58.5e-6);
    let seg = if kind_cv { PathSegment::cv_path(bc) } else { PathSegment::sta_linear(bc) };
    CompositePath::single(seg.unwrap())
}

#[test]
fn thermal_draws_have_the_equipartition_widths() {
    let p = TrapParams::nominal();
    let model = TrapModel::gaussian(p);
    let (t, w, m) = (27e-6, model.omega(), model.mass());
    let n = 100_000;
    let (mut sx, mut sv) = (0.0, 0.0);
    for i in 0..n {
        let s = sample_initial_state(t, w, m, 9, i);
        sx += s.position.x.powi(2) + s.position.y.powi(2);
        sv += s.velocity.x.powi(2) + s.velocity.y.powi(2);
    }
    let sigma_x = (sx / (2 * n) as f64).sqrt();
    let sigma_v = (sv / (2 * n) as f64).sqrt();
    let kt = BOLTZMANN * t;
    assert!((sigma_x / (kt / (m * w * w)).sqrt() - 1.0).abs() < 0.03);
    assert!((sigma_v / (kt / m).sqrt() - 1.0).abs() < 0.03);
}

#[test]
fn cold_fixed_depth_sta_always_succeeds() {
    let model = TrapModel::gaussian(TrapParams::nominal());
    let path = fig1(false).designed(model.omega());
    let r = run_ensemble(&path, &model, &EnsembleConfig::new(16, 0.0, 0.0, 1)).unwrap();
    assert_eq!(r.p_success, 1.0);
    assert_eq!(r.n_errors, 0);
}

#[test]
fn sweep_is_monotone_within_confidence() {
    let model = TrapModel::gaussian(TrapParams::nominal());
    let t_axis: Vec<f64> = (0..8).map(|i| 30e-6 + 10e-6 * i as f64).collect();
    let l_axis: Vec<f64> = (0..8).map(|j| 2e-6 + 4e-6 * j as f64).collect();
    let cfg = EnsembleConfig::new(60, 27e-6, BOLTZMANN * 0.15e-3, 4);
    let grid = sweep(sta_template(&model), &model, &t_axis, &l_axis, &cfg).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            let c = grid.cell(i, j);
            assert!((0.0..=1.0).contains(&c.p_success));
            if j + 1 < 8 {
                // Farther is never significantly easier.
                assert!(grid.cell(i, j + 1).ci_low <= c.ci_high, "({i},{j}) along l");
            }
            if i + 1 < 8 {
                // Slower is never significantly harder.
                assert!(grid.cell(i + 1, j).ci_high >= c.ci_low, "({i},{j}) along t_f");
            }
        }
    }
    // Both regimes appear.
    assert_eq!(grid.cell(7, 0).p_success, 1.0);
    assert!(grid.cell(0, 7).p_success < 0.1);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let model = TrapModel::gaussian(TrapParams::nominal());
    let path = fig1(true).designed(model.omega());
    let cfg = EnsembleConfig::new(64, 27e-6, BOLTZMANN * 0.15e-3, 1);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_ensemble(&path, &model, &cfg).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a, b);
    let bits = |r: &EnsembleResult| r.final_energies.iter().map(|e| e.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn wilson_width_shrinks_as_inverse_root_n() {
    let width = |n: usize| {
        let (lo, hi) = wilson_interval(n / 5, n);
        (hi - lo) * (n as f64).sqrt()
    };
    let reference = width(100_000);
    for n in [1000, 10_000] {
        assert!((width(n) / reference - 1.0).abs() < 0.02);
    }
}

#[test]
fn boundary_coefficients_are_ordered() {
    let p = TrapParams::nominal();
    let mut cfg = BoundaryConfig {
        durations: vec![40e-6, 60e-6, 80e-6, 100e-6],
        ..BoundaryConfig::default()
    };
    cfg.ensemble.n_samples = 100;
    cfg.ensemble.seed = 2;
    let one = boundary_coefficient(ModelVariant::One, &p, &cfg).unwrap().coefficient;
    let two = boundary_coefficient(ModelVariant::Two, &p, &cfg).unwrap().coefficient;
    let three = boundary_coefficient(ModelVariant::Three, &p, &cfg).unwrap().coefficient;
    assert_eq!(one, 1.0);
    assert!(three <= two && two <= one, "{three} {two} {one}");

    // A cold, steady ensemble reduces to the single zero-temperature atom.
    cfg.ensemble = EnsembleConfig::new(4, 0.0, 0.0, 2);
    let cold = boundary_coefficient(ModelVariant::Three, &p, &cfg).unwrap().coefficient;
    assert!((cold / two - 1.0).abs() < 2e-3, "{cold} vs {two}");
}

#[test]
fn cold_shuttle_never_loses_the_atom() {
    let model = TrapModel::gaussian(TrapParams::nominal());
    let path = CompositePath::single(PathSegment::sta_linear(BoundaryConditions::rest_to_rest(51.7e-6, 129.0e-6)).unwrap())
        .designed(model.omega());
    let cfg = ShuttleConfig {
        ensemble: EnsembleConfig::new(8, 0.0, 0.0, 1),
        n_legs: 10,
        independent_legs: false,
        trap_lifetime: None,
    };
    let r = shuttle(&path, &model, &cfg).unwrap();
    assert!(r.survival.iter().all(|&p| p == 1.0));
    assert_eq!(r.per_leg_rate, 1.0);
}

#[test]
fn lossy_shuttle_follows_a_power_law() {
    let model = TrapModel::gaussian(TrapParams::nominal());
    // Near the thermal boundary so that several percent are lost per leg.
    let l = 0.3 * model_i_boundary(model.params(), 60e-6);
    let path = CompositePath::single(PathSegment::sta_linear(BoundaryConditions::rest_to_rest(l, 60e-6)).unwrap())
        .designed(model.omega());
    let cfg = ShuttleConfig {
        ensemble: EnsembleConfig::new(400, 27e-6, BOLTZMANN * 0.15e-3, 3),
        n_legs: 25,
        independent_legs: true,
        trap_lifetime: None,
    };
    let r = shuttle(&path, &model, &cfg).unwrap();
    assert!(r.per_leg_rate < 1.0 && r.per_leg_rate > 0.5, "{}", r.per_leg_rate);
    assert!(r.survival.windows(2).all(|w| w[1] <= w[0]));
    let p25 = r.per_leg_rate.powi(25);
    assert!(r.ci_low[24] <= p25 && p25 <= r.ci_high[24], "{p25} vs {:?}", (r.ci_low[24], r.ci_high[24]));
}

#[test]
fn diabatic_curve_is_closer_to_piecewise_than_to_any_thermal_law() {
    let model = TrapModel::gaussian(TrapParams::nominal());
    let depth = model.depth();
    let path = fig1(true).designed(model.omega());
    let r = run_ensemble(&path, &model, &EnsembleConfig::new(200, 27e-6, BOLTZMANN * 0.15e-3, 1)).unwrap();
    let curve = &r.survival;
    // Both families compared on the same cut-off range, E_c ≤ U.
    let pw = piecewise_linear_compare(curve, depth).fit;
    let piecewise = curve.sup_distance(|e| pw.eval(e / depth), depth);
    let best_thermal = (1..=400)
        .map(|k| {
            let t = 1e-6 * k as f64;
            curve.sup_distance(|e| mb_cdf(e, t), depth)
        })
        .fold(f64::INFINITY, f64::min);
    assert!(piecewise < best_thermal, "{piecewise} vs {best_thermal}");
}
