//! Driver-level checks of the experiment campaigns at small scale; the
//! full-scale runs live in the acceptance suite.

use rshe_core::experiments::{
    contraction_experiment, convergence_experiment, derivative_bound_experiment,
    energy_experiment, orthogonality_experiment, reflection_experiment, smoothing_experiment,
    SmoothingParams, Status,
};
use rshe_core::grid::make_grid;
use rshe_core::noise::NoiseSpec;
use rshe_core::scheme::SchemeConfig;

fn config(n: usize, lambda: f64, h: f64, t: f64, seed: u64) -> SchemeConfig {
    let grid = make_grid(n).unwrap();
    let noise = NoiseSpec::new(lambda, grid.nyquist_cutoff(), seed).unwrap();
    SchemeConfig::new(grid, noise, h, t).unwrap()
}

#[test]
fn derivative_bound_reports_smoothing_and_decay() {
    let cfg = config(64, 0.75, 1e-3, 0.3, 11);
    let report = derivative_bound_experiment(&cfg, 64).unwrap();
    assert!(report.passed());
    let rough: Vec<_> = report
        .estimates
        .iter()
        .filter(|e| e.label == "derivative_sq_rough")
        .collect();
    assert!(rough.len() > 10, "needs a usable time series");
    assert!(rough.iter().all(|e| e.value.is_finite() && e.value >= 0.0));
    // The rough start must carry more derivative energy than the zero
    // start early on.
    let zero_first = report
        .estimates
        .iter()
        .find(|e| e.label == "derivative_sq_zero" && e.x > 0.0)
        .unwrap();
    let rough_first = rough.iter().find(|e| e.x > 0.0).unwrap();
    assert!(rough_first.value > zero_first.value);
    let slope = report
        .estimates
        .iter()
        .find(|e| e.label == "difference_decay_slope")
        .expect("decay fit present");
    assert!(slope.value.is_finite());
}

#[test]
fn smoothing_driver_produces_finite_estimates() {
    let cfg = config(32, 0.75, 1e-2, 0.16, 5);
    let params = SmoothingParams {
        t_grid: vec![0.02, 0.04, 0.08, 0.16],
        probes: 2,
        alpha: 10.0,
        delta: 0.1,
        paths: 32,
    };
    let report = smoothing_experiment(&cfg, &params).unwrap();
    // Hard sub-check (contraction ceiling) must pass; the slope band is soft.
    assert!(report.passed(), "{:?}", report.verdicts);
    let max_probe: Vec<_> = report
        .estimates
        .iter()
        .filter(|e| e.label == "lipschitz_max_probe")
        .collect();
    assert_eq!(max_probe.len(), 4);
    assert!(max_probe.iter().all(|e| e.value.is_finite() && e.value >= 0.0));
}

#[test]
fn smoothing_refuses_lambda_outside_the_open_interval() {
    let cfg = config(32, 1.5, 1e-2, 0.04, 5);
    let params = SmoothingParams {
        t_grid: vec![0.02, 0.04],
        probes: 1,
        alpha: 10.0,
        delta: 0.1,
        paths: 4,
    };
    let err = smoothing_experiment(&cfg, &params).unwrap_err();
    assert!(err.to_string().contains("lambda"), "{err}");
}

#[test]
fn orthogonality_driver_checks_h_divisibility() {
    let cfg = config(32, 0.75, 1e-2, 0.1, 5);
    // 10 steps is not divisible by 4.
    assert!(orthogonality_experiment(&cfg, &[0.05], 4).is_err());
    let cfg = config(32, 0.75, 1e-2, 0.12, 5);
    let report = orthogonality_experiment(&cfg, &[0.05, 0.01], 24).unwrap();
    // Small runs may miss the 1-se trend; the sign check must still hold.
    let nonneg = report
        .verdicts
        .iter()
        .find(|v| v.check.contains("nonnegative"))
        .unwrap();
    assert_eq!(nonneg.status, Status::Pass, "{}", nonneg.detail);
}

#[test]
fn convergence_driver_validates_levels() {
    let cfg = config(32, 0.75, 1e-2, 0.12, 5);
    assert!(convergence_experiment(&cfg, 1, 4).is_err());
    assert!(convergence_experiment(&cfg, 6, 4).is_err());
    let report = convergence_experiment(&cfg, 2, 16).unwrap();
    assert!(report
        .estimates
        .iter()
        .any(|e| e.label == "terminal_difference"));
}

#[test]
fn zero_noise_refinement_is_exact_heat_splitting() {
    use rshe_core::grid::CircleFunction;
    use rshe_core::noise::ConvIncrement;
    use rshe_core::rearrange::rearrange;
    use rshe_core::scheme::simulate_with;

    let grid = make_grid(64).unwrap();
    let noise = NoiseSpec::new(0.75, grid.nyquist_cutoff(), 0).unwrap();
    let x0 = rearrange(&CircleFunction::from_fn(grid, |x| (-7.0 * x * x).exp()));
    let mut finals = Vec::new();
    for h in [4e-3, 2e-3, 1e-3] {
        let cfg = SchemeConfig::new(grid, noise, h, 0.2)
            .unwrap()
            .with_record_every((0.2 / h) as usize);
        let traj = simulate_with(&cfg, &x0, |_| ConvIncrement::zero(&noise, h)).unwrap();
        finals.push(traj.final_state().clone());
    }
    for pair in finals.windows(2) {
        let d = pair[0].sub(&pair[1]).norm_l2();
        assert!(d <= 1e-10, "zero-noise splitting error {d}");
    }
}

#[test]
fn small_contraction_and_energy_and_reflection_pass() {
    let cfg = config(32, 0.75, 1e-2, 0.12, 9);
    assert!(contraction_experiment(&cfg, 32).unwrap().passed());
    assert!(energy_experiment(&cfg, 32, 0.0).unwrap().passed());
    assert!(reflection_experiment(&cfg, 16).unwrap().passed());
    // The energy balance also closes at positive smoothing.
    assert!(energy_experiment(&cfg, 32, 0.01).unwrap().passed());
}
