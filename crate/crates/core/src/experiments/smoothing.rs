//! Semigroup smoothing exponent: the Lipschitz constant of
//! `x -> E f(X_t^x)` for bounded `f`, estimated with coupled probes and
//! regressed against `t` on a log-log scale.

use crate::ensemble::map_paths;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentReport, Verdict};
use crate::grid::CircleFunction;
use crate::noise::{conv_increment, StreamKey};
use crate::rearrange::rearrange;
use crate::scheme::{simulate_with, SchemeConfig};
use crate::stats::{fit_slope, mean_se};

/// Probe settings for the smoothing estimate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SmoothingParams {
    /// Observation times; each must be an integer multiple of the step.
    pub t_grid: Vec<f64>,
    /// Number of probe directions (low-frequency mixtures).
    pub probes: usize,
    /// Gain of the bounded functional `f(x) = tanh(alpha <x, e_1>)`.
    pub alpha: f64,
    /// Probe displacement along each direction.
    pub delta: f64,
    /// Coupled paths per probe.
    pub paths: usize,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        SmoothingParams {
            t_grid: vec![0.02, 0.04, 0.08, 0.16, 0.32, 0.64, 1.0],
            probes: 3,
            alpha: 40.0,
            delta: 0.05,
            paths: 10_000,
        }
    }
}

/// Estimates `L(t) = |E f(X_t^x) - E f(X_t^y)| / |x - y|_2` over probe
/// pairs `(x, x + delta v)` on coupled noise, and fits the log-log slope
/// against the target `-(1 + lambda)/2`. Soft criterion: out-of-band slopes
/// warn rather than fail.
pub fn smoothing_experiment(cfg: &SchemeConfig, params: &SmoothingParams) -> Result<ExperimentReport> {
    cfg.validate()?;
    let lambda = cfg.noise.lambda();
    if !(lambda > 0.5 && lambda < 1.0) {
        return Err(Error::config(format!(
            "smoothing requires noise.lambda in (0.5, 1), got {lambda}"
        )));
    }
    if params.t_grid.is_empty() || params.probes == 0 || params.paths == 0 {
        return Err(Error::config("smoothing needs t_grid, probes and paths".to_string()));
    }
    let steps_of: Vec<usize> = params
        .t_grid
        .iter()
        .map(|&t| {
            let ratio = t / cfg.h;
            if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || t <= 0.0 {
                return Err(Error::config(format!(
                    "t_grid entry {t} is not a positive multiple of scheme.h"
                )));
            }
            Ok(ratio.round() as usize)
        })
        .collect::<Result<_>>()?;
    let total_steps = *steps_of.iter().max().unwrap();
    let horizon = total_steps as f64 * cfg.h;
    let mut run_cfg = *cfg;
    run_cfg.t_horizon = horizon;
    let record_every = steps_of
        .iter()
        .fold(total_steps, |acc, &s| gcd(acc, s))
        .max(1);
    let run_cfg = run_cfg.with_record_every(record_every);

    let mut rb = ExperimentReport::begin("smoothing");
    rb.config("paths", params.paths)
        .config("probes", params.probes)
        .config("alpha", params.alpha)
        .config("delta", params.delta)
        .config("grid.n", cfg.grid.n())
        .config("noise.lambda", lambda)
        .config("scheme.h", cfg.h)
        .config("t_grid", format!("{:?}", params.t_grid))
        .config("seed", cfg.noise.master_seed());

    // Probe directions: monotone low-frequency mixtures of e_0 and e_1,
    // kept inside the cone so no rearrangement distorts the displacement.
    let e0 = CircleFunction::constant(cfg.grid, 1.0);
    let e1 = CircleFunction::cosine_mode(cfg.grid, 1);
    let directions: Vec<CircleFunction> = (0..params.probes)
        .map(|j| {
            let theta = std::f64::consts::FRAC_PI_2 * (j as f64 + 1.0) / (params.probes as f64 + 1.0);
            let v = e0.scale(theta.cos()).add(&e1.scale(theta.sin()));
            rearrange(&v)
        })
        .collect();

    let base = CircleFunction::zero(cfg.grid);
    let functional = |x: &CircleFunction| (params.alpha * x.inner(&e1)).tanh();

    // One run from the base point and one per probe, all on the same
    // increments; per path we keep only the functional values.
    let probe_count = directions.len();
    let samples = map_paths(params.paths, |p| {
        let mut increments = Vec::with_capacity(total_steps);
        for k in 0..total_steps {
            let mut rng = cfg.noise.stream(StreamKey {
                trajectory: p,
                step: k as u64,
            });
            increments.push(conv_increment(&cfg.noise, cfg.h, &mut rng).unwrap());
        }
        let observe = |traj: &crate::scheme::Trajectory| -> Vec<f64> {
            steps_of
                .iter()
                .map(|&s| {
                    let idx = s / record_every;
                    functional(&traj.states()[idx])
                })
                .collect()
        };
        let t_base = simulate_with(&run_cfg, &base, |k| increments[k as usize].clone()).unwrap();
        let f_base = observe(&t_base);
        let mut diffs = Vec::with_capacity(probe_count);
        for dir in &directions {
            let shifted = base.add(&dir.scale(params.delta));
            let t_probe =
                simulate_with(&run_cfg, &shifted, |k| increments[k as usize].clone()).unwrap();
            let f_probe = observe(&t_probe);
            diffs.push(
                f_base
                    .iter()
                    .zip(&f_probe)
                    .map(|(a, b)| b - a)
                    .collect::<Vec<f64>>(),
            );
        }
        diffs
    });

    let mut log_t = Vec::new();
    let mut log_l = Vec::new();
    let mut max_l_last = 0.0f64;
    for (ti, &t) in params.t_grid.iter().enumerate() {
        let mut best = 0.0f64;
        let mut best_se = 0.0f64;
        for (j, dir) in directions.iter().enumerate() {
            let d0 = dir.scale(params.delta).norm_l2();
            let per_path: Vec<f64> = samples.iter().map(|s| s[j][ti]).collect();
            let (mean, se) = mean_se(&per_path);
            let l = mean.abs() / d0;
            rb.estimate(
                &format!("lipschitz_probe_{j}"),
                t,
                l,
                se / d0,
                params.paths,
            );
            if l > best {
                best = l;
                best_se = se / d0;
            }
        }
        rb.estimate("lipschitz_max_probe", t, best, best_se, params.paths);
        if best > 0.0 {
            log_t.push(t.ln());
            log_l.push(best.ln());
        }
        max_l_last = best;
    }

    // Contraction ceiling: with a 1-Lipschitz flow the estimate can never
    // exceed the Lipschitz constant of the functional.
    let lip_f = params.alpha;
    rb.verdict(Verdict::hard(
        "estimate below the contraction ceiling",
        max_l_last <= lip_f * (1.0 + 1e-9),
        format!("L(t_max) = {max_l_last:.4} vs Lip(f) = {lip_f}"),
    ));

    let target = -(1.0 + lambda) / 2.0;
    if log_t.len() >= 3 {
        let fit = fit_slope(&log_t, &log_l);
        rb.estimate("smoothing_slope", 0.0, fit.slope, fit.slope_se, log_t.len());
        rb.verdict(Verdict::soft(
            "log-log slope within [-1.2, -0.55]",
            (-1.2..=-0.55).contains(&fit.slope),
            format!(
                "fitted slope {:.3} +- {:.3}, target {:.3}",
                fit.slope, fit.slope_se, target
            ),
        ));
    } else {
        rb.verdict(Verdict::soft(
            "log-log slope within [-1.2, -0.55]",
            false,
            "too few positive estimates for a fit".to_string(),
        ));
    }
    Ok(rb.finish())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
