//! Dyadic refinement study: terminal differences between adjacent step
//! sizes under pathwise-coupled noise.

use crate::ensemble::map_paths;
use crate::error::{Error, Result};
use crate::experiments::orthogonality::increment_ladder;
use crate::experiments::{ExperimentReport, Verdict};
use crate::grid::CircleFunction;
use crate::scheme::{simulate_with, SchemeConfig};
use crate::stats::{fit_slope, mean_se};

/// Simulates `levels` dyadic step sizes (finest `cfg.h`) on shared Brownian
/// paths and reports `E |X^{2h}_T - X^{h}_T|_2` per adjacent pair together
/// with the fitted empirical order. Convergence is proved without a rate,
/// so the order is reported, not asserted.
pub fn convergence_experiment(
    cfg: &SchemeConfig,
    levels: usize,
    paths: usize,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    if !(2..=5).contains(&levels) {
        return Err(Error::config(format!(
            "convergence levels must lie in [2, 5], got {levels}"
        )));
    }
    if cfg.steps() % (1 << (levels - 1)) != 0 {
        return Err(Error::config(format!(
            "T/h = {} must be divisible by {}",
            cfg.steps(),
            1 << (levels - 1)
        )));
    }
    let mut rb = ExperimentReport::begin("convergence");
    rb.config("paths", paths)
        .config("levels", levels)
        .config("grid.n", cfg.grid.n())
        .config("noise.lambda", cfg.noise.lambda())
        .config("scheme.h", cfg.h)
        .config("scheme.T", cfg.t_horizon)
        .config("seed", cfg.noise.master_seed());

    let x0 = CircleFunction::zero(cfg.grid);
    let per_path = map_paths(paths, |p| {
        let ladder = increment_ladder(cfg, p, levels);
        let record = cfg.steps(); // terminal state only
        let finals: Vec<CircleFunction> = ladder
            .iter()
            .enumerate()
            .map(|(level, incs)| {
                let mut level_cfg = cfg.with_record_every(record >> level);
                level_cfg.h = cfg.h * (1 << level) as f64;
                simulate_with(&level_cfg, &x0, |k| incs[k as usize].clone())
                    .unwrap()
                    .final_state()
                    .clone()
            })
            .collect();
        // Difference between level l (coarser 2h) and level l-1 (h).
        (1..levels)
            .map(|l| finals[l].sub(&finals[l - 1]).norm_l2())
            .collect::<Vec<f64>>()
    });

    let mut log_h = Vec::new();
    let mut log_d = Vec::new();
    let mut means = Vec::new();
    for l in 1..levels {
        let h_coarse = cfg.h * (1 << l) as f64;
        let vals: Vec<f64> = per_path.iter().map(|d| d[l - 1]).collect();
        let (mean, se) = mean_se(&vals);
        rb.estimate("terminal_difference", h_coarse, mean, se, paths);
        means.push((h_coarse, mean, se));
        if mean > 0.0 {
            log_h.push(h_coarse.ln());
            log_d.push(mean.ln());
        }
    }

    let mut monotone = true;
    let mut detail = String::new();
    for w in means.windows(2) {
        // w[0] is the finer pair; differences must shrink with h.
        monotone &= w[0].1 < w[1].1;
        detail.push_str(&format!("h={:.0e}: {:.4e}; h={:.0e}: {:.4e}; ", w[1].0, w[1].1, w[0].0, w[0].1));
    }
    rb.verdict(Verdict::hard(
        "terminal differences decrease monotonically",
        monotone,
        detail,
    ));

    if log_h.len() >= 2 {
        let fit = fit_slope(&log_h, &log_d);
        rb.estimate("empirical_order", 0.0, fit.slope, fit.slope_se, log_h.len());
        rb.verdict(Verdict::soft(
            "empirical order is positive",
            fit.slope > 0.0,
            format!("order {:.3} +- {:.3} (reported, not asserted)", fit.slope, fit.slope_se),
        ));
    }
    Ok(rb.finish())
}
