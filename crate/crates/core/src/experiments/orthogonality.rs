//! Orthogonality of state and reflection: the right-endpoint defect at
//! `eps = 0` across step sizes, and sign checks of the Stieltjes integral.

use crate::ensemble::map_paths;
use crate::error::Result;
use crate::experiments::{ExperimentReport, Verdict};
use crate::grid::CircleFunction;
use crate::noise::{aggregate, conv_increment, ConvIncrement, StreamKey};
use crate::reflection::{eta_from_trajectory_with, half_squared_corrections, stieltjes_integral};
use crate::scheme::{simulate_with, SchemeConfig};
use crate::stats::mean_se;

/// Increment ladder: finest-level draws for one path, aggregated upward so
/// that every step size shares one Brownian path.
pub(crate) fn increment_ladder(
    cfg: &SchemeConfig,
    path: u64,
    levels: usize,
) -> Vec<Vec<ConvIncrement>> {
    let fine_steps = cfg.steps();
    let mut ladder = Vec::with_capacity(levels);
    let mut fine: Vec<ConvIncrement> = (0..fine_steps)
        .map(|k| {
            let mut rng = cfg.noise.stream(StreamKey {
                trajectory: path,
                step: k as u64,
            });
            conv_increment(&cfg.noise, cfg.h, &mut rng).expect("validated step")
        })
        .collect();
    let mut h = cfg.h;
    ladder.push(fine.clone());
    for _ in 1..levels {
        fine = fine
            .chunks_exact(2)
            .map(|pair| aggregate(&pair[0], &pair[1], h).expect("matching increments"))
            .collect();
        h *= 2.0;
        ladder.push(fine.clone());
    }
    ladder
}

/// Runs the scheme at `cfg.h`, `2 cfg.h` and `4 cfg.h` on one Brownian path
/// per trajectory, reporting the `eps = 0` right-endpoint defect per level
/// and the Stieltjes integrals of the state against the reflection across
/// `eps_grid`.
pub fn orthogonality_experiment(
    cfg: &SchemeConfig,
    eps_grid: &[f64],
    paths: usize,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rb = ExperimentReport::begin("orthogonality");
    rb.config("paths", paths)
        .config("eps_grid", format!("{eps_grid:?}"))
        .config("grid.n", cfg.grid.n())
        .config("noise.lambda", cfg.noise.lambda())
        .config("scheme.h", cfg.h)
        .config("scheme.T", cfg.t_horizon)
        .config("seed", cfg.noise.master_seed());

    let levels = 3usize;
    if cfg.steps() % (1 << (levels - 1)) != 0 {
        return Err(crate::error::Error::config(format!(
            "T/h = {} must be divisible by {} for the dyadic ladder",
            cfg.steps(),
            1 << (levels - 1)
        )));
    }
    let x0 = CircleFunction::zero(cfg.grid);

    struct PathOut {
        defects: Vec<f64>,
        integrals: Vec<f64>,
        min_integral: f64,
    }
    let per_path = map_paths(paths, |p| {
        let ladder = increment_ladder(cfg, p, levels);
        let mut defects = Vec::with_capacity(levels);
        let mut integrals = Vec::new();
        let mut min_integral = f64::INFINITY;
        for (level, incs) in ladder.iter().enumerate() {
            let mut level_cfg = cfg.with_record_every(1);
            level_cfg.h = cfg.h * (1 << level) as f64;
            let traj = simulate_with(&level_cfg, &x0, |k| incs[k as usize].clone()).unwrap();
            defects.push(half_squared_corrections(&traj));
            if level == 0 {
                let pair_cutoff = 16.min(cfg.grid.nyquist_cutoff());
                let path = eta_from_trajectory_with(&traj, pair_cutoff).unwrap();
                for &eps in eps_grid {
                    let got =
                        stieltjes_integral(traj.states(), &path, eps, pair_cutoff).unwrap();
                    integrals.push(got.riemann);
                    min_integral = min_integral.min(got.riemann / got.scale);
                }
            }
        }
        PathOut {
            defects,
            integrals,
            min_integral,
        }
    });

    let mut level_means = Vec::with_capacity(levels);
    for level in 0..levels {
        let h_level = cfg.h * (1 << level) as f64;
        let vals: Vec<f64> = per_path.iter().map(|o| o.defects[level]).collect();
        let (mean, se) = mean_se(&vals);
        rb.estimate("right_defect_eps_zero", h_level, mean, se, paths);
        level_means.push((h_level, mean, se));
    }
    // Coarse-to-fine strict decrease beyond one combined standard error.
    let mut trend_ok = true;
    let mut detail = String::new();
    for w in level_means.windows(2) {
        let (h_fine, m_fine, se_fine) = w[0];
        let (h_coarse, m_coarse, se_coarse) = w[1];
        let gap = m_coarse - m_fine;
        let se = (se_fine * se_fine + se_coarse * se_coarse).sqrt();
        trend_ok &= gap > se;
        detail.push_str(&format!(
            "h {h_coarse:.0e}->{h_fine:.0e}: drop {gap:.3e} (se {se:.3e}); "
        ));
    }
    rb.verdict(Verdict::hard(
        "right-endpoint defect strictly decreases with h",
        trend_ok,
        detail,
    ));

    let min_rel = per_path
        .iter()
        .map(|o| o.min_integral)
        .fold(f64::INFINITY, f64::min);
    rb.verdict(Verdict::hard(
        "stieltjes integrals of the state are nonnegative",
        min_rel >= -1e-10,
        format!("worst relative value {min_rel:.3e}"),
    ));

    for (ei, &eps) in eps_grid.iter().enumerate() {
        let vals: Vec<f64> = per_path.iter().map(|o| o.integrals[ei]).collect();
        let (mean, se) = mean_se(&vals);
        rb.estimate("stieltjes_vs_eps", eps, mean, se, paths);
    }
    Ok(rb.finish())
}
