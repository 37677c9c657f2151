//! Structural checks of the reconstructed reflection process: monotone
//! pairings, exact mean neutrality, the right-endpoint identity, splitting
//! consistency, and the negative-Sobolev growth ratio.

use crate::ensemble::map_paths;
use crate::error::Result;
use crate::experiments::{ExperimentReport, Verdict};
use crate::grid::CircleFunction;
use crate::heat::{default_kernel_images, heat_kernel};
use crate::rearrange::split_mode;
use crate::reflection::{
    eta_from_trajectory_with, eta_pairing, half_squared_corrections, orthogonality_defect,
};
use crate::scheme::{simulate, SchemeConfig};
use crate::stats::mean_se;

/// Per-step reflection structure over an ensemble: every correction pairs
/// non-negatively with every tracked monotone function, the mean pairing is
/// exactly zero, and the right-endpoint identity holds to float precision.
pub fn reflection_experiment(cfg: &SchemeConfig, paths: usize) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rb = ExperimentReport::begin("reflection");
    rb.config("paths", paths)
        .config("grid.n", cfg.grid.n())
        .config("noise.lambda", cfg.noise.lambda())
        .config("scheme.h", cfg.h)
        .config("scheme.T", cfg.t_horizon)
        .config("seed", cfg.noise.master_seed());

    let mut monotone: Vec<CircleFunction> = Vec::new();
    for t in [0.02, 0.05] {
        monotone.push(heat_kernel(t, cfg.grid, default_kernel_images(t, cfg.grid.n()))?);
    }
    let pair_cutoff = 8usize.min(cfg.grid.nyquist_cutoff());
    for m in 0..=pair_cutoff {
        let (p, mi) = split_mode(m, cfg.grid);
        monotone.push(p);
        monotone.push(mi);
    }

    struct PathOut {
        worst_pairing: f64,
        mean_exact: bool,
        identity_defect: f64,
        split_defect: f64,
        eta_norm_ratio: f64,
    }
    let run_cfg = cfg.with_record_every(1);
    let per_path = map_paths(paths, |p| {
        let x0 = CircleFunction::zero(cfg.grid);
        let traj = simulate(&run_cfg, &x0, p).unwrap();
        let mut worst_pairing = 0.0f64;
        for inc in traj.eta_increments() {
            let inc_norm = inc.norm_l2();
            for u in &monotone {
                let scale = (u.norm_l2() * inc_norm).max(1e-300);
                worst_pairing = worst_pairing.min(inc.inner(u) / scale);
            }
        }
        let path = eta_from_trajectory_with(&traj, pair_cutoff).unwrap();
        let mean_exact = path.mean_series().iter().all(|&v| v == 0.0);
        let (_, right) = orthogonality_defect(&traj, 0.0).unwrap();
        let identity_defect = (right - half_squared_corrections(&traj)).abs();

        // Splitting consistency: direct mode pairing vs plus-minus series.
        let mut split_defect = 0.0f64;
        for m in 0..=pair_cutoff {
            let direct = eta_pairing(&path, &CircleFunction::cosine_mode(cfg.grid, m));
            let last = direct.len() - 1;
            let split = path.plus_pairing(m)[last] - path.minus_pairing(m)[last];
            split_defect =
                split_defect.max((direct[last] - split).abs() / (1.0 + direct[last].abs()));
        }

        // |eta_T|_{2,-2} against sup_t |Y_t|_2 (constant reported only).
        let eta_norm = *path.sobolev_minus_two().last().unwrap();
        let sup_y = traj
            .states()
            .iter()
            .zip(traj.companion())
            .map(|(x, v)| x.sub(v).norm_l2())
            .fold(0.0f64, f64::max);
        PathOut {
            worst_pairing,
            mean_exact,
            identity_defect,
            split_defect,
            eta_norm_ratio: if sup_y > 0.0 { eta_norm / sup_y } else { 0.0 },
        }
    });

    let worst_pairing = per_path
        .iter()
        .map(|o| o.worst_pairing)
        .fold(0.0f64, f64::min);
    let all_means_exact = per_path.iter().all(|o| o.mean_exact);
    let worst_identity = per_path
        .iter()
        .map(|o| o.identity_defect)
        .fold(0.0f64, f64::max);
    let worst_split = per_path
        .iter()
        .map(|o| o.split_defect)
        .fold(0.0f64, f64::max);
    let ratios: Vec<f64> = per_path.iter().map(|o| o.eta_norm_ratio).collect();
    let (ratio_mean, ratio_se) = mean_se(&ratios);

    rb.estimate("worst_monotone_pairing_rel", cfg.h, worst_pairing, 0.0, paths)
        .estimate("right_identity_defect", cfg.h, worst_identity, 0.0, paths)
        .estimate("split_consistency_defect", cfg.h, worst_split, 0.0, paths)
        .estimate("eta_sobolev_ratio", cfg.t_horizon, ratio_mean, ratio_se, paths);

    rb.verdict(Verdict::hard(
        "corrections pair nonnegatively with monotone functions",
        worst_pairing >= -1e-12,
        format!("worst relative pairing {worst_pairing:.3e}"),
    ));
    rb.verdict(Verdict::hard(
        "<eta, e_0> is exactly zero",
        all_means_exact,
        format!("exact on all {paths} paths: {all_means_exact}"),
    ));
    rb.verdict(Verdict::hard(
        "right-endpoint identity at eps = 0 within 1e-12",
        worst_identity <= 1e-12,
        format!("worst defect {worst_identity:.3e}"),
    ));
    rb.verdict(Verdict::hard(
        "mode pairing splits as plus minus minus within 1e-6",
        worst_split <= 1e-6,
        format!("worst relative defect {worst_split:.3e}"),
    ));
    Ok(rb.finish())
}
