//! Energy balance of the scheme over an ensemble.

use crate::ensemble::map_paths;
use crate::error::Result;
use crate::experiments::{ExperimentReport, Verdict};
use crate::grid::CircleFunction;
use crate::noise::trace_constant;
use crate::reflection::{energy_balance_from_terms, path_energy_terms};
use crate::scheme::{simulate, SchemeConfig};

/// Runs `paths` trajectories from zero and checks the discrete energy
/// balance residual against `3 se + 5 h trace T`.
pub fn energy_experiment(cfg: &SchemeConfig, paths: usize, eps: f64) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rb = ExperimentReport::begin("energy");
    rb.config("paths", paths)
        .config("epsilon", eps)
        .config("grid.n", cfg.grid.n())
        .config("noise.lambda", cfg.noise.lambda())
        .config("scheme.h", cfg.h)
        .config("scheme.T", cfg.t_horizon)
        .config("seed", cfg.noise.master_seed());

    let x0 = CircleFunction::zero(cfg.grid);
    let run_cfg = cfg.with_record_every(1);
    // Trajectories are reduced to their energy terms inside the map so the
    // ensemble never holds full paths.
    let terms = map_paths(paths, |p| {
        let traj = simulate(&run_cfg, &x0, p).unwrap();
        path_energy_terms(&traj, eps).unwrap()
    });
    let balance = energy_balance_from_terms(&terms, Some(&cfg.noise), eps)?;

    rb.estimate("mean_final_sq", balance.t, balance.mean_final_sq, 0.0, paths)
        .estimate("dirichlet_state", balance.t, balance.dirichlet_state, 0.0, paths)
        .estimate("dirichlet_noise", balance.t, balance.dirichlet_noise, 0.0, paths)
        .estimate("noise_input", balance.t, balance.noise_input, 0.0, paths)
        .estimate("reflection_work", balance.t, balance.reflection_work, 0.0, paths)
        .estimate("residual", balance.t, balance.residual, balance.residual_se, paths);

    let trace = trace_constant(&cfg.noise);
    let slack = 5.0 * cfg.h * trace * cfg.t_horizon;
    rb.verdict(Verdict::hard(
        "residual within 3 se + 5 h trace T",
        balance.residual.abs() <= 3.0 * balance.residual_se + slack,
        format!(
            "|R| = {:.4e}, 3 se = {:.4e}, slack = {:.4e}",
            balance.residual.abs(),
            3.0 * balance.residual_se,
            slack
        ),
    ));
    rb.verdict(Verdict::hard(
        "per-step norm identity |X|=|Z| exact",
        balance.worst_norm_identity <= 1e-12,
        format!("worst relative deviation {:.3e}", balance.worst_norm_identity),
    ));
    Ok(rb.finish())
}
