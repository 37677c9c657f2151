//! Pathwise flow contraction under shared noise.

use rand::Rng;

use crate::ensemble::map_paths;
use crate::error::Result;
use crate::experiments::{aux_rng, ExperimentReport, Verdict};
use crate::grid::{from_modes, CircleFunction, FourierCoeffs};
use crate::rearrange::rearrange;
use crate::scheme::{coupled_simulate, SchemeConfig};
use crate::stats::min_median_max;

/// Random monotone state: a rearranged band-limited sample.
pub(crate) fn random_monotone(
    rng: &mut impl Rng,
    cfg: &SchemeConfig,
    scale: f64,
) -> CircleFunction {
    let cutoff = 8.min(cfg.grid.nyquist_cutoff());
    let mut c = FourierCoeffs::zeros(cutoff);
    for m in 0..=cutoff {
        c.cos[m] = scale * rng.random_range(-1.0..1.0) / (1 + m * m) as f64;
    }
    rearrange(&from_modes(&c, cfg.grid).expect("cutoff within range"))
}

/// Couples `pairs` random pairs of initial conditions on identical noise
/// and checks that the `L^2` distance never grows along any step.
pub fn contraction_experiment(cfg: &SchemeConfig, pairs: usize) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut rb = ExperimentReport::begin("contraction");
    rb.config("pairs", pairs)
        .config("grid.n", cfg.grid.n())
        .config("noise.lambda", cfg.noise.lambda())
        .config("scheme.h", cfg.h)
        .config("scheme.T", cfg.t_horizon)
        .config("seed", cfg.noise.master_seed());

    // Full recording: the contraction claim is per step.
    let per_pair = map_paths(pairs, |p| {
        let mut rng = aux_rng(cfg.noise.master_seed(), 10, p);
        let a = random_monotone(&mut rng, cfg, 1.0);
        let b = random_monotone(&mut rng, cfg, 1.0);
        let (ta, tb) = coupled_simulate(cfg, &a, &b, p).expect("validated config");
        let mut worst_growth = f64::MIN;
        let mut prev = f64::INFINITY;
        let mut d0 = 0.0;
        let mut dn = 0.0;
        for (k, (xa, xb)) in ta.states().iter().zip(tb.states()).enumerate() {
            let d = xa.sub(xb).norm_l2();
            if k == 0 {
                d0 = d;
            } else {
                worst_growth = worst_growth.max(d - prev);
            }
            prev = d;
            dn = d;
        }
        (worst_growth, if d0 > 0.0 { dn / d0 } else { 0.0 })
    });

    let worst_growth = per_pair.iter().map(|c| c.0).fold(f64::MIN, f64::max);
    let ratios: Vec<f64> = per_pair.iter().map(|c| c.1).collect();
    let (rmin, rmed, rmax) = min_median_max(&ratios);
    let violations = per_pair.iter().filter(|c| c.0 > 1e-12).count();

    rb.estimate("worst_step_growth", cfg.h, worst_growth, 0.0, pairs)
        .estimate("ratio_min", cfg.t_horizon, rmin, 0.0, pairs)
        .estimate("ratio_median", cfg.t_horizon, rmed, 0.0, pairs)
        .estimate("ratio_max", cfg.t_horizon, rmax, 0.0, pairs);
    rb.verdict(Verdict::hard(
        "per-step distance never grows beyond 1e-12",
        violations == 0,
        format!("{violations} violating pairs, worst growth {worst_growth:.3e}"),
    ));
    rb.verdict(Verdict::hard(
        "terminal ratio within [0, 1]",
        rmax <= 1.0 + 1e-12 && rmin >= 0.0,
        format!("min {rmin:.3}, median {rmed:.3}, max {rmax:.3}"),
    ));
    Ok(rb.finish())
}
