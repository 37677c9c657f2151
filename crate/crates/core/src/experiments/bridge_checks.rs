//! Measure-bridge battery: the Wasserstein isometry against the sorted
//! coupling oracle, the analytic uniform-scaling case, and ingestion
//! round trips.

use rand::Rng;

use crate::bridge::{atoms, empirical_to_ustar, quantile_to_ustar, sample_measure, w2, w2_oracle, QuantileFn};
use crate::ensemble::map_paths;
use crate::error::Result;
use crate::experiments::{aux_rng, ExperimentReport, Verdict};
use crate::grid::{make_grid, CircleFunction};
use crate::heat::{default_kernel_images, heat_kernel};
use crate::rearrange::{is_symmetric_nonincreasing, rearrange};

/// Runs the bridge checks: `pairs` random monotone pairs at grid size `n`,
/// the Uniform[0,1]-vs-Uniform[0,2] analytic value at a large grid, and a
/// sample/ingest round trip.
pub fn bridge_suite(n: usize, pairs: usize, master_seed: u64) -> Result<ExperimentReport> {
    let mut rb = ExperimentReport::begin("bridge");
    rb.config("grid.n", n).config("pairs", pairs).config("seed", master_seed);
    let grid = make_grid(n)?;

    let gaps = map_paths(pairs, |i| {
        let mut rng = aux_rng(master_seed, 20, i);
        let mut random_monotone = || {
            let values = (0..grid.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
            rearrange(&CircleFunction::new(grid, values).expect("finite"))
        };
        let f = random_monotone();
        let g = random_monotone();
        let direct = w2(&f, &g);
        let oracle = w2_oracle(&atoms(&f), &atoms(&g)).expect("equal atom counts");
        (direct - oracle).abs()
    });
    let worst = gaps.iter().copied().fold(0.0f64, f64::max);
    rb.estimate("isometry_worst_gap", n as f64, worst, 0.0, pairs);
    rb.verdict(Verdict::hard(
        "w2 equals the sorted-coupling oracle <= 1e-10",
        worst <= 1e-10,
        format!("worst gap {worst:.3e}"),
    ));

    // Uniform[0,1] vs Uniform[0,2]: the grid value approaches 1/sqrt(3) at
    // second order in 1/n, so the analytic tolerance needs a large grid.
    let big = make_grid(1 << 19)?;
    let half = big.n() / 2;
    let ramp = |scale: f64| {
        let q: Vec<f64> = (0..=half)
            .map(|i| scale * 2.0 * i as f64 / big.n() as f64)
            .collect();
        quantile_to_ustar(&QuantileFn::new(q).expect("monotone"), big).expect("sizes match")
    };
    let gap = (w2(&ramp(1.0), &ramp(2.0)) - 1.0 / 3.0f64.sqrt()).abs();
    rb.estimate("uniform_pair_analytic_gap", big.n() as f64, gap, 0.0, 1);
    rb.verdict(Verdict::hard(
        "uniform scaling pair reproduces 1/sqrt(3) <= 1e-10",
        gap <= 1e-10,
        format!("gap {gap:.3e}"),
    ));

    // Sample from a kernel state, ingest back, watch the distance shrink.
    let kernel = heat_kernel(0.04, grid, default_kernel_images(0.04, grid.n()))?;
    let mut rng = aux_rng(master_seed, 21, 0);
    let mut last = f64::INFINITY;
    let mut shrinking = true;
    for count in [500usize, 50_000] {
        let draws = sample_measure(&kernel, count, &mut rng)?;
        let back = empirical_to_ustar(&draws, grid)?;
        shrinking &= is_symmetric_nonincreasing(&back, 1e-12);
        let d = w2(&kernel, &back);
        rb.estimate("sample_ingest_distance", count as f64, d, 0.0, count);
        // Coarse grids can reach the floor immediately, so non-strict.
        shrinking &= d <= last;
        last = d;
    }
    rb.verdict(Verdict::hard(
        "sample/ingest round trip is monotone and converges",
        shrinking && last < 0.05,
        format!("final distance {last:.4}"),
    ));
    Ok(rb.finish())
}
