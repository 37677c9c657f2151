//! Invariant batteries for the rearrangement, the heat operators and the
//! noise law. These back both the `properties` command and the acceptance
//! suite; the counts are configurable, the tolerances are not.

use rand::Rng;

use crate::ensemble::map_paths;
use crate::error::Result;
use crate::experiments::{aux_rng, ExperimentReport, Verdict};
use crate::grid::{lp_norm, make_grid, to_modes, CircleFunction, GridSpec};
use crate::heat::{
    convolve, default_kernel_images, dirichlet_energy_integral, heat_apply, heat_kernel,
};
use crate::noise::{aggregate, conv_increment, mode_variance, NoiseSpec, StreamKey};
use crate::rearrange::rearrange;

/// Sample counts for the property batteries.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PropertiesConfig {
    pub master_seed: u64,
    /// Random functions per grid size in the rearrangement battery.
    pub functions_per_grid: usize,
    /// Random triples per grid size in the Riesz / Polya-Szego battery.
    pub triples: usize,
    /// Random pairs in the Dirichlet-energy key inequality battery.
    pub energy_pairs: usize,
    /// Samples per mode in the noise-law battery.
    pub noise_samples: usize,
}

impl Default for PropertiesConfig {
    fn default() -> Self {
        PropertiesConfig {
            master_seed: 0,
            functions_per_grid: 10_000,
            triples: 1_000,
            energy_pairs: 1_000,
            noise_samples: 100_000,
        }
    }
}

fn random_function(rng: &mut impl Rng, grid: GridSpec, scale: f64) -> CircleFunction {
    let values = (0..grid.n())
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    CircleFunction::new(grid, values).expect("finite random values")
}

/// Exact rearrangement battery: multiset preservation, `L^p` equality,
/// idempotence, Hardy-Littlewood and non-expansion, on random functions
/// over several grid sizes.
pub fn rearrangement_suite(cfg: &PropertiesConfig, grids: &[usize]) -> Result<ExperimentReport> {
    let mut rb = ExperimentReport::begin("rearrangement");
    rb.config("functions_per_grid", cfg.functions_per_grid)
        .config("grids", format!("{grids:?}"))
        .config("seed", cfg.master_seed);

    for &n in grids {
        let grid = make_grid(n)?;
        let counts = cfg.functions_per_grid;
        let cases = map_paths(counts, |i| {
            let mut rng = aux_rng(cfg.master_seed, 1, (n as u64) << 32 | i);
            let f = random_function(&mut rng, grid, 2.0);
            let g = random_function(&mut rng, grid, 2.0);
            let rf = rearrange(&f);
            let rg = rearrange(&g);

            let mut multiset_ok = {
                let mut a = f.values().to_vec();
                let mut b = rf.values().to_vec();
                a.sort_unstable_by(f64::total_cmp);
                b.sort_unstable_by(f64::total_cmp);
                a == b
            };
            multiset_ok &= rearrange(&rf).values() == rf.values();

            let mut lp_worst = 0.0f64;
            for p in [1.0, 2.0, 4.0, f64::INFINITY] {
                let a = lp_norm(&f, p).unwrap();
                let b = lp_norm(&rf, p).unwrap();
                lp_worst = lp_worst.max((a - b).abs() / (1.0 + a));
            }
            let hl = rf.inner(&rg) - f.inner(&g); // >= 0 expected
            let mut ne_worst = 0.0f64;
            for p in [1.0, 2.0, 4.0, f64::INFINITY] {
                let lhs = lp_norm(&rf.sub(&rg), p).unwrap();
                let rhs = lp_norm(&f.sub(&g), p).unwrap();
                ne_worst = ne_worst.max(lhs - rhs);
            }
            (multiset_ok, lp_worst, hl, ne_worst)
        });
        let exact_failures = cases.iter().filter(|c| !c.0).count();
        let lp_worst = cases.iter().map(|c| c.1).fold(0.0f64, f64::max);
        let hl_worst = cases.iter().map(|c| c.2).fold(0.0f64, f64::min);
        let ne_worst = cases.iter().map(|c| c.3).fold(0.0f64, f64::max);

        rb.estimate("lp_worst_rel_dev", n as f64, lp_worst, 0.0, counts)
            .estimate("hardy_littlewood_min_gap", n as f64, hl_worst, 0.0, counts)
            .estimate("non_expansion_worst_excess", n as f64, ne_worst, 0.0, counts);
        rb.verdict(Verdict::hard(
            format!("multiset+idempotence exact (n={n})"),
            exact_failures == 0,
            format!("{exact_failures} failures / {counts}"),
        ));
        rb.verdict(Verdict::hard(
            format!("lp preservation <= 1e-12 (n={n})"),
            lp_worst <= 1e-12,
            format!("worst {lp_worst:.3e}"),
        ));
        rb.verdict(Verdict::hard(
            format!("hardy-littlewood (n={n})"),
            hl_worst >= -1e-12,
            format!("worst gap {hl_worst:.3e}"),
        ));
        rb.verdict(Verdict::hard(
            format!("non-expansion (n={n})"),
            ne_worst <= 1e-12,
            format!("worst excess {ne_worst:.3e}"),
        ));
    }
    Ok(rb.finish())
}

/// Riesz rearrangement and Polya-Szego inequalities with explicit
/// discretisation slack, on random triples.
pub fn riesz_polya_suite(cfg: &PropertiesConfig, grids: &[usize]) -> Result<ExperimentReport> {
    let mut rb = ExperimentReport::begin("riesz_polya");
    rb.config("triples", cfg.triples)
        .config("grids", format!("{grids:?}"))
        .config("seed", cfg.master_seed);

    for &n in grids {
        let grid = make_grid(n)?;
        let t_kernel = 0.02;
        let g_kernel = heat_kernel(t_kernel, grid, default_kernel_images(t_kernel, n))?;
        let g_star = rearrange(&g_kernel);
        // Discrete Lipschitz constant of the kernel.
        let lip = g_kernel
            .values()
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0f64, f64::max)
            * n as f64;

        let cases = map_paths(cfg.triples, |i| {
            let mut rng = aux_rng(cfg.master_seed, 2, (n as u64) << 32 | i);
            let f = random_function(&mut rng, grid, 1.0);
            let h = random_function(&mut rng, grid, 1.0);
            let fr = rearrange(&f);
            let hr = rearrange(&h);

            // Riesz: (1/n^2) sum f(x) g(x-y) h(y) via two convolution passes.
            let plain = f.inner(&convolve(&g_kernel, &h));
            let starred = fr.inner(&convolve(&g_star, &hr));
            let slack = 10.0 * (lip / n as f64) * f.norm_l2() * h.norm_l2();
            let riesz_excess = plain - starred - slack;

            // Polya-Szego with the forward difference quotient.
            let fwd = |f: &CircleFunction| {
                let v = f.values();
                let d: Vec<f64> = (0..n)
                    .map(|j| (v[(j + 1) % n] - v[j]) * n as f64)
                    .collect();
                CircleFunction::new(grid, d).expect("finite differences")
            };
            let mut ps_excess = f64::MIN;
            for p in [1.0, 2.0, 4.0, f64::INFINITY] {
                let lhs = lp_norm(&fwd(&fr), p).unwrap();
                let rhs = lp_norm(&fwd(&f), p).unwrap();
                ps_excess = ps_excess.max(lhs - rhs * (1.0 + 10.0 / n as f64));
            }
            (riesz_excess, ps_excess)
        });
        let riesz_worst = cases.iter().map(|c| c.0).fold(f64::MIN, f64::max);
        let ps_worst = cases.iter().map(|c| c.1).fold(f64::MIN, f64::max);
        rb.estimate("riesz_worst_excess", n as f64, riesz_worst, 0.0, cfg.triples)
            .estimate("polya_szego_worst_excess", n as f64, ps_worst, 0.0, cfg.triples);
        rb.verdict(Verdict::hard(
            format!("riesz within slack (n={n})"),
            riesz_worst <= 1e-12,
            format!("worst excess {riesz_worst:.3e}"),
        ));
        rb.verdict(Verdict::hard(
            format!("polya-szego within slack (n={n})"),
            ps_worst <= 1e-12,
            format!("worst excess {ps_worst:.3e}"),
        ));
    }
    Ok(rb.finish())
}

/// Key inequality: the Dirichlet energy integral never grows under
/// rearrangement.
pub fn key_inequality_suite(cfg: &PropertiesConfig, n: usize) -> Result<ExperimentReport> {
    let mut rb = ExperimentReport::begin("key_inequality");
    rb.config("pairs", cfg.energy_pairs)
        .config("grid.n", n)
        .config("seed", cfg.master_seed);
    let grid = make_grid(n)?;
    let cutoff = grid.nyquist_cutoff();
    let horizons = [1e-4, 1e-3, 1e-2, 1e-1];
    let excesses = map_paths(cfg.energy_pairs, |i| {
        let mut rng = aux_rng(cfg.master_seed, 3, i);
        let f = random_function(&mut rng, grid, 1.0);
        let fr = rearrange(&f);
        let before = to_modes(&f, cutoff).unwrap();
        let after = to_modes(&fr, cutoff).unwrap();
        let h = horizons[(i % horizons.len() as u64) as usize];
        let a = dirichlet_energy_integral(&after, h).unwrap();
        let b = dirichlet_energy_integral(&before, h).unwrap();
        a - b - (1e-10 + 10.0 / n as f64)
    });
    let worst = excesses.iter().copied().fold(f64::MIN, f64::max);
    rb.estimate("key_inequality_worst_excess", n as f64, worst, 0.0, cfg.energy_pairs);
    rb.verdict(Verdict::hard(
        "rearrangement lowers smoothed dirichlet energy",
        worst <= 0.0,
        format!("worst excess {worst:.3e}"),
    ));
    Ok(rb.finish())
}

/// Heat and kernel consistency: spectral action versus kernel convolution,
/// kernel monotonicity and mass, preservation of the monotone cone.
pub fn heat_consistency_suite(cfg: &PropertiesConfig, n: usize) -> Result<ExperimentReport> {
    let mut rb = ExperimentReport::begin("heat_consistency");
    rb.config("grid.n", n).config("seed", cfg.master_seed);
    let grid = make_grid(n)?;

    let mut conv_worst = 0.0f64;
    let mut mono_worst = 0.0f64;
    let mut mass_worst = 0.0f64;
    let mut cone_worst = 0.0f64;
    for (idx, t) in [0.02, 0.05, 0.1].iter().enumerate() {
        let kernel = heat_kernel(*t, grid, default_kernel_images(*t, n))?;
        let mass = kernel.values().iter().sum::<f64>() / n as f64;
        mass_worst = mass_worst.max((mass - 1.0).abs());
        mono_worst = mono_worst.max(kernel.sub(&rearrange(&kernel)).norm_l2());

        let mut rng = aux_rng(cfg.master_seed, 4, idx as u64);
        let f = random_function(&mut rng, grid, 1.0);
        let smooth = heat_apply(0.02, &f)?; // band-limit before comparing
        let by_kernel = convolve(&kernel, &smooth);
        let by_modes = heat_apply(*t, &smooth)?;
        conv_worst = conv_worst.max(by_kernel.sub(&by_modes).norm_l2());

        let monotone = rearrange(&f);
        let heated = heat_apply(*t, &monotone)?;
        cone_worst = cone_worst.max(heated.sub(&rearrange(&heated)).norm_l2());
    }
    rb.estimate("kernel_vs_spectral", n as f64, conv_worst, 0.0, 3)
        .estimate("kernel_mass_defect", n as f64, mass_worst, 0.0, 3)
        .estimate("kernel_monotone_defect", n as f64, mono_worst, 0.0, 3)
        .estimate("cone_preservation_defect", n as f64, cone_worst, 0.0, 3);
    rb.verdict(Verdict::hard(
        "spectral semigroup matches kernel convolution <= 1e-8",
        conv_worst <= 1e-8,
        format!("worst {conv_worst:.3e}"),
    ));
    rb.verdict(Verdict::hard(
        "kernel mass 1 +- 1e-10",
        mass_worst <= 1e-10,
        format!("worst {mass_worst:.3e}"),
    ));
    rb.verdict(Verdict::hard(
        "kernel symmetric non-increasing <= 1e-10",
        mono_worst <= 1e-10,
        format!("worst {mono_worst:.3e}"),
    ));
    rb.verdict(Verdict::hard(
        "heat preserves the monotone cone <= 1e-8",
        cone_worst <= 1e-8,
        format!("worst {cone_worst:.3e}"),
    ));
    Ok(rb.finish())
}

/// Noise law: per-mode empirical variances against the closed forms, and
/// the exact two-step aggregation identity.
pub fn noise_law_suite(cfg: &PropertiesConfig) -> Result<ExperimentReport> {
    let mut rb = ExperimentReport::begin("noise_law");
    rb.config("samples", cfg.noise_samples)
        .config("seed", cfg.master_seed);
    let h = 0.01;
    let max_mode = 8usize;

    for &lambda in &[0.6, 0.75, 0.9] {
        // Fold lambda into the seed so the three runs draw independently.
        let spec = NoiseSpec::new(lambda, max_mode, cfg.master_seed ^ lambda.to_bits())?;
        let sums = map_paths(cfg.noise_samples, |i| {
            let mut rng = spec.stream(StreamKey {
                trajectory: i,
                step: 0,
            });
            let inc = conv_increment(&spec, h, &mut rng).unwrap();
            let mut sq = [0.0f64; 9];
            for m in 0..=max_mode {
                sq[m] = inc.modes()[m] * inc.modes()[m];
            }
            sq
        });
        let mut worst_sigma = 0.0f64;
        for m in 0..=max_mode {
            let mean_sq = sums.iter().map(|s| s[m]).sum::<f64>() / cfg.noise_samples as f64;
            let expect = mode_variance(&spec, m, h);
            let se = expect * (2.0 / cfg.noise_samples as f64).sqrt();
            let sigmas = (mean_sq - expect).abs() / se;
            worst_sigma = worst_sigma.max(sigmas);
            rb.estimate(
                &format!("variance_lambda_{lambda}"),
                m as f64,
                mean_sq,
                se,
                cfg.noise_samples,
            );
        }
        rb.verdict(Verdict::hard(
            format!("mode variances within 3 se (lambda={lambda})"),
            worst_sigma <= 3.0,
            format!("worst deviation {worst_sigma:.2} se"),
        ));
    }

    // Deterministic aggregation identity, checked on the composed variance
    // and on one explicit pathwise composition.
    let spec = NoiseSpec::new(0.75, 16, cfg.master_seed)?;
    let mut worst = 0.0f64;
    for m in 1..=16usize {
        for h in [1e-4, 1e-3, 1e-2] {
            let v = mode_variance(&spec, m, h);
            let d = crate::heat::decay(m, h);
            let rel = ((d * d * v + v) - mode_variance(&spec, m, 2.0 * h)).abs()
                / mode_variance(&spec, m, 2.0 * h);
            worst = worst.max(rel);
        }
    }
    let mut rng = spec.stream(StreamKey {
        trajectory: 0,
        step: 0,
    });
    let a = conv_increment(&spec, h, &mut rng)?;
    let b = conv_increment(&spec, h, &mut rng)?;
    let agg = aggregate(&a, &b, h)?;
    let direct_ok = agg.h() == 2.0 * h;
    rb.estimate("aggregate_variance_identity_rel", 0.0, worst, 0.0, 48);
    rb.verdict(Verdict::hard(
        "aggregate variance identity <= 1e-14",
        worst <= 1e-14 && direct_ok,
        format!("worst rel {worst:.3e}"),
    ));
    Ok(rb.finish())
}
