//! Bridge between symmetric non-increasing circle functions and probability
//! measures on the line: quantile extraction, the Wasserstein-2 isometry,
//! empirical-data ingestion and sampling.
//!
//! A monotone state read along `x in [0, 1/2]` through `u = 1 - 2x` is the
//! quantile function of a measure; on the grid the map is a pure index
//! permutation, so the isometry `W_2 = |f - g|_2` is exact.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{CircleFunction, GridSpec};
use crate::rearrange::{is_symmetric_nonincreasing, rearrange};

/// Non-decreasing quantile values on the uniform grid `u_i = 2 i / n`,
/// `i = 0..=n/2`, tied to an `n`-point circle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFn {
    u: Vec<f64>,
    q: Vec<f64>,
}

impl QuantileFn {
    /// Validates monotonicity (violations beyond `1e-12` rejected).
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.len() < 3 {
            return Err(Error::config("quantile grid needs at least 3 nodes".to_string()));
        }
        let span = q
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1.0);
        for w in q.windows(2) {
            if w[1] < w[0] - 1e-12 * span {
                return Err(Error::config(format!(
                    "quantile values must be non-decreasing ({} > {})",
                    w[0], w[1]
                )));
            }
        }
        let m = q.len() - 1;
        let u = (0..=m).map(|i| i as f64 / m as f64).collect();
        Ok(QuantileFn { u, q })
    }

    /// Uniform probability nodes in `[0, 1]`.
    pub fn u_grid(&self) -> &[f64] {
        &self.u
    }

    /// Quantile values, non-decreasing.
    pub fn values(&self) -> &[f64] {
        &self.q
    }

    /// Circle grid size this quantile grid corresponds to.
    pub fn grid_size(&self) -> usize {
        2 * (self.q.len() - 1)
    }
}

fn monotone_tolerance(f: &CircleFunction) -> f64 {
    1e-9 * (1.0 + f.norm_l2())
}

/// Reads the quantile function `u -> f((1 - u)/2)` off the grid points in
/// `[0, 1/2]`.
pub fn ustar_to_quantile(f: &CircleFunction) -> Result<QuantileFn> {
    if !is_symmetric_nonincreasing(f, monotone_tolerance(f)) {
        return Err(Error::config(
            "quantile extraction requires a symmetric non-increasing function".to_string(),
        ));
    }
    let grid = f.grid();
    let half = grid.n() / 2;
    // u_i = 2 i / n maps to x = (1 - u_i)/2 = (n/2 - i)/n, a grid point.
    let q = (0..=half)
        .map(|i| f.values()[grid.index_of((half - i) as isize)])
        .collect();
    QuantileFn::new(q)
}

/// Places quantile values back on the circle: `f(+-(1 - u_i)/2) = q_i`.
pub fn quantile_to_ustar(q: &QuantileFn, grid: GridSpec) -> Result<CircleFunction> {
    if q.grid_size() != grid.n() {
        return Err(Error::config(format!(
            "quantile grid of {} nodes does not fit a {}-point circle",
            q.values().len(),
            grid.n()
        )));
    }
    let half = grid.n() / 2;
    let mut values = vec![0.0; grid.n()];
    for (i, &qi) in q.values().iter().enumerate() {
        let j = (half - i) as isize;
        values[grid.index_of(j)] = qi;
        if j != 0 && j != half as isize {
            values[grid.index_of(-j)] = qi;
        }
    }
    CircleFunction::new(grid, values)
}

/// Wasserstein-2 distance between the measures carried by two monotone
/// states: `|f - g|_2` on the grid. Non-monotone inputs are rearranged
/// first; the flag reports whether that happened.
pub fn w2_detailed(f: &CircleFunction, g: &CircleFunction) -> (f64, bool) {
    let mut rearranged = false;
    let fs;
    let gs;
    let f = if is_symmetric_nonincreasing(f, monotone_tolerance(f)) {
        f
    } else {
        rearranged = true;
        fs = rearrange(f);
        &fs
    };
    let g = if is_symmetric_nonincreasing(g, monotone_tolerance(g)) {
        g
    } else {
        rearranged = true;
        gs = rearrange(g);
        &gs
    };
    (f.sub(g).norm_l2(), rearranged)
}

/// Wasserstein-2 distance; see [`w2_detailed`].
pub fn w2(f: &CircleFunction, g: &CircleFunction) -> f64 {
    w2_detailed(f, g).0
}

/// Ground-truth 1D transport distance between uniform empirical measures:
/// the sorted coupling `sqrt((1/n) sum (a_(i) - b_(i))^2)`.
pub fn w2_oracle(atoms_a: &[f64], atoms_b: &[f64]) -> Result<f64> {
    if atoms_a.len() != atoms_b.len() {
        return Err(Error::config(format!(
            "atom counts differ: {} vs {}",
            atoms_a.len(),
            atoms_b.len()
        )));
    }
    if atoms_a.is_empty() {
        return Err(Error::config("empty atom lists".to_string()));
    }
    for atoms in [atoms_a, atoms_b] {
        if atoms.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::config("oracle atoms must be sorted ascending".to_string()));
        }
    }
    let n = atoms_a.len() as f64;
    let ss: f64 = atoms_a
        .iter()
        .zip(atoms_b)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((ss / n).sqrt())
}

/// Grid values sorted ascending: the atoms of the measure carried by `f`.
pub fn atoms(f: &CircleFunction) -> Vec<f64> {
    let mut v = f.values().to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Ingests real samples as a monotone state: sort, nearest-rank resample
/// onto the quantile nodes, place on the circle.
pub fn empirical_to_ustar(samples: &[f64], grid: GridSpec) -> Result<CircleFunction> {
    if samples.is_empty() {
        return Err(Error::config("empirical ingestion needs at least one sample".to_string()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("non-finite sample".to_string()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let count = sorted.len();
    let half = grid.n() / 2;
    let q: Vec<f64> = (0..=half)
        .map(|i| {
            let u = i as f64 / half as f64;
            let rank = ((u * count as f64).ceil() as usize).clamp(1, count);
            sorted[rank - 1]
        })
        .collect();
    quantile_to_ustar(&QuantileFn::new(q)?, grid)
}

/// I.i.d. draws from the measure carried by a monotone state: uniform over
/// its grid atoms (the quantile transform of the discrete measure).
pub fn sample_measure(f: &CircleFunction, count: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !is_symmetric_nonincreasing(f, monotone_tolerance(f)) {
        return Err(Error::config(
            "sampling requires a symmetric non-increasing function".to_string(),
        ));
    }
    let sorted = atoms(f);
    let n = sorted.len();
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>();
            sorted[((u * n as f64) as usize).min(n - 1)]
        })
        .collect())
}

/// Reads one real per line, decimal notation.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::config(format!("cannot open sample file {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::config(format!("read error: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| {
            Error::config(format!(
                "sample file {}:{}: not a decimal number: {trimmed}",
                path.display(),
                lineno + 1
            ))
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Writes one real per line with 17 significant digits.
pub fn write_samples(path: &Path, samples: &[f64]) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::config(format!("cannot create {}: {e}", path.display())))?;
    for v in samples {
        writeln!(file, "{}", format_float(*v))
            .map_err(|e| Error::config(format!("write error: {e}")))?;
    }
    Ok(())
}

/// 17-significant-digit decimal rendering shared by samples and CSV output.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::heat::heat_kernel;
    use rand::SeedableRng;

    fn grid(n: usize) -> GridSpec {
        make_grid(n).unwrap()
    }

    fn uniform_ramp(g: GridSpec, scale: f64) -> CircleFunction {
        let half = g.n() / 2;
        let q: Vec<f64> = (0..=half).map(|i| scale * i as f64 * 2.0 / g.n() as f64).collect();
        quantile_to_ustar(&QuantileFn::new(q).unwrap(), g).unwrap()
    }

    #[test]
    fn constant_maps_to_a_dirac() {
        let g = grid(16);
        let f = CircleFunction::constant(g, 3.0);
        let q = ustar_to_quantile(&f).unwrap();
        assert!(q.values().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn kernel_quantile_is_monotone_with_peak_at_one() {
        let g = grid(128);
        let k = heat_kernel(0.05, g, 8).unwrap();
        let q = ustar_to_quantile(&k).unwrap();
        assert!(q.values().windows(2).all(|w| w[1] >= w[0]));
        let peak = *q.values().last().unwrap();
        assert_eq!(peak, k.values()[g.index_of(0)]);
    }

    #[test]
    fn round_trips_are_exact_on_grid() {
        let g = grid(128);
        let k = heat_kernel(0.03, g, 8).unwrap();
        let q = ustar_to_quantile(&k).unwrap();
        let back = quantile_to_ustar(&q, g).unwrap();
        assert_eq!(back.values(), k.values());
        let q2 = ustar_to_quantile(&back).unwrap();
        assert_eq!(q2.values(), q.values());
    }

    #[test]
    fn non_monotone_inputs_rejected() {
        let g = grid(32);
        let f = CircleFunction::cosine_mode(g, 2);
        assert!(ustar_to_quantile(&f).is_err());
        assert!(QuantileFn::new(vec![1.0, 0.5, 2.0]).is_err());
    }

    #[test]
    fn dirac_distance_and_coincidence() {
        let g = grid(64);
        let a = CircleFunction::constant(g, 1.0);
        let b = CircleFunction::constant(g, 4.0);
        assert!((w2(&a, &b) - 3.0).abs() < 1e-13);
        assert_eq!(w2(&a, &a), 0.0);
    }

    #[test]
    fn uniform_scaling_pair_approaches_the_analytic_value() {
        // W2(U[0,1], U[0,2])^2 = int_0^1 u^2 du = 1/3; the grid value
        // converges at second order, so a large grid nails it.
        let g = grid(1 << 19);
        let f = uniform_ramp(g, 1.0);
        let h = uniform_ramp(g, 2.0);
        let got = w2(&f, &h);
        assert!(
            (got - 1.0 / 3f64.sqrt()).abs() < 1e-10,
            "got {got}, expected {}",
            1.0 / 3f64.sqrt()
        );
    }

    #[test]
    fn isometry_matches_the_sorted_coupling_oracle() {
        let g = grid(64);
        let mut rng = crate::test_rng(71);
        for _ in 0..50 {
            let f = rearrange(&crate::random_function(&mut rng, g, 1.0));
            let h = rearrange(&crate::random_function(&mut rng, g, 1.0));
            let direct = w2(&f, &h);
            let oracle = w2_oracle(&atoms(&f), &atoms(&h)).unwrap();
            assert!(
                (direct - oracle).abs() <= 1e-10,
                "isometry broken: {direct} vs {oracle}"
            );
        }
    }

    #[test]
    fn oracle_edge_cases() {
        assert_eq!(w2_oracle(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(w2_oracle(&[2.0, 3.0], &[2.0, 3.0]).unwrap(), 0.0);
        assert!(w2_oracle(&[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn w2_symmetry_and_triangle_inequality() {
        let g = grid(64);
        let mut rng = crate::test_rng(73);
        for _ in 0..30 {
            let a = rearrange(&crate::random_function(&mut rng, g, 1.0));
            let b = rearrange(&crate::random_function(&mut rng, g, 1.0));
            let c = rearrange(&crate::random_function(&mut rng, g, 1.0));
            assert_eq!(w2(&a, &b), w2(&b, &a));
            assert!(w2(&a, &c) <= w2(&a, &b) + w2(&b, &c) + 1e-12);
        }
    }

    #[test]
    fn ingestion_of_identical_samples_is_a_constant() {
        let g = grid(16);
        let f = empirical_to_ustar(&[2.5; 10], g).unwrap();
        assert!(f.values().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn two_sample_ingestion_places_two_levels() {
        let g = grid(4);
        let f = empirical_to_ustar(&[0.0, 1.0], g).unwrap();
        // Values at (-0.25, 0, 0.25, 0.5): peak 1 at x = 0, 0 elsewhere.
        assert_eq!(f.values(), &[0.0, 1.0, 0.0, 0.0]);
        assert!(is_symmetric_nonincreasing(&f, 0.0));
        assert!(empirical_to_ustar(&[], g).is_err());
    }

    #[test]
    fn ingestion_output_is_always_monotone() {
        let g = grid(64);
        let mut rng = crate::test_rng(79);
        for _ in 0..20 {
            let samples: Vec<f64> = (0..500)
                .map(|_| rand::Rng::random_range(&mut rng, -5.0..5.0))
                .collect();
            let f = empirical_to_ustar(&samples, g).unwrap();
            assert!(is_symmetric_nonincreasing(&f, 1e-12));
        }
    }

    #[test]
    fn sampling_a_dirac_and_a_ramp() {
        let g = grid(64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let c = CircleFunction::constant(g, 7.0);
        let draws = sample_measure(&c, 100, &mut rng).unwrap();
        assert!(draws.iter().all(|&v| v == 7.0));

        let ramp = uniform_ramp(g, 1.0);
        let n_draws = 40_000;
        let draws = sample_measure(&ramp, n_draws, &mut rng).unwrap();
        let mean = draws.iter().sum::<f64>() / n_draws as f64;
        // Uniform[0,1]: sd of the mean is 1/sqrt(12 N).
        let se = 1.0 / (12.0 * n_draws as f64).sqrt();
        assert!((mean - 0.5).abs() <= 3.0 * se + 1.0 / g.n() as f64, "mean {mean}");
    }

    #[test]
    fn sample_then_ingest_converges() {
        let g = grid(64);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let k = heat_kernel(0.04, g, 8).unwrap();
        let mut last = f64::INFINITY;
        for count in [200usize, 20_000] {
            let draws = sample_measure(&k, count, &mut rng).unwrap();
            let back = empirical_to_ustar(&draws, g).unwrap();
            let d = w2(&k, &back);
            assert!(d < last, "w2 did not shrink: {d} vs {last}");
            last = d;
        }
        assert!(last < 0.05, "final ingestion distance {last}");
    }

    #[test]
    fn sample_file_round_trip() {
        let dir = std::env::temp_dir().join("rshe-bridge-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("samples.txt");
        let values = vec![1.5, -2.25, 1.0 / 3.0, 1e-17];
        write_samples(&path, &values).unwrap();
        let back = read_samples(&path).unwrap();
        assert_eq!(back, values, "17 significant digits are lossless for f64");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn normal_ingestion_matches_the_exact_quantile_grid() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let g = grid(256);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let count = 100_000usize;
        let samples: Vec<f64> = (0..count)
            .map(|_| rand::Rng::sample(&mut rng, rand_distr::StandardNormal))
            .collect();
        let ingested = empirical_to_ustar(&samples, g).unwrap();
        let ingested_q = ustar_to_quantile(&ingested).unwrap();

        // Reference: the exact normal quantile at the interior nodes. The
        // two boundary nodes hold the sample extremes (order statistics
        // with O(1) spread, not consistent quantile estimates), so they
        // are copied over rather than compared.
        let normal = Normal::new(0.0, 1.0).unwrap();
        let half = g.n() / 2;
        let q: Vec<f64> = (0..=half)
            .map(|i| {
                if i == 0 || i == half {
                    ingested_q.values()[i]
                } else {
                    normal.inverse_cdf(i as f64 / half as f64)
                }
            })
            .collect();
        let exact = quantile_to_ustar(&QuantileFn::new(q).unwrap(), g).unwrap();
        let d = w2(&ingested, &exact);
        assert!(d <= 0.02, "normal ingestion distance {d}");
    }
}
