//! Periodic heat semigroup, the wrapped-Gaussian kernel, and the closed-form
//! Dirichlet energy integrals used by the energy balance.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{apply_mode_factors, CircleFunction, FourierCoeffs, GridSpec};

/// `e^{t Delta} f`: multiplies every mode `m` of the full spectrum by
/// `exp(-4 pi^2 m^2 t)`. `t = 0` is the identity.
pub fn heat_apply(t: f64, f: &CircleFunction) -> Result<CircleFunction> {
    if !(t >= 0.0) {
        return Err(Error::config(format!("heat time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(apply_mode_factors(f, |m| decay(m, t)))
}

/// Mode-`m` decay factor of the heat semigroup over time `t`.
pub fn decay(m: usize, t: f64) -> f64 {
    (-4.0 * PI * PI * (m * m) as f64 * t).exp()
}

/// Default number of Gaussian images per side for the kernel sum.
pub fn default_kernel_images(t: f64, n: usize) -> usize {
    (3 + (3.0 * t.sqrt() * n as f64).ceil() as usize).min(20)
}

/// The wrapped Gaussian `Gamma(t, .)` sampled on the grid, truncated to
/// `images` terms per side. Nonnegative, unit mass to high accuracy, and
/// symmetric non-increasing.
pub fn heat_kernel(t: f64, grid: GridSpec, images: usize) -> Result<CircleFunction> {
    if !(t > 0.0) {
        return Err(Error::config(format!("kernel time must be > 0, got {t}")));
    }
    let images = images.max(3);
    let norm = 1.0 / (4.0 * PI * t).sqrt();
    // Evaluate on |x| so mirror pairs are bitwise identical.
    let f = CircleFunction::from_fn(grid, |x| {
        let x = x.abs();
        let mut acc = 0.0;
        for k in -(images as isize)..=(images as isize) {
            let d = x - k as f64;
            acc += (-d * d / (4.0 * t)).exp();
        }
        norm * acc
    });
    Ok(f)
}

/// Circular convolution `(1/n) sum_y k(x - y) f(y)` by direct quadrature.
/// Exists as an independent cross-check of the spectral semigroup and for
/// the Riesz inequality tests.
pub fn convolve(kernel: &CircleFunction, f: &CircleFunction) -> CircleFunction {
    let grid = f.grid();
    let n = grid.n();
    assert_eq!(kernel.grid(), grid, "convolution needs a shared grid");
    // x_i - y_j lies on the grid again: index difference modulo n.
    let mut values = vec![0.0; n];
    for (i, v) in values.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..n {
            let d = (i + n - j) % n;
            // Storage index of the wrapped difference x_i - x_j: offset from
            // the storage position of 0.
            let zero = grid.index_of(0);
            let idx = (zero + d) % n;
            acc += kernel.values()[idx] * f.values()[j];
        }
        *v = acc / n as f64;
    }
    CircleFunction::from_raw(grid, values)
}

/// `int_0^h |D e^{s Delta} u|_2^2 ds` in closed form:
/// `sum_{m >= 1} u_m^2 (1 - e^{-8 pi^2 m^2 h}) / 2`, including the sine
/// coefficients when present.
pub fn dirichlet_energy_integral(u: &FourierCoeffs, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::config(format!("horizon must be > 0, got {h}")));
    }
    let mut acc = 0.0;
    for m in 1..=u.cutoff() {
        let w = 0.5 * (1.0 - (-8.0 * PI * PI * (m * m) as f64 * h).exp());
        acc += w * (u.cos[m] * u.cos[m] + u.sin[m - 1] * u.sin[m - 1]);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, to_modes};
    use crate::rearrange::{is_symmetric_nonincreasing, rearrange};

    fn grid(n: usize) -> GridSpec {
        make_grid(n).unwrap()
    }

    #[test]
    fn zero_time_is_identity_and_negative_rejected() {
        let g = grid(32);
        let f = CircleFunction::cosine_mode(g, 3);
        assert_eq!(heat_apply(0.0, &f).unwrap().values(), f.values());
        assert!(heat_apply(-0.1, &f).is_err());
    }

    #[test]
    fn constants_are_preserved() {
        let g = grid(32);
        let f = CircleFunction::constant(g, 1.7);
        let h = heat_apply(0.4, &f).unwrap();
        assert!(h.sub(&f).norm_l2() < 1e-13);
    }

    #[test]
    fn first_mode_decays_at_the_spectral_rate() {
        let g = grid(64);
        let f = CircleFunction::cosine_mode(g, 1);
        let h = heat_apply(0.1, &f).unwrap();
        let expect = f.scale(decay(1, 0.1));
        assert!(h.sub(&expect).norm_l2() < 1e-13);
    }

    #[test]
    fn kernel_convolution_matches_spectral_action() {
        let g = grid(64);
        let t = 0.1;
        let kernel = heat_kernel(t, g, default_kernel_images(t, g.n())).unwrap();
        let f = CircleFunction::cosine_mode(g, 1);
        let by_kernel = convolve(&kernel, &f);
        let by_modes = heat_apply(t, &f).unwrap();
        assert!(
            by_kernel.sub(&by_modes).norm_l2() < 1e-8,
            "kernel/spectral mismatch {}",
            by_kernel.sub(&by_modes).norm_l2()
        );
    }

    #[test]
    fn kernel_is_monotone_with_unit_mass() {
        let g = grid(128);
        for t in [0.02, 0.05, 0.3] {
            let k = heat_kernel(t, g, default_kernel_images(t, g.n())).unwrap();
            assert!(is_symmetric_nonincreasing(&k, 1e-10), "t = {t}");
            let mass = k.values().iter().sum::<f64>() / g.n() as f64;
            assert!((mass - 1.0).abs() < 1e-10, "mass at t = {t}: {mass}");
            assert!(k.values().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn semigroup_composition() {
        let g = grid(64);
        let mut rng = crate::test_rng(5);
        let f = crate::random_function(&mut rng, g, 1.0);
        let a = heat_apply(0.03, &heat_apply(0.07, &f).unwrap()).unwrap();
        let b = heat_apply(0.1, &f).unwrap();
        assert!(a.sub(&b).norm_l2() <= 1e-12 * (1.0 + f.norm_l2()));
    }

    #[test]
    fn contraction_and_mean_preservation() {
        let g = grid(64);
        let mut rng = crate::test_rng(6);
        for _ in 0..20 {
            let f = crate::random_function(&mut rng, g, 1.0);
            let h = heat_apply(0.05, &f).unwrap();
            assert!(h.norm_l2() <= f.norm_l2() + 1e-12);
            let mf = f.values().iter().sum::<f64>() / g.n() as f64;
            let mh = h.values().iter().sum::<f64>() / g.n() as f64;
            assert!((mf - mh).abs() < 1e-13 * (1.0 + mf.abs()));
        }
    }

    #[test]
    fn heat_preserves_monotone_states() {
        let g = grid(64);
        let start = rearrange(&CircleFunction::from_fn(g, |x| (-8.0 * x * x).exp()));
        let h = heat_apply(0.02, &start).unwrap();
        assert!(is_symmetric_nonincreasing(&h, 1e-8));
    }

    #[test]
    fn dirichlet_integral_single_modes() {
        let mut u = FourierCoeffs::zeros(4);
        u.cos[0] = 5.0;
        assert_eq!(dirichlet_energy_integral(&u, 0.3).unwrap(), 0.0);

        let mut u = FourierCoeffs::zeros(4);
        u.cos[1] = 1.0;
        let h = 0.07;
        let expect = 0.5 * (1.0 - (-8.0 * PI * PI * h).exp());
        assert!((dirichlet_energy_integral(&u, h).unwrap() - expect).abs() < 1e-15);
        // Large-horizon limit: one half per unit coefficient.
        assert!((dirichlet_energy_integral(&u, 50.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(dirichlet_energy_integral(&u, 0.0).is_err());
    }

    #[test]
    fn dirichlet_integral_matches_quadrature_oracle() {
        // Simpson quadrature of |D e^{s Delta} e_1|_2^2 = 4 pi^2 e^{-8 pi^2 s}.
        let h = 0.05;
        let steps = 4000;
        let ds = h / steps as f64;
        let integrand = |s: f64| 4.0 * PI * PI * (-8.0 * PI * PI * s).exp();
        let mut acc = 0.0;
        for k in 0..steps {
            let a = k as f64 * ds;
            acc += ds / 6.0 * (integrand(a) + 4.0 * integrand(a + 0.5 * ds) + integrand(a + ds));
        }
        let mut u = FourierCoeffs::zeros(2);
        u.cos[1] = 1.0;
        let got = dirichlet_energy_integral(&u, h).unwrap();
        assert!((got - acc).abs() < 1e-10, "closed form {got} vs quadrature {acc}");
    }

    #[test]
    fn key_inequality_energy_drops_under_rearrangement() {
        let g = grid(64);
        let mut rng = crate::test_rng(21);
        for _ in 0..100 {
            let f = crate::random_function(&mut rng, g, 1.0);
            let fr = rearrange(&f);
            let cutoff = g.nyquist_cutoff();
            let before = to_modes(&f, cutoff).unwrap();
            let after = to_modes(&fr, cutoff).unwrap();
            for h in [1e-4, 1e-3, 1e-2, 1e-1] {
                let a = dirichlet_energy_integral(&after, h).unwrap();
                let b = dirichlet_energy_integral(&before, h).unwrap();
                assert!(
                    a <= b + 1e-10 + 10.0 / g.n() as f64,
                    "key inequality violated at h = {h}: {a} > {b}"
                );
            }
        }
    }
}
