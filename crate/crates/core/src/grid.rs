//! Uniform discretisation of the circle parametrised by `(-1/2, 1/2]`,
//! together with the cosine/sine mode transforms, norms and the spectral
//! derivative used throughout the crate.
//!
//! The grid has an even number `n` of points `x_j = j/n` for
//! `j = -n/2+1, ..., 0, ..., n/2`, so that `0` and `1/2` lie on the grid and
//! are the only self-mirrored points. Quadrature is the uniform rule with
//! weight `1/n`, which is exact for band-limited periodic integrands and
//! makes the mode functions orthonormal on the grid.
//!
//! The mode conventions: `e_0 = 1`, `e_m(x) = sqrt(2) cos(2 pi m x)` and
//! `s_m(x) = sqrt(2) sin(2 pi m x)` for `m >= 1`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Discretisation parameters of the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct GridSpec {
    n: usize,
}

/// Builds the grid with `n` points; `n` must be even and in `[4, 2^20]`.
pub fn make_grid(n: usize) -> Result<GridSpec> {
    if n % 2 != 0 {
        return Err(Error::config(format!("grid.n must be even, got {n}")));
    }
    if !(4..=1 << 20).contains(&n) {
        return Err(Error::config(format!(
            "grid.n must lie in [4, 2^20], got {n}"
        )));
    }
    Ok(GridSpec { n })
}

impl GridSpec {
    /// Number of grid points.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Largest admissible mode cutoff, `n/2 - 1`.
    pub fn nyquist_cutoff(&self) -> usize {
        self.n / 2 - 1
    }

    /// Circle coordinate of storage index `i`, running from `-1/2 + 1/n`
    /// (index 0) to `1/2` (index `n - 1`).
    pub fn x(&self, i: usize) -> f64 {
        let j = i as isize - (self.n as isize / 2 - 1);
        j as f64 / self.n as f64
    }

    /// Storage index of the signed grid label `j in [-n/2+1, n/2]`.
    pub fn index_of(&self, j: isize) -> usize {
        (j + self.n as isize / 2 - 1) as usize
    }

    /// Storage index of the mirror point `-x`; `0` and `1/2` map to themselves.
    pub fn mirror(&self, i: usize) -> usize {
        let j = i as isize - (self.n as isize / 2 - 1);
        if j == self.n as isize / 2 {
            i
        } else {
            self.index_of(-j)
        }
    }

    /// All grid coordinates in storage order.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// Real-valued function sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction {
    grid: GridSpec,
    values: Vec<f64>,
}

impl CircleFunction {
    /// Wraps sampled values; every value must be finite.
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::config(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("non-finite sample value"));
        }
        Ok(CircleFunction { grid, values })
    }

    /// The zero function.
    pub fn zero(grid: GridSpec) -> Self {
        CircleFunction {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    /// The constant function `c`.
    pub fn constant(grid: GridSpec, c: f64) -> Self {
        CircleFunction {
            grid,
            values: vec![c; grid.n()],
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        CircleFunction {
            grid,
            values: (0..grid.n()).map(|i| f(grid.x(i))).collect(),
        }
    }

    /// The cosine mode `e_m` sampled on the grid (`e_0 = 1`).
    pub fn cosine_mode(grid: GridSpec, m: usize) -> Self {
        if m == 0 {
            Self::constant(grid, 1.0)
        } else {
            Self::from_fn(grid, |x| SQRT_2 * (2.0 * PI * m as f64 * x).cos())
        }
    }

    /// The sine mode `s_m` sampled on the grid.
    pub fn sine_mode(grid: GridSpec, m: usize) -> Self {
        Self::from_fn(grid, |x| SQRT_2 * (2.0 * PI * m as f64 * x).sin())
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }


    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        CircleFunction { grid, values }
    }

    /// `L^2` inner product `(1/n) sum f_j g_j`.
    pub fn inner(&self, other: &CircleFunction) -> f64 {
        assert_eq!(self.grid, other.grid, "inner product needs a shared grid");
        let n = self.grid.n() as f64;
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n
    }

    /// `L^2` norm.
    pub fn norm_l2(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// Mean of the samples, summed over the values sorted descending.
    ///
    /// The canonical summation order makes the mean a function of the value
    /// multiset alone, so any two functions sharing a multiset report the
    /// same float.
    pub fn canonical_mean(&self) -> f64 {
        let mut sorted = self.values.clone();
        sorted.sort_unstable_by(|a, b| b.total_cmp(a));
        sorted.iter().sum::<f64>() / self.grid.n() as f64
    }

    pub fn add(&self, other: &CircleFunction) -> CircleFunction {
        assert_eq!(self.grid, other.grid);
        CircleFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CircleFunction) -> CircleFunction {
        assert_eq!(self.grid, other.grid);
        CircleFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> CircleFunction {
        CircleFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// Cosine (and sine) mode amplitudes up to a cutoff `M <= n/2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    /// `cos[m]` holds the coefficient of `e_m` for `m = 0..=cutoff`.
    pub cos: Vec<f64>,
    /// `sin[m - 1]` holds the coefficient of `s_m` for `m = 1..=cutoff`.
    pub sin: Vec<f64>,
}

impl FourierCoeffs {
    pub fn zeros(cutoff: usize) -> Self {
        FourierCoeffs {
            cos: vec![0.0; cutoff + 1],
            sin: vec![0.0; cutoff],
        }
    }

    /// Symmetric coefficients (zero sine part) from cosine amplitudes.
    pub fn symmetric(cos: Vec<f64>) -> Self {
        let cutoff = cos.len() - 1;
        FourierCoeffs {
            cos,
            sin: vec![0.0; cutoff],
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cos.len() - 1
    }

    /// True when every sine coefficient vanishes.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.sin.iter().all(|s| s.abs() <= tol)
    }
}

/// Mode analysis: `cos[m] = (1/n) sum_j f(x_j) e_m(x_j)` and likewise with
/// the sine modes. Exactly symmetric inputs produce exactly zero sine
/// coefficients.
pub fn to_modes(f: &CircleFunction, cutoff: usize) -> Result<FourierCoeffs> {
    let grid = f.grid();
    if cutoff > grid.nyquist_cutoff() {
        return Err(Error::config(format!(
            "modes.cutoff {} exceeds n/2 - 1 = {}",
            cutoff,
            grid.nyquist_cutoff()
        )));
    }
    let n = grid.n();
    let mut cos = vec![0.0; cutoff + 1];
    let mut sin = vec![0.0; cutoff];
    cos[0] = f.values().iter().sum::<f64>() / n as f64;
    for m in 1..=cutoff {
        let mut ac = 0.0;
        let mut asin = 0.0;
        // Pairing mirror points keeps the sine sum exactly zero for
        // exactly symmetric samples; the self-mirrored points 0 and 1/2
        // carry no sine content at all.
        for i in 0..n {
            let mir = grid.mirror(i);
            if mir < i {
                continue;
            }
            let x = grid.x(i);
            let phase = 2.0 * PI * m as f64 * x;
            let c = SQRT_2 * phase.cos();
            if mir == i {
                ac += f.values()[i] * c;
            } else {
                let s = SQRT_2 * phase.sin();
                ac += (f.values()[i] + f.values()[mir]) * c;
                asin += (f.values()[i] - f.values()[mir]) * s;
            }
        }
        cos[m] = ac / n as f64;
        sin[m - 1] = asin / n as f64;
    }
    Ok(FourierCoeffs { cos, sin })
}

/// Pointwise synthesis `sum_m cos[m] e_m + sum_m sin[m-1] s_m`.
pub fn from_modes(c: &FourierCoeffs, grid: GridSpec) -> Result<CircleFunction> {
    if c.cutoff() > grid.nyquist_cutoff() {
        return Err(Error::config(format!(
            "modes.cutoff {} exceeds n/2 - 1 = {}",
            c.cutoff(),
            grid.nyquist_cutoff()
        )));
    }
    let mut values = vec![c.cos[0]; grid.n()];
    for (i, v) in values.iter_mut().enumerate() {
        let x = grid.x(i);
        for m in 1..=c.cutoff() {
            let phase = 2.0 * PI * m as f64 * x;
            *v += c.cos[m] * SQRT_2 * phase.cos();
            if c.sin[m - 1] != 0.0 {
                *v += c.sin[m - 1] * SQRT_2 * phase.sin();
            }
        }
    }
    CircleFunction::new(grid, values)
}

/// `L^p` norm `((1/n) sum |f_j|^p)^(1/p)`; `p = inf` gives `max |f_j|`.
pub fn lp_norm(f: &CircleFunction, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::config(format!("p must lie in [1, inf], got {p}")));
    }
    let n = f.grid().n() as f64;
    if p.is_infinite() {
        return Ok(f.values().iter().fold(0.0, |acc, v| acc.max(v.abs())));
    }
    if p == 1.0 {
        return Ok(f.values().iter().map(|v| v.abs()).sum::<f64>() / n);
    }
    if p == 2.0 {
        return Ok((f.values().iter().map(|v| v * v).sum::<f64>() / n).sqrt());
    }
    Ok((f.values().iter().map(|v| v.abs().powf(p)).sum::<f64>() / n).powf(1.0 / p))
}

/// Sobolev norm `(sum_m (m v 1)^(2 mu) (cos_m^2 + sin_m^2))^(1/2)` truncated
/// at the cutoff.
pub fn sobolev_norm(c: &FourierCoeffs, mu: f64) -> f64 {
    let mut acc = c.cos[0] * c.cos[0];
    for m in 1..=c.cutoff() {
        let w = (m as f64).powf(2.0 * mu);
        acc += w * c.cos[m] * c.cos[m];
        acc += w * c.sin[m - 1] * c.sin[m - 1];
    }
    acc.sqrt()
}

// Full-spectrum operations. A grid function carries modes up to the Nyquist
// index n/2; the scheme states have content at every frequency because the
// rearrangement scatters energy, so the semigroup must act on the whole
// spectrum to be exact.

struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn fft_pair(n: usize) -> Arc<FftPair> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<FftPair>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(FftPair {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Full-spectrum frequency representation of a grid function, in FFT bin
/// order. Used by the heat semigroup and the spectral derivative.
pub(crate) fn fft_forward(f: &CircleFunction) -> Vec<Complex64> {
    let n = f.grid().n();
    let pair = fft_pair(n);
    let mut buf: Vec<Complex64> = f
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    pair.forward.process(&mut buf);
    buf
}

pub(crate) fn fft_inverse_real(grid: GridSpec, mut buf: Vec<Complex64>) -> CircleFunction {
    let n = grid.n();
    let pair = fft_pair(n);
    pair.inverse.process(&mut buf);
    let scale = 1.0 / n as f64;
    CircleFunction::from_raw(grid, buf.iter().map(|z| z.re * scale).collect())
}

/// Frequency index of FFT bin `k` on an `n`-point grid.
pub(crate) fn bin_frequency(k: usize, n: usize) -> usize {
    k.min(n - k)
}

/// Applies a real multiplier `factor(m)` per frequency `m` to the full
/// spectrum of `f`.
pub(crate) fn apply_mode_factors(f: &CircleFunction, factor: impl Fn(usize) -> f64) -> CircleFunction {
    let n = f.grid().n();
    let mut buf = fft_forward(f);
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= factor(bin_frequency(k, n));
    }
    fft_inverse_real(f.grid(), buf)
}

/// Coefficient of the orthonormal Nyquist mode `cos(pi n x)`, the one grid
/// frequency beyond the transform cutoff. The energy balance needs it: the
/// semigroup damps it like any other mode.
pub(crate) fn nyquist_coefficient(f: &CircleFunction) -> f64 {
    let grid = f.grid();
    let n = grid.n();
    let mut acc = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        let j = i as isize - (n as isize / 2 - 1);
        acc += if j & 1 == 0 { *v } else { -*v };
    }
    acc / n as f64
}

/// Spectral derivative; exact for band-limited inputs (the Nyquist mode is
/// mapped to zero, the usual convention for even grids).
pub fn derivative(f: &CircleFunction) -> CircleFunction {
    let n = f.grid().n();
    let mut buf = fft_forward(f);
    for (k, z) in buf.iter_mut().enumerate() {
        if k == 0 || k == n / 2 {
            *z = Complex64::new(0.0, 0.0);
        } else {
            let freq = if k < n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            *z *= Complex64::new(0.0, 2.0 * PI * freq);
        }
    }
    fft_inverse_real(f.grid(), buf)
}
