//! The symmetric non-increasing rearrangement on the discrete circle, and
//! the splitting of each cosine mode into a difference of two symmetric
//! non-increasing functions.
//!
//! The discrete rearrangement sorts the value multiset descending and lays
//! it out along the symmetric order of the grid: largest value at `x = 0`,
//! then positions by increasing `|x|` with `+x` before `-x`, smallest value
//! at `x = 1/2`. Sorting preserves the multiset exactly, which makes the
//! discrete versions of the classical rearrangement inequalities exact
//! rather than approximate.

use std::f64::consts::PI;

use crate::grid::{CircleFunction, GridSpec, SQRT_2};

/// Storage indices ordered by `|x|` ascending, ties between `+x` and `-x`
/// broken as `+x` first. The first entry is `x = 0`, the last is `x = 1/2`.
pub fn symmetric_order(grid: GridSpec) -> Vec<usize> {
    let n = grid.n();
    let mut order = Vec::with_capacity(n);
    order.push(grid.index_of(0));
    for k in 1..n / 2 {
        order.push(grid.index_of(k as isize));
        order.push(grid.index_of(-(k as isize)));
    }
    order.push(grid.index_of(n as isize / 2));
    order
}

/// Symmetric non-increasing rearrangement: the unique grid function with
/// the same value multiset whose values are non-increasing along
/// [`symmetric_order`].
pub fn rearrange(f: &CircleFunction) -> CircleFunction {
    let grid = f.grid();
    let mut sorted = f.values().to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut values = vec![0.0; grid.n()];
    for (rank, &idx) in symmetric_order(grid).iter().enumerate() {
        values[idx] = sorted[rank];
    }
    CircleFunction::from_raw(grid, values)
}

/// True when `|f - rearrange(f)|_2 <= tol`.
pub fn is_symmetric_nonincreasing(f: &CircleFunction, tol: f64) -> bool {
    f.sub(&rearrange(f)).norm_l2() <= tol
}

/// `L^2` distance between `f` and its mirror image, reported alongside the
/// rearrangement when exact symmetry matters: the discrete rearrangement is
/// symmetric only up to the tie positions of each `(+x, -x)` pair.
pub fn mirror_defect(f: &CircleFunction) -> f64 {
    let grid = f.grid();
    let mirrored: Vec<f64> = (0..grid.n()).map(|i| f.values()[grid.mirror(i)]).collect();
    f.sub(&CircleFunction::from_raw(grid, mirrored)).norm_l2()
}

/// Splits the cosine mode `e_m` as `e_m = plus - minus` with both parts
/// symmetric non-increasing.
///
/// On `[0, 1/2]` the parts accumulate the falling and rising portions of
/// `e_m` separately: `plus(x) = e_m(0) - descent(x)` and
/// `minus(x) = -ascent(x)`, where `descent` and `ascent` integrate the
/// negative and positive parts of `De_m` from `0` to `x`. Both integrals
/// are evaluated in closed form piece by piece between the sign changes of
/// `De_m`, and the negative half follows by mirror symmetry.
pub fn split_mode(m: usize, grid: GridSpec) -> (CircleFunction, CircleFunction) {
    if m == 0 {
        return (
            CircleFunction::constant(grid, 1.0),
            CircleFunction::zero(grid),
        );
    }
    let n = grid.n();
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for i in 0..n {
        let x = grid.x(i).abs();
        let (descent, ascent) = cosine_variation(m, x);
        plus[i] = SQRT_2 - descent;
        minus[i] = -ascent;
    }
    (
        CircleFunction::from_raw(grid, plus),
        CircleFunction::from_raw(grid, minus),
    )
}

/// Cumulative descent and ascent of `e_m` over `[0, x]`, `x` in `[0, 1/2]`:
/// the integrals of the negative and positive parts of `De_m`. `e_m` falls
/// on `[k/m, k/m + 1/(2m)]` from `sqrt(2)` to `-sqrt(2)` and rises back on
/// the complementary half-period, so both accumulations have closed forms.
fn cosine_variation(m: usize, x: f64) -> (f64, f64) {
    debug_assert!((0.0..=0.5 + 1e-12).contains(&x));
    let theta = m as f64 * x;
    let k = theta.floor();
    let frac = theta - k;
    if frac <= 0.5 {
        // Falling half-period: e_m runs from sqrt(2) down to sqrt(2) cos(2 pi frac).
        let descent = SQRT_2 * (2.0 * k + 1.0 - (2.0 * PI * frac).cos());
        let ascent = 2.0 * SQRT_2 * k;
        (descent, ascent)
    } else {
        let descent = 2.0 * SQRT_2 * (k + 1.0);
        let ascent = SQRT_2 * (2.0 * k + 1.0 + (2.0 * PI * frac).cos());
        (descent, ascent)
    }
}
