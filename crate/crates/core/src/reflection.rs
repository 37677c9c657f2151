//! Reconstruction of the reflection process from the rearrangement
//! corrections of a scheme run, Riemann-Stieltjes integration against it,
//! and the orthogonality and energy diagnostics.
//!
//! The per-step correction `delta_eta_k = X_{k+1} - Z_{k+1}` pairs
//! non-negatively with every rearrangement fixed point (the discrete
//! Hardy-Littlewood inequality), has exactly zero mean, and accumulates to
//! the reflection path. The companion process gives an independent route to
//! the same pairings through `Y = X - V`, used as a cross-check.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{to_modes, CircleFunction, GridSpec};
use crate::heat::{dirichlet_energy_integral, heat_apply};
use crate::noise::{noise_dirichlet_energy, NoiseSpec};
use crate::rearrange::split_mode;
use crate::scheme::Trajectory;
use crate::stats::mean_se;

/// Default number of low modes whose split pairings are tracked; each term
/// of the mode expansion decays polynomially in the mode index.
pub const DEFAULT_PAIR_CUTOFF: usize = 16;

/// Cumulative reflection data extracted from one trajectory.
#[derive(Debug, Clone)]
pub struct ReflectionPath {
    grid: GridSpec,
    times: Vec<f64>,
    increments: Vec<CircleFunction>,
    /// Exact cumulative mean pairing; identically zero by construction.
    mean_series: Vec<f64>,
    pair_cutoff: usize,
    /// `plus[m][k]`: cumulative pairing of eta at `times[k]` with the
    /// non-increasing part of mode `m`.
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
}

impl ReflectionPath {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Per-interval corrections, aligned with `times()[1..]`.
    pub fn increments(&self) -> &[CircleFunction] {
        &self.increments
    }

    /// Cumulative `<eta_t, e_0>`, computed as a difference of canonically
    /// ordered sums so that multiset preservation makes it exactly zero.
    pub fn mean_series(&self) -> &[f64] {
        &self.mean_series
    }

    pub fn pair_cutoff(&self) -> usize {
        self.pair_cutoff
    }

    /// Cumulative pairing series against `e_m^+`.
    pub fn plus_pairing(&self, m: usize) -> &[f64] {
        &self.plus[m]
    }

    /// Cumulative pairing series against `e_m^-`.
    pub fn minus_pairing(&self, m: usize) -> &[f64] {
        &self.minus[m]
    }

    /// Truncated `H^{-2}` norm of eta at each recorded time, from the
    /// tracked mode pairings.
    pub fn sobolev_minus_two(&self) -> Vec<f64> {
        (0..self.times.len())
            .map(|k| {
                let mut acc = 0.0;
                for m in 0..=self.pair_cutoff {
                    let pm = self.plus[m][k] - self.minus[m][k];
                    let w = (m.max(1) as f64).powi(-4);
                    acc += w * pm * pm;
                }
                acc.sqrt()
            })
            .collect()
    }
}

/// Builds the reflection path with the default pair cutoff.
pub fn eta_from_trajectory(traj: &Trajectory) -> Result<ReflectionPath> {
    eta_from_trajectory_with(traj, DEFAULT_PAIR_CUTOFF)
}

/// Builds the reflection path, tracking split-mode pairings up to `pair_cutoff`.
pub fn eta_from_trajectory_with(traj: &Trajectory, pair_cutoff: usize) -> Result<ReflectionPath> {
    if traj.pre_states().is_empty() {
        return Err(Error::config(
            "trajectory carries no pre-rearrangement states".to_string(),
        ));
    }
    let grid = traj.grid();
    let steps = traj.eta_increments().len();
    let splits: Vec<_> = (0..=pair_cutoff).map(|m| split_mode(m, grid)).collect();

    let mut mean_series = vec![0.0; steps + 1];
    let mut plus = vec![vec![0.0; steps + 1]; pair_cutoff + 1];
    let mut minus = vec![vec![0.0; steps + 1]; pair_cutoff + 1];
    for k in 0..steps {
        let inc = &traj.eta_increments()[k];
        let dmean =
            traj.states()[k + 1].canonical_mean() - traj.pre_states()[k].canonical_mean();
        mean_series[k + 1] = mean_series[k] + dmean;
        for (m, (ep, em)) in splits.iter().enumerate() {
            let dp = if m == 0 { dmean } else { inc.inner(ep) };
            let dm = if m == 0 { 0.0 } else { inc.inner(em) };
            plus[m][k + 1] = plus[m][k] + dp;
            minus[m][k + 1] = minus[m][k] + dm;
        }
    }
    Ok(ReflectionPath {
        grid,
        times: traj.times().to_vec(),
        increments: traj.eta_increments().to_vec(),
        mean_series,
        pair_cutoff,
        plus,
        minus,
    })
}

/// Cumulative pairing series `<eta_{t_k}, u>`; non-decreasing whenever `u`
/// is a rearrangement fixed point.
pub fn eta_pairing(path: &ReflectionPath, u: &CircleFunction) -> Vec<f64> {
    assert_eq!(u.grid(), path.grid, "pairing needs a shared grid");
    let mut out = Vec::with_capacity(path.times.len());
    out.push(0.0);
    let mut acc = 0.0;
    for inc in &path.increments {
        acc += inc.inner(u);
        out.push(acc);
    }
    out
}

/// Quadrature rule for the time integral in the companion-based pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    LeftEndpoint,
    Trapezoid,
}

/// Pairing series `<eta_t, e_m>` recovered from the companion process:
/// `<Y_t, e_m> + 4 pi^2 m^2 int_0^t <Y_r, e_m> dr` with `Y = X - V`.
pub fn eta_pairing_via_companion(traj: &Trajectory, m: usize, rule: Quadrature) -> Vec<f64> {
    let e_m = CircleFunction::cosine_mode(traj.grid(), m);
    let y_modes: Vec<f64> = traj
        .states()
        .iter()
        .zip(traj.companion())
        .map(|(x, v)| x.sub(v).inner(&e_m))
        .collect();
    let rate = 4.0 * PI * PI * (m * m) as f64;
    let mut out = Vec::with_capacity(y_modes.len());
    let mut integral = 0.0;
    out.push(0.0);
    for k in 1..y_modes.len() {
        let dt = traj.times()[k] - traj.times()[k - 1];
        integral += match rule {
            Quadrature::LeftEndpoint => dt * y_modes[k - 1],
            Quadrature::Trapezoid => 0.5 * dt * (y_modes[k - 1] + y_modes[k]),
        };
        out.push(y_modes[k] + rate * integral);
    }
    out
}

/// Value of the Stieltjes integral in its two algebraic forms.
#[derive(Debug, Clone, Copy)]
pub struct StieltjesIntegral {
    /// Left-endpoint Riemann sum of the symmetric content:
    /// `sum_k <sym(e^{eps Delta} z_{t_k}), delta_eta_k>`.
    pub riemann: f64,
    /// Mode-split form truncated at the requested cutoff.
    pub mode_split: f64,
    /// Magnitude reference for agreement and sign tolerances.
    pub scale: f64,
}

/// Integrates `z` against the reflection path: the left-endpoint Riemann
/// sum of `e^{eps Delta} z` (its symmetric part, matching the symmetric
/// test-function setting of the limiting dynamics) against the corrections,
/// together with the split-mode expansion truncated at `mode_cutoff`.
///
/// For `z` everywhere equal to its rearrangement the result is nonnegative
/// up to float rounding; the two forms agree whenever `eps` damps the modes
/// beyond the cutoff.
pub fn stieltjes_integral(
    z: &[CircleFunction],
    path: &ReflectionPath,
    eps: f64,
    mode_cutoff: usize,
) -> Result<StieltjesIntegral> {
    if z.len() != path.times.len() {
        return Err(Error::config(format!(
            "integrand has {} samples but the path records {} times",
            z.len(),
            path.times.len()
        )));
    }
    if !(eps >= 0.0) {
        return Err(Error::config(format!("epsilon must be >= 0, got {eps}")));
    }
    let mode_cutoff = mode_cutoff.min(path.pair_cutoff);
    let mut riemann = 0.0;
    let mut mode_split = 0.0;
    let mut sup_z: f64 = 0.0;
    let mut total_inc = 0.0;
    for (k, inc) in path.increments.iter().enumerate() {
        let damped = heat_apply(eps, &z[k])?;
        let u = symmetrise(&damped);
        riemann += u.inner(inc);
        let coeffs = to_modes(&u, mode_cutoff)?;
        for m in 0..=mode_cutoff {
            let d_plus = path.plus[m][k + 1] - path.plus[m][k];
            let d_minus = path.minus[m][k + 1] - path.minus[m][k];
            mode_split += coeffs.cos[m] * (d_plus - d_minus);
        }
        sup_z = sup_z.max(z[k].norm_l2());
        total_inc += inc.norm_l2();
    }
    Ok(StieltjesIntegral {
        riemann,
        mode_split,
        scale: 1.0 + sup_z * total_inc,
    })
}

/// Pair-averaged (symmetric) part of a grid function.
pub fn symmetrise(f: &CircleFunction) -> CircleFunction {
    let grid = f.grid();
    let values = (0..grid.n())
        .map(|i| 0.5 * (f.values()[i] + f.values()[grid.mirror(i)]))
        .collect();
    CircleFunction::from_raw(grid, values)
}

/// Left- and right-endpoint orthogonality sums
/// `sum_k <e^{eps Delta} X_{t_k or t_{k+1}}, delta_eta_k>`.
///
/// At `eps = 0` the right endpoint satisfies the exact identity
/// `sum_k <X_{k+1}, delta_eta_k> = 1/2 sum_k |delta_eta_k|^2`.
pub fn orthogonality_defect(traj: &Trajectory, eps: f64) -> Result<(f64, f64)> {
    require_full_recording(traj)?;
    let mut left = 0.0;
    let mut right = 0.0;
    for (k, inc) in traj.eta_increments().iter().enumerate() {
        left += heat_apply(eps, &traj.states()[k])?.inner(inc);
        right += heat_apply(eps, &traj.states()[k + 1])?.inner(inc);
    }
    Ok((left, right))
}

/// Half the summed squared correction norms; the right-endpoint defect at
/// `eps = 0` in closed form.
pub fn half_squared_corrections(traj: &Trajectory) -> f64 {
    traj.eta_increments()
        .iter()
        .map(|inc| 0.5 * inc.norm_l2().powi(2))
        .sum()
}

fn require_full_recording(traj: &Trajectory) -> Result<()> {
    let h = traj.step_length();
    let dt = traj.times().get(1).copied().unwrap_or(h) - traj.times()[0];
    if (dt - h).abs() > 1e-12 * h.max(1.0) {
        return Err(Error::config(
            "per-step reflection analysis requires record_every = 1".to_string(),
        ));
    }
    Ok(())
}

/// Terms and residual of the discrete energy balance over an ensemble.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyBalance {
    pub t: f64,
    pub epsilon: f64,
    pub paths: usize,
    pub mean_final_sq: f64,
    pub mean_initial_sq: f64,
    /// `2 E[sum_k int_0^h |D e^{(s+eps) Delta} X_k|^2 ds]` over the run.
    pub dirichlet_state: f64,
    /// Closed-form within-step noise Dirichlet energy, times two.
    pub dirichlet_noise: f64,
    /// `t` times the damped trace of `Q`.
    pub noise_input: f64,
    /// Twice the mean discrete reflection work on the smoothed energy; see
    /// [`PathEnergyTerms::work`]. Zero at `eps = 0`.
    pub reflection_work: f64,
    pub residual: f64,
    pub residual_se: f64,
    /// Worst relative deviation of `|X_{k+1}|^2` from `|Z_{k+1}|^2`.
    pub worst_norm_identity: f64,
}

/// State-dependent energy terms of one trajectory; the noise closed forms
/// join in at aggregation time.
#[derive(Debug, Clone, Copy)]
pub struct PathEnergyTerms {
    pub t: f64,
    pub h: f64,
    pub steps: usize,
    /// `|e^{eps Delta} X_T|^2`.
    pub final_sq: f64,
    pub initial_sq: f64,
    /// `sum_k int_0^h |D e^{(s+eps) Delta} X_k|^2 ds`.
    pub dirichlet_state: f64,
    /// Work performed by the reflection on the smoothed energy:
    /// `sum_k (<e^{2 eps Delta} X_{k+1}, delta_eta_k>
    ///         - 1/2 <e^{2 eps Delta} delta_eta_k, delta_eta_k>)`,
    /// the exact discrete counterpart of the integral against `d eta`. At
    /// `eps = 0` it vanishes identically because the rearrangement
    /// preserves the plain `L^2` norm.
    pub work: f64,
    pub worst_norm_identity: f64,
}

/// Per-trajectory energy terms at smoothing level `eps`.
pub fn path_energy_terms(traj: &Trajectory, eps: f64) -> Result<PathEnergyTerms> {
    require_full_recording(traj)?;
    let h = traj.step_length();
    let steps = traj.eta_increments().len();
    let cutoff = traj.grid().nyquist_cutoff();
    let damp2 = |m: usize| (-8.0 * PI * PI * (m * m) as f64 * eps).exp();

    let final_sq = heat_apply(eps, traj.final_state())?.norm_l2().powi(2);
    let initial_sq = heat_apply(eps, &traj.states()[0])?.norm_l2().powi(2);
    let mut dirichlet_state = 0.0;
    let mut worst_identity: f64 = 0.0;
    let nyq = traj.grid().n() / 2;
    for k in 0..steps {
        let mut modes = to_modes(&traj.states()[k], cutoff)?;
        for m in 0..=cutoff {
            let d = damp2(m).sqrt();
            modes.cos[m] *= d;
            if m >= 1 {
                modes.sin[m - 1] *= d;
            }
        }
        dirichlet_state += dirichlet_energy_integral(&modes, h)?;
        // The states carry content at every grid frequency; the Nyquist
        // mode dissipates like the rest and must be counted for the
        // balance to close.
        let q = crate::grid::nyquist_coefficient(&traj.states()[k]);
        let a = 8.0 * PI * PI * (nyq * nyq) as f64;
        dirichlet_state += 0.5 * damp2(nyq) * q * q * (1.0 - (-a * h).exp());

        let xn = traj.states()[k + 1].norm_l2().powi(2);
        let zn = traj.pre_states()[k].norm_l2().powi(2);
        worst_identity = worst_identity.max((xn - zn).abs() / (1.0 + xn));
    }
    let mut work = 0.0;
    for (k, inc) in traj.eta_increments().iter().enumerate() {
        let smoothed = heat_apply(2.0 * eps, &traj.states()[k + 1])?;
        let smoothed_inc = heat_apply(2.0 * eps, inc)?;
        work += smoothed.inner(inc) - 0.5 * smoothed_inc.inner(inc);
    }
    Ok(PathEnergyTerms {
        t: *traj.times().last().unwrap(),
        h,
        steps,
        final_sq,
        initial_sq,
        dirichlet_state,
        work,
        worst_norm_identity: worst_identity,
    })
}

/// Aggregates per-path terms into the ensemble balance. Pass `None` for
/// the noise when the ensemble was run with the increments forced to zero.
pub fn energy_balance_from_terms(
    terms: &[PathEnergyTerms],
    noise: Option<&NoiseSpec>,
    eps: f64,
) -> Result<EnergyBalance> {
    if terms.is_empty() {
        return Err(Error::config("energy balance needs at least one trajectory".to_string()));
    }
    let t = terms[0].t;
    let h = terms[0].h;
    let steps = terms[0].steps;
    if terms
        .iter()
        .any(|p| p.t != t || p.h != h || p.steps != steps)
    {
        return Err(Error::config(
            "energy balance requires a homogeneous ensemble".to_string(),
        ));
    }
    let damp2 = |m: usize| (-8.0 * PI * PI * (m * m) as f64 * eps).exp();
    let trace_eps: f64 = noise
        .map(|sp| {
            (0..=sp.cutoff())
                .map(|m| sp.amplitude(m).powi(2) * damp2(m))
                .sum()
        })
        .unwrap_or(0.0);
    let noise_dirichlet = noise
        .map(|sp| noise_dirichlet_energy(sp, h, eps))
        .unwrap_or(0.0);

    let residuals: Vec<f64> = terms
        .iter()
        .map(|p| {
            p.final_sq + 2.0 * (p.dirichlet_state + steps as f64 * noise_dirichlet)
                - p.initial_sq
                - t * trace_eps
                - 2.0 * p.work
        })
        .collect();
    let n = terms.len() as f64;
    let (residual, residual_se) = mean_se(&residuals);
    Ok(EnergyBalance {
        t,
        epsilon: eps,
        paths: terms.len(),
        mean_final_sq: terms.iter().map(|p| p.final_sq).sum::<f64>() / n,
        mean_initial_sq: terms.iter().map(|p| p.initial_sq).sum::<f64>() / n,
        dirichlet_state: terms.iter().map(|p| 2.0 * p.dirichlet_state).sum::<f64>() / n,
        dirichlet_noise: 2.0 * steps as f64 * noise_dirichlet,
        noise_input: t * trace_eps,
        reflection_work: terms.iter().map(|p| 2.0 * p.work).sum::<f64>() / n,
        residual,
        residual_se,
        worst_norm_identity: terms
            .iter()
            .map(|p| p.worst_norm_identity)
            .fold(0.0, f64::max),
    })
}

/// Discrete analogue of the smoothed energy identity over an ensemble of
/// trajectories sharing one configuration.
pub fn energy_balance(
    trajectories: &[Trajectory],
    noise: Option<&NoiseSpec>,
    eps: f64,
) -> Result<EnergyBalance> {
    let terms = trajectories
        .iter()
        .map(|traj| path_energy_terms(traj, eps))
        .collect::<Result<Vec<_>>>()?;
    energy_balance_from_terms(&terms, noise, eps)
}
