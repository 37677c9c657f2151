//! The splitting scheme `X_{n+1} = (e^{h Delta} X_n + xi_{n+1})^*`, its
//! linear interpolation, the companion linear process `V` advanced on the
//! same noise, and coupled runs from two initial conditions.
//!
//! `V` is always co-simulated: the reflection reconstruction works through
//! `Y = X - V`, which needs both on identical increments.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    bin_frequency, fft_forward, fft_inverse_real, from_modes, CircleFunction, GridSpec, SQRT_2,
};
use crate::heat::{decay, heat_apply};
use crate::noise::{conv_increment, ConvIncrement, NoiseSpec, StreamKey};
use crate::rearrange::{is_symmetric_nonincreasing, rearrange};

/// Parameters of one scheme run.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SchemeConfig {
    pub grid: GridSpec,
    pub noise: NoiseSpec,
    pub h: f64,
    pub t_horizon: f64,
    pub record_every: usize,
}

impl SchemeConfig {
    pub fn new(grid: GridSpec, noise: NoiseSpec, h: f64, t_horizon: f64) -> Result<Self> {
        let cfg = SchemeConfig {
            grid,
            noise,
            h,
            t_horizon,
            record_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_record_every(mut self, record_every: usize) -> Self {
        self.record_every = record_every.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h < 1.0) {
            return Err(Error::config(format!(
                "scheme.h must lie in (0, 1), got {}",
                self.h
            )));
        }
        if !(self.t_horizon > 0.0) {
            return Err(Error::config(format!(
                "scheme.T must be > 0, got {}",
                self.t_horizon
            )));
        }
        let ratio = self.t_horizon / self.h;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::config(format!(
                "scheme.T must be an integer multiple of scheme.h (T/h = {ratio})"
            )));
        }
        if self.noise.cutoff() > self.grid.nyquist_cutoff() {
            return Err(Error::config(format!(
                "modes.cutoff {} exceeds n/2 - 1 = {}",
                self.noise.cutoff(),
                self.grid.nyquist_cutoff()
            )));
        }
        Ok(())
    }

    /// Number of steps `T/h`.
    pub fn steps(&self) -> usize {
        (self.t_horizon / self.h).round() as usize
    }
}

/// Recorded output of one scheme run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: GridSpec,
    h: f64,
    times: Vec<f64>,
    states: Vec<CircleFunction>,
    companion: Vec<CircleFunction>,
    pre_states: Vec<CircleFunction>,
    eta_increments: Vec<CircleFunction>,
}

impl Trajectory {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn step_length(&self) -> f64 {
        self.h
    }

    /// Recorded times, starting at `0`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Scheme states `X` at the recorded times; every entry is a
    /// rearrangement fixed point by construction.
    pub fn states(&self) -> &[CircleFunction] {
        &self.states
    }

    /// The linear process `V` on the same noise.
    pub fn companion(&self) -> &[CircleFunction] {
        &self.companion
    }

    /// Pre-rearrangement states: `pre_states()[i]` is `Z` at `times()[i+1]`.
    pub fn pre_states(&self) -> &[CircleFunction] {
        &self.pre_states
    }

    /// Rearrangement corrections summed over each recording interval:
    /// `eta_increments()[i]` covers `(times()[i], times()[i+1]]`.
    pub fn eta_increments(&self) -> &[CircleFunction] {
        &self.eta_increments
    }

    pub fn final_state(&self) -> &CircleFunction {
        self.states.last().expect("trajectory has at least X_0")
    }
}

/// One scheme step: `z = e^{h Delta} x + xi` synthesised on the grid, and
/// `x_next = z^*`. Returns `(x_next, z)`.
pub fn step(
    x: &CircleFunction,
    cfg: &SchemeConfig,
    xi: &ConvIncrement,
) -> Result<(CircleFunction, CircleFunction)> {
    if xi.h() != cfg.h {
        return Err(Error::config(format!(
            "increment step {} does not match scheme.h {}",
            xi.h(),
            cfg.h
        )));
    }
    if x.grid() != cfg.grid {
        return Err(Error::config("state grid does not match scheme grid".to_string()));
    }
    let z = heat_apply(cfg.h, x)?.add(&from_modes(&xi.as_coeffs(), cfg.grid)?);
    let x_next = rearrange(&z);
    Ok((x_next, z))
}

/// Spectral stepper reused across a whole run: damping factors and the
/// cosine-to-bin injection phases are precomputed once.
pub(crate) struct Stepper {
    grid: GridSpec,
    damp: Vec<f64>,
    /// `phases[m - 1]` maps the coefficient of `e_m` to FFT bin `m`
    /// (conjugate for bin `n - m`).
    phases: Vec<Complex64>,
    cutoff: usize,
}

impl Stepper {
    pub(crate) fn new(grid: GridSpec, h: f64, cutoff: usize) -> Stepper {
        let n = grid.n();
        let damp = (0..n).map(|k| decay(bin_frequency(k, n), h)).collect();
        let z_shift = n as f64 / 2.0 - 1.0;
        let phases = (1..=cutoff)
            .map(|m| {
                let angle = -2.0 * std::f64::consts::PI * m as f64 * z_shift / n as f64;
                Complex64::from_polar(SQRT_2 / 2.0 * n as f64, angle)
            })
            .collect();
        Stepper {
            grid,
            damp,
            phases,
            cutoff,
        }
    }

    /// `e^{h Delta} state + xi` in one spectral round trip.
    pub(crate) fn heat_plus_noise(&self, state: &CircleFunction, xi: &ConvIncrement) -> CircleFunction {
        let n = self.grid.n();
        let mut buf = fft_forward(state);
        for (k, z) in buf.iter_mut().enumerate() {
            *z *= self.damp[k];
        }
        let modes = xi.modes();
        debug_assert_eq!(modes.len() - 1, self.cutoff);
        buf[0] += modes[0] * n as f64;
        for m in 1..=self.cutoff {
            let inj = self.phases[m - 1] * modes[m];
            buf[m] += inj;
            buf[n - m] += inj.conj();
        }
        fft_inverse_real(self.grid, buf)
    }
}

fn check_initial(cfg: &SchemeConfig, x0: &CircleFunction) -> Result<()> {
    if x0.grid() != cfg.grid {
        return Err(Error::config(
            "initial condition grid does not match scheme grid".to_string(),
        ));
    }
    if !is_symmetric_nonincreasing(x0, 1e-9) {
        return Err(Error::config(
            "initial condition must be symmetric non-increasing (tolerance 1e-9)".to_string(),
        ));
    }
    Ok(())
}

/// Runs the scheme with increments drawn from the config's noise streams,
/// keyed by `(trajectory_index, step)`.
pub fn simulate(cfg: &SchemeConfig, x0: &CircleFunction, trajectory_index: u64) -> Result<Trajectory> {
    let noise = cfg.noise;
    let h = cfg.h;
    simulate_with(cfg, x0, |step| {
        let mut rng = noise.stream(StreamKey {
            trajectory: trajectory_index,
            step,
        });
        conv_increment(&noise, h, &mut rng).expect("step length is validated")
    })
}

/// Runs the scheme with caller-supplied increments (zero-noise runs,
/// aggregated refinement levels, shared-noise couplings).
pub fn simulate_with(
    cfg: &SchemeConfig,
    x0: &CircleFunction,
    mut source: impl FnMut(u64) -> ConvIncrement,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_initial(cfg, x0)?;
    let steps = cfg.steps();
    let stepper = Stepper::new(cfg.grid, cfg.h, cfg.noise.cutoff());

    let recorded = steps / cfg.record_every + 1;
    let mut traj = Trajectory {
        grid: cfg.grid,
        h: cfg.h,
        times: Vec::with_capacity(recorded),
        states: Vec::with_capacity(recorded),
        companion: Vec::with_capacity(recorded),
        pre_states: Vec::with_capacity(recorded),
        eta_increments: Vec::with_capacity(recorded),
    };
    traj.times.push(0.0);
    traj.states.push(x0.clone());
    traj.companion.push(x0.clone());

    let mut x = x0.clone();
    let mut v = x0.clone();
    let mut eta_acc = CircleFunction::zero(cfg.grid);
    for k in 0..steps {
        let xi = source(k as u64);
        assert_eq!(xi.h(), cfg.h, "increment step must equal scheme.h");
        let z = stepper.heat_plus_noise(&x, &xi);
        x = rearrange(&z);
        v = stepper.heat_plus_noise(&v, &xi);
        eta_acc = eta_acc.add(&x.sub(&z));
        if (k + 1) % cfg.record_every == 0 || k + 1 == steps {
            traj.times.push((k + 1) as f64 * cfg.h);
            traj.states.push(x.clone());
            traj.companion.push(v.clone());
            traj.pre_states.push(z);
            traj.eta_increments.push(eta_acc);
            eta_acc = CircleFunction::zero(cfg.grid);
        }
    }
    Ok(traj)
}

/// Runs two initial conditions on an identical increment sequence. The
/// distance `|X^a_k - X^b_k|_2` is non-increasing step by step.
pub fn coupled_simulate(
    cfg: &SchemeConfig,
    x0a: &CircleFunction,
    x0b: &CircleFunction,
    trajectory_index: u64,
) -> Result<(Trajectory, Trajectory)> {
    let steps = cfg.steps();
    let noise = cfg.noise;
    let h = cfg.h;
    let mut increments = Vec::with_capacity(steps);
    for k in 0..steps {
        let mut rng = noise.stream(StreamKey {
            trajectory: trajectory_index,
            step: k as u64,
        });
        increments.push(conv_increment(&noise, h, &mut rng)?);
    }
    let ta = simulate_with(cfg, x0a, |k| increments[k as usize].clone())?;
    let tb = simulate_with(cfg, x0b, |k| increments[k as usize].clone())?;
    Ok((ta, tb))
}

/// Linear interpolation between the recorded states bracketing `t`.
pub fn interpolate(traj: &Trajectory, t: f64) -> Result<CircleFunction> {
    let times = traj.times();
    let t_max = *times.last().expect("non-empty trajectory");
    if !(0.0..=t_max + 1e-12).contains(&t) {
        return Err(Error::config(format!(
            "interpolation time {t} outside recorded range [0, {t_max}]"
        )));
    }
    let t = t.min(t_max);
    let hi = times.partition_point(|&s| s < t);
    if hi == 0 {
        return Ok(traj.states()[0].clone());
    }
    if (times[hi] - t).abs() <= f64::EPSILON * t_max {
        return Ok(traj.states()[hi].clone());
    }
    let lo = hi - 1;
    let theta = (t - times[lo]) / (times[hi] - times[lo]);
    Ok(traj.states()[lo]
        .scale(1.0 - theta)
        .add(&traj.states()[hi].scale(theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, to_modes};
    use crate::noise::trace_constant;

    fn config(n: usize, lambda: f64, h: f64, t: f64, seed: u64) -> SchemeConfig {
        let grid = make_grid(n).unwrap();
        let noise = NoiseSpec::new(lambda, grid.nyquist_cutoff(), seed).unwrap();
        SchemeConfig::new(grid, noise, h, t).unwrap()
    }

    fn monotone_profile(grid: GridSpec) -> CircleFunction {
        rearrange(&CircleFunction::from_fn(grid, |x| (-6.0 * x * x).exp()))
    }

    #[test]
    fn config_validation() {
        let grid = make_grid(64).unwrap();
        let noise = NoiseSpec::new(0.75, 31, 0).unwrap();
        assert!(SchemeConfig::new(grid, noise, 1.5, 1.0).is_err());
        assert!(SchemeConfig::new(grid, noise, 1e-3, 0.5005).is_err());
        assert!(SchemeConfig::new(grid, noise, 1e-3, 0.5).is_ok());
        let wide = NoiseSpec::new(0.75, 40, 0).unwrap();
        assert!(SchemeConfig::new(grid, wide, 1e-3, 0.5).is_err());
    }

    #[test]
    fn step_with_zero_noise_fixes_constants() {
        let cfg = config(32, 0.75, 0.01, 0.1, 1);
        let x = CircleFunction::constant(cfg.grid, 2.0);
        let xi = ConvIncrement::zero(&cfg.noise, cfg.h);
        let (next, z) = step(&x, &cfg, &xi).unwrap();
        assert!(next.sub(&x).norm_l2() < 1e-13);
        assert!(z.sub(&x).norm_l2() < 1e-13);
    }

    #[test]
    fn step_with_zero_noise_is_heat_flow_on_monotone_states() {
        let cfg = config(64, 0.75, 0.01, 0.1, 1);
        let x = monotone_profile(cfg.grid);
        let xi = ConvIncrement::zero(&cfg.noise, cfg.h);
        let (next, _) = step(&x, &cfg, &xi).unwrap();
        let expect = heat_apply(cfg.h, &x).unwrap();
        assert!(next.sub(&expect).norm_l2() < 1e-8);
    }

    #[test]
    fn step_preserves_the_value_multiset_exactly() {
        let cfg = config(64, 0.75, 1e-3, 0.1, 7);
        let mut rng = cfg.noise.stream(StreamKey {
            trajectory: 9,
            step: 0,
        });
        let x = monotone_profile(cfg.grid);
        let xi = conv_increment(&cfg.noise, cfg.h, &mut rng).unwrap();
        let (next, z) = step(&x, &cfg, &xi).unwrap();
        let mut a = next.values().to_vec();
        let mut b = z.values().to_vec();
        a.sort_unstable_by(f64::total_cmp);
        b.sort_unstable_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn stepper_matches_the_contract_step() {
        let cfg = config(64, 0.75, 1e-3, 0.1, 3);
        let stepper = Stepper::new(cfg.grid, cfg.h, cfg.noise.cutoff());
        let x = monotone_profile(cfg.grid);
        for s in 0..5u64 {
            let mut rng = cfg.noise.stream(StreamKey {
                trajectory: 1,
                step: s,
            });
            let xi = conv_increment(&cfg.noise, cfg.h, &mut rng).unwrap();
            let fast = stepper.heat_plus_noise(&x, &xi);
            let slow = heat_apply(cfg.h, &x)
                .unwrap()
                .add(&from_modes(&xi.as_coeffs(), cfg.grid).unwrap());
            let err = fast.sub(&slow).norm_l2();
            assert!(err < 1e-12, "spectral stepper deviates by {err}");
        }
    }

    #[test]
    fn zero_noise_run_reproduces_heat_flow() {
        let cfg = config(64, 0.75, 1e-2, 0.2, 0);
        let x0 = monotone_profile(cfg.grid);
        let traj = simulate_with(&cfg, &x0, |_| ConvIncrement::zero(&cfg.noise, cfg.h)).unwrap();
        for (i, t) in traj.times().iter().enumerate() {
            let expect = heat_apply(*t, &x0).unwrap();
            let err = traj.states()[i].sub(&expect).norm_l2();
            assert!(err < 1e-10, "t = {t}: deviation {err}");
        }
    }

    #[test]
    fn one_step_from_zero_is_the_rearranged_increment() {
        let cfg = config(64, 0.75, 1e-2, 1e-2, 5);
        let x0 = CircleFunction::zero(cfg.grid);
        let traj = simulate(&cfg, &x0, 0).unwrap();
        let mut rng = cfg.noise.stream(StreamKey {
            trajectory: 0,
            step: 0,
        });
        let xi = conv_increment(&cfg.noise, cfg.h, &mut rng).unwrap();
        let expect = rearrange(&from_modes(&xi.as_coeffs(), cfg.grid).unwrap());
        assert!(traj.final_state().sub(&expect).norm_l2() < 1e-12);
    }

    #[test]
    fn non_monotone_initial_condition_rejected() {
        let cfg = config(64, 0.75, 1e-2, 0.1, 0);
        let bad = CircleFunction::cosine_mode(cfg.grid, 2);
        assert!(simulate(&cfg, &bad, 0).is_err());
    }

    #[test]
    fn recorded_states_are_rearrangement_fixed_points_with_shared_mean() {
        let cfg = config(64, 0.75, 1e-3, 0.05, 11);
        let x0 = monotone_profile(cfg.grid);
        let traj = simulate(&cfg, &x0, 4).unwrap();
        for (x, v) in traj.states().iter().zip(traj.companion()) {
            assert_eq!(
                rearrange(x).values(),
                x.values(),
                "recorded states must be fixed points"
            );
            let mx = to_modes(x, 0).unwrap().cos[0];
            let mv = to_modes(v, 0).unwrap().cos[0];
            assert!(
                (mx - mv).abs() <= 1e-12 * (1.0 + mx.abs()),
                "mode-0 mismatch: {mx} vs {mv}"
            );
        }
    }

    #[test]
    fn second_moment_stays_below_the_trace_bound() {
        let cfg = config(64, 0.75, 1e-3, 0.1, 23).with_record_every(10);
        let x0 = CircleFunction::zero(cfg.grid);
        let paths = 200usize;
        let mut worst: f64 = 0.0;
        let mut mean_sup = 0.0;
        for p in 0..paths {
            let traj = simulate(&cfg, &x0, p as u64).unwrap();
            let sup = traj
                .states()
                .iter()
                .map(|x| x.norm_l2().powi(2))
                .fold(0.0f64, f64::max);
            worst = worst.max(sup);
            mean_sup += sup / paths as f64;
        }
        let budget = trace_constant(&cfg.noise) * cfg.t_horizon;
        assert!(
            mean_sup <= budget * 1.5,
            "E sup |X|^2 = {mean_sup} exceeds {}",
            budget * 1.5
        );
        assert!(worst.is_finite());
    }

    #[test]
    fn coupled_distance_never_increases() {
        let cfg = config(64, 0.75, 1e-3, 0.02, 31);
        let a = monotone_profile(cfg.grid);
        let b = rearrange(&CircleFunction::from_fn(cfg.grid, |x| 0.5 - x.abs()));
        let (ta, tb) = coupled_simulate(&cfg, &a, &b, 0).unwrap();
        let mut prev = f64::INFINITY;
        for (xa, xb) in ta.states().iter().zip(tb.states()) {
            let d = xa.sub(xb).norm_l2();
            assert!(d <= prev + 1e-12, "distance grew: {d} > {prev}");
            prev = d;
        }
        assert!(prev <= a.sub(&b).norm_l2() + 1e-12);

        let (tc, td) = coupled_simulate(&cfg, &a, &a, 1).unwrap();
        for (xc, xd) in tc.states().iter().zip(td.states()) {
            assert_eq!(xc.values(), xd.values());
        }
    }

    #[test]
    fn interpolation_blends_and_rejects_extrapolation() {
        let cfg = config(32, 0.75, 1e-2, 0.1, 2);
        let x0 = monotone_profile(cfg.grid);
        let traj = simulate(&cfg, &x0, 0).unwrap();
        let at_node = interpolate(&traj, 0.05).unwrap();
        assert_eq!(at_node.values(), traj.states()[5].values());
        let mid = interpolate(&traj, 0.055).unwrap();
        let expect = traj.states()[5].scale(0.5).add(&traj.states()[6].scale(0.5));
        assert!(mid.sub(&expect).norm_l2() < 1e-13);
        let lo = traj.states()[5].norm_l2();
        let hi = traj.states()[6].norm_l2();
        assert!(mid.norm_l2() <= lo.max(hi) + 1e-12);
        assert!(interpolate(&traj, 0.2).is_err());
        assert!(interpolate(&traj, -0.01).is_err());
    }

    #[test]
    fn identical_seeds_reproduce_identical_paths() {
        let cfg = config(64, 0.75, 1e-3, 0.02, 99);
        let x0 = CircleFunction::zero(cfg.grid);
        let a = simulate(&cfg, &x0, 7).unwrap();
        let b = simulate(&cfg, &x0, 7).unwrap();
        for (xa, xb) in a.states().iter().zip(b.states()) {
            assert_eq!(xa.values(), xb.values());
        }
    }
}
