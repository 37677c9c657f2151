//! Monte Carlo campaigns that measure each quantitative property of the
//! dynamics at desk scale and emit tabular results with uncertainties.
//!
//! Every stochastic estimate carries a sample count and a standard error;
//! verdicts are recomputable from the stored numbers. Re-running any
//! experiment with the same master seed reproduces every number exactly,
//! for any thread count.

mod bridge_checks;
mod contraction;
mod convergence;
mod derivative;
mod energy;
mod orthogonality;
mod properties;
mod reflection_checks;
mod smoothing;

pub use bridge_checks::bridge_suite;
pub use contraction::contraction_experiment;
pub use convergence::convergence_experiment;
pub use derivative::derivative_bound_experiment;
pub use energy::energy_experiment;
pub use orthogonality::orthogonality_experiment;
pub use reflection_checks::reflection_experiment;
pub use properties::{
    heat_consistency_suite, key_inequality_suite, noise_law_suite, rearrangement_suite,
    riesz_polya_suite, PropertiesConfig,
};
pub use smoothing::{smoothing_experiment, SmoothingParams};

use std::time::Instant;

/// Outcome of one check inside an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Status {
    Pass,
    /// Soft criterion outside its band; reported, never fatal.
    Warn,
    Fail,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    fn new(check: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Verdict {
            check: check.into(),
            status,
            detail: detail.into(),
        }
    }

    fn hard(check: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Verdict::new(check, if ok { Status::Pass } else { Status::Fail }, detail)
    }

    fn soft(check: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Verdict::new(check, if ok { Status::Pass } else { Status::Warn }, detail)
    }
}

/// One tabulated number: `label` names the series, `x` the abscissa (time,
/// step size, epsilon, ...).
#[derive(Debug, Clone, serde::Serialize)]
pub struct Estimate {
    pub label: String,
    pub x: f64,
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: Vec<(String, String)>,
    pub estimates: Vec<Estimate>,
    pub verdicts: Vec<Verdict>,
    pub wall_clock_s: f64,
}

impl ExperimentReport {
    pub(crate) fn begin(name: &str) -> ReportBuilder {
        ReportBuilder {
            report: ExperimentReport {
                name: name.to_string(),
                config: Vec::new(),
                estimates: Vec::new(),
                verdicts: Vec::new(),
                wall_clock_s: 0.0,
            },
            started: Instant::now(),
        }
    }

    /// No failed verdict (warnings allowed).
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn warned(&self) -> bool {
        self.verdicts.iter().any(|v| v.status == Status::Warn)
    }
}

pub(crate) struct ReportBuilder {
    report: ExperimentReport,
    started: Instant,
}

impl ReportBuilder {
    pub(crate) fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.report.config.push((key.to_string(), value.to_string()));
        self
    }

    pub(crate) fn estimate(
        &mut self,
        label: &str,
        x: f64,
        value: f64,
        std_error: f64,
        samples: usize,
    ) -> &mut Self {
        self.report.estimates.push(Estimate {
            label: label.to_string(),
            x,
            value,
            std_error,
            samples,
        });
        self
    }

    pub(crate) fn verdict(&mut self, v: Verdict) -> &mut Self {
        self.report.verdicts.push(v);
        self
    }

    pub(crate) fn finish(mut self) -> ExperimentReport {
        self.report.wall_clock_s = self.started.elapsed().as_secs_f64();
        self.report
    }
}

/// Deterministic auxiliary generator, decoupled from the noise streams by a
/// fixed lane tag.
pub(crate) fn aux_rng(master_seed: u64, lane: u64, index: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut s = master_seed ^ 0xA5A5_0F0F_3C3C_9696u64 ^ lane.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    s = s.wrapping_add(index.wrapping_mul(0xD134_2543_DE82_EF95));
    rand_chacha::ChaCha8Rng::seed_from_u64(s)
}
