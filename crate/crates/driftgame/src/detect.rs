//! Detectors for drift injection, built on the likelihood ratio.
//!
//! Against a known open-loop drift theta the optimal test statistic is
//! the log likelihood ratio of the observed path,
//!
//! ```text
//! log L = integral_0^T theta(t) dx(t) - (1/2) energy(theta)
//! ```
//!
//! discretized with left-endpoint (Ito) sums. Under the null
//! hypothesis x is driftless Brownian motion and
//! `log L ~ N(-energy/2, energy)`, so the false-alarm budget eps is
//! met exactly by the threshold
//!
//! ```text
//! log lambda = s * phi_inv(1 - eps) - s^2 / 2,    s = sqrt(energy)
//! ```
//!
//! For a constant reference the statistic collapses to a function of
//! the terminal value alone, and the likelihood-ratio test becomes the
//! terminal-threshold test: reject when
//! `x(T) > sqrt(T) * phi_inv(1 - eps)`. Both forms are provided; the
//! equivalence is assertable path by path, not merely in distribution.
//!
//! Ties accept everywhere: rejection requires a strict `>`, so the
//! accept region is closed. The statistic's null law is continuous and
//! ties have probability zero, but the convention keeps boundary cases
//! deterministic.

use crate::model::{cross_on, energy_on, AttackSignal, GameConfig, ModelError, Trajectory};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Errors from detector construction and evaluation.
#[derive(Debug, Error)]
pub enum DetectError {
    /// A zero-energy reference admits no likelihood-ratio test.
    #[error("reference signal has zero energy on [0, {horizon}]; likelihood-ratio threshold is undefined")]
    DegenerateReference { horizon: f64 },
    /// A likelihood-ratio detector only scores paths on the horizon it
    /// was calibrated for.
    #[error(
        "detector calibrated for horizon {expected} cannot score a trajectory with horizon {got}"
    )]
    HorizonMismatch { expected: f64, got: f64 },
    /// The reference signal failed validation.
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A detector's verdict on one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    /// No alarm; the path is consistent with pure Brownian motion.
    AcceptH0,
    /// Alarm; the path is attributed to an attack.
    RejectH0,
}

impl Decision {
    /// True when the detector raised an alarm.
    pub fn is_reject(&self) -> bool {
        matches!(self, Decision::RejectH0)
    }
}

/// A log likelihood ratio value, kept in log space; the plain ratio
/// overflows long before the statistics get interesting.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogLikelihood(f64);

impl LogLikelihood {
    /// The raw log value.
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// A binary detector of drift injection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Detector {
    /// Reject when the terminal value exceeds `cutoff`. Reads only
    /// x(T), so it applies to any horizon.
    TerminalThreshold { cutoff: f64 },
    /// Reject when the log likelihood ratio against `reference`
    /// exceeds `log_threshold`. Calibrated for one horizon.
    LikelihoodRatio {
        reference: AttackSignal,
        log_threshold: f64,
        horizon: f64,
    },
}

impl Detector {
    /// Scores one trajectory. Ties accept: only a strictly exceeded
    /// threshold rejects.
    pub fn decide(&self, trajectory: &Trajectory) -> Result<Decision, DetectError> {
        match self {
            Detector::TerminalThreshold { cutoff } => Ok(if trajectory.terminal() > *cutoff {
                Decision::RejectH0
            } else {
                Decision::AcceptH0
            }),
            Detector::LikelihoodRatio {
                reference,
                log_threshold,
                horizon,
            } => {
                if trajectory.horizon() != *horizon {
                    return Err(DetectError::HorizonMismatch {
                        expected: *horizon,
                        got: trajectory.horizon(),
                    });
                }
                let statistic = log_lr_statistic(reference, trajectory)?;
                Ok(if statistic.value() > *log_threshold {
                    Decision::RejectH0
                } else {
                    Decision::AcceptH0
                })
            }
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Detector::TerminalThreshold { cutoff } => {
                write!(f, "terminal threshold at {cutoff}")
            }
            Detector::LikelihoodRatio {
                reference,
                log_threshold,
                ..
            } => write!(
                f,
                "likelihood ratio vs {reference}, log threshold {log_threshold}"
            ),
        }
    }
}

/// The discretized log likelihood ratio of `trajectory` against the
/// open-loop `reference`:
///
/// ```text
/// sum_k theta(t_k) (x_{k+1} - x_k) - (1/2) energy(theta)
/// ```
///
/// The stochastic integral uses left endpoints, matching the Ito
/// convention of the simulator; the energy term is exact, not a
/// Riemann sum, so constant references telescope to
/// `theta * x(T) - T * theta^2 / 2` with no grid error.
pub fn log_lr_statistic(
    reference: &AttackSignal,
    trajectory: &Trajectory,
) -> Result<LogLikelihood, DetectError> {
    let horizon = trajectory.horizon();
    reference.validate(horizon)?;
    let dt = trajectory.dt();
    let values = trajectory.values();
    let mut ito = 0.0;
    for (k, pair) in values.windows(2).enumerate() {
        let t = k as f64 * dt;
        ito += reference.value_at(t, horizon) * (pair[1] - pair[0]);
    }
    Ok(LogLikelihood(ito - 0.5 * energy_on(reference, horizon)))
}

/// Streamed form of [`log_lr_statistic`] for estimators that never
/// materialize the path: fold transitions in grid order and finish
/// with the energy term. Produces bit-identical results because the
/// arithmetic is the same, in the same order.
pub(crate) struct LrAccumulator<'a> {
    reference: &'a AttackSignal,
    horizon: f64,
    ito: f64,
}

impl<'a> LrAccumulator<'a> {
    pub fn new(reference: &'a AttackSignal, horizon: f64) -> Self {
        LrAccumulator {
            reference,
            horizon,
            ito: 0.0,
        }
    }

    /// Adds the transition at left-endpoint time `t`.
    pub fn push(&mut self, t: f64, from: f64, to: f64) {
        self.ito += self.reference.value_at(t, self.horizon) * (to - from);
    }

    /// The completed statistic.
    pub fn finish(self) -> f64 {
        self.ito - 0.5 * energy_on(self.reference, self.horizon)
    }
}

/// The exact false-alarm threshold for a likelihood-ratio test against
/// `reference` at the configured budget:
///
/// ```text
/// log lambda = s * phi_inv(1 - eps) - s^2 / 2,    s = sqrt(energy)
/// ```
pub fn np_log_threshold(reference: &AttackSignal, config: &GameConfig) -> Result<f64, DetectError> {
    reference.validate(config.horizon())?;
    let energy = energy_on(reference, config.horizon());
    if energy <= 0.0 {
        return Err(DetectError::DegenerateReference {
            horizon: config.horizon(),
        });
    }
    let s = energy.sqrt();
    Ok(s * config.upper_quantile() - 0.5 * energy)
}

/// Builds the likelihood-ratio detector against `reference`,
/// calibrated to the configured false-alarm budget.
pub fn lr_detector(reference: &AttackSignal, config: &GameConfig) -> Result<Detector, DetectError> {
    let log_threshold = np_log_threshold(reference, config)?;
    Ok(Detector::LikelihoodRatio {
        reference: reference.clone(),
        log_threshold,
        horizon: config.horizon(),
    })
}

/// The minimax detector: reject when
/// `x(T) > sqrt(T) * phi_inv(1 - eps)`.
///
/// Equivalent, decision for decision, to the likelihood-ratio test
/// against any constant positive reference.
pub fn terminal_detector(config: &GameConfig) -> Detector {
    Detector::TerminalThreshold {
        cutoff: config.alarm_cutoff(),
    }
}

/// Cross-covariance between the statistic's reference and an attack:
/// under the attack the statistic is Gaussian with mean
/// `cross - energy/2` and variance `energy`. Re-exported for the
/// estimators' exact-sampling fast path.
pub(crate) fn lr_mean_shift(reference: &AttackSignal, attack: &AttackSignal, horizon: f64) -> f64 {
    cross_on(reference, attack, horizon)
}
