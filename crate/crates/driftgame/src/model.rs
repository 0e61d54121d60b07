//! Game configuration, attack signals, and simulation of the
//! controlled diffusion.
//!
//! The dynamics under attack are the scalar unit-diffusion SDE
//!
//! ```text
//! dx(t) = theta(t) dt + dw(t),    x(0) = 0,    t in [0, T]
//! ```
//!
//! where the attacker chooses the drift: either an open-loop
//! [`AttackSignal`] theta(t) fixed in advance, or a state-dependent
//! [`FeedbackPolicy`] theta(t, x). The terminal state is unsafe when
//! `x(T) > T*d`.
//!
//! Open-loop signals are restricted to closed-form families (constant,
//! piecewise constant, pulse, ramp), so the two integrals the theory
//! keeps asking for,
//!
//! ```text
//! mass(theta)   = integral_0^T theta(t) dt
//! energy(theta) = integral_0^T theta(t)^2 dt
//! ```
//!
//! are computed exactly: every family is piecewise linear in t, and
//! products of linear pieces integrate in closed form. No quadrature
//! error ever mixes into the statistics built on top.
//!
//! Simulation is Euler-Maruyama with the drift evaluated at the left
//! endpoint of each step (the Ito convention). For an open-loop signal
//! the terminal state is exactly Gaussian, `x(T) ~ N(mass, T)`, and
//! [`sample_terminal`] draws from that law directly, with no
//! discretization at all; estimators prefer it whenever the detector
//! only reads `x(T)`.

use crate::normal::{quantile, NormalError, Probability};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Errors from configuration, signal validation, and simulation.
#[derive(Debug, Error)]
pub enum ModelError {
    /// Horizon T must be positive and finite.
    #[error("horizon must be positive and finite, got {value}")]
    BadHorizon { value: f64 },
    /// Unsafe-region slope d must be positive and finite.
    #[error("unsafe_slope must be positive and finite, got {value}")]
    BadSlope { value: f64 },
    /// The success floor c must exceed 1/2 (standing assumption).
    #[error("success_floor must exceed 0.5, got {value}")]
    SuccessFloorTooLow { value: f64 },
    /// The success floor c must stay below 1 for the bias to be finite.
    #[error("success_floor must be strictly below 1, got {value}")]
    SuccessFloorTooHigh { value: f64 },
    /// The false-alarm budget must satisfy 0 < eps < 1/2.
    #[error("false_alarm_budget must lie strictly between 0 and 0.5, got {value}")]
    BadFalseAlarmBudget { value: f64 },
    /// A signal parameter was NaN or infinite.
    #[error("signal parameter {name} must be finite, got {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },
    /// Piecewise-constant signals need at least one grid value.
    #[error("piecewise-constant signal needs a nonempty value grid")]
    EmptyGrid,
    /// Pulse support must be a positive-width window inside [0, T].
    #[error(
        "pulse [{start}, {start} + {width}] must have positive width and lie inside [0, {horizon}]"
    )]
    PulseOutsideHorizon {
        start: f64,
        width: f64,
        horizon: f64,
    },
    /// Bridge target must sit strictly between the unsafe boundary and
    /// the alarm threshold.
    #[error("bridge target {target} must lie strictly inside ({lower}, {upper}) (unsafe boundary T*d, alarm cutoff sqrt(T)*phi_inv(1-eps))")]
    BridgeTargetOutOfRange { target: f64, lower: f64, upper: f64 },
    /// Simulation needs at least one step.
    #[error("simulation requires at least one step")]
    ZeroSteps,
    /// Drift evaluation produced NaN or infinity mid-path.
    #[error("drift evaluated to a non-finite value at t = {time}, x = {state}")]
    NonFiniteDrift { time: f64, state: f64 },
    /// Trajectories carry at least the initial and terminal points.
    #[error("trajectory needs at least two points, got {len}")]
    TrajectoryTooShort { len: usize },
    /// Trajectories start at the origin.
    #[error("trajectory must start at 0, got {value}")]
    TrajectoryStart { value: f64 },
    /// Trajectory values must all be finite.
    #[error("trajectory contains a non-finite value at index {index}")]
    TrajectoryNonFinite { index: usize },
    /// Probability-typed parameter failed validation.
    #[error(transparent)]
    Normal(#[from] NormalError),
}

// --- configuration ---------------------------------------------------

/// The four game parameters plus the derived quantities every formula
/// needs.
///
/// Standing assumptions, enforced at construction: `T > 0`, `d > 0`,
/// `1/2 < c < 1`, `0 < eps < 1/2`. Under them the boundary bias
///
/// ```text
/// theta_bar = phi_inv(c)/sqrt(T) + d
/// ```
///
/// is strictly positive, and the constant attack at that level meets
/// the success-rate constraint with equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameConfig {
    horizon: f64,
    unsafe_slope: f64,
    success_floor: Probability,
    false_alarm_budget: Probability,
    /// phi_inv(c), cached.
    success_quantile: f64,
    /// phi_inv(1 - eps), cached.
    upper_quantile: f64,
    /// theta_bar, cached.
    bias_level: f64,
}

impl GameConfig {
    /// Validates the four parameters and precomputes the derived
    /// quantiles.
    pub fn new(
        horizon: f64,
        unsafe_slope: f64,
        success_floor: f64,
        false_alarm_budget: f64,
    ) -> Result<Self, ModelError> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(ModelError::BadHorizon { value: horizon });
        }
        if !unsafe_slope.is_finite() || unsafe_slope <= 0.0 {
            return Err(ModelError::BadSlope {
                value: unsafe_slope,
            });
        }
        let c = Probability::new(success_floor)?;
        if c.value() <= 0.5 {
            return Err(ModelError::SuccessFloorTooLow { value: c.value() });
        }
        if c.value() >= 1.0 {
            return Err(ModelError::SuccessFloorTooHigh { value: c.value() });
        }
        let eps = Probability::new(false_alarm_budget)?;
        if eps.value() <= 0.0 || eps.value() >= 0.5 {
            return Err(ModelError::BadFalseAlarmBudget { value: eps.value() });
        }
        let success_quantile = quantile(c.value());
        let upper_quantile = quantile(1.0 - eps.value());
        let bias_level = success_quantile / horizon.sqrt() + unsafe_slope;
        debug_assert!(bias_level > 0.0);
        Ok(GameConfig {
            horizon,
            unsafe_slope,
            success_floor: c,
            false_alarm_budget: eps,
            success_quantile,
            upper_quantile,
            bias_level,
        })
    }

    /// Horizon T.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Unsafe-region slope d; the terminal state is unsafe when
    /// `x(T) > T*d`.
    pub fn unsafe_slope(&self) -> f64 {
        self.unsafe_slope
    }

    /// Success floor c.
    pub fn success_floor(&self) -> Probability {
        self.success_floor
    }

    /// False-alarm budget eps.
    pub fn false_alarm_budget(&self) -> Probability {
        self.false_alarm_budget
    }

    /// The boundary bias theta_bar = phi_inv(c)/sqrt(T) + d.
    pub fn bias_level(&self) -> f64 {
        self.bias_level
    }

    /// phi_inv(c), cached at construction.
    pub(crate) fn success_quantile(&self) -> f64 {
        self.success_quantile
    }

    /// phi_inv(1 - eps), cached at construction.
    pub(crate) fn upper_quantile(&self) -> f64 {
        self.upper_quantile
    }

    /// Minimum admissible attack mass, sqrt(T)*phi_inv(c) + T*d.
    ///
    /// Computed as `theta_bar * T` (the same expression the constant
    /// boundary attack's mass reduces to), so the boundary attack is
    /// admissible under exact comparison, not merely within roundoff.
    pub fn mass_floor(&self) -> f64 {
        self.bias_level * self.horizon
    }

    /// Terminal alarm threshold sqrt(T)*phi_inv(1 - eps).
    pub fn alarm_cutoff(&self) -> f64 {
        self.horizon.sqrt() * self.upper_quantile
    }

    /// Unsafe-region boundary T*d.
    pub fn unsafe_boundary(&self) -> f64 {
        self.horizon * self.unsafe_slope
    }
}

// --- open-loop attack signals ----------------------------------------

/// An open-loop drift theta(t) on [0, T].
///
/// All families are piecewise linear, so mass, energy, and
/// cross-products integrate exactly. `PiecewiseConstant` values live on
/// a uniform partition of [0, T]: value k applies on
/// `[k*T/n, (k+1)*T/n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttackSignal {
    /// No attack; the null hypothesis drift.
    Zero,
    /// Constant drift `level` on all of [0, T].
    ConstantBias { level: f64 },
    /// Step function on a uniform partition of [0, T].
    PiecewiseConstant { values: Vec<f64> },
    /// `height` on [start, start + width), zero elsewhere.
    Pulse { height: f64, start: f64, width: f64 },
    /// Linear drift `slope * t`.
    Ramp { slope: f64 },
}

impl AttackSignal {
    /// Checks the signal is well-formed on `[0, horizon]`.
    pub fn validate(&self, horizon: f64) -> Result<(), ModelError> {
        let finite = |name: &'static str, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(ModelError::NonFiniteParameter { name, value })
            }
        };
        match self {
            AttackSignal::Zero => Ok(()),
            AttackSignal::ConstantBias { level } => finite("level", *level),
            AttackSignal::PiecewiseConstant { values } => {
                if values.is_empty() {
                    return Err(ModelError::EmptyGrid);
                }
                for &v in values {
                    finite("grid value", v)?;
                }
                Ok(())
            }
            AttackSignal::Pulse {
                height,
                start,
                width,
            } => {
                finite("height", *height)?;
                finite("start", *start)?;
                finite("width", *width)?;
                if *width <= 0.0 || *start < 0.0 || start + width > horizon {
                    return Err(ModelError::PulseOutsideHorizon {
                        start: *start,
                        width: *width,
                        horizon,
                    });
                }
                Ok(())
            }
            AttackSignal::Ramp { slope } => finite("slope", *slope),
        }
    }

    /// Pointwise drift value at time `t` in `[0, horizon]`.
    pub fn value_at(&self, t: f64, horizon: f64) -> f64 {
        match self {
            AttackSignal::Zero => 0.0,
            AttackSignal::ConstantBias { level } => *level,
            AttackSignal::PiecewiseConstant { values } => {
                let n = values.len();
                let idx = ((t / horizon) * n as f64).floor() as usize;
                values[idx.min(n - 1)]
            }
            AttackSignal::Pulse {
                height,
                start,
                width,
            } => {
                if t >= *start && t < start + width {
                    *height
                } else {
                    0.0
                }
            }
            AttackSignal::Ramp { slope } => slope * t,
        }
    }

    /// Local linear coefficients (intercept, slope) of the signal at
    /// time `t`, valid on the whole breakpoint cell containing `t`.
    fn linear_coeffs_at(&self, t: f64, horizon: f64) -> (f64, f64) {
        match self {
            AttackSignal::Ramp { slope } => (0.0, *slope),
            _ => (self.value_at(t, horizon), 0.0),
        }
    }

    /// Times where the signal's linear form changes, clipped to
    /// (0, horizon); endpoints are implicit.
    fn interior_breakpoints(&self, horizon: f64, out: &mut Vec<f64>) {
        match self {
            AttackSignal::Zero | AttackSignal::ConstantBias { .. } | AttackSignal::Ramp { .. } => {}
            AttackSignal::PiecewiseConstant { values } => {
                let n = values.len();
                for k in 1..n {
                    out.push(horizon * k as f64 / n as f64);
                }
            }
            AttackSignal::Pulse { start, width, .. } => {
                out.push(*start);
                out.push(start + width);
            }
        }
    }
}

impl fmt::Display for AttackSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackSignal::Zero => write!(f, "zero"),
            AttackSignal::ConstantBias { level } => write!(f, "constant bias {level}"),
            AttackSignal::PiecewiseConstant { values } => {
                write!(f, "piecewise constant ({} cells)", values.len())
            }
            AttackSignal::Pulse {
                height,
                start,
                width,
            } => write!(f, "pulse height {height} on [{start}, {})", start + width),
            AttackSignal::Ramp { slope } => write!(f, "ramp slope {slope}"),
        }
    }
}

/// Exact integral of the signal over [0, horizon].
pub(crate) fn mass_on(signal: &AttackSignal, horizon: f64) -> f64 {
    integrate_cells(signal, None, horizon)
}

/// Exact integral of the squared signal over [0, horizon].
pub(crate) fn energy_on(signal: &AttackSignal, horizon: f64) -> f64 {
    integrate_cells(signal, Some(signal), horizon)
}

/// Exact integral of the product of two signals over [0, horizon].
pub(crate) fn cross_on(a: &AttackSignal, b: &AttackSignal, horizon: f64) -> f64 {
    integrate_cells(a, Some(b), horizon)
}

/// Integrates `a` (or `a*b`) by splitting [0, horizon] at every
/// breakpoint of the operands; each cell is a product of linear pieces
/// with a polynomial antiderivative.
fn integrate_cells(a: &AttackSignal, b: Option<&AttackSignal>, horizon: f64) -> f64 {
    let mut cuts = vec![0.0, horizon];
    a.interior_breakpoints(horizon, &mut cuts);
    if let Some(b) = b {
        b.interior_breakpoints(horizon, &mut cuts);
    }
    cuts.retain(|&t| (0.0..=horizon).contains(&t));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        if v <= u {
            continue;
        }
        let mid = u + 0.5 * (v - u);
        let (a0, a1) = a.linear_coeffs_at(mid, horizon);
        let d1 = v - u;
        let d2 = 0.5 * (v * v - u * u);
        total += match b {
            None => a0 * d1 + a1 * d2,
            Some(b) => {
                let (b0, b1) = b.linear_coeffs_at(mid, horizon);
                let d3 = (v * v * v - u * u * u) / 3.0;
                a0 * b0 * d1 + (a0 * b1 + a1 * b0) * d2 + a1 * b1 * d3
            }
        };
    }
    total
}

/// Exact attack mass `integral_0^T theta dt` for the configured
/// horizon.
pub fn attack_mass(signal: &AttackSignal, config: &GameConfig) -> f64 {
    mass_on(signal, config.horizon())
}

/// Exact attack energy `integral_0^T theta^2 dt` for the configured
/// horizon. Satisfies `energy >= mass^2 / T`, with equality only for
/// constant signals.
pub fn attack_energy(signal: &AttackSignal, config: &GameConfig) -> f64 {
    energy_on(signal, config.horizon())
}

/// The boundary constant attack: `ConstantBias(theta_bar)`.
///
/// Its mass equals the admissibility floor exactly, so the
/// success-rate constraint is active.
pub fn constant_bias_attack(config: &GameConfig) -> AttackSignal {
    AttackSignal::ConstantBias {
        level: config.bias_level(),
    }
}

// --- feedback policies ------------------------------------------------

/// A state-dependent drift theta(t, x).
#[derive(Clone)]
pub enum FeedbackPolicy {
    /// Drift `(target - x) / (T - t)`: the diffusion conditioned to end
    /// at `target`.
    BrownianBridge { target: f64 },
    /// Arbitrary user-supplied drift function of (t, x).
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl FeedbackPolicy {
    /// Drift value at time `t < horizon` and state `x`.
    pub fn drift_at(&self, t: f64, x: f64, horizon: f64) -> f64 {
        match self {
            FeedbackPolicy::BrownianBridge { target } => (target - x) / (horizon - t),
            FeedbackPolicy::Custom(drift) => drift(t, x),
        }
    }
}

impl fmt::Debug for FeedbackPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeedbackPolicy::BrownianBridge { target } => f
                .debug_struct("BrownianBridge")
                .field("target", target)
                .finish(),
            FeedbackPolicy::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl fmt::Display for FeedbackPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeedbackPolicy::BrownianBridge { target } => {
                write!(f, "brownian bridge to {target}")
            }
            FeedbackPolicy::Custom(_) => write!(f, "custom feedback drift"),
        }
    }
}

/// The Brownian-bridge feedback attack steering the path to `target`.
///
/// The target must lie strictly inside `(T*d, sqrt(T)*phi_inv(1-eps))`:
/// above the unsafe boundary so the attack succeeds, below the alarm
/// cutoff so the terminal detector stays quiet.
pub fn bridge_attack(target: f64, config: &GameConfig) -> Result<FeedbackPolicy, ModelError> {
    let lower = config.unsafe_boundary();
    let upper = config.alarm_cutoff();
    if !target.is_finite() || target <= lower || target >= upper {
        return Err(ModelError::BridgeTargetOutOfRange {
            target,
            lower,
            upper,
        });
    }
    Ok(FeedbackPolicy::BrownianBridge { target })
}

/// Either kind of attack drift, for operations that accept both.
#[derive(Debug, Clone)]
pub enum AttackPolicy {
    /// Drift fixed in advance.
    OpenLoop(AttackSignal),
    /// Drift reacting to the current state.
    Feedback(FeedbackPolicy),
}

impl AttackPolicy {
    /// Drift value at (t, x).
    pub fn drift_at(&self, t: f64, x: f64, horizon: f64) -> f64 {
        match self {
            AttackPolicy::OpenLoop(signal) => signal.value_at(t, horizon),
            AttackPolicy::Feedback(policy) => policy.drift_at(t, x, horizon),
        }
    }
}

impl From<AttackSignal> for AttackPolicy {
    fn from(signal: AttackSignal) -> Self {
        AttackPolicy::OpenLoop(signal)
    }
}

impl From<FeedbackPolicy> for AttackPolicy {
    fn from(policy: FeedbackPolicy) -> Self {
        AttackPolicy::Feedback(policy)
    }
}

impl fmt::Display for AttackPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackPolicy::OpenLoop(signal) => signal.fmt(f),
            AttackPolicy::Feedback(policy) => policy.fmt(f),
        }
    }
}

// --- trajectories and random streams ----------------------------------

/// A sample path on the uniform grid t_k = k*T/N, k = 0..N.
///
/// Always starts at the origin; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    horizon: f64,
    values: Vec<f64>,
}

impl Trajectory {
    /// Wraps raw grid values (values[k] = x(t_k), values[0] = 0).
    pub fn from_values(horizon: f64, values: Vec<f64>) -> Result<Self, ModelError> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(ModelError::BadHorizon { value: horizon });
        }
        if values.len() < 2 {
            return Err(ModelError::TrajectoryTooShort { len: values.len() });
        }
        if values[0] != 0.0 {
            return Err(ModelError::TrajectoryStart { value: values[0] });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::TrajectoryNonFinite { index });
        }
        Ok(Trajectory { horizon, values })
    }

    /// Horizon T.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of Euler steps N.
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Grid spacing T/N.
    pub fn dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    /// Grid time t_k.
    pub fn time_at(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// All grid values x(t_0..t_N).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Terminal value x(T).
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("trajectory is never empty")
    }
}

/// A (seed, stream index) pair naming one reproducible sequence of
/// standard normal draws.
///
/// Monte Carlo trial k uses stream index k, so estimates are
/// identical regardless of how trials are scheduled across workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomStream {
    seed: u64,
    stream_index: u64,
}

impl RandomStream {
    /// Names the `stream_index`-th substream of `seed`.
    pub fn new(seed: u64, stream_index: u64) -> Self {
        RandomStream { seed, stream_index }
    }

    /// Base seed.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Substream counter.
    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// The generator positioned at the start of this substream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

// --- simulation --------------------------------------------------------

/// One Euler-Maruyama transition seen by [`euler_drive`] observers.
pub(crate) struct StepRecord {
    /// Left-endpoint time t_k of the step.
    pub time: f64,
    /// State before the step, x(t_k).
    pub from: f64,
    /// State after the step, x(t_{k+1}).
    pub to: f64,
}

/// Runs the Euler-Maruyama recursion
///
/// ```text
/// x_{k+1} = x_k + drift(t_k, x_k) * dt + sqrt(dt) * Z_k
/// ```
///
/// calling `on_step` after every transition, and returns the terminal
/// state. Observers that ignore the records cost nothing, which lets
/// estimators stream over paths without materializing them.
pub(crate) fn euler_drive(
    policy: &AttackPolicy,
    horizon: f64,
    steps: usize,
    stream: RandomStream,
    mut on_step: impl FnMut(StepRecord),
) -> Result<f64, ModelError> {
    use rand::Rng;
    use rand_distr::StandardNormal;

    if steps == 0 {
        return Err(ModelError::ZeroSteps);
    }
    let dt = horizon / steps as f64;
    let sqrt_dt = dt.sqrt();
    let mut rng = stream.rng();
    let mut x = 0.0_f64;
    for k in 0..steps {
        let t = k as f64 * dt;
        let drift = policy.drift_at(t, x, horizon);
        if !drift.is_finite() {
            return Err(ModelError::NonFiniteDrift { time: t, state: x });
        }
        let z: f64 = rng.sample(StandardNormal);
        let next = x + drift * dt + sqrt_dt * z;
        on_step(StepRecord {
            time: t,
            from: x,
            to: next,
        });
        x = next;
    }
    Ok(x)
}

/// Simulates one full path of the SDE under the given drift.
///
/// Drift is evaluated at left endpoints only, so the Brownian bridge's
/// singular factor `1/(T - t)` is never evaluated at t = T; its last
/// evaluation sees `T - t_{N-1} = dt`. Bridge terminal accuracy is
/// O(sqrt(dt log(1/dt))); nothing is clamped.
pub fn simulate_path(
    policy: &AttackPolicy,
    config: &GameConfig,
    steps: usize,
    stream: RandomStream,
) -> Result<Trajectory, ModelError> {
    if let AttackPolicy::OpenLoop(signal) = policy {
        signal.validate(config.horizon())?;
    }
    let mut values = Vec::with_capacity(steps.saturating_add(1));
    values.push(0.0);
    euler_drive(policy, config.horizon(), steps, stream, |step| {
        values.push(step.to)
    })?;
    Ok(Trajectory {
        horizon: config.horizon(),
        values,
    })
}

/// Simulates only the terminal state, without storing the path.
pub(crate) fn simulate_terminal(
    policy: &AttackPolicy,
    config: &GameConfig,
    steps: usize,
    stream: RandomStream,
) -> Result<f64, ModelError> {
    euler_drive(policy, config.horizon(), steps, stream, |_| {})
}

/// Draws the terminal state of an open-loop attack exactly:
/// `x(T) ~ N(mass, T)`, no discretization involved.
///
/// Uses the first standard normal variate of the stream, so estimators
/// that inline the same draw agree with this function bit for bit.
pub fn sample_terminal(signal: &AttackSignal, config: &GameConfig, stream: RandomStream) -> f64 {
    use rand::Rng;
    use rand_distr::StandardNormal;

    let mass = mass_on(signal, config.horizon());
    let z: f64 = stream.rng().sample(StandardNormal);
    mass + config.horizon().sqrt() * z
}
