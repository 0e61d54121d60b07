//! Attacker-vs-detector games on a scalar diffusion.
//!
//! An attacker injects a drift `theta` into the unit-diffusion SDE
//!
//! ```text
//! dx(t) = theta(t) dt + dw(t),    x(0) = 0,    t in [0, T]
//! ```
//!
//! trying to push the terminal state into the unsafe region
//! `x(T) > T*d` while evading a hypothesis test that watches the
//! trajectory for evidence of tampering. The detector picks a decision
//! rule with false-alarm rate at most `epsilon`; the attacker picks a
//! drift whose success rate is at least `c`. The detection-failure
//! probability `beta` is the payoff of the resulting zero-sum game.
//!
//! The crate provides:
//!
//! - [`normal`]: standard normal CDF and quantile kernels accurate
//!   enough (about 1e-14) that analytic-vs-Monte-Carlo comparisons are
//!   limited only by sampling noise.
//! - [`model`]: game configuration, open-loop attack signals with
//!   closed-form mass/energy, the Brownian-bridge feedback attack,
//!   Euler-Maruyama path simulation, and exact terminal-state sampling.
//! - [`detect`]: Girsanov log-likelihood-ratio statistics,
//!   Neyman-Pearson thresholds, and the two detector families
//!   (likelihood-ratio and terminal-threshold).
//! - [`game`]: closed-form game quantities, seeded Monte Carlo
//!   estimators of the three error rates, a saddle-point verification
//!   harness, and the error-exponent curve over growing horizons.
//!
//! All Monte Carlo entry points draw trial `k` from an independent
//! counter-based substream, so estimates are bitwise reproducible for
//! any worker count.

pub mod detect;
pub mod game;
pub mod model;
pub mod normal;
