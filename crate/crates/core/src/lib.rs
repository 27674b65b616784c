//! Monte Carlo prices and first/second-order spot Greeks of exotic payoffs
//! via barycentric Chebyshev interpolation with adaptive domains, measured
//! against central finite differences.
//!
//! The core idea: instead of bumping a Monte Carlo pricer and differencing
//! (whose gamma variance explodes as the bump shrinks), price the payoff on
//! a handful of Chebyshev nodes around the spot with frozen noise,
//! interpolate, and differentiate the interpolant. The crate provides
//!
//! * [`cheb`] — barycentric interpolation and differential matrices;
//! * [`stencils`] — classical central finite differences, the baseline;
//! * [`adaptive`] — the time- and state-adaptive interpolation half-width;
//! * [`pricing`] — seed-deterministic GBM Monte Carlo for calls, digitals,
//!   TARFs and worst-of autocallables, plus closed-form Black oracles;
//! * [`greeks`] — the per-spot engine, sweeps, and error metrics;
//! * [`harness`] — config-driven experiments emitting CSV tables.

pub mod adaptive;
pub mod cheb;
mod error;
pub mod greeks;
pub mod harness;
pub mod math;
pub mod pricing;
pub mod stencils;

pub use error::{Error, Result};
