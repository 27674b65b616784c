//! Time- and state-adaptive choice of the interpolation half-width around
//! the spot.
//!
//! The half-width combines a volatility scale `a_tau = alpha * x0 * sigma *
//! sqrt(tau)` (tau = time to the next singularity date) with half the
//! clearance to the nearest singularity level, clamped to `[a_min, a_max]`:
//!
//! ```text
//! a = min( max(a_b + a_tau, a_min), a_max ),
//! a_b = min_i (d_i - a_tau)+ / 2,   d_i = |x0 - b_i|
//! ```
//!
//! With no singularity levels the clearance term is unbounded and the
//! `a_max` clamp binds.

use crate::error::{Error, Result};
use crate::pricing::{MarketState, PayoffSpec};

/// Positions (in spot units) and timing of the payoff's singularities.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityMap {
    /// Year fraction to the next singularity date (>= 0).
    pub next_date_tau: f64,
    /// Singularity levels in spot units; may be empty.
    pub levels: Vec<f64>,
}

/// Parameters of the adaptive half-width rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainParams {
    /// Volatility-scale multiplier, in [1, 2].
    pub alpha: f64,
    /// Lower clamp (payoff-parameter units).
    pub a_min: f64,
    /// Upper clamp (payoff-parameter units).
    pub a_max: f64,
    /// Node count for the interpolator built on the domain (odd).
    pub n: usize,
}

impl DomainParams {
    pub fn new(alpha: f64, a_min: f64, a_max: f64, n: usize) -> Result<Self> {
        if !(1.0..=2.0).contains(&alpha) {
            return Err(Error::invalid(format!("alpha {alpha} outside [1, 2]")));
        }
        if !(a_min > 0.0) || a_max < a_min {
            return Err(Error::invalid(format!(
                "need 0 < a_min <= a_max, got [{a_min}, {a_max}]"
            )));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::invalid(format!("node count {n} must be odd >= 3")));
        }
        Ok(DomainParams {
            alpha,
            a_min,
            a_max,
            n,
        })
    }

    /// Clamps scaled by `spot` (bounds quoted as fractions of the spot).
    pub fn scaled_to(self, spot: f64) -> Result<Self> {
        DomainParams::new(self.alpha, self.a_min * spot, self.a_max * spot, self.n)
    }
}

impl Default for DomainParams {
    /// alpha mid-range, clamps matching a 0.25% three-point bump and a 5%
    /// feature span, 7 nodes.
    fn default() -> Self {
        DomainParams {
            alpha: 1.5,
            a_min: 0.0075,
            a_max: 0.05,
            n: 7,
        }
    }
}

/// The adaptive half-width `a` for an interpolation domain centered at
/// `x0`. Always lies in `[a_min, a_max]`.
pub fn adaptive_half_width(
    x0: f64,
    sigma: f64,
    sing: &SingularityMap,
    params: &DomainParams,
) -> Result<f64> {
    if !(x0 > 0.0) {
        return Err(Error::invalid(format!("spot must be positive, got {x0}")));
    }
    if !(sigma >= 0.0) || sing.next_date_tau < 0.0 {
        return Err(Error::invalid(format!(
            "need sigma >= 0 and tau >= 0, got {sigma}, {}",
            sing.next_date_tau
        )));
    }
    let a_tau = params.alpha * x0 * sigma * sing.next_date_tau.sqrt();
    let a_b = sing
        .levels
        .iter()
        .map(|b| 0.5 * ((x0 - b).abs() - a_tau).max(0.0))
        .fold(f64::INFINITY, f64::min);
    Ok((a_b + a_tau).max(params.a_min).min(params.a_max))
}

/// Extracts singularity positions and the time to the next fixing from a
/// payoff. Fixing schedules are year fractions from the valuation date, so
/// tau is simply the first remaining fixing. Barrier levels are mapped to
/// spot units; for performance payoffs that means scaling by the bumped
/// asset's reference fixing. `include_strikes` controls whether plain
/// strikes count as levels next to true barriers (gamma has a kink scale
/// there, and the clearance term only ever shrinks the domain).
pub fn singularities_for(
    payoff: &PayoffSpec,
    market: &MarketState,
    bump_asset: usize,
    include_strikes: bool,
) -> SingularityMap {
    let tau = payoff.fixings().first().copied().unwrap_or(0.0);
    let levels = match payoff {
        PayoffSpec::Call { strike, .. }
        | PayoffSpec::Put { strike, .. }
        | PayoffSpec::Digital { strike, .. } => vec![*strike],
        PayoffSpec::Tarf(t) => {
            let mut l = vec![t.ko_barrier, t.ki_barrier];
            if include_strikes {
                l.push(t.strike);
            }
            l
        }
        PayoffSpec::Autocallable(a) => {
            let fix = market
                .ref_fixings
                .get(bump_asset)
                .copied()
                .unwrap_or(f64::NAN);
            [a.coupon_barrier, a.call_barrier, a.guarantee_barrier]
                .iter()
                .map(|b| b * fix)
                .collect()
        }
    };
    SingularityMap {
        next_date_tau: tau,
        levels,
    }
}
