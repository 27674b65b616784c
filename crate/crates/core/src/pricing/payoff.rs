//! Payoff definitions and their per-path valuation.
//!
//! All monitoring is discrete at the listed fixing dates (year fractions
//! from the valuation date). Path valuation receives the simulated spot
//! panel for one path and returns the discounted sum of the payoff's cash
//! flows.

use crate::error::{Error, Result};

/// Target redemption forward: a strip of put-like coupons
/// `(K - S)/(K S) * N_i` paid while the running target
/// `sum_j (K - S_j)+ < theta`, gated by a knock-in barrier for the negative
/// leg and extinguished (current coupon included) by a knock-out barrier.
#[derive(Debug, Clone, PartialEq)]
pub struct TarfSpec {
    pub strike: f64,
    pub ki_barrier: f64,
    pub ko_barrier: f64,
    /// Residual target theta: coupons stop at the fixing where the running
    /// sum of (K - S)+ first reaches it, with no partial coupon.
    pub target: f64,
    pub notionals: Vec<f64>,
    pub fixings: Vec<f64>,
}

/// Worst-of autocallable with memory coupons, an early-termination rebate
/// and a capital-guarantee leg on the last fixing. Performance is measured
/// against per-asset reference fixings.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocallSpec {
    pub coupon_barrier: f64,
    pub call_barrier: f64,
    pub guarantee_barrier: f64,
    pub rebate: f64,
    pub notionals: Vec<f64>,
    pub fixings: Vec<f64>,
}

/// One of the supported payoffs.
#[derive(Debug, Clone, PartialEq)]
pub enum PayoffSpec {
    Call { strike: f64, maturity: f64 },
    Put { strike: f64, maturity: f64 },
    Digital { strike: f64, maturity: f64 },
    Tarf(TarfSpec),
    Autocallable(AutocallSpec),
}

impl PayoffSpec {
    /// Fixing dates in year fractions, ascending.
    pub fn fixings(&self) -> Vec<f64> {
        match self {
            PayoffSpec::Call { maturity, .. }
            | PayoffSpec::Put { maturity, .. }
            | PayoffSpec::Digital { maturity, .. } => vec![*maturity],
            PayoffSpec::Tarf(t) => t.fixings.clone(),
            PayoffSpec::Autocallable(a) => a.fixings.clone(),
        }
    }

    pub fn n_assets(&self) -> usize {
        match self {
            PayoffSpec::Autocallable(_) => 2,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_schedule = |fixings: &[f64], notionals: &[f64]| -> Result<()> {
            if fixings.is_empty() {
                return Err(Error::invalid("empty fixing schedule"));
            }
            let mut prev = 0.0;
            for &t in fixings {
                if !(t > prev) || !t.is_finite() {
                    return Err(Error::invalid(format!(
                        "fixing schedule must be strictly increasing and positive, got {t} after {prev}"
                    )));
                }
                prev = t;
            }
            if notionals.len() != fixings.len() {
                return Err(Error::invalid(format!(
                    "{} notionals for {} fixings",
                    notionals.len(),
                    fixings.len()
                )));
            }
            Ok(())
        };
        match self {
            PayoffSpec::Call { strike, maturity } | PayoffSpec::Put { strike, maturity } => {
                // zero strike admitted: a zero-strike call is the forward leg
                if !(*strike >= 0.0) || !(*maturity > 0.0) {
                    return Err(Error::invalid("need strike >= 0 and maturity > 0"));
                }
            }
            PayoffSpec::Digital { strike, maturity } => {
                if !(*strike > 0.0) || !(*maturity > 0.0) {
                    return Err(Error::invalid("need strike > 0 and maturity > 0"));
                }
            }
            PayoffSpec::Tarf(t) => {
                if !(t.strike > 0.0) || !(t.ki_barrier > 0.0) || !(t.ko_barrier > 0.0) {
                    return Err(Error::invalid("TARF strike and barriers must be positive"));
                }
                if !(t.target > 0.0) {
                    return Err(Error::invalid("TARF target must be positive"));
                }
                check_schedule(&t.fixings, &t.notionals)?;
            }
            PayoffSpec::Autocallable(a) => {
                if !(a.coupon_barrier > 0.0)
                    || !(a.call_barrier > 0.0)
                    || !(a.guarantee_barrier > 0.0)
                {
                    return Err(Error::invalid("autocallable barriers must be positive"));
                }
                if !a.rebate.is_finite() {
                    return Err(Error::invalid("autocallable rebate must be finite"));
                }
                check_schedule(&a.fixings, &a.notionals)?;
            }
        }
        Ok(())
    }

    /// Discounted payoff of one path. `panel[j * n_assets + a]` holds the
    /// spot of asset `a` at fixing `j`; `disc[j]` the discount factor to
    /// fixing `j`.
    pub(crate) fn path_value(
        &self,
        panel: &[f64],
        n_assets: usize,
        disc: &[f64],
        ref_fixings: &[f64],
    ) -> f64 {
        match self {
            PayoffSpec::Call { strike, .. } => disc[0] * (panel[0] - strike).max(0.0),
            PayoffSpec::Put { strike, .. } => disc[0] * (strike - panel[0]).max(0.0),
            PayoffSpec::Digital { strike, .. } => {
                if panel[0] > *strike {
                    disc[0]
                } else {
                    0.0
                }
            }
            PayoffSpec::Tarf(t) => t.path_value(panel, disc),
            PayoffSpec::Autocallable(a) => a.path_value(panel, n_assets, disc, ref_fixings),
        }
    }
}

impl TarfSpec {
    fn path_value(&self, panel: &[f64], disc: &[f64]) -> f64 {
        let (coupons, _) = self.path_coupons(panel, disc);
        coupons
    }

    /// Discounted coupon total and the number of coupons paid; the count is
    /// separated out so barrier-monotonicity can be tested directly.
    pub(crate) fn path_coupons(&self, panel: &[f64], disc: &[f64]) -> (f64, u32) {
        let mut accrual = 0.0;
        let mut total = 0.0;
        let mut count = 0u32;
        for (j, &s) in panel.iter().enumerate() {
            // target sum includes the current fixing, so a breach pays no
            // partial coupon; the knock-out factor also covers the current
            // coupon. Both states are absorbing.
            accrual += (self.strike - s).max(0.0);
            if s < self.ko_barrier || accrual >= self.target {
                break;
            }
            if s <= self.strike || s > self.ki_barrier {
                total += disc[j] * (self.strike - s) / (self.strike * s) * self.notionals[j];
                count += 1;
            }
        }
        (total, count)
    }
}

impl AutocallSpec {
    fn path_value(&self, panel: &[f64], n_assets: usize, disc: &[f64], ref_fixings: &[f64]) -> f64 {
        let n = disc.len();
        let mut missed = 0.0;
        let mut total = 0.0;
        for j in 0..n {
            let perf = (0..n_assets)
                .map(|a| panel[j * n_assets + a] / ref_fixings[a])
                .fold(f64::INFINITY, f64::min);
            if perf >= self.call_barrier {
                // early termination: rebate only, stream stops
                total += disc[j] * self.rebate;
                break;
            }
            if perf >= self.coupon_barrier {
                // memory feature: previously missed coupons catch up
                total += disc[j] * (self.notionals[j] + missed);
                missed = 0.0;
            } else {
                missed += self.notionals[j];
            }
            if j == n - 1 && perf < self.guarantee_barrier {
                total += disc[j] * (perf - 1.0);
            }
        }
        total
    }
}
