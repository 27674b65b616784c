//! Closed-form Black prices and spot Greeks for calls and digitals: the
//! analytic oracles behind the error analyses.

use crate::math::{norm_cdf, norm_pdf};

/// Inputs of the one-asset Black model.
#[derive(Debug, Clone, Copy)]
pub struct BlackInputs {
    pub spot: f64,
    pub strike: f64,
    pub vol: f64,
    pub rate: f64,
    pub maturity: f64,
}

/// Price, delta and gamma at the given spot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackGreeks {
    pub price: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// Payoff kinds covered by the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Call,
    Digital,
}

fn d12(inp: &BlackInputs) -> (f64, f64) {
    let st = inp.vol * inp.maturity.sqrt();
    let d1 = ((inp.spot / inp.strike).ln() + (inp.rate + 0.5 * inp.vol * inp.vol) * inp.maturity)
        / st;
    (d1, d1 - st)
}

/// European call: price, delta, gamma. Vanishing total variance falls back
/// to the deterministic-exercise limits (delta is the discount-consistent
/// indicator, gamma 0).
pub fn call_analytics(inp: &BlackInputs) -> BlackGreeks {
    let disc = (-inp.rate * inp.maturity).exp();
    if inp.vol * inp.maturity.sqrt() <= 0.0 || inp.strike == 0.0 {
        let itm = inp.spot > inp.strike * disc;
        return BlackGreeks {
            price: (inp.spot - inp.strike * disc).max(0.0),
            delta: if itm || inp.strike == 0.0 { 1.0 } else { 0.0 },
            gamma: 0.0,
        };
    }
    let (d1, d2) = d12(inp);
    let st = inp.vol * inp.maturity.sqrt();
    BlackGreeks {
        price: inp.spot * norm_cdf(d1) - inp.strike * disc * norm_cdf(d2),
        delta: norm_cdf(d1),
        gamma: norm_pdf(d1) / (inp.spot * st),
    }
}

/// Cash-or-nothing digital call paying 1 on `S_T > K`.
pub fn digital_analytics(inp: &BlackInputs) -> BlackGreeks {
    let disc = (-inp.rate * inp.maturity).exp();
    if inp.vol * inp.maturity.sqrt() <= 0.0 {
        return BlackGreeks {
            price: if inp.spot > inp.strike * disc { disc } else { 0.0 },
            delta: 0.0,
            gamma: 0.0,
        };
    }
    let (d1, d2) = d12(inp);
    let st = inp.vol * inp.maturity.sqrt();
    let var = st * st;
    BlackGreeks {
        price: disc * norm_cdf(d2),
        delta: disc * norm_pdf(d2) / (inp.spot * st),
        gamma: -disc * norm_pdf(d2) * d1 / (inp.spot * inp.spot * var),
    }
}

/// Dispatch on the payoff kind.
pub fn black_analytics(kind: OracleKind, inp: &BlackInputs) -> BlackGreeks {
    match kind {
        OracleKind::Call => call_analytics(inp),
        OracleKind::Digital => digital_analytics(inp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig3_inputs(spot: f64) -> BlackInputs {
        BlackInputs {
            spot,
            strike: 1.0,
            vol: 0.07,
            rate: 0.0,
            maturity: 0.1,
        }
    }

    #[test]
    fn call_reference_values() {
        // frozen from an independent scipy/mpmath evaluation of the closed
        // forms at K=1, T=0.1, sigma=0.07, r=0, S=1
        let g = call_analytics(&fig3_inputs(1.0));
        assert_relative_eq!(g.price, 0.0088307835315387, max_relative = 1e-12);
        assert_relative_eq!(g.delta, 0.50441539176576935, max_relative = 1e-14);
        assert_relative_eq!(g.gamma, 18.021271320613817, max_relative = 1e-13);
        // delta at the money equals Phi(sigma sqrt(T) / 2) when r = 0
        let want = crate::math::norm_cdf(0.07 * 0.1f64.sqrt() / 2.0);
        assert_relative_eq!(g.delta, want, max_relative = 1e-15);
    }

    #[test]
    fn digital_reference_values() {
        let g = digital_analytics(&fig3_inputs(1.0));
        assert_relative_eq!(g.price, 0.49558460823423067, max_relative = 1e-14);
        assert_relative_eq!(g.delta, 18.021271320613817, max_relative = 1e-13);
        assert_relative_eq!(g.gamma, -9.0106356603069049, max_relative = 1e-12);
    }

    #[test]
    fn digital_gamma_changes_sign_across_strike() {
        let below = digital_analytics(&fig3_inputs(0.99));
        let above = digital_analytics(&fig3_inputs(1.01));
        assert!(below.gamma > 0.0);
        assert!(above.gamma < 0.0);
        assert!(digital_analytics(&fig3_inputs(1.0)).delta > 0.0);
    }

    #[test]
    fn zero_vol_limits() {
        let g = call_analytics(&BlackInputs {
            spot: 1.1,
            strike: 1.0,
            vol: 0.0,
            rate: 0.0,
            maturity: 1.0,
        });
        assert_eq!(g.price, 0.10000000000000009);
        assert_eq!(g.delta, 1.0);
        assert_eq!(g.gamma, 0.0);
        let d = digital_analytics(&BlackInputs {
            spot: 0.9,
            strike: 1.0,
            vol: 0.0,
            rate: 0.0,
            maturity: 1.0,
        });
        assert_eq!(d.price, 0.0);
    }

    #[test]
    fn discounting_enters_limits_consistently() {
        // with r > 0 the sigma->0 call exercises iff S > K e^{-rT}
        let g = call_analytics(&BlackInputs {
            spot: 0.97,
            strike: 1.0,
            vol: 0.0,
            rate: 0.05,
            maturity: 1.0,
        });
        assert!(g.price > 0.0);
        assert_eq!(g.delta, 1.0);
    }
}
