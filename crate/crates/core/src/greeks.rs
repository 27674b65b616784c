//! Orchestrates the Chebyshev Greeks procedure and the finite-difference
//! baseline over spot grids, and computes the error metrics used to compare
//! them.
//!
//! The Chebyshev path per evaluation spot: choose a half-width `a` (adaptive
//! or fixed), build the Chebyshev grid on `[x0 - a, x0 + a]`, price the
//! nodes with a single frozen-noise closure, and read price, delta and gamma
//! off the interpolant at `x0`. With an odd node count `x0` is itself a grid
//! node, so the price costs no extra evaluation.

use crate::adaptive::{adaptive_half_width, singularities_for, DomainParams, SingularityMap};
use crate::cheb::{ChebInterpolator, Grid};
use crate::error::{Error, Result};
use crate::pricing::{
    black_analytics, pricing_closure, BlackInputs, MarketState, McConfig, OracleKind, PayoffSpec,
    PricingClosure,
};
use crate::stencils::{fd_greeks, FdScheme};
use rayon::prelude::*;

/// Greeks method to run over a spot grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Central finite differences with the given stencil.
    Fd { scheme: FdScheme },
    /// Chebyshev interpolation with the adaptive half-width rule.
    ChebyshevAdaptive {
        n: usize,
        params: DomainParams,
        include_strikes: bool,
    },
    /// Chebyshev interpolation with a fixed half-width.
    ChebyshevFixed { n: usize, half_width: f64 },
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Fd { scheme } => format!("fd{}", scheme.points),
            Method::ChebyshevAdaptive { n, .. } => format!("cheb{n}_adaptive"),
            Method::ChebyshevFixed { n, .. } => format!("cheb{n}_fixed"),
        }
    }

    fn nodes(&self) -> usize {
        match self {
            Method::Fd { scheme } => scheme.points,
            Method::ChebyshevAdaptive { n, .. } | Method::ChebyshevFixed { n, .. } => *n,
        }
    }
}

/// A full sweep request: one payoff, one market, one method, one spot grid.
#[derive(Debug, Clone)]
pub struct GreeksRequest {
    pub payoff: PayoffSpec,
    pub market: MarketState,
    pub method: Method,
    pub mc: McConfig,
    pub bump_asset: usize,
    pub spot_grid: Vec<f64>,
    /// When set, FD bumps, fixed half-widths and the adaptive clamps are
    /// interpreted as fractions of each evaluation spot (the convention the
    /// comparison tables quote); otherwise they are absolute.
    pub relative_bumps: bool,
}

/// Per-spot result of one method.
#[derive(Debug, Clone)]
pub struct SpotRecord {
    pub spot: f64,
    pub price: f64,
    pub delta: f64,
    pub gamma: f64,
    /// FD bump h or Chebyshev half-width a actually used, absolute.
    pub width: f64,
    pub nodes: usize,
    pub paths: usize,
    /// Domain was shrunk to keep spots positive.
    pub clipped: bool,
    pub error: Option<String>,
}

/// Sweep output: one record per grid spot plus self-coherence statistics.
#[derive(Debug, Clone)]
pub struct GreeksReport {
    pub method: String,
    pub records: Vec<SpotRecord>,
    /// (eps_delta, eps_gamma) when every spot succeeded and the grid has at
    /// least two points.
    pub explanation: Option<(f64, f64)>,
}

impl GreeksReport {
    pub fn spots(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.spot).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.price).collect()
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.delta).collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.gamma).collect()
    }
}

/// Price, delta, gamma from one Chebyshev interpolator build.
#[derive(Debug, Clone, Copy)]
pub struct ChebGreeks {
    pub price: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Half-width actually used (after any positivity clipping).
    pub half_width: f64,
    pub clipped: bool,
}

/// Chebyshev Greeks of an arbitrary pricer at `x0`: sample the pricer on an
/// n-node Chebyshev grid over `[x0 - a, x0 + a]` and differentiate the
/// interpolant. Domains reaching into nonpositive spots are shrunk (and
/// flagged) rather than rejected.
pub fn chebyshev_greeks_with(
    mut pricer: impl FnMut(f64) -> Result<f64>,
    x0: f64,
    n: usize,
    half_width: f64,
) -> Result<ChebGreeks> {
    if !(x0 > 0.0) {
        return Err(Error::invalid(format!("spot must be positive, got {x0}")));
    }
    if !(half_width > 0.0) {
        return Err(Error::invalid(format!(
            "half-width must be positive, got {half_width}"
        )));
    }
    let (a, clipped) = if x0 - half_width <= 0.0 {
        (0.995 * x0, true)
    } else {
        (half_width, false)
    };
    let grid = Grid::chebyshev_centered(n, x0, a)?;
    let interp = ChebInterpolator::try_from_fn(grid, &mut pricer)?;
    Ok(ChebGreeks {
        // for odd n the center node is bitwise x0, so eval() returns the
        // stored nodal price; even n goes through the barycentric formula
        price: interp.eval(x0)?,
        delta: interp.derivative(1, x0)?,
        gamma: interp.derivative(2, x0)?,
        half_width: a,
        clipped,
    })
}

/// [`chebyshev_greeks_with`] driven by a frozen-noise pricing closure.
pub fn chebyshev_greeks(
    closure: &PricingClosure,
    x0: f64,
    n: usize,
    half_width: f64,
) -> Result<ChebGreeks> {
    chebyshev_greeks_with(|s| closure.price(s), x0, n, half_width)
}

/// Runs the requested method at every spot of the grid. Each spot builds
/// its own interpolator or stencil, all fed by one shared frozen-noise
/// closure; spots are independent work items and per-spot failures are
/// recorded without aborting the sweep.
pub fn greeks_sweep(req: &GreeksRequest) -> Result<GreeksReport> {
    if req.spot_grid.is_empty() {
        return Err(Error::invalid("empty spot grid"));
    }
    for w in req.spot_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::invalid("spot grid must be strictly increasing"));
        }
    }
    let closure = pricing_closure(&req.payoff, &req.market, req.mc, req.bump_asset)?;
    let singularities = match &req.method {
        Method::ChebyshevAdaptive {
            include_strikes, ..
        } => Some(singularities_for(
            &req.payoff,
            &req.market,
            req.bump_asset,
            *include_strikes,
        )),
        _ => None,
    };
    let sigma = req.market.vols[req.bump_asset];
    let records: Vec<SpotRecord> = req
        .spot_grid
        .par_iter()
        .map(|&spot| run_one_spot(req, &closure, singularities.as_ref(), sigma, spot))
        .collect();
    let explanation = if records.iter().all(|r| r.error.is_none()) && records.len() >= 2 {
        let spots: Vec<f64> = records.iter().map(|r| r.spot).collect();
        let prices: Vec<f64> = records.iter().map(|r| r.price).collect();
        let deltas: Vec<f64> = records.iter().map(|r| r.delta).collect();
        let gammas: Vec<f64> = records.iter().map(|r| r.gamma).collect();
        explanation_errors(&spots, &prices, &deltas, &gammas).ok()
    } else {
        None
    };
    Ok(GreeksReport {
        method: req.method.label(),
        records,
        explanation,
    })
}

fn run_one_spot(
    req: &GreeksRequest,
    closure: &PricingClosure,
    singularities: Option<&SingularityMap>,
    sigma: f64,
    spot: f64,
) -> SpotRecord {
    let paths = req.mc.paths;
    let nodes = req.method.nodes();
    let fail = |e: Error, width: f64| SpotRecord {
        spot,
        price: f64::NAN,
        delta: f64::NAN,
        gamma: f64::NAN,
        width,
        nodes,
        paths,
        clipped: false,
        error: Some(e.to_string()),
    };
    match &req.method {
        Method::Fd { scheme } => {
            let scheme = if req.relative_bumps {
                match scheme.scaled_to(spot) {
                    Ok(s) => s,
                    Err(e) => return fail(e, scheme.bump),
                }
            } else {
                *scheme
            };
            match fd_greeks(|s| closure.price(s), spot, &scheme) {
                Ok(g) => SpotRecord {
                    spot,
                    price: g.price,
                    delta: g.delta,
                    gamma: g.gamma,
                    width: scheme.bump,
                    nodes,
                    paths,
                    clipped: false,
                    error: None,
                },
                Err(e) => fail(e, scheme.bump),
            }
        }
        Method::ChebyshevAdaptive { n, params, .. } => {
            let params = if req.relative_bumps {
                match params.scaled_to(spot) {
                    Ok(p) => p,
                    Err(e) => return fail(e, 0.0),
                }
            } else {
                *params
            };
            let sing = singularities.expect("adaptive method provides singularities");
            let a = match adaptive_half_width(spot, sigma, sing, &params) {
                Ok(a) => a,
                Err(e) => return fail(e, 0.0),
            };
            cheb_record(closure, spot, *n, a, paths)
        }
        Method::ChebyshevFixed { n, half_width } => {
            let a = if req.relative_bumps {
                half_width * spot
            } else {
                *half_width
            };
            cheb_record(closure, spot, *n, a, paths)
        }
    }
}

fn cheb_record(closure: &PricingClosure, spot: f64, n: usize, a: f64, paths: usize) -> SpotRecord {
    match chebyshev_greeks(closure, spot, n, a) {
        Ok(g) => SpotRecord {
            spot,
            price: g.price,
            delta: g.delta,
            gamma: g.gamma,
            width: g.half_width,
            nodes: n,
            paths,
            clipped: g.clipped,
            error: None,
        },
        Err(e) => SpotRecord {
            spot,
            price: f64::NAN,
            delta: f64::NAN,
            gamma: f64::NAN,
            width: a,
            nodes: n,
            paths,
            clipped: false,
            error: Some(e.to_string()),
        },
    }
}

/// Self-coherence ("explanation") errors along a spot grid: how well delta
/// explains the forward price change and gamma the forward delta change,
///
/// ```text
/// eps(delta) = max_p |delta(S_p) dS_p - dP(S_p)|
/// eps(gamma) = max_p |gamma(S_p) dS_p - d delta(S_p)|
/// ```
///
/// with `dX(S_p) = X(S_{p+1}) - X(S_p)`; the maxima exclude the last point.
pub fn explanation_errors(
    spots: &[f64],
    prices: &[f64],
    deltas: &[f64],
    gammas: &[f64],
) -> Result<(f64, f64)> {
    let n = spots.len();
    if n < 2 {
        return Err(Error::GridTooSmall);
    }
    if prices.len() != n || deltas.len() != n || gammas.len() != n {
        return Err(Error::invalid("mismatched series lengths"));
    }
    let mut eps_delta: f64 = 0.0;
    let mut eps_gamma: f64 = 0.0;
    for p in 0..n - 1 {
        let ds = spots[p + 1] - spots[p];
        eps_delta = eps_delta.max((deltas[p] * ds - (prices[p + 1] - prices[p])).abs());
        eps_gamma = eps_gamma.max((gammas[p] * ds - (deltas[p + 1] - deltas[p])).abs());
    }
    Ok((eps_delta, eps_gamma))
}

/// Summary statistics of an error series over the spot grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub avg: f64,
    pub std: f64,
    pub max: f64,
}

impl ErrorStats {
    fn from_series(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let avg = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - avg) * (x - avg)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        ErrorStats {
            avg,
            std: var.sqrt(),
            max: xs.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        }
    }
}

/// Per-spot absolute errors against the analytic oracle plus their
/// statistics.
#[derive(Debug, Clone)]
pub struct NumericalErrors {
    pub eps_delta: Vec<f64>,
    pub eps_gamma: Vec<f64>,
    pub delta_stats: ErrorStats,
    pub gamma_stats: ErrorStats,
}

/// Compares a sweep against the closed-form Black Greeks. Only call and
/// digital payoffs have an oracle; anything else is an error.
pub fn numerical_errors(
    report: &GreeksReport,
    payoff: &PayoffSpec,
    market: &MarketState,
    bump_asset: usize,
) -> Result<NumericalErrors> {
    let (kind, strike, maturity) = match payoff {
        PayoffSpec::Call { strike, maturity } => (OracleKind::Call, *strike, *maturity),
        PayoffSpec::Digital { strike, maturity } => (OracleKind::Digital, *strike, *maturity),
        _ => return Err(Error::UnsupportedOracle),
    };
    let vol = market.vols[bump_asset];
    let mut eps_delta = Vec::with_capacity(report.records.len());
    let mut eps_gamma = Vec::with_capacity(report.records.len());
    for rec in &report.records {
        let oracle = black_analytics(
            kind,
            &BlackInputs {
                spot: rec.spot,
                strike,
                vol,
                rate: market.rate,
                maturity,
            },
        );
        eps_delta.push((rec.delta - oracle.delta).abs());
        eps_gamma.push((rec.gamma - oracle.gamma).abs());
    }
    Ok(NumericalErrors {
        delta_stats: ErrorStats::from_series(&eps_delta),
        gamma_stats: ErrorStats::from_series(&eps_gamma),
        eps_delta,
        eps_gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig3_market() -> MarketState {
        MarketState::single(1.0, 0.07, 0.0)
    }

    #[test]
    fn quadratic_pricer_greeks_are_exact() {
        let g = chebyshev_greeks_with(|x| Ok(3.0 * x * x - x + 2.0), 1.3, 7, 0.05).unwrap();
        assert_relative_eq!(g.price, 3.0 * 1.3 * 1.3 - 1.3 + 2.0, epsilon = 1e-13);
        assert_relative_eq!(g.delta, 6.0 * 1.3 - 1.0, max_relative = 1e-11);
        assert_relative_eq!(g.gamma, 6.0, max_relative = 1e-9);
    }

    #[test]
    fn zero_vol_call_is_locally_linear() {
        // whole domain on one side of the kink: delta is 0 or 1 exactly
        let market = MarketState::single(1.0, 0.0, 0.0);
        let cfg = McConfig {
            paths: 128,
            master_seed: 1,
            antithetic: false,
        };
        let payoff = PayoffSpec::Call {
            strike: 1.0,
            maturity: 0.5,
        };
        let closure = pricing_closure(&payoff, &market, cfg, 0).unwrap();
        let below = chebyshev_greeks(&closure, 0.9, 7, 0.05).unwrap();
        assert!(below.delta.abs() <= 1e-10);
        assert!(below.gamma.abs() <= 1e-10);
        let above = chebyshev_greeks(&closure, 1.2, 7, 0.05).unwrap();
        assert_relative_eq!(above.delta, 1.0, max_relative = 1e-10);
        assert!(above.gamma.abs() <= 1e-8);
    }

    #[test]
    fn price_equals_direct_mc_bitwise() {
        let market = fig3_market();
        let cfg = McConfig {
            paths: 40_000,
            master_seed: 33,
            antithetic: false,
        };
        let payoff = PayoffSpec::Digital {
            strike: 1.0,
            maturity: 0.1,
        };
        let closure = pricing_closure(&payoff, &market, cfg, 0).unwrap();
        let g = chebyshev_greeks(&closure, 1.0, 7, 0.03).unwrap();
        let direct = crate::pricing::mc_price(&payoff, &market, cfg).unwrap();
        assert_eq!(g.price.to_bits(), direct.price.to_bits());
    }

    #[test]
    fn cheb3_degenerates_to_fd3() {
        // 3-point Chebyshev grid on [x0-a, x0+a] is {x0-a, x0, x0+a}
        let market = fig3_market();
        let cfg = McConfig {
            paths: 20_000,
            master_seed: 8,
            antithetic: false,
        };
        let payoff = PayoffSpec::Call {
            strike: 1.0,
            maturity: 0.1,
        };
        let closure = pricing_closure(&payoff, &market, cfg, 0).unwrap();
        let a = 0.01;
        let cheb = chebyshev_greeks(&closure, 1.0, 3, a).unwrap();
        let fd = fd_greeks(
            |s| closure.price(s),
            1.0,
            &FdScheme::new(3, a).unwrap(),
        )
        .unwrap();
        assert_eq!(cheb.price.to_bits(), fd.price.to_bits());
        assert_relative_eq!(cheb.delta, fd.delta, max_relative = 1e-10);
        assert_relative_eq!(cheb.gamma, fd.gamma, max_relative = 1e-10);
    }

    #[test]
    fn even_node_count_uses_interpolated_center() {
        let g = chebyshev_greeks_with(|x| Ok(x * x), 1.0, 6, 0.04).unwrap();
        assert_relative_eq!(g.price, 1.0, epsilon = 1e-12);
        assert_relative_eq!(g.delta, 2.0, max_relative = 1e-10);
        assert_relative_eq!(g.gamma, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn domain_is_clipped_to_positive_spots() {
        let g = chebyshev_greeks_with(|x| Ok(x), 0.01, 5, 0.05).unwrap();
        assert!(g.clipped);
        assert!(g.half_width < 0.01);
    }

    #[test]
    fn explanation_errors_trivial_profiles() {
        let spots = [1.0, 1.1, 1.2, 1.3];
        // constant price
        let (ed, eg) =
            explanation_errors(&spots, &[2.0; 4], &[0.0; 4], &[0.0; 4]).unwrap();
        assert_eq!((ed, eg), (0.0, 0.0));
        // linear price P = 2S
        let prices: Vec<f64> = spots.iter().map(|s| 2.0 * s).collect();
        let (ed, eg) =
            explanation_errors(&spots, &prices, &[2.0; 4], &[0.0; 4]).unwrap();
        assert!(ed <= 1e-15);
        assert_eq!(eg, 0.0);
        assert!(matches!(
            explanation_errors(&[1.0], &[1.0], &[1.0], &[1.0]),
            Err(Error::GridTooSmall)
        ));
    }

    #[test]
    fn sweep_single_spot_matches_direct_call() {
        let market = fig3_market();
        let req = GreeksRequest {
            payoff: PayoffSpec::Call {
                strike: 1.0,
                maturity: 0.1,
            },
            market: market.clone(),
            method: Method::ChebyshevFixed {
                n: 7,
                half_width: 0.03,
            },
            mc: McConfig {
                paths: 10_000,
                master_seed: 3,
                antithetic: false,
            },
            bump_asset: 0,
            spot_grid: vec![1.0],
            relative_bumps: false,
        };
        let report = greeks_sweep(&req).unwrap();
        assert_eq!(report.records.len(), 1);
        assert!(report.explanation.is_none());
        let closure = pricing_closure(&req.payoff, &req.market, req.mc, 0).unwrap();
        let direct = chebyshev_greeks(&closure, 1.0, 7, 0.03).unwrap();
        assert_eq!(report.records[0].gamma.to_bits(), direct.gamma.to_bits());
    }

    #[test]
    fn adaptive_sweep_stays_within_clamps() {
        let market = fig3_market();
        let params = DomainParams::new(1.5, 0.0075, 0.05, 7).unwrap();
        let req = GreeksRequest {
            payoff: PayoffSpec::Digital {
                strike: 1.0,
                maturity: 0.1,
            },
            market,
            method: Method::ChebyshevAdaptive {
                n: 7,
                params,
                include_strikes: true,
            },
            mc: McConfig {
                paths: 5_000,
                master_seed: 4,
                antithetic: false,
            },
            bump_asset: 0,
            spot_grid: (0..21).map(|i| 0.95 + 0.005 * i as f64).collect(),
            relative_bumps: true,
        };
        let report = greeks_sweep(&req).unwrap();
        assert_eq!(report.records.len(), 21);
        for rec in &report.records {
            assert!(rec.error.is_none());
            let lo = params.a_min * rec.spot;
            let hi = params.a_max * rec.spot;
            assert!(
                rec.width >= lo - 1e-15 && rec.width <= hi + 1e-15,
                "a = {} outside [{lo}, {hi}]",
                rec.width
            );
        }
        assert!(report.explanation.is_some());
    }

    #[test]
    fn sweep_is_parallel_deterministic() {
        let market = fig3_market();
        let req = GreeksRequest {
            payoff: PayoffSpec::Digital {
                strike: 1.0,
                maturity: 0.1,
            },
            market,
            method: Method::Fd {
                scheme: FdScheme::new(3, 0.0025).unwrap(),
            },
            mc: McConfig {
                paths: 8_000,
                master_seed: 5,
                antithetic: false,
            },
            bump_asset: 0,
            spot_grid: (0..16).map(|i| 0.96 + 0.005 * i as f64).collect(),
            relative_bumps: true,
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| greeks_sweep(&req).unwrap())
        };
        let a = run(1);
        let b = run(4);
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.gamma.to_bits(), rb.gamma.to_bits());
            assert_eq!(ra.price.to_bits(), rb.price.to_bits());
        }
    }

    #[test]
    fn numerical_errors_need_an_oracle() {
        let report = GreeksReport {
            method: "fd3".into(),
            records: vec![],
            explanation: None,
        };
        let tarf = PayoffSpec::Tarf(crate::pricing::TarfSpec {
            strike: 1.15,
            ki_barrier: 1.19,
            ko_barrier: 1.135,
            target: 0.2,
            notionals: vec![1.0],
            fixings: vec![0.1],
        });
        let market = fig3_market();
        assert!(matches!(
            numerical_errors(&report, &tarf, &market, 0),
            Err(Error::UnsupportedOracle)
        ));
    }

    #[test]
    fn numerical_errors_near_zero_for_analytic_sweep() {
        // replace MC with the closed form itself: errors collapse to the
        // interpolation truncation level
        let market = fig3_market();
        let payoff = PayoffSpec::Call {
            strike: 1.0,
            maturity: 0.1,
        };
        let spots: Vec<f64> = (0..41).map(|i| 0.96 + 0.002 * i as f64).collect();
        let records: Vec<SpotRecord> = spots
            .iter()
            .map(|&s| {
                let g = chebyshev_greeks_with(
                    |x| {
                        Ok(crate::pricing::call_analytics(&BlackInputs {
                            spot: x,
                            strike: 1.0,
                            vol: 0.07,
                            rate: 0.0,
                            maturity: 0.1,
                        })
                        .price)
                    },
                    s,
                    21,
                    0.035,
                )
                .unwrap();
                SpotRecord {
                    spot: s,
                    price: g.price,
                    delta: g.delta,
                    gamma: g.gamma,
                    width: g.half_width,
                    nodes: 21,
                    paths: 0,
                    clipped: false,
                    error: None,
                }
            })
            .collect();
        let report = GreeksReport {
            method: "cheb21_fixed".into(),
            records,
            explanation: None,
        };
        let errs = numerical_errors(&report, &payoff, &market, 0).unwrap();
        assert!(errs.gamma_stats.max < 1e-4, "max {}", errs.gamma_stats.max);
        assert!(errs.delta_stats.max < 1e-7);
    }
}
