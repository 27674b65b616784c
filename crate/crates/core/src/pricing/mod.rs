//! Deterministic-by-seed Monte Carlo pricing under Black/GBM dynamics
//! (single- and two-asset), plus the closed-form oracles.
//!
//! GBM increments are exact at the fixing dates, so no Euler substeps are
//! needed. Noise is assigned per (path, fixing, asset) by a counter-based
//! generator and is independent of the spot: a [`PricingClosure`] therefore
//! reuses the identical path noise for every spot query (common random
//! numbers), which is what makes bumped revaluations differ only by the
//! payoff response. Accumulation is chunked in fixed order, so results are
//! bitwise identical for any thread count.

pub mod black;
pub mod payoff;
pub mod rng;

pub use black::{black_analytics, call_analytics, digital_analytics, BlackGreeks, BlackInputs, OracleKind};
pub use payoff::{AutocallSpec, PayoffSpec, TarfSpec};

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Market snapshot: per-asset spots and ATM vols, one flat rate, a single
/// correlation for the two-asset case, and reference fixings for
/// performance payoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    pub spots: Vec<f64>,
    pub vols: Vec<f64>,
    pub rate: f64,
    pub correlation: f64,
    pub ref_fixings: Vec<f64>,
}

impl MarketState {
    /// One-asset market with the reference fixing set to the spot.
    pub fn single(spot: f64, vol: f64, rate: f64) -> Self {
        MarketState {
            spots: vec![spot],
            vols: vec![vol],
            rate,
            correlation: 0.0,
            ref_fixings: vec![spot],
        }
    }

    fn validate(&self, n_assets: usize) -> Result<()> {
        if self.spots.len() != n_assets || self.vols.len() != n_assets {
            return Err(Error::invalid(format!(
                "payoff needs {n_assets} assets, market has {} spots / {} vols",
                self.spots.len(),
                self.vols.len()
            )));
        }
        if self.spots.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::invalid("spots must be positive"));
        }
        if self.vols.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::invalid("vols must be nonnegative"));
        }
        if !(-1.0..=1.0).contains(&self.correlation) {
            return Err(Error::invalid(format!(
                "correlation {} outside [-1, 1]",
                self.correlation
            )));
        }
        if self.ref_fixings.len() < n_assets || self.ref_fixings.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::invalid("need a positive reference fixing per asset"));
        }
        Ok(())
    }
}

/// Monte Carlo configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub paths: usize,
    pub master_seed: u64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            paths: 300_000,
            master_seed: 42,
            antithetic: false,
        }
    }
}

/// Discounted mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    pub std_err: f64,
}

// Per-(fixing, asset) step data shared by every path.
#[derive(Debug, Clone)]
struct SimPlan {
    n_fixings: usize,
    n_assets: usize,
    drift: Vec<f64>,  // (r - v^2/2) dt_j       [j * n_assets + a]
    volsq: Vec<f64>,  // v sqrt(dt_j)           [j * n_assets + a]
    disc: Vec<f64>,   // e^{-r T_j}
    corr: f64,
    corr_orth: f64,   // sqrt(1 - corr^2)
}

impl SimPlan {
    fn new(fixings: &[f64], market: &MarketState, n_assets: usize) -> Self {
        let n_fixings = fixings.len();
        let mut drift = Vec::with_capacity(n_fixings * n_assets);
        let mut volsq = Vec::with_capacity(n_fixings * n_assets);
        let mut disc = Vec::with_capacity(n_fixings);
        let mut prev = 0.0;
        for &t in fixings {
            let dt = t - prev;
            prev = t;
            for a in 0..n_assets {
                let v = market.vols[a];
                drift.push((market.rate - 0.5 * v * v) * dt);
                volsq.push(v * dt.sqrt());
            }
            disc.push((-market.rate * t).exp());
        }
        SimPlan {
            n_fixings,
            n_assets,
            drift,
            volsq,
            disc,
            corr: market.correlation,
            corr_orth: (1.0 - market.correlation * market.correlation).sqrt(),
        }
    }

    #[inline]
    fn draw_index(&self, path: usize, fixing: usize, asset: usize) -> u64 {
        ((path * self.n_fixings + fixing) * self.n_assets + asset) as u64
    }

    // Correlated standard normal for (path, fixing, asset); antithetic
    // pairing maps path 2q+1 to the negated draws of pair q.
    #[inline]
    fn z(&self, seed: u64, antithetic: bool, path: usize, fixing: usize, asset: usize) -> f64 {
        let (p, sign) = if antithetic {
            (path >> 1, if path & 1 == 1 { -1.0 } else { 1.0 })
        } else {
            (path, 1.0)
        };
        let z0 = rng::gaussian(seed, self.draw_index(p, fixing, 0));
        let raw = if asset == 0 {
            z0
        } else {
            self.corr * z0 + self.corr_orth * rng::gaussian(seed, self.draw_index(p, fixing, asset))
        };
        sign * raw
    }

    // One GBM step factor; the single expression both the cache builder and
    // the uncached path use, so the two modes agree bitwise.
    #[inline]
    fn multiplier(&self, seed: u64, antithetic: bool, path: usize, fixing: usize, asset: usize) -> f64 {
        let idx = fixing * self.n_assets + asset;
        (self.drift[idx] + self.volsq[idx] * self.z(seed, antithetic, path, fixing, asset)).exp()
    }
}

// Compensated accumulator; the fixed evaluation order keeps it
// thread-count independent.
#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    fn total(&self) -> f64 {
        self.sum
    }
}

// Fixed accumulation chunk; results must not depend on the thread count.
const PATH_CHUNK: usize = 16_384;
// Multiplier cache cap (entries, 8 bytes each): 640 MB.
const CACHE_CAP_ENTRIES: usize = 80_000_000;

/// A reusable pricer in which only the bumped asset's spot varies while the
/// random-number stream stays frozen. Queries are deterministic: the same
/// spot always returns the bitwise-identical price.
///
/// GBM step factors do not depend on the spot, so they are precomputed once
/// (memory permitting) and shared by every query; sweeps over hundreds of
/// spots then pay the noise-generation cost once.
#[derive(Debug, Clone)]
pub struct PricingClosure {
    payoff: PayoffSpec,
    market: MarketState,
    cfg: McConfig,
    bump_asset: usize,
    plan: SimPlan,
    multipliers: Option<Vec<f64>>,
}

impl PricingClosure {
    pub fn new(
        payoff: PayoffSpec,
        market: MarketState,
        cfg: McConfig,
        bump_asset: usize,
    ) -> Result<Self> {
        payoff.validate()?;
        let n_assets = payoff.n_assets();
        market.validate(n_assets)?;
        if bump_asset >= n_assets {
            return Err(Error::invalid(format!(
                "bump asset {bump_asset} out of range for {n_assets} assets"
            )));
        }
        if cfg.paths < 1 {
            return Err(Error::invalid("need at least one path"));
        }
        if cfg.antithetic && cfg.paths % 2 != 0 {
            return Err(Error::invalid("antithetic pairing needs an even path count"));
        }
        let fixings = payoff.fixings();
        let plan = SimPlan::new(&fixings, &market, n_assets);
        let entries = cfg.paths * plan.n_fixings * n_assets;
        let multipliers = (entries <= CACHE_CAP_ENTRIES).then(|| {
            let mut cache = vec![0.0f64; entries];
            let stride = plan.n_fixings * n_assets;
            cache
                .par_chunks_mut(stride * PATH_CHUNK)
                .enumerate()
                .for_each(|(chunk, slab)| {
                    for (off, slot) in slab.iter_mut().enumerate() {
                        let p = chunk * PATH_CHUNK + off / stride;
                        let j = (off % stride) / n_assets;
                        let a = off % n_assets;
                        *slot = plan.multiplier(cfg.master_seed, cfg.antithetic, p, j, a);
                    }
                });
            cache
        });
        Ok(PricingClosure {
            payoff,
            market,
            cfg,
            bump_asset,
            plan,
            multipliers,
        })
    }

    pub fn payoff(&self) -> &PayoffSpec {
        &self.payoff
    }

    pub fn market(&self) -> &MarketState {
        &self.market
    }

    pub fn config(&self) -> &McConfig {
        &self.cfg
    }

    pub fn bump_asset(&self) -> usize {
        self.bump_asset
    }

    /// Discounted MC price with the bumped asset's spot set to `spot`.
    pub fn price(&self, spot: f64) -> Result<f64> {
        self.estimate(spot).map(|e| e.price)
    }

    /// Price and standard error at `spot`.
    pub fn estimate(&self, spot: f64) -> Result<McEstimate> {
        if !(spot > 0.0) || !spot.is_finite() {
            return Err(Error::invalid(format!("spot must be positive, got {spot}")));
        }
        let samples = if self.cfg.antithetic {
            self.cfg.paths / 2
        } else {
            self.cfg.paths
        };
        let n_chunks = samples.div_ceil(PATH_CHUNK);
        let stride = self.plan.n_fixings * self.plan.n_assets;
        let partials: Vec<(f64, f64)> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut panel = vec![0.0f64; stride];
                let mut sum = Kahan::default();
                let mut sumsq = Kahan::default();
                let end = ((c + 1) * PATH_CHUNK).min(samples);
                for q in c * PATH_CHUNK..end {
                    let v = if self.cfg.antithetic {
                        0.5 * (self.path_value(spot, 2 * q, &mut panel)
                            + self.path_value(spot, 2 * q + 1, &mut panel))
                    } else {
                        self.path_value(spot, q, &mut panel)
                    };
                    sum.add(v);
                    sumsq.add(v * v);
                }
                (sum.total(), sumsq.total())
            })
            .collect();
        let mut sum = Kahan::default();
        let mut sumsq = Kahan::default();
        for &(s, s2) in &partials {
            sum.add(s);
            sumsq.add(s2);
        }
        let (sum, sumsq) = (sum.total(), sumsq.total());
        let n = samples as f64;
        let mean = sum / n;
        let std_err = if samples > 1 {
            (((sumsq - n * mean * mean) / (n - 1.0)).max(0.0) / n).sqrt()
        } else {
            f64::NAN
        };
        Ok(McEstimate {
            price: mean,
            std_err,
        })
    }

    // Simulates one path into `panel` and values the payoff on it.
    #[inline]
    fn path_value(&self, spot: f64, path: usize, panel: &mut [f64]) -> f64 {
        let na = self.plan.n_assets;
        let mut state = [0.0f64; 2];
        for a in 0..na {
            state[a] = if a == self.bump_asset {
                spot
            } else {
                self.market.spots[a]
            };
        }
        for j in 0..self.plan.n_fixings {
            for a in 0..na {
                let m = match &self.multipliers {
                    Some(cache) => cache[(path * self.plan.n_fixings + j) * na + a],
                    None => self
                        .plan
                        .multiplier(self.cfg.master_seed, self.cfg.antithetic, path, j, a),
                };
                state[a] *= m;
                panel[j * na + a] = state[a];
            }
        }
        self.payoff
            .path_value(panel, na, &self.plan.disc, &self.market.ref_fixings)
    }
}

/// Frozen-noise pricer for `payoff` in which `bump_asset`'s spot varies.
pub fn pricing_closure(
    payoff: &PayoffSpec,
    market: &MarketState,
    cfg: McConfig,
    bump_asset: usize,
) -> Result<PricingClosure> {
    PricingClosure::new(payoff.clone(), market.clone(), cfg, bump_asset)
}

/// Discounted Monte Carlo price of `payoff` under `market`. Identical
/// inputs (including the master seed) return bitwise-identical estimates
/// regardless of thread count.
pub fn mc_price(payoff: &PayoffSpec, market: &MarketState, cfg: McConfig) -> Result<McEstimate> {
    let closure = pricing_closure(payoff, market, cfg, 0)?;
    closure.estimate(market.spots[0])
}
