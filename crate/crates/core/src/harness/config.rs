//! Experiment configuration: one TOML file per experiment, flat sections
//! for payoff/market/mc plus an array of method blocks for comparisons.

use crate::adaptive::DomainParams;
use crate::error::{Error, Result};
use crate::greeks::Method;
use crate::math::fnv1a64;
use crate::pricing::{AutocallSpec, MarketState, McConfig, PayoffSpec, TarfSpec};
use crate::stencils::FdScheme;
use serde::Deserialize;
use std::path::Path;

/// Which study to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Convergence,
    DigitalErrors,
    Sweep,
    VarianceScaling,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::DigitalErrors => "digital_errors",
            Experiment::Sweep => "sweep",
            Experiment::VarianceScaling => "variance_scaling",
        }
    }
}

/// Name/description pairs for the CLI listing.
pub const EXPERIMENTS: &[(&str, &str)] = &[
    (
        "convergence",
        "interpolation error vs node count for Chebyshev and uniform grids (analytic or MC pricer)",
    ),
    (
        "digital_errors",
        "delta/gamma error statistics vs the analytic digital oracle for several Greeks methods",
    ),
    (
        "sweep",
        "per-spot price/delta/gamma curves for each configured method, with explanation errors",
    ),
    (
        "variance_scaling",
        "variance of FD delta/gamma across master seeds over a bump ladder, with fitted slopes",
    ),
];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub output: Option<String>,
    pub payoff: PayoffConfig,
    pub market: MarketConfig,
    pub mc: McBlock,
    #[serde(default)]
    pub grid: Option<GridBlock>,
    #[serde(default, rename = "method")]
    pub methods: Vec<MethodConfig>,
    #[serde(default)]
    pub convergence: Option<ConvergenceBlock>,
    #[serde(default)]
    pub variance: Option<VarianceBlock>,
    /// Bumps/half-widths/clamps are fractions of the evaluation spot.
    #[serde(default = "default_true")]
    pub relative_bumps: bool,
    /// FNV-1a of the raw config text, set on load.
    #[serde(skip)]
    pub source_hash: u64,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.source_hash = fnv1a64(text.as_bytes());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        match self.experiment {
            Experiment::Convergence => {
                if self.convergence.is_none() {
                    return Err(Error::Config(
                        "convergence experiment needs a [convergence] block".into(),
                    ));
                }
            }
            Experiment::VarianceScaling => {
                let v = self.variance.as_ref().ok_or_else(|| {
                    Error::Config("variance_scaling needs a [variance] block".into())
                })?;
                if v.bumps.len() < 2 {
                    return Err(Error::invalid(
                        "variance scaling needs at least 2 bump levels",
                    ));
                }
            }
            Experiment::DigitalErrors | Experiment::Sweep => {
                if self.grid.is_none() {
                    return Err(Error::Config(format!(
                        "{} experiment needs a [grid] block",
                        self.experiment.name()
                    )));
                }
                if self.methods.is_empty() {
                    return Err(Error::Config(
                        "need at least one [[method]] block".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn payoff_spec(&self) -> Result<PayoffSpec> {
        self.payoff.to_spec()
    }

    pub fn market_state(&self) -> Result<MarketState> {
        self.market.to_state()
    }

    pub fn mc_config(&self) -> McConfig {
        McConfig {
            paths: self.mc.paths,
            master_seed: self.mc.seed,
            antithetic: self.mc.antithetic,
        }
    }

    /// Evaluation spots from the [grid] block.
    pub fn spot_grid(&self) -> Result<Vec<f64>> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| Error::Config("missing [grid] block".into()))?;
        g.spots()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffConfig {
    Call {
        strike: f64,
        maturity: f64,
    },
    Put {
        strike: f64,
        maturity: f64,
    },
    Digital {
        strike: f64,
        maturity: f64,
    },
    Tarf {
        strike: f64,
        ki_barrier: f64,
        ko_barrier: f64,
        target: f64,
        #[serde(default)]
        notional: Option<f64>,
        #[serde(default)]
        notionals: Option<Vec<f64>>,
        #[serde(default)]
        fixings: Option<Vec<f64>>,
        #[serde(default)]
        fixing_count: Option<usize>,
        #[serde(default)]
        first_fixing: Option<f64>,
        #[serde(default)]
        fixing_spacing: Option<f64>,
    },
    Autocallable {
        coupon_barrier: f64,
        call_barrier: f64,
        guarantee_barrier: f64,
        rebate: f64,
        #[serde(default)]
        notional: Option<f64>,
        #[serde(default)]
        notionals: Option<Vec<f64>>,
        #[serde(default)]
        fixings: Option<Vec<f64>>,
        #[serde(default)]
        fixing_count: Option<usize>,
        #[serde(default)]
        first_fixing: Option<f64>,
        #[serde(default)]
        fixing_spacing: Option<f64>,
    },
}

fn build_schedule(
    fixings: &Option<Vec<f64>>,
    count: Option<usize>,
    first: Option<f64>,
    spacing: Option<f64>,
) -> Result<Vec<f64>> {
    if let Some(f) = fixings {
        return Ok(f.clone());
    }
    match (count, first, spacing) {
        (Some(n), Some(t0), Some(dt)) => {
            Ok((0..n).map(|i| t0 + i as f64 * dt).collect())
        }
        (Some(1), Some(t0), None) => Ok(vec![t0]),
        _ => Err(Error::Config(
            "schedule needs either `fixings` or `fixing_count` + `first_fixing` + `fixing_spacing`"
                .into(),
        )),
    }
}

fn build_notionals(
    notional: Option<f64>,
    notionals: &Option<Vec<f64>>,
    n: usize,
    default: f64,
) -> Vec<f64> {
    if let Some(v) = notionals {
        v.clone()
    } else {
        vec![notional.unwrap_or(default); n]
    }
}

impl PayoffConfig {
    pub fn to_spec(&self) -> Result<PayoffSpec> {
        let spec = match self {
            PayoffConfig::Call { strike, maturity } => PayoffSpec::Call {
                strike: *strike,
                maturity: *maturity,
            },
            PayoffConfig::Put { strike, maturity } => PayoffSpec::Put {
                strike: *strike,
                maturity: *maturity,
            },
            PayoffConfig::Digital { strike, maturity } => PayoffSpec::Digital {
                strike: *strike,
                maturity: *maturity,
            },
            PayoffConfig::Tarf {
                strike,
                ki_barrier,
                ko_barrier,
                target,
                notional,
                notionals,
                fixings,
                fixing_count,
                first_fixing,
                fixing_spacing,
            } => {
                let sched = build_schedule(fixings, *fixing_count, *first_fixing, *fixing_spacing)?;
                let pay = build_notionals(*notional, notionals, sched.len(), 1.0);
                PayoffSpec::Tarf(TarfSpec {
                    strike: *strike,
                    ki_barrier: *ki_barrier,
                    ko_barrier: *ko_barrier,
                    target: *target,
                    notionals: pay,
                    fixings: sched,
                })
            }
            PayoffConfig::Autocallable {
                coupon_barrier,
                call_barrier,
                guarantee_barrier,
                rebate,
                notional,
                notionals,
                fixings,
                fixing_count,
                first_fixing,
                fixing_spacing,
            } => {
                let sched = build_schedule(fixings, *fixing_count, *first_fixing, *fixing_spacing)?;
                let pay = build_notionals(*notional, notionals, sched.len(), 0.05);
                PayoffSpec::Autocallable(AutocallSpec {
                    coupon_barrier: *coupon_barrier,
                    call_barrier: *call_barrier,
                    guarantee_barrier: *guarantee_barrier,
                    rebate: *rebate,
                    notionals: pay,
                    fixings: sched,
                })
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub spots: Vec<f64>,
    pub vols: Vec<f64>,
    pub rate: f64,
    #[serde(default)]
    pub correlation: f64,
    #[serde(default)]
    pub ref_fixings: Option<Vec<f64>>,
}

impl MarketConfig {
    pub fn to_state(&self) -> Result<MarketState> {
        Ok(MarketState {
            spots: self.spots.clone(),
            vols: self.vols.clone(),
            rate: self.rate,
            correlation: self.correlation,
            ref_fixings: self.ref_fixings.clone().unwrap_or_else(|| self.spots.clone()),
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub antithetic: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
}

impl GridBlock {
    pub fn spots(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::invalid("grid count must be positive"));
        }
        if self.count == 1 {
            return Ok(vec![self.lo]);
        }
        if !(self.hi > self.lo) {
            return Err(Error::invalid("grid needs lo < hi"));
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        let mut spots: Vec<f64> = (0..self.count).map(|i| self.lo + i as f64 * step).collect();
        *spots.last_mut().unwrap() = self.hi;
        Ok(spots)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    Fd {
        points: usize,
        bump: f64,
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        paths: Option<usize>,
    },
    ChebAdaptive {
        #[serde(default = "default_nodes")]
        nodes: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
        a_min: f64,
        a_max: f64,
        #[serde(default = "default_true")]
        include_strikes: bool,
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        paths: Option<usize>,
    },
    ChebFixed {
        #[serde(default = "default_nodes")]
        nodes: usize,
        half_width: f64,
        #[serde(default)]
        label: Option<String>,
        #[serde(default)]
        paths: Option<usize>,
    },
}

fn default_nodes() -> usize {
    7
}

fn default_alpha() -> f64 {
    1.5
}

impl MethodConfig {
    pub fn to_method(&self) -> Result<Method> {
        Ok(match self {
            MethodConfig::Fd { points, bump, .. } => Method::Fd {
                scheme: FdScheme::new(*points, *bump)?,
            },
            MethodConfig::ChebAdaptive {
                nodes,
                alpha,
                a_min,
                a_max,
                include_strikes,
                ..
            } => Method::ChebyshevAdaptive {
                n: *nodes,
                params: DomainParams::new(*alpha, *a_min, *a_max, *nodes)?,
                include_strikes: *include_strikes,
            },
            MethodConfig::ChebFixed {
                nodes, half_width, ..
            } => Method::ChebyshevFixed {
                n: *nodes,
                half_width: *half_width,
            },
        })
    }

    pub fn label(&self) -> Result<String> {
        let explicit = match self {
            MethodConfig::Fd { label, .. }
            | MethodConfig::ChebAdaptive { label, .. }
            | MethodConfig::ChebFixed { label, .. } => label.clone(),
        };
        match explicit {
            Some(l) => Ok(l),
            None => Ok(self.to_method()?.label()),
        }
    }

    pub fn paths_override(&self) -> Option<usize> {
        match self {
            MethodConfig::Fd { paths, .. }
            | MethodConfig::ChebAdaptive { paths, .. }
            | MethodConfig::ChebFixed { paths, .. } => *paths,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceBlock {
    pub pricer: PricerKind,
    pub ladder: Vec<usize>,
    pub domain_lo: f64,
    pub domain_hi: f64,
    #[serde(default = "default_test_points")]
    pub test_points: usize,
}

fn default_test_points() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PricerKind {
    Analytic,
    Mc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceBlock {
    pub seeds: usize,
    /// Bump ladder, fractions of the spot.
    pub bumps: Vec<f64>,
    pub spot: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    3
}
