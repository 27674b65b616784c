//! The experiment implementations behind the CLI: convergence ladders,
//! digital-oracle error tables, per-spot sweeps and variance scaling.

use super::config::{Experiment, ExperimentConfig, PricerKind};
use super::table::{fmt_f64, ResultTable};
use crate::cheb::{ChebInterpolator, Domain, Grid};
use crate::error::{Error, Result};
use crate::greeks::{
    greeks_sweep, numerical_errors, ErrorStats, GreeksReport, GreeksRequest, NumericalErrors,
};
use crate::pricing::{
    black_analytics, pricing_closure, rng::derive_stream_seed, BlackInputs, McConfig, OracleKind,
    PayoffSpec,
};
use crate::stencils::{fd_greeks, FdScheme};

fn oracle_kind(payoff: &PayoffSpec) -> Result<(OracleKind, f64, f64)> {
    match payoff {
        PayoffSpec::Call { strike, maturity } => Ok((OracleKind::Call, *strike, *maturity)),
        PayoffSpec::Digital { strike, maturity } => Ok((OracleKind::Digital, *strike, *maturity)),
        _ => Err(Error::UnsupportedOracle),
    }
}

/// L-infinity errors of one interpolant against the analytic oracle.
#[derive(Debug, Clone, Copy)]
pub struct InterpErrors {
    pub price: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// One ladder entry of the convergence study.
#[derive(Debug, Clone, Copy)]
pub struct ConvergenceRow {
    pub n: usize,
    pub chebyshev: InterpErrors,
    pub uniform: InterpErrors,
}

#[derive(Debug, Clone)]
pub struct ConvergenceResult {
    pub rows: Vec<ConvergenceRow>,
    pub table: ResultTable,
}

impl ConvergenceResult {
    pub fn row(&self, n: usize) -> Option<&ConvergenceRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Interpolation error vs node count, Chebyshev against uniform grids, for
/// an analytic or Monte Carlo pricer of a call/digital. Errors are maxima
/// over a dense test grid against the closed-form price, delta and gamma.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceResult> {
    let block = cfg
        .convergence
        .as_ref()
        .ok_or_else(|| Error::Config("missing [convergence] block".into()))?;
    let payoff = cfg.payoff_spec()?;
    let market = cfg.market_state()?;
    let (kind, strike, maturity) = oracle_kind(&payoff)?;
    let domain = Domain::new(block.domain_lo, block.domain_hi)?;
    let vol = market.vols[0];
    let rate = market.rate;
    let oracle = |spot: f64| {
        black_analytics(
            kind,
            &BlackInputs {
                spot,
                strike,
                vol,
                rate,
                maturity,
            },
        )
    };

    // nodal value source: the closed form, or one frozen-noise closure
    // shared by the entire ladder
    let closure = match block.pricer {
        PricerKind::Analytic => None,
        PricerKind::Mc => Some(pricing_closure(&payoff, &market, cfg.mc_config(), 0)?),
    };
    let node_value = |x: f64| -> Result<f64> {
        match &closure {
            None => Ok(oracle(x).price),
            Some(c) => c.price(x),
        }
    };

    let m = block.test_points.max(2);
    let test_points: Vec<f64> = (0..m)
        .map(|i| domain.lo + domain.width() * i as f64 / (m - 1) as f64)
        .collect();
    let targets: Vec<_> = test_points.iter().map(|&x| oracle(x)).collect();

    let errors_for = |grid: Grid| -> Result<InterpErrors> {
        let interp = ChebInterpolator::try_from_fn(grid, node_value)?;
        let mut e = InterpErrors {
            price: 0.0,
            delta: 0.0,
            gamma: 0.0,
        };
        for (&x, t) in test_points.iter().zip(&targets) {
            e.price = e.price.max((interp.eval(x)? - t.price).abs());
            e.delta = e.delta.max((interp.derivative(1, x)? - t.delta).abs());
            e.gamma = e.gamma.max((interp.derivative(2, x)? - t.gamma).abs());
        }
        Ok(e)
    };

    let mut rows = Vec::with_capacity(block.ladder.len());
    for &n in &block.ladder {
        rows.push(ConvergenceRow {
            n,
            chebyshev: errors_for(Grid::chebyshev(n, domain)?)?,
            uniform: errors_for(Grid::uniform(n, domain)?)?,
        });
    }

    let mut table = ResultTable::new(&[
        "n",
        "cheb_err_price",
        "cheb_err_delta",
        "cheb_err_gamma",
        "unif_err_price",
        "unif_err_delta",
        "unif_err_gamma",
    ]);
    table.standard_meta(
        Experiment::Convergence.name(),
        cfg.source_hash,
        cfg.mc.seed,
    );
    table.meta(
        "pricer",
        match block.pricer {
            PricerKind::Analytic => "analytic",
            PricerKind::Mc => "mc",
        },
    );
    table.meta("domain", format!("[{}, {}]", domain.lo, domain.hi));
    for r in &rows {
        table.push_row(vec![
            r.n.to_string(),
            fmt_f64(r.chebyshev.price),
            fmt_f64(r.chebyshev.delta),
            fmt_f64(r.chebyshev.gamma),
            fmt_f64(r.uniform.price),
            fmt_f64(r.uniform.delta),
            fmt_f64(r.uniform.gamma),
        ]);
    }
    Ok(ConvergenceResult { rows, table })
}

/// Per-method error summary against the analytic oracle.
#[derive(Debug, Clone)]
pub struct MethodErrorSummary {
    pub label: String,
    pub nodes: usize,
    pub paths: usize,
    pub delta: ErrorStats,
    pub gamma: ErrorStats,
    pub errors: NumericalErrors,
}

#[derive(Debug, Clone)]
pub struct DigitalErrorsResult {
    pub methods: Vec<MethodErrorSummary>,
    pub table: ResultTable,
}

impl DigitalErrorsResult {
    pub fn summary(&self, label: &str) -> Option<&MethodErrorSummary> {
        self.methods.iter().find(|m| m.label == label)
    }
}

/// Error statistics of every configured method against the closed-form
/// digital Greeks over the spot grid.
pub fn run_digital_errors(cfg: &ExperimentConfig) -> Result<DigitalErrorsResult> {
    let payoff = cfg.payoff_spec()?;
    if !matches!(payoff, PayoffSpec::Digital { .. }) {
        return Err(Error::Config(
            "digital_errors requires a digital payoff".into(),
        ));
    }
    let market = cfg.market_state()?;
    let spot_grid = cfg.spot_grid()?;
    let mut methods = Vec::with_capacity(cfg.methods.len());
    for mcfg in &cfg.methods {
        let mut mc = cfg.mc_config();
        if let Some(paths) = mcfg.paths_override() {
            mc.paths = paths;
        }
        let req = GreeksRequest {
            payoff: payoff.clone(),
            market: market.clone(),
            method: mcfg.to_method()?,
            mc,
            bump_asset: 0,
            spot_grid: spot_grid.clone(),
            relative_bumps: cfg.relative_bumps,
        };
        let report = greeks_sweep(&req)?;
        if let Some(bad) = report.records.iter().find(|r| r.error.is_some()) {
            return Err(Error::Config(format!(
                "method {} failed at spot {}: {}",
                report.method,
                bad.spot,
                bad.error.clone().unwrap_or_default()
            )));
        }
        let errors = numerical_errors(&report, &payoff, &market, 0)?;
        methods.push(MethodErrorSummary {
            label: mcfg.label()?,
            nodes: report.records.first().map(|r| r.nodes).unwrap_or(0),
            paths: mc.paths,
            delta: errors.delta_stats,
            gamma: errors.gamma_stats,
            errors,
        });
    }

    let mut table = ResultTable::new(&[
        "method",
        "nodes",
        "paths",
        "avg_eps_delta",
        "std_eps_delta",
        "max_eps_delta",
        "avg_eps_gamma",
        "std_eps_gamma",
        "max_eps_gamma",
    ]);
    table.standard_meta(
        Experiment::DigitalErrors.name(),
        cfg.source_hash,
        cfg.mc.seed,
    );
    table.meta("spots", spot_grid.len());
    for m in &methods {
        table.push_row(vec![
            m.label.clone(),
            m.nodes.to_string(),
            m.paths.to_string(),
            fmt_f64(m.delta.avg),
            fmt_f64(m.delta.std),
            fmt_f64(m.delta.max),
            fmt_f64(m.gamma.avg),
            fmt_f64(m.gamma.std),
            fmt_f64(m.gamma.max),
        ]);
    }
    Ok(DigitalErrorsResult { methods, table })
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub reports: Vec<GreeksReport>,
    pub table: ResultTable,
}

impl SweepResult {
    pub fn report(&self, label: &str) -> Option<&GreeksReport> {
        self.reports.iter().find(|r| r.method == label)
    }
}

/// Runs every configured method over the spot grid and emits per-spot
/// price/delta/gamma columns plus summary explanation errors.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let payoff = cfg.payoff_spec()?;
    let market = cfg.market_state()?;
    let spot_grid = cfg.spot_grid()?;
    let mut reports = Vec::with_capacity(cfg.methods.len());
    let mut labels = Vec::with_capacity(cfg.methods.len());
    for mcfg in &cfg.methods {
        let mut mc = cfg.mc_config();
        if let Some(paths) = mcfg.paths_override() {
            mc.paths = paths;
        }
        let req = GreeksRequest {
            payoff: payoff.clone(),
            market: market.clone(),
            method: mcfg.to_method()?,
            mc,
            bump_asset: 0,
            spot_grid: spot_grid.clone(),
            relative_bumps: cfg.relative_bumps,
        };
        let mut report = greeks_sweep(&req)?;
        report.method = mcfg.label()?;
        labels.push(report.method.clone());
        reports.push(report);
    }

    let mut columns: Vec<String> = vec!["spot".into()];
    for label in &labels {
        for field in ["price", "delta", "gamma", "width"] {
            columns.push(format!("{field}_{label}"));
        }
    }
    let column_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let mut table = ResultTable::new(&column_refs);
    table.standard_meta(Experiment::Sweep.name(), cfg.source_hash, cfg.mc.seed);
    for report in &reports {
        let label = &report.method;
        if let Some((ed, eg)) = report.explanation {
            table.meta(format!("summary.{label}.expl_err_delta"), fmt_f64(ed));
            table.meta(format!("summary.{label}.expl_err_gamma"), fmt_f64(eg));
        }
        let nodes = report.records.first().map(|r| r.nodes).unwrap_or(0);
        let paths = report.records.first().map(|r| r.paths).unwrap_or(0);
        table.meta(format!("summary.{label}.nodes"), nodes);
        table.meta(format!("summary.{label}.paths"), paths);
        let failures = report.records.iter().filter(|r| r.error.is_some()).count();
        table.meta(format!("summary.{label}.failures"), failures);
    }
    for (i, &spot) in spot_grid.iter().enumerate() {
        let mut row = vec![fmt_f64(spot)];
        for report in &reports {
            let r = &report.records[i];
            row.push(fmt_f64(r.price));
            row.push(fmt_f64(r.delta));
            row.push(fmt_f64(r.gamma));
            row.push(fmt_f64(r.width));
        }
        table.push_row(row);
    }
    Ok(SweepResult { reports, table })
}

/// One bump level of the variance study.
#[derive(Debug, Clone, Copy)]
pub struct VarianceRow {
    pub bump_rel: f64,
    pub bump_abs: f64,
    pub var_delta: f64,
    pub var_gamma: f64,
}

#[derive(Debug, Clone)]
pub struct VarianceScalingResult {
    pub rows: Vec<VarianceRow>,
    /// Fitted d(ln Var)/d(ln h) slopes.
    pub delta_slope: f64,
    pub gamma_slope: f64,
    pub table: ResultTable,
}

/// Variance of FD delta/gamma across independent master seeds over a bump
/// ladder. Within a seed, all bumped revaluations share the frozen noise
/// (common random numbers); the fitted log-log slopes expose the h^-1 and
/// h^-3 growth of the estimator variance.
pub fn run_variance_scaling(cfg: &ExperimentConfig) -> Result<VarianceScalingResult> {
    let block = cfg
        .variance
        .as_ref()
        .ok_or_else(|| Error::Config("missing [variance] block".into()))?;
    if block.bumps.len() < 2 {
        return Err(Error::invalid("need at least 2 bump levels"));
    }
    if block.seeds < 2 {
        return Err(Error::invalid("need at least 2 seeds"));
    }
    let payoff = cfg.payoff_spec()?;
    oracle_kind(&payoff)?; // digital or call only
    let mut market = cfg.market_state()?;
    market.spots[0] = block.spot;
    let x0 = block.spot;

    // per seed: one frozen closure shared by the whole bump ladder
    let mut deltas = vec![Vec::with_capacity(block.seeds); block.bumps.len()];
    let mut gammas = vec![Vec::with_capacity(block.seeds); block.bumps.len()];
    for k in 0..block.seeds {
        let mc = McConfig {
            master_seed: derive_stream_seed(cfg.mc.seed, k as u64),
            ..cfg.mc_config()
        };
        let closure = pricing_closure(&payoff, &market, mc, 0)?;
        for (bi, &rel) in block.bumps.iter().enumerate() {
            let bump = if cfg.relative_bumps { rel * x0 } else { rel };
            let scheme = FdScheme::new(block.points, bump)?;
            let g = fd_greeks(|s| closure.price(s), x0, &scheme)?;
            deltas[bi].push(g.delta);
            gammas[bi].push(g.gamma);
        }
    }

    let var = |xs: &[f64]| -> f64 {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    };
    let rows: Vec<VarianceRow> = block
        .bumps
        .iter()
        .enumerate()
        .map(|(bi, &rel)| VarianceRow {
            bump_rel: rel,
            bump_abs: if cfg.relative_bumps { rel * x0 } else { rel },
            var_delta: var(&deltas[bi]),
            var_gamma: var(&gammas[bi]),
        })
        .collect();

    let slope = |select: fn(&VarianceRow) -> f64| -> f64 {
        if rows.iter().any(|r| select(r) <= 0.0) {
            return f64::NAN;
        }
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.bump_abs.ln(), select(r).ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        num / den
    };
    let delta_slope = slope(|r| r.var_delta);
    let gamma_slope = slope(|r| r.var_gamma);

    let mut table = ResultTable::new(&["bump_rel", "bump_abs", "var_delta", "var_gamma"]);
    table.standard_meta(
        Experiment::VarianceScaling.name(),
        cfg.source_hash,
        cfg.mc.seed,
    );
    table.meta("seeds", block.seeds);
    table.meta("fit.delta_slope", fmt_f64(delta_slope));
    table.meta("fit.gamma_slope", fmt_f64(gamma_slope));
    for r in &rows {
        table.push_row(vec![
            fmt_f64(r.bump_rel),
            fmt_f64(r.bump_abs),
            fmt_f64(r.var_delta),
            fmt_f64(r.var_gamma),
        ]);
    }
    Ok(VarianceScalingResult {
        rows,
        delta_slope,
        gamma_slope,
        table,
    })
}

/// Dispatches on the config's experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    Ok(match cfg.experiment {
        Experiment::Convergence => run_convergence(cfg)?.table,
        Experiment::DigitalErrors => run_digital_errors(cfg)?.table,
        Experiment::Sweep => run_sweep(cfg)?.table,
        Experiment::VarianceScaling => run_variance_scaling(cfg)?.table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::table::strip_wall_clock;

    fn convergence_cfg(pricer: &str, paths: usize) -> ExperimentConfig {
        let text = format!(
            r#"
experiment = "convergence"

[payoff]
kind = "call"
strike = 1.0
maturity = 0.1

[market]
spots = [1.0]
vols = [0.07]
rate = 0.0

[mc]
paths = {paths}
seed = 42

[convergence]
pricer = "{pricer}"
ladder = [3, 5, 7, 9, 21]
domain_lo = 0.94
domain_hi = 1.01
test_points = 200
"#
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn analytic_convergence_is_geometric() {
        let res = run_convergence(&convergence_cfg("analytic", 10)).unwrap();
        let e7 = res.row(7).unwrap().chebyshev.price;
        let e21 = res.row(21).unwrap().chebyshev.price;
        assert!(e21 < 1e-4 * e7, "e7 {e7:e}, e21 {e21:e}");
    }

    #[test]
    fn mc_convergence_plateaus_at_noise_floor() {
        let res = run_convergence(&convergence_cfg("mc", 20_000)).unwrap();
        let e9 = res.row(9).unwrap().chebyshev.price;
        let e21 = res.row(21).unwrap().chebyshev.price;
        // noisy nodal data: no convergence below the noise floor, but no
        // blow-up either
        assert!(e21 < 10.0 * e9.max(1e-12), "e9 {e9:e}, e21 {e21:e}");
    }

    fn variance_cfg(seeds: usize, vol: f64) -> ExperimentConfig {
        let text = format!(
            r#"
experiment = "variance_scaling"

[payoff]
kind = "digital"
strike = 1.0
maturity = 0.1

[market]
spots = [1.0]
vols = [{vol}]
rate = 0.0

[mc]
paths = 20000
seed = 7

[variance]
seeds = {seeds}
bumps = [0.01, 0.005, 0.0025]
spot = 1.0
"#
        );
        ExperimentConfig::from_toml(&text).unwrap()
    }

    #[test]
    fn variance_slopes_have_the_right_sign() {
        let res = run_variance_scaling(&variance_cfg(12, 0.07)).unwrap();
        assert!(res.gamma_slope < -1.5, "gamma slope {}", res.gamma_slope);
        assert!(res.delta_slope < 0.0, "delta slope {}", res.delta_slope);
        assert_eq!(res.rows.len(), 3);
    }

    #[test]
    fn zero_vol_payoff_has_zero_variance() {
        let res = run_variance_scaling(&variance_cfg(4, 0.0)).unwrap();
        for r in &res.rows {
            assert_eq!(r.var_delta, 0.0);
            assert_eq!(r.var_gamma, 0.0);
        }
        assert!(res.gamma_slope.is_nan());
    }

    fn small_digital_cfg() -> ExperimentConfig {
        ExperimentConfig::from_toml(
            r#"
experiment = "digital_errors"

[payoff]
kind = "digital"
strike = 1.0
maturity = 0.1

[market]
spots = [1.0]
vols = [0.07]
rate = 0.0

[mc]
paths = 4000
seed = 11

[grid]
count = 41
lo = 0.96
hi = 1.04

[[method]]
kind = "fd"
points = 3
bump = 0.0025
label = "fd3_small"

[[method]]
kind = "cheb_adaptive"
a_min = 0.0075
a_max = 0.05
"#,
        )
        .unwrap()
    }

    #[test]
    fn digital_errors_emits_one_row_per_method() {
        let res = run_digital_errors(&small_digital_cfg()).unwrap();
        assert_eq!(res.methods.len(), 2);
        assert!(res.summary("fd3_small").is_some());
        assert!(res.summary("cheb7_adaptive").is_some());
        assert_eq!(res.table.rows.len(), 2);
        // at desk-scale paths the small-bump FD gamma is far noisier
        let fd = res.summary("fd3_small").unwrap();
        let cheb = res.summary("cheb7_adaptive").unwrap();
        assert!(fd.gamma.max > cheb.gamma.max);
    }

    #[test]
    fn experiment_reruns_are_byte_identical() {
        let cfg = small_digital_cfg();
        let a = run_experiment(&cfg).unwrap().to_csv();
        let b = run_experiment(&cfg).unwrap().to_csv();
        assert_eq!(strip_wall_clock(&a), strip_wall_clock(&b));
    }

    #[test]
    fn sweep_emits_columns_per_method_and_summaries() {
        let cfg = ExperimentConfig::from_toml(
            r#"
experiment = "sweep"

[payoff]
kind = "call"
strike = 1.0
maturity = 0.1

[market]
spots = [1.0]
vols = [0.07]
rate = 0.0

[mc]
paths = 2000
seed = 3

[grid]
count = 9
lo = 0.97
hi = 1.03

[[method]]
kind = "fd"
points = 3
bump = 0.0025

[[method]]
kind = "cheb_fixed"
half_width = 0.03
"#,
        )
        .unwrap();
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.reports.len(), 2);
        assert_eq!(res.table.rows.len(), 9);
        assert_eq!(res.table.columns.len(), 1 + 2 * 4);
        assert!(res
            .table
            .metadata
            .iter()
            .any(|(k, _)| k == "summary.fd3.expl_err_gamma"));
        let single_row = res.report("cheb7_fixed").is_some();
        assert!(single_row);
    }
}
