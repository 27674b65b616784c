//! Barycentric Lagrange interpolation on Chebyshev, uniform and generic
//! grids, with differential matrices for derivatives of arbitrary order.
//!
//! The interpolant of nodal values `f(x_k)` is evaluated through the
//! barycentric formula
//!
//! ```text
//!          sum_k  w_k f(x_k) / (x - x_k)
//! p(x)  =  -----------------------------
//!          sum_k  w_k / (x - x_k)
//! ```
//!
//! which costs O(n) per query once the weights `w_k` are known. Nodal
//! derivatives are obtained by applying an n x n differential matrix to the
//! value vector; the matrices follow Welfert's recursion and depend only on
//! the grid. Derivatives at arbitrary points reuse the barycentric formula
//! on the nodal derivative values.
//!
//! Chebyshev grids cluster nodes at the interval endpoints, which defeats
//! the Runge phenomenon and gives geometric convergence for analytic
//! functions; their barycentric weights have the closed form
//! `w_k = (-1)^k` with halved endpoints.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Closed interpolation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::invalid(format!(
                "domain [{lo}, {hi}] must be a nondegenerate finite interval"
            )));
        }
        Ok(Domain { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// How the abscissas of a [`Grid`] were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Chebyshev,
    Uniform,
    Generic,
}

/// Strictly increasing abscissas inside a closed domain.
#[derive(Debug, Clone)]
pub struct Grid {
    points: Vec<f64>,
    domain: Domain,
    kind: GridKind,
}

impl Grid {
    /// Chebyshev points cos(k pi/(n-1)), k = 0..n-1, affinely mapped onto
    /// `domain` and stored in ascending order.
    ///
    /// Uses the sine form of the cosine sequence so the node set is exactly
    /// symmetric and, for odd n, the midpoint lands exactly on the domain
    /// center.
    pub fn chebyshev(n: usize, domain: Domain) -> Result<Self> {
        let center = 0.5 * (domain.lo + domain.hi);
        let half = 0.5 * (domain.hi - domain.lo);
        let mut grid = Self::chebyshev_centered(n, center, half)?;
        // snap endpoints so the requested domain bounds are grid points
        grid.points[0] = domain.lo;
        grid.points[n - 1] = domain.hi;
        grid.domain = domain;
        Ok(grid)
    }

    /// Chebyshev grid on `[center - half_width, center + half_width]`.
    ///
    /// For odd n the middle node is bitwise equal to `center`, which lets a
    /// caller read the function value at the expansion point straight off
    /// the node set.
    pub fn chebyshev_centered(n: usize, center: f64, half_width: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 nodes, got {n}")));
        }
        if !(half_width > 0.0) || !center.is_finite() || !half_width.is_finite() {
            return Err(Error::invalid(format!(
                "invalid chebyshev domain: center {center}, half width {half_width}"
            )));
        }
        let m = (n - 1) as f64;
        let points: Vec<f64> = (0..n)
            .map(|i| {
                // sin((2i - (n-1)) pi / (2(n-1))) == cos((n-1-i) pi/(n-1)), ascending
                let theta = (2.0 * i as f64 - m) * PI / (2.0 * m);
                center + theta.sin() * half_width
            })
            .collect();
        let domain = Domain::new(points[0], points[n - 1])?;
        Ok(Grid {
            points,
            domain,
            kind: GridKind::Chebyshev,
        })
    }

    /// Equispaced grid including both domain endpoints.
    pub fn uniform(n: usize, domain: Domain) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 nodes, got {n}")));
        }
        let step = domain.width() / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| domain.lo + i as f64 * step).collect();
        points[n - 1] = domain.hi;
        Ok(Grid {
            points,
            domain,
            kind: GridKind::Uniform,
        })
    }

    /// Grid from caller-supplied abscissas (must be strictly increasing).
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("need at least 2 nodes"));
        }
        for w in points.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::invalid(format!(
                    "grid points must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let domain = Domain::new(points[0], points[points.len() - 1])?;
        Ok(Grid {
            points,
            domain,
            kind: GridKind::Generic,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the node bitwise equal to `x`, if any.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        self.points.iter().position(|&p| p == x)
    }
}

/// Chebyshev points of the second kind mapped onto `domain`, ascending.
pub fn chebyshev_points(n: usize, domain: Domain) -> Result<Grid> {
    Grid::chebyshev(n, domain)
}

/// Barycentric weights, defined up to one global nonzero scale.
#[derive(Debug, Clone)]
pub struct BarycentricWeights {
    values: Vec<f64>,
}

impl BarycentricWeights {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Weights for a caller-supplied vector (used by tests for the
    /// scale-invariance property).
    pub fn from_raw(values: Vec<f64>) -> Self {
        BarycentricWeights { values }
    }
}

/// Computes barycentric weights for `grid`.
///
/// Chebyshev grids use the closed form `(-1)^k`, halved at both endpoints
/// (the pattern for the ascending node ordering; any global sign is
/// immaterial since the barycentric quotient is scale-invariant). Other
/// grids use the product formula `w_k = 1 / prod_{j != k} (x_k - x_j)`,
/// normalized by the largest magnitude to keep the dynamic range tame.
pub fn barycentric_weights(grid: &Grid) -> Result<BarycentricWeights> {
    let x = grid.points();
    let n = x.len();
    let values = match grid.kind() {
        GridKind::Chebyshev => (0..n)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                if k == 0 || k == n - 1 {
                    0.5 * sign
                } else {
                    sign
                }
            })
            .collect(),
        GridKind::Uniform | GridKind::Generic => {
            let mut w = vec![1.0f64; n];
            for k in 0..n {
                for j in 0..n {
                    if j != k {
                        let d = x[k] - x[j];
                        if d == 0.0 {
                            return Err(Error::DegenerateGrid(k));
                        }
                        w[k] /= d;
                    }
                }
            }
            let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            w.iter_mut().for_each(|v| *v /= scale);
            w
        }
    };
    Ok(BarycentricWeights { values })
}

/// Evaluates the barycentric interpolant of `values` at `x`.
///
/// Queries outside the grid domain are rejected (no extrapolation). When
/// `x` is bitwise equal to a node the stored nodal value is returned, which
/// also keeps the quotient away from 0/0.
pub fn eval_barycentric(
    grid: &Grid,
    weights: &BarycentricWeights,
    values: &[f64],
    x: f64,
) -> Result<f64> {
    let pts = grid.points();
    if values.len() != pts.len() {
        return Err(Error::invalid(format!(
            "{} values for {} nodes",
            values.len(),
            pts.len()
        )));
    }
    let dom = grid.domain();
    if !dom.contains(x) {
        return Err(Error::OutOfDomain {
            x,
            lo: dom.lo,
            hi: dom.hi,
        });
    }
    let w = weights.values();
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..pts.len() {
        let dx = x - pts[k];
        if dx == 0.0 {
            return Ok(values[k]);
        }
        let t = w[k] / dx;
        num += t * values[k];
        den += t;
    }
    Ok(num / den)
}

/// Differential matrix: maps nodal values to nodal m-th derivatives of the
/// interpolant, `p^(m)(x_i) = sum_k D[i][k] f(x_k)`.
#[derive(Debug, Clone)]
pub struct DiffMatrix {
    order: usize,
    n: usize,
    entries: Vec<f64>, // row-major n x n
}

impl DiffMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, k: usize) -> f64 {
        self.entries[i * self.n + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Matrix-vector product with the nodal value vector.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(values)
                    .map(|(d, v)| d * v)
                    .sum::<f64>()
            })
            .collect()
    }
}

/// Builds differential matrices of order 1..=max_order via the recursion
///
/// ```text
/// D(m)[i][k] = m/(x_i - x_k) * ( w_k/w_i * D(m-1)[i][i] - D(m-1)[i][k] )   (i != k)
/// D(m)[i][i] = -sum_{k != i} D(m)[i][k]
/// ```
///
/// The diagonal uses the negative-sum rule (each row annihilates
/// constants), which is also the numerically preferred form.
pub fn diff_matrices(
    grid: &Grid,
    weights: &BarycentricWeights,
    max_order: usize,
) -> Result<Vec<DiffMatrix>> {
    if max_order < 1 {
        return Err(Error::invalid("max_order must be >= 1"));
    }
    let n = grid.len();
    if n <= max_order {
        return Err(Error::InsufficientNodes {
            n,
            order: max_order,
        });
    }
    let x = grid.points();
    let w = weights.values();
    let mut out = Vec::with_capacity(max_order);
    // D(0) = identity
    let mut prev: Vec<f64> = (0..n * n)
        .map(|idx| if idx / n == idx % n { 1.0 } else { 0.0 })
        .collect();
    for m in 1..=max_order {
        let mut cur = vec![0.0f64; n * n];
        for i in 0..n {
            let dii = prev[i * n + i];
            let mut row_sum = 0.0;
            for k in 0..n {
                if k == i {
                    continue;
                }
                let v = m as f64 / (x[i] - x[k]) * (w[k] / w[i] * dii - prev[i * n + k]);
                cur[i * n + k] = v;
                row_sum += v;
            }
            cur[i * n + i] = -row_sum;
        }
        out.push(DiffMatrix {
            order: m,
            n,
            entries: cur.clone(),
        });
        prev = cur;
    }
    Ok(out)
}

/// Immutable interpolator bundling a grid, its barycentric weights, the
/// nodal values and cached differential data up to second order.
///
/// Derivative matrices and nodal derivative vectors are built once at
/// construction; every later query is a cheap barycentric evaluation.
#[derive(Debug, Clone)]
pub struct ChebInterpolator {
    grid: Grid,
    weights: BarycentricWeights,
    values: Vec<f64>,
    diff: Vec<DiffMatrix>,
    nodal_derivs: Vec<Vec<f64>>, // [m-1] -> p^(m) at the nodes
}

pub const MAX_DERIVATIVE_ORDER: usize = 2;

impl ChebInterpolator {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let weights = barycentric_weights(&grid)?;
        let diff = diff_matrices(&grid, &weights, MAX_DERIVATIVE_ORDER)?;
        let nodal_derivs = diff.iter().map(|d| d.apply(&values)).collect();
        Ok(ChebInterpolator {
            grid,
            weights,
            values,
            diff,
            nodal_derivs,
        })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    /// Builds from a fallible sampler; failures are annotated with the node
    /// they occurred at.
    pub fn try_from_fn(grid: Grid, mut f: impl FnMut(f64) -> Result<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for &x in grid.points() {
            values.push(f(x).map_err(|e| e.at_bump(x))?);
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &BarycentricWeights {
        &self.weights
    }

    pub fn diff_matrix(&self, order: usize) -> Option<&DiffMatrix> {
        self.diff.get(order.wrapping_sub(1))
    }

    /// Cached p^(m) at the grid nodes.
    pub fn node_derivatives(&self, order: usize) -> Option<&[f64]> {
        self.nodal_derivs.get(order.wrapping_sub(1)).map(|v| &v[..])
    }

    /// p(x). Returns the stored nodal value when x is a grid point.
    pub fn eval(&self, x: f64) -> Result<f64> {
        eval_barycentric(&self.grid, &self.weights, &self.values, x)
    }

    /// p^(m)(x) for 1 <= m <= 2: the cached nodal derivative when x is a
    /// grid point, the barycentric formula over the nodal derivatives
    /// otherwise (single code path for even and odd node counts).
    pub fn derivative(&self, order: usize, x: f64) -> Result<f64> {
        let nodal = self
            .nodal_derivs
            .get(order.wrapping_sub(1))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "derivative order {order} not built (max {MAX_DERIVATIVE_ORDER})"
                ))
            })?;
        eval_barycentric(&self.grid, &self.weights, nodal, x)
    }
}

/// Evaluates the m-th derivative of the interpolant of (grid, values) at x.
pub fn eval_derivative(interp: &ChebInterpolator, order: usize, x: f64) -> Result<f64> {
    interp.derivative(order, x)
}
