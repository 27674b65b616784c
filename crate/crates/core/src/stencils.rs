//! Classical n-point central finite differences for first and second
//! derivatives: the baseline Greeks method and a cross-check for the
//! differential matrices.

use crate::cheb::{barycentric_weights, diff_matrices, Grid};
use crate::error::{Error, Result};

/// Central finite-difference scheme: odd point count and bump size in
/// payoff-parameter units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdScheme {
    pub points: usize,
    pub bump: f64,
}

impl FdScheme {
    pub fn new(points: usize, bump: f64) -> Result<Self> {
        if points < 3 || points % 2 == 0 {
            return Err(Error::invalid(format!(
                "central stencil needs an odd point count >= 3, got {points}"
            )));
        }
        if !(bump > 0.0) || !bump.is_finite() {
            return Err(Error::invalid(format!("bump must be positive, got {bump}")));
        }
        Ok(FdScheme { points, bump })
    }

    /// Scheme with the bump expressed as `fraction * spot`.
    pub fn scaled_to(self, spot: f64) -> Result<Self> {
        FdScheme::new(self.points, self.bump * spot)
    }
}

/// Central-difference coefficients on a unit-spaced grid (divide by h^m to
/// apply at spacing h).
///
/// Derived as the center row of the uniform-grid differential matrix, i.e.
/// the m-th derivative of the Lagrange interpolant through the stencil
/// points. For 3 points this reproduces `[-1/2, 0, 1/2]` and `[1, -2, 1]`.
pub fn fd_coefficients(points: usize, order: usize) -> Result<Vec<f64>> {
    if points % 2 == 0 || points < order + 1 {
        return Err(Error::invalid(format!(
            "need an odd point count > order, got {points} points for order {order}"
        )));
    }
    let lo = -((points as f64 - 1.0) / 2.0);
    let pts: Vec<f64> = (0..points).map(|i| lo + i as f64).collect();
    let grid = Grid::from_points(pts)?;
    let weights = barycentric_weights(&grid)?;
    let mats = diff_matrices(&grid, &weights, order)?;
    Ok(mats[order - 1].row(points / 2).to_vec())
}

/// Price, delta and gamma from one central-difference pass.
#[derive(Debug, Clone, Copy)]
pub struct FdGreeks {
    pub price: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// Evaluates `pricer` once per stencil point and combines the values with
/// the central-difference coefficients. The center evaluation supplies the
/// reported price; determinism of the pricer (seed fixing) is the caller's
/// contract.
pub fn fd_greeks(
    pricer: impl Fn(f64) -> Result<f64>,
    x0: f64,
    scheme: &FdScheme,
) -> Result<FdGreeks> {
    let k = (scheme.points - 1) / 2;
    let h = scheme.bump;
    let mut values = Vec::with_capacity(scheme.points);
    for i in 0..scheme.points {
        let x = x0 + (i as f64 - k as f64) * h;
        values.push(pricer(x).map_err(|e| e.at_bump(x))?);
    }
    let c1 = fd_coefficients(scheme.points, 1)?;
    let c2 = fd_coefficients(scheme.points, 2)?;
    let dot = |c: &[f64]| c.iter().zip(&values).map(|(a, b)| a * b).sum::<f64>();
    Ok(FdGreeks {
        price: values[k],
        delta: dot(&c1) / h,
        gamma: dot(&c2) / (h * h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::black::{digital_analytics, BlackInputs};
    use approx::assert_relative_eq;

    #[test]
    fn three_point_coefficients() {
        let c1 = fd_coefficients(3, 1).unwrap();
        let c2 = fd_coefficients(3, 2).unwrap();
        for (got, want) in c1.iter().zip([-0.5, 0.0, 0.5]) {
            assert!((got - want).abs() <= 1e-12);
        }
        for (got, want) in c2.iter().zip([1.0, -2.0, 1.0]) {
            assert!((got - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn seven_point_coefficients() {
        let c1 = fd_coefficients(7, 1).unwrap();
        let want1 = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0].map(|v| v / 60.0);
        for (got, want) in c1.iter().zip(want1) {
            assert_relative_eq!(got, &want, epsilon = 1e-12);
        }
        let c2 = fd_coefficients(7, 2).unwrap();
        let want2 = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0].map(|v| v / 180.0);
        for (got, want) in c2.iter().zip(want2) {
            assert_relative_eq!(got, &want, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_even_or_small_stencils() {
        assert!(fd_coefficients(4, 1).is_err());
        assert!(fd_coefficients(1, 2).is_err());
        assert!(FdScheme::new(5, 0.0).is_err());
        assert!(FdScheme::new(2, 0.1).is_err());
    }

    #[test]
    fn moment_identities() {
        // sum c = 0; sum c*k = 1 for m=1; sum c*k^2/2 = 1 for m=2
        for &points in &[3usize, 5, 7, 9] {
            let k0 = (points / 2) as f64;
            for order in 1..=2usize {
                let c = fd_coefficients(points, order).unwrap();
                let sum: f64 = c.iter().sum();
                assert!(sum.abs() < 1e-10, "{points}pt m={order} sum {sum}");
                let moment: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let k = i as f64 - k0;
                        v * k.powi(order as i32)
                    })
                    .sum();
                let want = if order == 1 { 1.0 } else { 2.0 };
                assert_relative_eq!(moment, want, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn quadratic_gamma_exact() {
        let scheme = FdScheme::new(3, 0.37).unwrap();
        let g = fd_greeks(|x| Ok(x * x), 2.0, &scheme).unwrap();
        assert!((g.gamma - 2.0).abs() <= 1e-12 * 4.0 / (0.37 * 0.37));
        assert_relative_eq!(g.delta, 4.0, epsilon = 1e-10);
        assert_eq!(g.price, 4.0);
    }

    #[test]
    fn seven_point_exact_through_degree_six() {
        let scheme = FdScheme::new(7, 0.1).unwrap();
        let g = fd_greeks(|x| Ok(x.powi(6)), 1.0, &scheme).unwrap();
        assert_relative_eq!(g.delta, 6.0, max_relative = 1e-10);
        assert_relative_eq!(g.gamma, 30.0, max_relative = 1e-9);
    }

    #[test]
    fn bias_is_second_order_in_h() {
        // 3-point gamma of sin(x) at 0.3: halving h quarters the error
        let x0 = 0.3f64;
        let f = |x: f64| Ok(x.sin());
        let exact = -x0.sin();
        let mut errs = Vec::new();
        for &h in &[1e-2, 5e-3, 2.5e-3] {
            let g = fd_greeks(f, x0, &FdScheme::new(3, h).unwrap()).unwrap();
            errs.push((g.gamma - exact).abs());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "O(h^2) ratio {ratio}");
        }
    }

    #[test]
    fn pricer_failure_is_annotated() {
        let scheme = FdScheme::new(3, 0.5).unwrap();
        let err = fd_greeks(
            |x| {
                if x < 1.0 {
                    Err(Error::invalid("nonpositive"))
                } else {
                    Ok(x)
                }
            },
            1.2,
            &scheme,
        )
        .unwrap_err();
        match err {
            Error::PricerAt { x, .. } => assert_relative_eq!(x, 0.7, epsilon = 1e-12),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn digital_gamma_zero_noise_baseline() {
        // analytic digital pricer: FD error is pure truncation bias, no MC
        // noise. The realized bound anchors the Monte Carlo comparisons:
        // the same scheme under MC shows errors two orders larger.
        let (strike, maturity, vol) = (1.0, 0.1, 0.07);
        let pricer = |s: f64| {
            Ok(digital_analytics(&BlackInputs {
                spot: s,
                strike,
                vol,
                rate: 0.0,
                maturity,
            })
            .price)
        };
        let mut max_err: f64 = 0.0;
        for i in 0..2000 {
            let s = 0.95 + 0.1 * i as f64 / 1999.0;
            let scheme = FdScheme::new(3, 0.0025 * s).unwrap();
            let g = fd_greeks(pricer, s, &scheme).unwrap();
            let oracle = digital_analytics(&BlackInputs {
                spot: s,
                strike,
                vol,
                rate: 0.0,
                maturity,
            });
            max_err = max_err.max((g.gamma - oracle.gamma).abs());
        }
        // externally computed truncation bias for this setup is ~1.19
        assert!(max_err < 2.0, "zero-noise gamma bias {max_err}");
        assert!(max_err > 0.5, "bias implausibly small: {max_err}");
    }
}
