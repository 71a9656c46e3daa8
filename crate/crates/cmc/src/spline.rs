//! Cubic-spline interpolation with analytic derivatives through order 3.
//!
//! Two boundary conditions are provided: not-a-knot (third-derivative
//! continuity at the second and second-to-last knots, which reproduces any
//! single cubic exactly) and clamped (prescribed end slopes, used when the
//! sampled data carries its own derivatives).

use thiserror::Error;

use crate::jets::{C3Function, Jet3};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SplineError {
    #[error("need at least {min} knots, got {got}")]
    TooFewKnots { min: usize, got: usize },
    #[error("knot abscissae must be strictly increasing")]
    NotIncreasing,
    #[error("knot/value length mismatch: {xs} vs {ys}")]
    LengthMismatch { xs: usize, ys: usize },
    #[error("non-finite input data")]
    NonFinite,
}

/// Interpolating cubic spline with stored second derivatives at the knots.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives of the spline at the knots.
    ms: Vec<f64>,
}

/// Solves a tridiagonal system in place (Thomas algorithm).
/// `sub`, `diag`, `sup` are the three bands; `rhs` becomes the solution.
fn solve_tridiagonal(sub: &[f64], diag: &mut [f64], sup: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    for i in 1..n {
        let w = sub[i - 1] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
}

fn validate(xs: &[f64], ys: &[f64], min: usize) -> Result<(), SplineError> {
    if xs.len() != ys.len() {
        return Err(SplineError::LengthMismatch {
            xs: xs.len(),
            ys: ys.len(),
        });
    }
    if xs.len() < min {
        return Err(SplineError::TooFewKnots {
            min,
            got: xs.len(),
        });
    }
    if xs.iter().any(|x| !x.is_finite()) || ys.iter().any(|y| !y.is_finite()) {
        return Err(SplineError::NonFinite);
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SplineError::NotIncreasing);
    }
    Ok(())
}

impl CubicSpline {
    /// Not-a-knot interpolant of `(xs, ys)`. Needs at least 4 knots.
    pub fn new(xs: &[f64], ys: &[f64]) -> Result<CubicSpline, SplineError> {
        validate(xs, ys, 4)?;
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        // Interior equations for the second derivatives M_1 .. M_{n-2}:
        //   (h_{i-1}/6) M_{i-1} + ((h_{i-1}+h_i)/3) M_i + (h_i/6) M_{i+1}
        //     = slope_i - slope_{i-1}
        // with the not-a-knot corners eliminated:
        //   M_0 = ((h_0+h_1) M_1 - h_0 M_2) / h_1
        //   M_{n-1} = ((h_{n-2}+h_{n-3}) M_{n-2} - h_{n-2} M_{n-3}) / h_{n-3}
        let m = n - 2;
        let mut sub = vec![0.0; m - 1];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m - 1];
        let mut rhs = vec![0.0; m];
        for (k, row) in (1..n - 1).enumerate() {
            let i = row;
            rhs[k] = slope[i] - slope[i - 1];
            let (a, b, c) = (h[i - 1] / 6.0, (h[i - 1] + h[i]) / 3.0, h[i] / 6.0);
            if k == 0 {
                // substitute M_0
                diag[k] = b + a * (h[0] + h[1]) / h[1];
                if m > 1 {
                    sup[k] = c - a * h[0] / h[1];
                }
            } else if k == m - 1 {
                // substitute M_{n-1}
                diag[k] = b + c * (h[n - 2] + h[n - 3]) / h[n - 3];
                sub[k - 1] = a - c * h[n - 2] / h[n - 3];
            } else {
                diag[k] = b;
                sup[k] = c;
                sub[k - 1] = a;
            }
        }
        solve_tridiagonal(&sub, &mut diag, &sup, &mut rhs);
        let mut ms = vec![0.0; n];
        ms[1..n - 1].copy_from_slice(&rhs);
        ms[0] = ((h[0] + h[1]) * ms[1] - h[0] * ms[2]) / h[1];
        ms[n - 1] = ((h[n - 2] + h[n - 3]) * ms[n - 2] - h[n - 2] * ms[n - 3]) / h[n - 3];
        Ok(CubicSpline {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            ms,
        })
    }

    /// Clamped interpolant with prescribed first derivatives at both ends.
    /// Needs at least 3 knots.
    pub fn clamped(
        xs: &[f64],
        ys: &[f64],
        slope_start: f64,
        slope_end: f64,
    ) -> Result<CubicSpline, SplineError> {
        validate(xs, ys, 3)?;
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut sub = vec![0.0; n - 1];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n - 1];
        let mut rhs = vec![0.0; n];
        diag[0] = h[0] / 3.0;
        sup[0] = h[0] / 6.0;
        rhs[0] = slope[0] - slope_start;
        for i in 1..n - 1 {
            sub[i - 1] = h[i - 1] / 6.0;
            diag[i] = (h[i - 1] + h[i]) / 3.0;
            sup[i] = h[i] / 6.0;
            rhs[i] = slope[i] - slope[i - 1];
        }
        sub[n - 2] = h[n - 2] / 6.0;
        diag[n - 1] = h[n - 2] / 3.0;
        rhs[n - 1] = slope_end - slope[n - 2];
        solve_tridiagonal(&sub, &mut diag, &sup, &mut rhs);
        Ok(CubicSpline {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            ms: rhs,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    fn interval(&self, x: f64) -> usize {
        match self
            .xs
            .binary_search_by(|k| k.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Evaluates the spline as a third-order jet. The third derivative is
    /// the piecewise-constant value of the containing interval.
    pub fn eval(&self, x: f64) -> Jet3 {
        let i = self.interval(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = x - self.xs[i];
        let (m0, m1) = (self.ms[i], self.ms[i + 1]);
        let b = (self.ys[i + 1] - self.ys[i]) / h - h * (2.0 * m0 + m1) / 6.0;
        let d3 = (m1 - m0) / h;
        Jet3 {
            value: self.ys[i] + t * (b + t * (m0 / 2.0 + t * d3 / 6.0)),
            d1: b + t * (m0 + t * d3 / 2.0),
            d2: m0 + t * d3,
            d3,
        }
    }

    /// Wraps the spline as a catalog-style function on its open knot span.
    pub fn into_c3(self) -> C3Function {
        let (lo, hi) = self.domain();
        C3Function::new(lo, hi, move |x| Ok(self.eval(x)))
    }
}
