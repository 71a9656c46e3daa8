//! Least-squares search for separable CMC surfaces in the (X, Y, Z)
//! variables, confirming empirically that converged solutions are
//! rotational: X and Y affine with equal slopes.
//!
//! The unknowns are the spline knot values of X(u), Y(v), Z(w); the
//! residual is the separable CMC equation
//! (Y+Z)X' + (X+Z)Y' + (X+Y)Z' + 4H (X+Y+Z)^(3/2) on a (u, v) grid with
//! w = -u - v. Positivity of X, Y, Z is kept by a quadratic penalty below
//! a small floor, so the problem stays smooth for damped least squares.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spline::{CubicSpline, SplineError};

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("grid point {value} outside the {axis} knot coverage [{lo}, {hi}]")]
    OutsideCoverage {
        axis: char,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("nonpositive X + Y + Z = {0} at a grid point")]
    NonPositiveSum(f64),
    #[error("knot and coefficient counts differ: {knots} vs {coeffs}")]
    LengthMismatch { knots: usize, coeffs: usize },
    #[error("damped least-squares system is singular")]
    SingularSystem,
    #[error(transparent)]
    Spline(#[from] SplineError),
}

/// Spline-parameterized candidate (X, Y, Z), linear in the knot values.
#[derive(Debug, Clone)]
pub struct SplineModel {
    pub knots_u: Vec<f64>,
    pub knots_v: Vec<f64>,
    pub knots_w: Vec<f64>,
    pub coeffs_x: Vec<f64>,
    pub coeffs_y: Vec<f64>,
    pub coeffs_z: Vec<f64>,
    /// Positivity floor for the evaluated X, Y, Z.
    pub floor: f64,
}

/// Summary of a solver run.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub residual_rms: f64,
    pub residual_max: f64,
    pub iterations: usize,
    pub delaunay_distance: f64,
    pub converged: bool,
    /// Set when the fitted knot values dip below the positivity floor.
    pub floor_violated: bool,
}

/// Options for [`fit`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Convergence tolerance on the max equation residual.
    pub tol: f64,
    /// Initial Levenberg-Marquardt damping.
    pub damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 200,
            tol: 1e-8,
            damping: 1e-3,
        }
    }
}

fn uniform_knots(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

const PENALTY_WEIGHT: f64 = 1e3;

impl SplineModel {
    /// Knot layout shared by the sphere-like starts: u, v in [0.05, 0.45],
    /// w covering the reachable [-0.9, -0.1] with margin.
    fn sphere_layout(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            uniform_knots(0.05, 0.45, n),
            uniform_knots(0.05, 0.45, n),
            uniform_knots(-0.95, -0.05, n),
        )
    }

    /// Exact unit-sphere model: X = 4u, Y = 4v, Z = 4w + 4 (H = -1).
    pub fn sphere(n: usize) -> Self {
        let (ku, kv, kw) = Self::sphere_layout(n);
        SplineModel {
            coeffs_x: ku.iter().map(|&u| 4.0 * u).collect(),
            coeffs_y: kv.iter().map(|&v| 4.0 * v).collect(),
            coeffs_z: kw.iter().map(|&w| 4.0 * w + 4.0).collect(),
            knots_u: ku,
            knots_v: kv,
            knots_w: kw,
            floor: 1e-6,
        }
    }

    /// Exact catenoid model: X = 4u, Y = 4v, Z = 4w^2 + 4w (H = 0), on a
    /// window where Z stays positive.
    pub fn catenoid(n: usize) -> Self {
        let ku = uniform_knots(0.55, 0.95, n);
        let kv = uniform_knots(0.55, 0.95, n);
        let kw = uniform_knots(-1.95, -1.05, n);
        SplineModel {
            coeffs_x: ku.iter().map(|&u| 4.0 * u).collect(),
            coeffs_y: kv.iter().map(|&v| 4.0 * v).collect(),
            coeffs_z: kw.iter().map(|&w| 4.0 * w * w + 4.0 * w).collect(),
            knots_u: ku,
            knots_v: kv,
            knots_w: kw,
            floor: 1e-6,
        }
    }

    /// Sphere model with a uniform random perturbation of size `eps` on
    /// every knot value.
    pub fn perturbed_sphere(n: usize, eps: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Self::sphere(n);
        for c in m
            .coeffs_x
            .iter_mut()
            .chain(m.coeffs_y.iter_mut())
            .chain(m.coeffs_z.iter_mut())
        {
            *c += eps * rng.gen_range(-1.0..1.0);
        }
        m
    }

    /// Random smooth positive splines on the sphere layout: independent
    /// random affine parts plus low-frequency bumps. Smooth starts keep
    /// the search inside the region the knot resolution can represent;
    /// per-knot white noise drives the iteration toward deeply non-affine
    /// profiles whose spline representation floor sits above typical
    /// convergence tolerances.
    pub fn random_positive(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ku, kv, kw) = Self::sphere_layout(n);
        let mut draw = |k: &[f64]| -> Vec<f64> {
            let slope = rng.gen_range(1.0..5.0);
            let intercept = rng.gen_range(0.5..2.0);
            let amp = rng.gen_range(0.0..0.3);
            let freq = rng.gen_range(1.0..3.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let span = k[k.len() - 1] - k[0];
            k.iter()
                .map(|&t| {
                    let s = (t - k[0]) / span;
                    slope * (t - k[0])
                        + intercept
                        + amp * (std::f64::consts::TAU * freq * s + phase).sin()
                })
                .collect()
        };
        SplineModel {
            coeffs_x: draw(&ku),
            coeffs_y: draw(&kv),
            coeffs_z: draw(&kw),
            knots_u: ku,
            knots_v: kv,
            knots_w: kw,
            floor: 1e-6,
        }
    }

    /// m^2 low-discrepancy (u, v) points over the knot interiors whose
    /// w = -u - v stays inside the w coverage. A scattered set samples
    /// each of X, Y, Z at ~m^2 distinct arguments, which keeps the
    /// least-squares system well conditioned (a tensor grid would pin Y
    /// at only m values).
    pub fn grid(&self, m: usize) -> Vec<(f64, f64)> {
        let pad = 1e-3;
        let (ulo, uhi) = (self.knots_u[0] + pad, *self.knots_u.last().unwrap() - pad);
        let (vlo, vhi) = (self.knots_v[0] + pad, *self.knots_v.last().unwrap() - pad);
        let (wlo, whi) = (self.knots_w[0], *self.knots_w.last().unwrap());
        let halton = |mut i: usize, base: usize| -> f64 {
            let mut f = 1.0;
            let mut r = 0.0;
            while i > 0 {
                f /= base as f64;
                r += f * (i % base) as f64;
                i /= base;
            }
            r
        };
        let mut out = Vec::with_capacity(m * m);
        for k in 1..=m * m {
            let u = ulo + (uhi - ulo) * halton(k, 2);
            let v = vlo + (vhi - vlo) * halton(k, 3);
            let w = -u - v;
            if w > wlo && w < whi {
                out.push((u, v));
            }
        }
        out
    }

    fn spline(knots: &[f64], coeffs: &[f64]) -> Result<CubicSpline, SolverError> {
        if knots.len() != coeffs.len() {
            return Err(SolverError::LengthMismatch {
                knots: knots.len(),
                coeffs: coeffs.len(),
            });
        }
        Ok(CubicSpline::new(knots, coeffs)?)
    }

    pub fn spline_x(&self) -> Result<CubicSpline, SolverError> {
        Self::spline(&self.knots_u, &self.coeffs_x)
    }

    pub fn spline_y(&self) -> Result<CubicSpline, SolverError> {
        Self::spline(&self.knots_v, &self.coeffs_y)
    }

    pub fn spline_z(&self) -> Result<CubicSpline, SolverError> {
        Self::spline(&self.knots_w, &self.coeffs_z)
    }

    /// The gauge transform X(u) -> l^2 X(u / l^2) (same for Y, Z) with
    /// H -> H / l, which maps solutions of the separable CMC equation to
    /// solutions; geometrically it rescales the surface by l.
    pub fn gauge_transform(&self, l: f64) -> Self {
        let l2 = l * l;
        let stretch = |k: &[f64]| k.iter().map(|&t| l2 * t).collect();
        let scale = |c: &[f64]| c.iter().map(|&t| l2 * t).collect();
        SplineModel {
            knots_u: stretch(&self.knots_u),
            knots_v: stretch(&self.knots_v),
            knots_w: stretch(&self.knots_w),
            coeffs_x: scale(&self.coeffs_x),
            coeffs_y: scale(&self.coeffs_y),
            coeffs_z: scale(&self.coeffs_z),
            floor: self.floor,
        }
    }
}

/// Separable CMC equation residual per grid point.
pub fn residual_vector(
    model: &SplineModel,
    mean: f64,
    grid: &[(f64, f64)],
) -> Result<Vec<f64>, SolverError> {
    let sx = model.spline_x()?;
    let sy = model.spline_y()?;
    let sz = model.spline_z()?;
    let check = |axis: char, t: f64, s: &CubicSpline| -> Result<(), SolverError> {
        let (lo, hi) = s.domain();
        if t < lo || t > hi {
            return Err(SolverError::OutsideCoverage {
                axis,
                value: t,
                lo,
                hi,
            });
        }
        Ok(())
    };
    let mut out = Vec::with_capacity(grid.len());
    for &(u, v) in grid {
        let w = -u - v;
        check('u', u, &sx)?;
        check('v', v, &sy)?;
        check('w', w, &sz)?;
        let x = sx.eval(u);
        let y = sy.eval(v);
        let z = sz.eval(w);
        let total = x.value + y.value + z.value;
        if total <= 0.0 {
            return Err(SolverError::NonPositiveSum(total));
        }
        out.push(
            (y.value + z.value) * x.d1
                + (x.value + z.value) * y.d1
                + (x.value + y.value) * z.d1
                + 4.0 * mean * total.powf(1.5),
        );
    }
    Ok(out)
}

/// Rotational fingerprint: sup error of least-squares affine fits to X and
/// Y over the knots, plus the slope mismatch, normalized by
/// sup|X| + sup|Y|. Zero iff X, Y are affine with equal slopes.
pub fn delaunay_distance(model: &SplineModel) -> f64 {
    let affine_fit = |t: &[f64], c: &[f64]| -> (f64, f64, f64) {
        let n = t.len() as f64;
        let (st, sc): (f64, f64) = (t.iter().sum(), c.iter().sum());
        let stt: f64 = t.iter().map(|a| a * a).sum();
        let stc: f64 = t.iter().zip(c).map(|(a, b)| a * b).sum();
        let denom = n * stt - st * st;
        let slope = (n * stc - st * sc) / denom;
        let intercept = (sc - slope * st) / n;
        let sup = t
            .iter()
            .zip(c)
            .map(|(a, b)| (b - (slope * a + intercept)).abs())
            .fold(0.0, f64::max);
        (slope, intercept, sup)
    };
    let (ax, _, ex) = affine_fit(&model.knots_u, &model.coeffs_x);
    let (ay, _, ey) = affine_fit(&model.knots_v, &model.coeffs_y);
    let norm = model.coeffs_x.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
        + model.coeffs_y.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if norm == 0.0 {
        return 0.0;
    }
    ex.max(ey).max((ax - ay).abs()) / norm
}

/// Cardinal-basis values and derivatives of the interpolating spline at
/// the requested points: entry [k][j] is the spline through the j-th unit
/// vector, evaluated at point k.
fn basis_matrices(
    knots: &[f64],
    points: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>), SolverError> {
    let n = knots.len();
    let mut vals = DMatrix::zeros(points.len(), n);
    let mut ders = DMatrix::zeros(points.len(), n);
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        let s = CubicSpline::new(knots, &unit)?;
        for (k, &p) in points.iter().enumerate() {
            let jet = s.eval(p);
            vals[(k, j)] = jet.value;
            ders[(k, j)] = jet.d1;
        }
        unit[j] = 0.0;
    }
    Ok((vals, ders))
}

struct Residuals {
    full: DVector<f64>,
    eq_max: f64,
    eq_rms: f64,
}

fn full_residual(
    model: &SplineModel,
    mean: f64,
    grid: &[(f64, f64)],
) -> Result<Residuals, SolverError> {
    let eq = residual_vector(model, mean, grid)?;
    let eq_max = eq.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let eq_rms = (eq.iter().map(|r| r * r).sum::<f64>() / eq.len() as f64).sqrt();
    let mut full: Vec<f64> = eq;
    for c in model
        .coeffs_x
        .iter()
        .chain(model.coeffs_y.iter())
        .chain(model.coeffs_z.iter())
    {
        full.push(if *c < model.floor {
            PENALTY_WEIGHT * (model.floor - c)
        } else {
            0.0
        });
    }
    Ok(Residuals {
        full: DVector::from_vec(full),
        eq_max,
        eq_rms,
    })
}

/// Cardinal-basis matrices at the grid points; they depend only on the
/// knots and the grid, so a fit computes them once.
struct GridBasis {
    bu: DMatrix<f64>,
    bup: DMatrix<f64>,
    bv: DMatrix<f64>,
    bvp: DMatrix<f64>,
    bw: DMatrix<f64>,
    bwp: DMatrix<f64>,
}

fn grid_basis(model: &SplineModel, grid: &[(f64, f64)]) -> Result<GridBasis, SolverError> {
    let us: Vec<f64> = grid.iter().map(|g| g.0).collect();
    let vs: Vec<f64> = grid.iter().map(|g| g.1).collect();
    let ws: Vec<f64> = grid.iter().map(|g| -g.0 - g.1).collect();
    let (bu, bup) = basis_matrices(&model.knots_u, &us)?;
    let (bv, bvp) = basis_matrices(&model.knots_v, &vs)?;
    let (bw, bwp) = basis_matrices(&model.knots_w, &ws)?;
    Ok(GridBasis {
        bu,
        bup,
        bv,
        bvp,
        bw,
        bwp,
    })
}

/// Analytic Jacobian of the full residual with respect to the knot values
/// (X block, then Y, then Z).
fn jacobian(
    model: &SplineModel,
    mean: f64,
    grid: &[(f64, f64)],
    basis: &GridBasis,
) -> Result<DMatrix<f64>, SolverError> {
    let GridBasis {
        bu,
        bup,
        bv,
        bvp,
        bw,
        bwp,
    } = basis;
    let sx = model.spline_x()?;
    let sy = model.spline_y()?;
    let sz = model.spline_z()?;
    let (nu, nv, nw) = (model.knots_u.len(), model.knots_v.len(), model.knots_w.len());
    let unknowns = nu + nv + nw;
    let mut jac = DMatrix::zeros(grid.len() + unknowns, unknowns);
    for (k, &(u, v)) in grid.iter().enumerate() {
        let x = sx.eval(u);
        let y = sy.eval(v);
        let z = sz.eval(-u - v);
        let total = x.value + y.value + z.value;
        if total <= 0.0 {
            return Err(SolverError::NonPositiveSum(total));
        }
        let curv = 6.0 * mean * total.sqrt();
        for j in 0..nu {
            jac[(k, j)] =
                (y.value + z.value) * bup[(k, j)] + (y.d1 + z.d1 + curv) * bu[(k, j)];
        }
        for j in 0..nv {
            jac[(k, nu + j)] =
                (x.value + z.value) * bvp[(k, j)] + (x.d1 + z.d1 + curv) * bv[(k, j)];
        }
        for j in 0..nw {
            jac[(k, nu + nv + j)] =
                (x.value + y.value) * bwp[(k, j)] + (x.d1 + y.d1 + curv) * bw[(k, j)];
        }
    }
    let coeffs = model
        .coeffs_x
        .iter()
        .chain(model.coeffs_y.iter())
        .chain(model.coeffs_z.iter());
    for (i, c) in coeffs.enumerate() {
        if *c < model.floor {
            jac[(grid.len() + i, i)] = -PENALTY_WEIGHT;
        }
    }
    Ok(jac)
}

/// The separable CMC equation is symmetric under relabeling the three
/// coordinate axes (permuting X, Y, Z together with their knot vectors).
/// Pick the representative whose rotation axis, if any, is the z-axis:
/// the permutation minimizing [`delaunay_distance`].
fn canonicalize(model: &SplineModel) -> SplineModel {
    let parts = [
        (&model.knots_u, &model.coeffs_x),
        (&model.knots_v, &model.coeffs_y),
        (&model.knots_w, &model.coeffs_z),
    ];
    let mut best = model.clone();
    let mut best_d = delaunay_distance(model);
    for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let candidate = SplineModel {
            knots_u: parts[perm[0]].0.clone(),
            coeffs_x: parts[perm[0]].1.clone(),
            knots_v: parts[perm[1]].0.clone(),
            coeffs_y: parts[perm[1]].1.clone(),
            knots_w: parts[perm[2]].0.clone(),
            coeffs_z: parts[perm[2]].1.clone(),
            floor: model.floor,
        };
        let d = delaunay_distance(&candidate);
        if d < best_d {
            best_d = d;
            best = candidate;
        }
    }
    best
}

fn apply_step(model: &SplineModel, step: &DVector<f64>) -> SplineModel {
    let mut out = model.clone();
    let nu = model.knots_u.len();
    let nv = model.knots_v.len();
    for (i, c) in out.coeffs_x.iter_mut().enumerate() {
        *c += step[i];
    }
    for (i, c) in out.coeffs_y.iter_mut().enumerate() {
        *c += step[nu + i];
    }
    for (i, c) in out.coeffs_z.iter_mut().enumerate() {
        *c += step[nu + nv + i];
    }
    out
}

/// Damped least squares on the separable CMC residual. Accepted steps
/// never increase the residual RMS; deterministic for fixed inputs. The
/// returned model is canonicalized: the equation is symmetric under
/// relabeling the coordinate axes, and the representative with the
/// rotation axis along z (smallest [`delaunay_distance`]) is reported.
pub fn fit(
    model: &SplineModel,
    mean: f64,
    grid: &[(f64, f64)],
    opts: &FitOptions,
) -> Result<(SplineModel, SolveResult), SolverError> {
    let mut current = model.clone();
    let mut res = full_residual(&current, mean, grid)?;
    let basis = grid_basis(&current, grid)?;
    let mut damping = opts.damping;
    let mut iterations = 0;
    while iterations < opts.max_iter && res.eq_max > opts.tol {
        let jac = jacobian(&current, mean, grid, &basis)?;
        let jt = jac.transpose();
        let normal = &jt * &jac;
        let gradient = &jt * &res.full;
        let mut accepted = false;
        for _ in 0..30 {
            let mut damped = normal.clone();
            for i in 0..damped.nrows() {
                // Marquardt scaling: damp relative to the curvature of
                // each coordinate so steps are scale-invariant
                damped[(i, i)] += damping * normal[(i, i)].max(1e-12);
            }
            let step = match damped.clone().cholesky() {
                Some(ch) => ch.solve(&(-&gradient)),
                None => damped
                    .lu()
                    .solve(&(-&gradient))
                    .ok_or(SolverError::SingularSystem)?,
            };
            let candidate = apply_step(&current, &step);
            match full_residual(&candidate, mean, grid) {
                Ok(cres) if cres.full.norm() < res.full.norm() => {
                    current = candidate;
                    res = cres;
                    damping = (damping / 3.0).max(1e-14);
                    accepted = true;
                    break;
                }
                _ => damping *= 2.0,
            }
        }
        if !accepted {
            break;
        }
        iterations += 1;
    }
    let current = canonicalize(&current);
    let floor_violated = current
        .coeffs_x
        .iter()
        .chain(current.coeffs_y.iter())
        .chain(current.coeffs_z.iter())
        .any(|c| *c < current.floor);
    let result = SolveResult {
        residual_rms: res.eq_rms,
        residual_max: res.eq_max,
        iterations,
        delaunay_distance: delaunay_distance(&current),
        converged: res.eq_max <= opts.tol,
        floor_violated,
    };
    Ok((current, result))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_residuals_vanish() {
        let m = SplineModel::sphere(13);
        let grid = m.grid(12);
        assert!(grid.len() > 50);
        let r = residual_vector(&m, -1.0, &grid).unwrap();
        let max = r.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        assert!(max <= 1e-10, "sphere residual {max}");
    }

    #[test]
    fn catenoid_residuals_vanish() {
        let m = SplineModel::catenoid(13);
        let grid = m.grid(12);
        let r = residual_vector(&m, 0.0, &grid).unwrap();
        let max = r.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        assert!(max <= 1e-10, "catenoid residual {max}");
    }

    #[test]
    fn wrong_sign_mean_gives_residual_64() {
        // on the sphere LHS = 32 and the flipped RHS contributes +32 again
        let m = SplineModel::sphere(13);
        let grid = m.grid(8);
        let r = residual_vector(&m, 1.0, &grid).unwrap();
        for ri in &r {
            assert!((ri - 64.0).abs() <= 1e-9, "residual {ri}");
        }
    }

    #[test]
    fn grid_points_outside_coverage_error() {
        let m = SplineModel::sphere(8);
        assert!(matches!(
            residual_vector(&m, -1.0, &[(2.0, 0.1)]),
            Err(SolverError::OutsideCoverage { axis: 'u', .. })
        ));
        let mut narrow = m.clone();
        narrow.knots_w = (0..8).map(|i| -0.5 + 0.45 * i as f64 / 7.0).collect();
        narrow.coeffs_z = narrow.knots_w.iter().map(|&w| 4.0 * w + 4.0).collect();
        assert!(matches!(
            residual_vector(&narrow, -1.0, &[(0.4, 0.4)]),
            Err(SolverError::OutsideCoverage { axis: 'w', .. })
        ));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = SplineModel::perturbed_sphere(9, 0.05, 3);
        let grid = m.grid(7);
        let basis = grid_basis(&m, &grid).unwrap();
        let jac = jacobian(&m, -1.0, &grid, &basis).unwrap();
        let base = full_residual(&m, -1.0, &grid).unwrap().full;
        let nu = m.knots_u.len();
        let nv = m.knots_v.len();
        let n = nu + nv + m.knots_w.len();
        let h = 1e-6;
        for j in 0..n {
            let mut step = DVector::zeros(n);
            step[j] = h;
            let bumped = apply_step(&m, &step);
            let fwd = full_residual(&bumped, -1.0, &grid).unwrap().full;
            for k in 0..grid.len() {
                let fd = (fwd[k] - base[k]) / h;
                let an = jac[(k, j)];
                assert!(
                    (fd - an).abs() <= 1e-4 * (1.0 + an.abs()),
                    "row {k} col {j}: fd {fd} vs analytic {an}"
                );
            }
        }
    }

    #[test]
    fn exact_sphere_converges_immediately() {
        let m = SplineModel::sphere(13);
        let grid = m.grid(12);
        let (_, result) = fit(&m, -1.0, &grid, &FitOptions::default()).unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 0);
        assert!(result.residual_rms <= 1e-10);
        assert!(result.delaunay_distance <= 1e-12);
        assert!(!result.floor_violated);
    }

    #[test]
    fn perturbed_sphere_recovers_a_delaunay_model() {
        let m = SplineModel::perturbed_sphere(13, 1e-2, 7);
        let grid = m.grid(12);
        let start = residual_vector(&m, -1.0, &grid).unwrap();
        assert!(start.iter().any(|r| r.abs() > 1e-3));
        let (_, result) = fit(&m, -1.0, &grid, &FitOptions::default()).unwrap();
        assert!(result.converged, "residual_max {}", result.residual_max);
        assert!(result.residual_max <= 1e-8);
        assert!(
            result.delaunay_distance <= 1e-4,
            "delaunay distance {}",
            result.delaunay_distance
        );
    }

    #[test]
    fn converged_random_starts_are_delaunay() {
        // multi-start confirmation: converged runs must be rotational;
        // non-converged runs are reported, never counted as counterexamples
        let mut converged_runs = 0;
        for seed in 0..6 {
            let m = SplineModel::random_positive(10, seed);
            let grid = m.grid(10);
            let opts = FitOptions {
                max_iter: 300,
                ..FitOptions::default()
            };
            let Ok((_, result)) = fit(&m, -1.0, &grid, &opts) else {
                continue;
            };
            if result.converged {
                converged_runs += 1;
                assert!(
                    result.delaunay_distance <= 1e-3,
                    "seed {seed}: converged with delaunay distance {}",
                    result.delaunay_distance
                );
            }
        }
        assert!(converged_runs > 0, "no random start converged");
    }

    #[test]
    fn delaunay_distance_examples() {
        let m = SplineModel::sphere(10);
        assert!(delaunay_distance(&m) <= 1e-14);
        let cat = SplineModel::catenoid(10);
        assert!(delaunay_distance(&cat) <= 1e-14);
        // slope mismatch 4 vs 4.1 is detected at the right magnitude
        let mut mm = SplineModel::sphere(10);
        mm.coeffs_y = mm.knots_v.iter().map(|&v| 4.1 * v).collect();
        let norm = 4.0 * 0.45 + 4.1 * 0.45;
        let d = delaunay_distance(&mm);
        assert!((d - 0.1 / norm).abs() <= 1e-12, "distance {d}");
    }

    #[test]
    fn gauge_transform_preserves_solutions() {
        let m = SplineModel::sphere(13).gauge_transform(2.0);
        let grid = m.grid(12);
        let r = residual_vector(&m, -0.5, &grid).unwrap();
        let max = r.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        assert!(max <= 1e-9, "gauge residual {max}");
    }

    #[test]
    fn descent_is_monotone() {
        // re-fitting from each intermediate cannot increase the rms; probe
        // by limiting the iteration budget step by step
        let m = SplineModel::perturbed_sphere(11, 5e-2, 9);
        let grid = m.grid(10);
        let mut last = f64::INFINITY;
        for max_iter in [1, 2, 4, 8, 16] {
            let opts = FitOptions {
                max_iter,
                ..FitOptions::default()
            };
            let (_, result) = fit(&m, -1.0, &grid, &opts).unwrap();
            assert!(
                result.residual_rms <= last * (1.0 + 1e-12),
                "rms went up at budget {max_iter}"
            );
            last = result.residual_rms;
        }
    }
}
