//! Separable surfaces f(x) + g(y) + h(z) = 0 and their mean curvature.
//!
//! The orientation is the normalized gradient N = grad F / |grad F|, so a
//! sphere of radius r reports H = -1/r.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jets::{catalog, C3Function, Jet3, JetError};

#[derive(Debug, Clone, Error)]
pub enum SurfaceError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("vanishing gradient at ({x}, {y}, {z}): singular point")]
    SingularPoint { x: f64, y: f64, z: f64 },
    #[error("point not on the level set: |f+g+h| = {residual} exceeds {tol}")]
    NotOnSurface { residual: f64, tol: f64 },
    #[error("{axis} component not invertible: its derivative vanishes on the whole domain")]
    NotInvertible { axis: char },
    #[error("no level-set points found in {draws} draws")]
    NoPointsFound { draws: usize },
    #[error("domain of {axis} is unbounded; restrict it before sampling")]
    UnboundedDomain { axis: char },
    #[error("invalid surface spec: {0}")]
    BadSpec(String),
}

/// Implicit surface f(x) + g(y) + h(z) = 0.
#[derive(Debug, Clone)]
pub struct SeparableSurface {
    pub f: C3Function,
    pub g: C3Function,
    pub h: C3Function,
    pub label: String,
}

/// A point of the zero level set, with its residual recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub level_residual: f64,
}

/// One component of the JSON surface spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
}

/// JSON surface description consumed by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub f: ComponentSpec,
    pub g: ComponentSpec,
    pub h: ComponentSpec,
    #[serde(default)]
    pub label: String,
}

fn build_component(spec: &ComponentSpec) -> Result<C3Function, SurfaceError> {
    let func = catalog(&spec.name, &spec.params)?;
    match spec.domain {
        Some([lo, hi]) => Ok(func.restrict(lo, hi)?),
        None => Ok(func),
    }
}

/// Which coordinate is solved for when sampling the level set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

impl SeparableSurface {
    pub fn new(f: C3Function, g: C3Function, h: C3Function, label: impl Into<String>) -> Self {
        SeparableSurface {
            f,
            g,
            h,
            label: label.into(),
        }
    }

    pub fn from_spec(spec: &SurfaceSpec) -> Result<Self, SurfaceError> {
        Ok(SeparableSurface {
            f: build_component(&spec.f)?,
            g: build_component(&spec.g)?,
            h: build_component(&spec.h)?,
            label: spec.label.clone(),
        })
    }

    /// f(x) + g(y) + h(z).
    pub fn implicit_value(&self, x: f64, y: f64, z: f64) -> Result<f64, SurfaceError> {
        Ok(self.f.eval(x)?.value + self.g.eval(y)?.value + self.h.eval(z)?.value)
    }

    fn jets_at(&self, p: &SurfacePoint) -> Result<(Jet3, Jet3, Jet3), SurfaceError> {
        Ok((self.f.eval(p.x)?, self.g.eval(p.y)?, self.h.eval(p.z)?))
    }

    /// Minimum of f'^2 + g'^2 + h'^2 over an n^3 interior grid of the
    /// domain box; a value near zero flags an irregular surface.
    pub fn regularity_check(&self, n: usize) -> Result<f64, SurfaceError> {
        assert!(n >= 1);
        let axes = [
            (&self.f, Axis::X),
            (&self.g, Axis::Y),
            (&self.h, Axis::Z),
        ];
        let mut grids: Vec<Vec<f64>> = Vec::with_capacity(3);
        for (func, axis) in axes {
            let (lo, hi) = func.domain();
            if !lo.is_finite() || !hi.is_finite() {
                return Err(SurfaceError::UnboundedDomain {
                    axis: axis.letter(),
                });
            }
            let pts: Vec<f64> = (0..n)
                .map(|i| lo + (hi - lo) * (i + 1) as f64 / (n + 1) as f64)
                .collect();
            let d2: Vec<f64> = pts
                .iter()
                .map(|&t| func.eval(t).map(|j| j.d1 * j.d1))
                .collect::<Result<_, _>>()?;
            grids.push(d2);
        }
        let mut min = f64::INFINITY;
        for &fx in &grids[0] {
            for &gy in &grids[1] {
                for &hz in &grids[2] {
                    min = min.min(fx + gy + hz);
                }
            }
        }
        Ok(min)
    }

    /// Mean curvature at an on-surface point, oriented by grad F / |grad F|.
    pub fn mean_curvature(&self, p: &SurfacePoint) -> Result<f64, SurfaceError> {
        let (fj, gj, hj) = self.jets_at(p)?;
        let (f1, g1, h1) = (fj.d1 * fj.d1, gj.d1 * gj.d1, hj.d1 * hj.d1);
        let grad2 = f1 + g1 + h1;
        if grad2 == 0.0 {
            return Err(SurfaceError::SingularPoint {
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
        let numer = fj.d2 * (g1 + h1) + gj.d2 * (f1 + h1) + hj.d2 * (f1 + g1);
        Ok(-numer / (2.0 * grad2.powf(1.5)))
    }

    /// Residual of the separable CMC equation at a point for a candidate H;
    /// zero exactly when the point satisfies the equation.
    pub fn cmc_residual(&self, p: &SurfacePoint, mean: f64) -> Result<f64, SurfaceError> {
        let (fj, gj, hj) = self.jets_at(p)?;
        let (f1, g1, h1) = (fj.d1 * fj.d1, gj.d1 * gj.d1, hj.d1 * hj.d1);
        let grad2 = f1 + g1 + h1;
        if grad2 == 0.0 {
            return Err(SurfaceError::SingularPoint {
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
        let numer = fj.d2 * (g1 + h1) + gj.d2 * (f1 + h1) + hj.d2 * (f1 + g1);
        Ok(numer + 2.0 * mean * grad2.powf(1.5))
    }

    /// Samples level-set points by drawing (x, y) and solving for z.
    pub fn sample_level_set(
        &self,
        n: usize,
        seed: u64,
    ) -> Result<Vec<SurfacePoint>, SurfaceError> {
        self.sample_level_set_along(Axis::Z, n, seed)
    }

    /// Samples points solving along the given axis; the other two
    /// coordinates are drawn uniformly from their domains.
    pub fn sample_level_set_along(
        &self,
        axis: Axis,
        n: usize,
        seed: u64,
    ) -> Result<Vec<SurfacePoint>, SurfaceError> {
        assert!(n >= 1);
        let (solve, free_a, free_b) = match axis {
            Axis::Z => (&self.h, (&self.f, Axis::X), (&self.g, Axis::Y)),
            Axis::Y => (&self.g, (&self.f, Axis::X), (&self.h, Axis::Z)),
            Axis::X => (&self.f, (&self.g, Axis::Y), (&self.h, Axis::Z)),
        };
        for (func, ax) in [free_a, free_b] {
            let (lo, hi) = func.domain();
            if !lo.is_finite() || !hi.is_finite() {
                return Err(SurfaceError::UnboundedDomain {
                    axis: ax.letter(),
                });
            }
        }
        let (slo, shi) = solve.domain();
        if !slo.is_finite() || !shi.is_finite() {
            return Err(SurfaceError::UnboundedDomain {
                axis: axis.letter(),
            });
        }
        // a component with identically-zero derivative cannot be solved for
        const SCAN: usize = 512;
        let scan: Vec<f64> = (0..SCAN)
            .map(|i| slo + (shi - slo) * (i + 1) as f64 / (SCAN + 1) as f64)
            .collect();
        let max_d1 = scan
            .iter()
            .filter_map(|&t| solve.eval(t).ok())
            .map(|j| j.d1.abs())
            .fold(0.0_f64, f64::max);
        if max_d1 == 0.0 {
            return Err(SurfaceError::NotInvertible {
                axis: axis.letter(),
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (alo, ahi) = free_a.0.domain();
        let (blo, bhi) = free_b.0.domain();
        let mut points = Vec::with_capacity(n);
        let max_draws = 100 * n;
        let mut draws = 0;
        while points.len() < n && draws < max_draws {
            draws += 1;
            let a = rng.gen_range(alo..ahi);
            let b = rng.gen_range(blo..bhi);
            let (fa, fb) = match (free_a.0.eval(a), free_b.0.eval(b)) {
                (Ok(x), Ok(y)) => (x.value, y.value),
                _ => continue,
            };
            let target = -(fa + fb);
            let tol = 1e-12 * (1.0 + fa.abs() + fb.abs());
            // bracket phi(t) = solve(t) - target over the scan grid
            let mut brackets = Vec::new();
            let mut prev: Option<(f64, f64)> = None;
            for &t in &scan {
                if let Ok(j) = solve.eval(t) {
                    let phi = j.value - target;
                    if let Some((tp, pp)) = prev {
                        if pp == 0.0 || pp * phi < 0.0 {
                            brackets.push((tp, t));
                        }
                    }
                    prev = Some((t, phi));
                }
            }
            if brackets.is_empty() {
                continue;
            }
            let (mut lo, mut hi) = brackets[rng.gen_range(0..brackets.len())];
            let phi_at = |t: f64| solve.eval(t).map(|j| (j.value - target, j.d1));
            let (mut plo, _) = match phi_at(lo) {
                Ok(v) => v,
                Err(_) => continue,
            };
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let (pm, _) = match phi_at(mid) {
                    Ok(v) => v,
                    Err(_) => break,
                };
                if plo * pm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    plo = pm;
                }
            }
            // Newton polish
            let mut t = 0.5 * (lo + hi);
            for _ in 0..4 {
                if let Ok((phi, d)) = phi_at(t) {
                    if d != 0.0 {
                        let step = phi / d;
                        let next = t - step;
                        if next > slo && next < shi {
                            t = next;
                        }
                    }
                }
            }
            if let Ok((phi, _)) = phi_at(t) {
                if phi.abs() <= tol {
                    let (x, y, z) = match axis {
                        Axis::Z => (a, b, t),
                        Axis::Y => (a, t, b),
                        Axis::X => (t, a, b),
                    };
                    points.push(SurfacePoint {
                        x,
                        y,
                        z,
                        level_residual: phi.abs(),
                    });
                }
            }
        }
        if points.len() < n {
            return Err(SurfaceError::NoPointsFound { draws });
        }
        Ok(points)
    }

    /// Supremum of |cmc_residual| over sampled level-set points. Falls back
    /// to solving along x or y when the h component is not invertible.
    pub fn is_cmc(&self, mean: f64, n: usize, seed: u64) -> Result<f64, SurfaceError> {
        let points = self
            .sample_level_set_along(Axis::Z, n, seed)
            .or_else(|e| match e {
                SurfaceError::NotInvertible { .. } => {
                    self.sample_level_set_along(Axis::X, n, seed)
                }
                other => Err(other),
            })
            .or_else(|e| match e {
                SurfaceError::NotInvertible { .. } => {
                    self.sample_level_set_along(Axis::Y, n, seed)
                }
                other => Err(other),
            })?;
        let mut sup = 0.0_f64;
        for p in &points {
            sup = sup.max(self.cmc_residual(p, mean)?.abs());
        }
        Ok(sup)
    }
}

/// Mean curvature of a general implicit surface F = 0 by finite-difference
/// divergence of the normalized gradient. Independent oracle for
/// [`SeparableSurface::mean_curvature`]; also used for non-separable
/// minimality regressions.
pub fn fd_mean_curvature(
    field: impl Fn(f64, f64, f64) -> f64,
    x: f64,
    y: f64,
    z: f64,
) -> f64 {
    const INNER: f64 = 1e-5;
    const OUTER: f64 = 1e-4;
    let grad = |x: f64, y: f64, z: f64| {
        let gx = (field(x + INNER, y, z) - field(x - INNER, y, z)) / (2.0 * INNER);
        let gy = (field(x, y + INNER, z) - field(x, y - INNER, z)) / (2.0 * INNER);
        let gz = (field(x, y, z + INNER) - field(x, y, z - INNER)) / (2.0 * INNER);
        (gx, gy, gz)
    };
    let normal = |x: f64, y: f64, z: f64| {
        let (gx, gy, gz) = grad(x, y, z);
        let norm = (gx * gx + gy * gy + gz * gz).sqrt();
        (gx / norm, gy / norm, gz / norm)
    };
    let div = (normal(x + OUTER, y, z).0 - normal(x - OUTER, y, z).0) / (2.0 * OUTER)
        + (normal(x, y + OUTER, z).1 - normal(x, y - OUTER, z).1) / (2.0 * OUTER)
        + (normal(x, y, z + OUTER).2 - normal(x, y, z - OUTER).2) / (2.0 * OUTER);
    -0.5 * div
}
