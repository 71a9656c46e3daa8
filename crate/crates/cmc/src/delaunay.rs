//! Delaunay profiles from the rotational first integral
//! 2h/sqrt(4h + h'^2) + H h = c, with an independent rolling-conic oracle.
//!
//! Profiles store h(z) = x^2 + y^2, the squared distance to the rotation
//! axis. The second-order ODE is integrated (rather than the first-order
//! square-root form) so that h' can change sign at waists and bulges; the
//! first integral is used as a conserved-quantity monitor only.

use thiserror::Error;

use crate::jets::{catalog, C3Function, Jet3};
use crate::spline::CubicSpline;
use crate::surface::SeparableSurface;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DelaunayError {
    #[error("H must be nonzero")]
    ZeroMeanCurvature,
    #[error("c = {c} exceeds c_max = {c_max}: no admissible profile")]
    Inadmissible { c: f64, c_max: f64 },
    #[error("nonpositive radicand 4h + h'^2 = {0}")]
    NonPositiveRadicand(f64),
    #[error("initial radius must be positive, got h0 = {0}")]
    NonPositiveStart(f64),
    #[error("step size underflow at z = {0}")]
    StepUnderflow(f64),
    #[error("degenerate conic: semi-minor axis must be positive")]
    DegenerateConic,
    #[error("conic axes must satisfy a >= b > 0, got a = {a}, b = {b}")]
    BadConicAxes { a: f64, b: f64 },
    #[error("profile has fewer than {min} samples")]
    TooFewSamples { min: usize },
    #[error(transparent)]
    Spline(#[from] crate::spline::SplineError),
}

/// First-integral data (H, c) of a Delaunay profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaunayParams {
    /// Signed mean curvature in the surface-module orientation (H < 0 for
    /// the standard outward-oriented family).
    pub mean: f64,
    /// Constant of integration of the first integral.
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelaunayClass {
    Sphere,
    Cylinder,
    Unduloid,
    Nodoid,
}

impl std::fmt::Display for DelaunayClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DelaunayClass::Sphere => "Sphere",
            DelaunayClass::Cylinder => "Cylinder",
            DelaunayClass::Unduloid => "Unduloid",
            DelaunayClass::Nodoid => "Nodoid",
        };
        f.write_str(s)
    }
}

/// Sampled rotational profile h(z) with slopes h'(z).
#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub z: Vec<f64>,
    pub h: Vec<f64>,
    pub hp: Vec<f64>,
    /// Set when integration stopped early (axis contact or vertical tangent).
    pub truncated: bool,
}

impl ProfileCurve {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Maximum drift of the first integral over the samples.
    pub fn first_integral_drift(&self, params: &DelaunayParams) -> f64 {
        self.z
            .iter()
            .enumerate()
            .map(|(i, _)| {
                (first_integral(self.h[i], self.hp[i], params.mean).unwrap_or(f64::NAN)
                    - params.c)
                    .abs()
            })
            .fold(0.0, f64::max)
    }
}

/// 2h/sqrt(4h + hp^2) + H h; constant along any Delaunay profile.
pub fn first_integral(h: f64, hp: f64, mean: f64) -> Result<f64, DelaunayError> {
    let rad = 4.0 * h + hp * hp;
    if rad <= 0.0 {
        return Err(DelaunayError::NonPositiveRadicand(rad));
    }
    Ok(2.0 * h / rad.sqrt() + mean * h)
}

/// Positive roots of the waist equation |H| r^2 - r + c = 0, ascending.
pub fn waist_radii(params: &DelaunayParams) -> Result<Vec<f64>, DelaunayError> {
    let ah = params.mean.abs();
    if ah == 0.0 {
        return Err(DelaunayError::ZeroMeanCurvature);
    }
    let disc = 1.0 - 4.0 * ah * params.c;
    if disc < 0.0 {
        return Ok(Vec::new());
    }
    let sq = disc.sqrt();
    let mut roots: Vec<f64> = [(1.0 - sq) / (2.0 * ah), (1.0 + sq) / (2.0 * ah)]
        .into_iter()
        .filter(|r| *r > 0.0)
        .collect();
    roots.dedup();
    Ok(roots)
}

/// Classifies (H, c) into the Delaunay family.
pub fn classify(params: &DelaunayParams) -> Result<DelaunayClass, DelaunayError> {
    let ah = params.mean.abs();
    if ah == 0.0 {
        return Err(DelaunayError::ZeroMeanCurvature);
    }
    let c_max = 1.0 / (4.0 * ah);
    let c = params.c;
    if c > c_max * (1.0 + 1e-12) {
        return Err(DelaunayError::Inadmissible { c, c_max });
    }
    if c < 0.0 {
        Ok(DelaunayClass::Nodoid)
    } else if c == 0.0 {
        Ok(DelaunayClass::Sphere)
    } else if (c - c_max).abs() <= 1e-12 * c_max {
        Ok(DelaunayClass::Cylinder)
    } else {
        Ok(DelaunayClass::Unduloid)
    }
}

/// Step-control options for the profile integrator.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on the step size; keeps the output dense enough for spline use.
    pub max_step: f64,
    /// Radius-squared floor below which the profile is truncated.
    pub axis_floor: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 5e-4,
            axis_floor: 1e-9,
        }
    }
}

/// h'' = (8h + 4h'^2 + 2H (4h + h'^2)^(3/2)) / (4h)
fn rhs(mean: f64, h: f64, p: f64) -> f64 {
    let s = 4.0 * h + p * p;
    (8.0 * h + 4.0 * p * p + 2.0 * mean * s * s.sqrt()) / (4.0 * h)
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One adaptive integration sweep from `z0` toward `z1`.
fn sweep(
    params: &DelaunayParams,
    z0: f64,
    z1: f64,
    h0: f64,
    hp0: f64,
    ctrl: &StepControl,
) -> Result<ProfileCurve, DelaunayError> {
    let dir = if z1 >= z0 { 1.0 } else { -1.0 };
    let span = (z1 - z0).abs();
    let mut z = z0;
    let mut y = [h0, hp0];
    let mut out = ProfileCurve {
        z: vec![z0],
        h: vec![h0],
        hp: vec![hp0],
        truncated: false,
    };
    let mut step = ctrl.max_step.min(span.max(1e-6));
    let min_step = 1e-13 * (1.0 + span);
    while (z - z0).abs() < span {
        let remaining = span - (z - z0).abs();
        if remaining <= min_step {
            // span exhausted up to rounding
            break;
        }
        step = step.min(remaining).min(ctrl.max_step);
        if step < min_step {
            out.truncated = true;
            return Ok(out);
        }
        let hstep = dir * step;
        // embedded Dormand-Prince step on (h, h')
        let mut k = [[0.0_f64; 2]; 7];
        let deriv = |state: [f64; 2]| -> Option<[f64; 2]> {
            if state[0] <= ctrl.axis_floor {
                return None;
            }
            Some([state[1], rhs(params.mean, state[0], state[1])])
        };
        let mut failed = false;
        match deriv(y) {
            Some(d) => k[0] = d,
            None => {
                out.truncated = true;
                return Ok(out);
            }
        }
        for i in 0..6 {
            let mut stage = y;
            for (j, kj) in k.iter().enumerate().take(i + 1) {
                stage[0] += hstep * A[i][j] * kj[0];
                stage[1] += hstep * A[i][j] * kj[1];
            }
            match deriv(stage) {
                Some(d) => k[i + 1] = d,
                None => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            step *= 0.5;
            continue;
        }
        let mut y5 = y;
        let mut y4 = y;
        for (j, kj) in k.iter().enumerate() {
            y5[0] += hstep * B5[j] * kj[0];
            y5[1] += hstep * B5[j] * kj[1];
            y4[0] += hstep * B4[j] * kj[0];
            y4[1] += hstep * B4[j] * kj[1];
        }
        let scale0 = ctrl.abs_tol + ctrl.rel_tol * y[0].abs().max(y5[0].abs());
        let scale1 = ctrl.abs_tol + ctrl.rel_tol * y[1].abs().max(y5[1].abs());
        let err = ((y5[0] - y4[0]) / scale0)
            .hypot((y5[1] - y4[1]) / scale1)
            / std::f64::consts::SQRT_2;
        if err <= 1.0 {
            z += hstep;
            y = y5;
            if y[0] <= ctrl.axis_floor {
                out.truncated = true;
                return Ok(out);
            }
            out.z.push(z);
            out.h.push(y[0]);
            out.hp.push(y[1]);
            let grow = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            step = (step * grow).min(ctrl.max_step);
        } else {
            step *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(out)
}

/// Integrates the profile ODE over `z_span` from (h0, hp0) at `z_span.0`.
pub fn integrate_profile(
    params: &DelaunayParams,
    z_span: (f64, f64),
    h0: f64,
    hp0: f64,
    ctrl: &StepControl,
) -> Result<ProfileCurve, DelaunayError> {
    if params.mean == 0.0 {
        return Err(DelaunayError::ZeroMeanCurvature);
    }
    if h0 <= 0.0 {
        return Err(DelaunayError::NonPositiveStart(h0));
    }
    first_integral(h0, hp0, params.mean)?;
    sweep(params, z_span.0, z_span.1, h0, hp0, ctrl)
}

/// Integrates symmetrically from a waist/bulge start at z = 0 over
/// [-zmax, zmax], merging the two sweeps.
pub fn waist_profile(
    params: &DelaunayParams,
    zmax: f64,
    ctrl: &StepControl,
) -> Result<ProfileCurve, DelaunayError> {
    let radii = waist_radii(params)?;
    // start at the smallest positive waist radius: for unduloids this is the
    // neck, matching the roulette's vertex contact at z = 0
    let r = *radii.first().ok_or(DelaunayError::Inadmissible {
        c: params.c,
        c_max: 1.0 / (4.0 * params.mean.abs()),
    })?;
    let h0 = r * r;
    let fwd = sweep(params, 0.0, zmax, h0, 0.0, ctrl)?;
    let bwd = sweep(params, 0.0, -zmax, h0, 0.0, ctrl)?;
    let mut z: Vec<f64> = bwd.z.iter().rev().cloned().collect();
    let mut h: Vec<f64> = bwd.h.iter().rev().cloned().collect();
    let mut hp: Vec<f64> = bwd.hp.iter().rev().cloned().collect();
    z.extend_from_slice(&fwd.z[1..]);
    h.extend_from_slice(&fwd.h[1..]);
    hp.extend_from_slice(&fwd.hp[1..]);
    Ok(ProfileCurve {
        z,
        h,
        hp,
        truncated: fwd.truncated || bwd.truncated,
    })
}

/// Conic to roll along the axis for the roulette construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conic {
    /// Semi-axes a >= b > 0; the focus roulette is an unduloid profile
    /// (a circle a = b gives the cylinder).
    Ellipse { a: f64, b: f64 },
    /// Semi-axes a, b > 0; the far-focus roulette is a nodoid profile,
    /// truncated where the traced curve stops being a graph over z.
    Hyperbola { a: f64, b: f64 },
}

/// Gauss-Legendre 5-point nodes/weights on [-1, 1], for arc-length quadrature.
const GL_X: [f64; 5] = [
    -0.906179845938664,
    -0.538469310105683,
    0.0,
    0.538469310105683,
    0.906179845938664,
];
const GL_W: [f64; 5] = [
    0.236926885056189,
    0.478628670499366,
    0.568888888888889,
    0.478628670499366,
    0.236926885056189,
];

/// Rolls a conic without slipping along the z-axis and traces a focus.
///
/// At parameter t the conic touches the line at abscissa s(t) (the rolled
/// arc length); the focus lands at height equal to its distance from the
/// tangent line. Independent oracle for [`integrate_profile`].
pub fn roulette_profile(conic: Conic, arc_samples: usize) -> Result<ProfileCurve, DelaunayError> {
    let (a, b, hyper) = match conic {
        Conic::Ellipse { a, b } => {
            if b <= 0.0 {
                return Err(DelaunayError::DegenerateConic);
            }
            if a < b {
                return Err(DelaunayError::BadConicAxes { a, b });
            }
            (a, b, false)
        }
        Conic::Hyperbola { a, b } => {
            if a <= 0.0 || b <= 0.0 {
                return Err(DelaunayError::DegenerateConic);
            }
            (a, b, true)
        }
    };
    let n = arc_samples.max(16);

    // point, velocity and focus for each conic type
    let point = |t: f64| -> ([f64; 2], [f64; 2]) {
        if hyper {
            ([a * t.cosh(), b * t.sinh()], [a * t.sinh(), b * t.cosh()])
        } else {
            ([a * t.cos(), b * t.sin()], [-a * t.sin(), b * t.cos()])
        }
    };
    let focus = if hyper {
        // far focus of the rolling branch
        [-(a * a + b * b).sqrt(), 0.0]
    } else {
        [(a * a - b * b).sqrt(), 0.0]
    };
    let speed = |t: f64| {
        let (_, d) = point(t);
        d[0].hypot(d[1])
    };

    // two revolutions for the ellipse so one full z-period sits in the
    // interior; a symmetric parameter window for the hyperbola (the graph
    // region is truncated below anyway)
    let (t_lo, t_hi) = if hyper { (-2.0, 2.0) } else { (0.0, 4.0 * std::f64::consts::PI) };
    let dt = (t_hi - t_lo) / n as f64;

    let mut ts: Vec<f64> = (0..=n).map(|i| t_lo + dt * i as f64).collect();
    // make sure t = 0 is a sample so the waist lands exactly at z = 0
    if !ts.iter().any(|&t| t == 0.0) {
        ts.push(0.0);
        ts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    }
    let i0 = ts.iter().position(|&t| t == 0.0).unwrap_or(0);
    // cumulative arc length with s(t = 0) = 0 (vertex contact)
    let mut svals = vec![0.0; ts.len()];
    for i in (0..i0).rev() {
        let (lo, hi) = (ts[i], ts[i + 1]);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let seg: f64 = GL_X
            .iter()
            .zip(GL_W.iter())
            .map(|(&x, &w)| w * speed(mid + half * x))
            .sum::<f64>()
            * half;
        svals[i] = svals[i + 1] - seg;
    }
    for i in i0..ts.len() - 1 {
        let (lo, hi) = (ts[i], ts[i + 1]);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let seg: f64 = GL_X
            .iter()
            .zip(GL_W.iter())
            .map(|(&x, &w)| w * speed(mid + half * x))
            .sum::<f64>()
            * half;
        svals[i + 1] = svals[i] + seg;
    }
    // trace the focus: at contact t the focus lands at abscissa
    // s + (F-P).T and height (F-P).N, so h = height^2 and dh/dz = -2 (F-P).T
    let mut raw: Vec<(f64, f64, f64)> = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let (p, d) = point(t);
        let sp = d[0].hypot(d[1]);
        let tang = [d[0] / sp, d[1] / sp];
        let norm = [-tang[1], tang[0]];
        let fp = [focus[0] - p[0], focus[1] - p[1]];
        let along = fp[0] * tang[0] + fp[1] * tang[1];
        let height = fp[0] * norm[0] + fp[1] * norm[1];
        if height * height <= 1e-12 {
            continue;
        }
        raw.push((svals[i] + along, height * height, -2.0 * along));
    }
    // keep the longest run on which the trace is a graph over z; the
    // hyperbola roulette leaves the graph regime at vertical tangents
    let mut best = (0, 0);
    let mut start = 0;
    let mut dir = 0i8;
    for i in 1..raw.len() {
        let d = (raw[i].0 - raw[i - 1].0).signum() as i8;
        if d == 0 || (dir != 0 && d != dir) {
            if i - start > best.1 - best.0 {
                best = (start, i);
            }
            start = i - 1;
            dir = 0;
        } else {
            dir = d;
        }
    }
    if raw.len() - start > best.1 - best.0 {
        best = (start, raw.len());
    }
    let mut run: Vec<(f64, f64, f64)> = raw[best.0..best.1].to_vec();
    if run.len() < 4 {
        return Err(DelaunayError::TooFewSamples { min: 4 });
    }
    if run[1].0 < run[0].0 {
        // reflect z -> -z; the profile family is symmetric under it
        run.reverse();
        for s in run.iter_mut() {
            s.0 = -s.0;
            s.2 = -s.2;
        }
    }
    Ok(ProfileCurve {
        z: run.iter().map(|s| s.0).collect(),
        h: run.iter().map(|s| s.1).collect(),
        hp: run.iter().map(|s| s.2).collect(),
        truncated: hyper,
    })
}

/// Wraps a profile as the separable surface x^2 + y^2 - h(z) = 0, with the
/// profile interpolated by a clamped cubic spline.
pub fn surface_of_revolution(profile: &ProfileCurve) -> Result<SeparableSurface, DelaunayError> {
    if profile.len() < 4 {
        return Err(DelaunayError::TooFewSamples { min: 4 });
    }
    let n = profile.len();
    let spline = CubicSpline::clamped(&profile.z, &profile.h, profile.hp[0], profile.hp[n - 1])?;
    let h_max = profile.h.iter().cloned().fold(0.0, f64::max);
    let half = h_max.sqrt();
    let quad = catalog("quadratic", &[1.0, 0.0, 0.0])
        .expect("catalog quadratic")
        .restrict(-half, half)
        .map_err(|_| DelaunayError::TooFewSamples { min: 4 })?;
    let (zlo, zhi) = spline.domain();
    let h_fn = C3Function::new(zlo, zhi, move |zv| {
        let j = spline.eval(zv);
        Ok(Jet3::new(-j.value, -j.d1, -j.d2, -j.d3))
    });
    Ok(SeparableSurface::new(
        quad.clone(),
        quad,
        h_fn,
        "surface of revolution",
    ))
}
