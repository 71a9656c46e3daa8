//! Third-order jets of one-variable functions and directional calculus on
//! the constraint plane u + v + w = 0.
//!
//! A [`Jet3`] carries a function value together with its first three
//! derivatives at a point; every curvature formula in this crate is
//! evaluated by propagating jets through the chain and product rules.
//! [`Grad3`] carries one value with partial derivatives with respect to the
//! three plane variables and backs the equal-partials identity checks.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

/// Errors raised by jet arithmetic and catalog evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum JetError {
    #[error("division by zero jet value")]
    DivisionByZero,
    #[error("negative or zero radicand {0} in fractional power")]
    NonPositiveRadicand(f64),
    #[error("input {x} outside open domain ({lo}, {hi})")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogEntry(String),
    #[error("catalog entry `{name}`: {reason}")]
    BadParams { name: String, reason: String },
    #[error("non-finite jet component produced")]
    NonFinite,
}

/// Value and first three derivatives of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Jet3 {
    pub fn new(value: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Jet3 { value, d1, d2, d3 }
    }

    /// Jet of a constant: all derivatives vanish.
    pub fn constant(value: f64) -> Self {
        Jet3::new(value, 0.0, 0.0, 0.0)
    }

    /// Jet of the identity map at `x`.
    pub fn variable(x: f64) -> Self {
        Jet3::new(x, 1.0, 0.0, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }

    fn check(self) -> Result<Jet3, JetError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(JetError::NonFinite)
        }
    }

    /// Composes an outer function, given by its derivatives at `self.value`,
    /// with this jet (Faa di Bruno through order 3).
    pub fn compose(self, f0: f64, f1: f64, f2: f64, f3: f64) -> Jet3 {
        Jet3 {
            value: f0,
            d1: f1 * self.d1,
            d2: f2 * self.d1 * self.d1 + f1 * self.d2,
            d3: f3 * self.d1.powi(3) + 3.0 * f2 * self.d1 * self.d2 + f1 * self.d3,
        }
    }

    pub fn recip(self) -> Result<Jet3, JetError> {
        let t = self.value;
        if t == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        self.compose(1.0 / t, -1.0 / (t * t), 2.0 / t.powi(3), -6.0 / t.powi(4))
            .check()
    }

    pub fn div(self, rhs: Jet3) -> Result<Jet3, JetError> {
        Ok(self * rhs.recip()?)
    }

    pub fn sqrt(self) -> Result<Jet3, JetError> {
        let t = self.value;
        if t <= 0.0 {
            return Err(JetError::NonPositiveRadicand(t));
        }
        let r = t.sqrt();
        self.compose(r, 0.5 / r, -0.25 / (t * r), 0.375 / (t * t * r))
            .check()
    }

    /// t^(3/2), the power appearing in the mean-curvature denominator.
    pub fn pow_3_2(self) -> Result<Jet3, JetError> {
        let t = self.value;
        if t <= 0.0 {
            return Err(JetError::NonPositiveRadicand(t));
        }
        let r = t.sqrt();
        self.compose(t * r, 1.5 * r, 0.75 / r, -0.375 / (t * r)).check()
    }

    pub fn powi(self, n: i32) -> Jet3 {
        let t = self.value;
        let f0 = t.powi(n);
        let f1 = n as f64 * t.powi(n - 1);
        let f2 = (n * (n - 1)) as f64 * t.powi(n - 2);
        let f3 = (n * (n - 1) * (n - 2)) as f64 * t.powi(n - 3);
        self.compose(f0, f1, f2, f3)
    }

    pub fn scale(self, c: f64) -> Jet3 {
        Jet3::new(c * self.value, c * self.d1, c * self.d2, c * self.d3)
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        Jet3::new(
            self.value + rhs.value,
            self.d1 + rhs.d1,
            self.d2 + rhs.d2,
            self.d3 + rhs.d3,
        )
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        Jet3::new(
            self.value - rhs.value,
            self.d1 - rhs.d1,
            self.d2 - rhs.d2,
            self.d3 - rhs.d3,
        )
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        Jet3::new(
            self.value * rhs.value,
            self.d1 * rhs.value + self.value * rhs.d1,
            self.d2 * rhs.value + 2.0 * self.d1 * rhs.d1 + self.value * rhs.d2,
            self.d3 * rhs.value
                + 3.0 * self.d2 * rhs.d1
                + 3.0 * self.d1 * rhs.d2
                + self.value * rhs.d3,
        )
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self.scale(-1.0)
    }
}

/// Binary/unary jet operation selector for the generic entry point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    /// a^(3/2); ignores the second operand.
    PowThreeHalves,
    /// sqrt(a); ignores the second operand.
    Sqrt,
}

/// Applies a jet operation; unary operations act on `a` only.
pub fn jet_arith(a: Jet3, b: Jet3, op: JetOp) -> Result<Jet3, JetError> {
    match op {
        JetOp::Add => Ok(a + b),
        JetOp::Sub => Ok(a - b),
        JetOp::Mul => Ok(a * b),
        JetOp::Div => a.div(b),
        JetOp::PowThreeHalves => a.pow_3_2(),
        JetOp::Sqrt => a.sqrt(),
    }
}

type Evaluator = Arc<dyn Fn(f64) -> Result<Jet3, JetError> + Send + Sync>;

/// A C3 function on an open interval, evaluated as a third-order jet.
#[derive(Clone)]
pub struct C3Function {
    eval: Evaluator,
    lo: f64,
    hi: f64,
}

impl std::fmt::Debug for C3Function {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "C3Function({}, {})", self.lo, self.hi)
    }
}

impl C3Function {
    pub fn new(
        lo: f64,
        hi: f64,
        eval: impl Fn(f64) -> Result<Jet3, JetError> + Send + Sync + 'static,
    ) -> Self {
        C3Function {
            eval: Arc::new(eval),
            lo,
            hi,
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Evaluates the jet at `x`; `x` must lie strictly inside the domain.
    pub fn eval(&self, x: f64) -> Result<Jet3, JetError> {
        if !(x > self.lo && x < self.hi) {
            return Err(JetError::OutOfDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            });
        }
        (self.eval)(x)?.check()
    }

    /// Narrows the domain to the intersection with `(lo, hi)`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<C3Function, JetError> {
        let nlo = self.lo.max(lo);
        let nhi = self.hi.min(hi);
        if !(nlo < nhi) {
            return Err(JetError::BadParams {
                name: "restrict".into(),
                reason: format!("empty domain ({nlo}, {nhi})"),
            });
        }
        Ok(C3Function {
            eval: self.eval.clone(),
            lo: nlo,
            hi: nhi,
        })
    }
}

fn expect_params(name: &str, params: &[f64], n: usize) -> Result<(), JetError> {
    if params.len() != n {
        Err(JetError::BadParams {
            name: name.into(),
            reason: format!("expected {n} parameters, got {}", params.len()),
        })
    } else {
        Ok(())
    }
}

/// Builds a named closed-form function from the catalog.
///
/// Domains exclude singular points of the formula; callers may narrow them
/// further with [`C3Function::restrict`].
pub fn catalog(name: &str, params: &[f64]) -> Result<C3Function, JetError> {
    const INF: f64 = f64::INFINITY;
    match name {
        // a x^2 + b x + c
        "quadratic" => {
            expect_params(name, params, 3)?;
            let (a, b, c) = (params[0], params[1], params[2]);
            Ok(C3Function::new(-INF, INF, move |x| {
                Ok(Jet3::new(a * x * x + b * x + c, 2.0 * a * x + b, 2.0 * a, 0.0))
            }))
        }
        // a x + b
        "affine" => {
            expect_params(name, params, 2)?;
            let (a, b) = (params[0], params[1]);
            Ok(C3Function::new(-INF, INF, move |x| {
                Ok(Jet3::new(a * x + b, a, 0.0, 0.0))
            }))
        }
        "cosh_sq" | "neg_cosh_sq" => {
            expect_params(name, params, 0)?;
            let sign = if name == "cosh_sq" { 1.0 } else { -1.0 };
            Ok(C3Function::new(-INF, INF, move |x| {
                // cosh^2 x = (cosh 2x + 1)/2, so derivatives cycle through sinh/cosh 2x
                let (s2, c2) = ((2.0 * x).sinh(), (2.0 * x).cosh());
                Ok(Jet3::new(x.cosh().powi(2), s2, 2.0 * c2, 4.0 * s2).scale(sign))
            }))
        }
        "log_cos" | "neg_log_cos" => {
            expect_params(name, params, 0)?;
            let sign = if name == "log_cos" { 1.0 } else { -1.0 };
            Ok(C3Function::new(-FRAC_PI_2, FRAC_PI_2, move |x| {
                let t = x.tan();
                let sec2 = 1.0 + t * t;
                Ok(Jet3::new(x.cos().ln(), -t, -sec2, -2.0 * t * sec2).scale(sign))
            }))
        }
        // -(sqrt(1+a^2)/(2H)) * sqrt(1 - 4 H^2 x^2), the tilted-cylinder profile
        "sqrt_circle" => {
            expect_params(name, params, 2)?;
            let (h, a) = (params[0], params[1]);
            if h == 0.0 {
                return Err(JetError::BadParams {
                    name: name.into(),
                    reason: "H must be nonzero".into(),
                });
            }
            let r = 1.0 / (2.0 * h.abs());
            let coeff = -(1.0 + a * a).sqrt() / (2.0 * h);
            let h2 = h * h;
            Ok(C3Function::new(-r, r, move |x| {
                let inner = Jet3::new(1.0 - 4.0 * h2 * x * x, -8.0 * h2 * x, -8.0 * h2, 0.0);
                Ok(inner.sqrt()?.scale(coeff))
            }))
        }
        // (a x + c1)^2 / (4a) - b1/a, the rotational profile of the f'^2 = a f + b1 ODE
        "prop1" => {
            expect_params(name, params, 3)?;
            let (a, b1, c1) = (params[0], params[1], params[2]);
            if a == 0.0 {
                return Err(JetError::BadParams {
                    name: name.into(),
                    reason: "a must be nonzero (a = 0 is the affine branch)".into(),
                });
            }
            Ok(C3Function::new(-INF, INF, move |x| {
                let t = a * x + c1;
                Ok(Jet3::new(t * t / (4.0 * a) - b1 / a, t / 2.0, a / 2.0, 0.0))
            }))
        }
        // cubic-spline interpolant: params = [x_0.. x_{n-1}, y_0.. y_{n-1}]
        "tabulated" => {
            if params.len() < 8 || params.len() % 2 != 0 {
                return Err(JetError::BadParams {
                    name: name.into(),
                    reason: "need an even list of at least 8 values (xs then ys)".into(),
                });
            }
            let n = params.len() / 2;
            let spline = crate::spline::CubicSpline::new(&params[..n], &params[n..]).map_err(
                |e| JetError::BadParams {
                    name: name.into(),
                    reason: e.to_string(),
                },
            )?;
            Ok(spline.into_c3())
        }
        _ => Err(JetError::UnknownCatalogEntry(name.into())),
    }
}

/// A value with partial derivatives with respect to the plane variables
/// u, v, w (treated as independent symbols).
#[derive(Debug, Clone, PartialEq)]
pub struct Grad3<T> {
    pub value: T,
    pub du: T,
    pub dv: T,
    pub dw: T,
}

impl<T> Grad3<T>
where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>,
{
    pub fn constant(value: T) -> Self {
        Grad3 {
            value,
            du: T::zero(),
            dv: T::zero(),
            dw: T::zero(),
        }
    }

    /// A function of u alone, with derivative `d`.
    pub fn of_u(value: T, d: T) -> Self {
        Grad3 {
            value,
            du: d,
            dv: T::zero(),
            dw: T::zero(),
        }
    }

    /// A function of v alone.
    pub fn of_v(value: T, d: T) -> Self {
        Grad3 {
            value,
            du: T::zero(),
            dv: d,
            dw: T::zero(),
        }
    }

    /// A function of w alone.
    pub fn of_w(value: T, d: T) -> Self {
        Grad3 {
            value,
            du: T::zero(),
            dv: T::zero(),
            dw: d,
        }
    }

    /// A function of the combination u + v, such as the cubic coefficients
    /// Phi_i: it contributes its derivative to both u and v slots.
    pub fn of_u_plus_v(value: T, d: T) -> Self {
        Grad3 {
            value,
            du: d.clone(),
            dv: d,
            dw: T::zero(),
        }
    }

    /// Raw partials (A_u, A_v, A_w).
    pub fn partials(&self) -> (T, T, T) {
        (self.du.clone(), self.dv.clone(), self.dw.clone())
    }

    /// Tangential derivatives along the plane w = -u - v, i.e. the total
    /// derivatives (A_u - A_w, A_v - A_w). Both vanish for any expression
    /// that is identically zero on the plane.
    pub fn tangent_derivatives(&self) -> (T, T) {
        (
            self.du.clone() - self.dw.clone(),
            self.dv.clone() - self.dw.clone(),
        )
    }
}

impl<T> Add for Grad3<T>
where
    T: Add<Output = T>,
{
    type Output = Grad3<T>;
    fn add(self, rhs: Grad3<T>) -> Grad3<T> {
        Grad3 {
            value: self.value + rhs.value,
            du: self.du + rhs.du,
            dv: self.dv + rhs.dv,
            dw: self.dw + rhs.dw,
        }
    }
}

impl<T> Sub for Grad3<T>
where
    T: Sub<Output = T>,
{
    type Output = Grad3<T>;
    fn sub(self, rhs: Grad3<T>) -> Grad3<T> {
        Grad3 {
            value: self.value - rhs.value,
            du: self.du - rhs.du,
            dv: self.dv - rhs.dv,
            dw: self.dw - rhs.dw,
        }
    }
}

impl<T> Mul for Grad3<T>
where
    T: Clone + Add<Output = T> + Mul<Output = T>,
{
    type Output = Grad3<T>;
    fn mul(self, rhs: Grad3<T>) -> Grad3<T> {
        Grad3 {
            value: self.value.clone() * rhs.value.clone(),
            du: self.du * rhs.value.clone() + self.value.clone() * rhs.du,
            dv: self.dv * rhs.value.clone() + self.value.clone() * rhs.dv,
            dw: self.dw * rhs.value.clone() + self.value * rhs.dw,
        }
    }
}

impl<T> Neg for Grad3<T>
where
    T: Neg<Output = T>,
{
    type Output = Grad3<T>;
    fn neg(self) -> Grad3<T> {
        Grad3 {
            value: -self.value,
            du: -self.du,
            dv: -self.dv,
            dw: -self.dw,
        }
    }
}

impl<T> Div for Grad3<T>
where
    T: Clone + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T>,
{
    type Output = Grad3<T>;
    fn div(self, rhs: Grad3<T>) -> Grad3<T> {
        let b2 = rhs.value.clone() * rhs.value.clone();
        let quot = |da: T, db: T| -> T {
            (da * rhs.value.clone() - self.value.clone() * db) / b2.clone()
        };
        Grad3 {
            value: self.value.clone() / rhs.value.clone(),
            du: quot(self.du, rhs.du),
            dv: quot(self.dv, rhs.dv),
            dw: quot(self.dw, rhs.dw),
        }
    }
}

impl Grad3<f64> {
    /// sqrt with partials, for the (X+Y+Z)^(1/2) factors.
    pub fn sqrt(self) -> Result<Grad3<f64>, JetError> {
        if self.value <= 0.0 {
            return Err(JetError::NonPositiveRadicand(self.value));
        }
        let r = self.value.sqrt();
        let half = 0.5 / r;
        Ok(Grad3 {
            value: r,
            du: half * self.du,
            dv: half * self.dv,
            dw: half * self.dw,
        })
    }

    pub fn pow_3_2(self) -> Result<Grad3<f64>, JetError> {
        if self.value <= 0.0 {
            return Err(JetError::NonPositiveRadicand(self.value));
        }
        let r = self.value.sqrt();
        let d = 1.5 * r;
        Ok(Grad3 {
            value: self.value * r,
            du: d * self.du,
            dv: d * self.dv,
            dw: d * self.dw,
        })
    }
}

/// Jets of the plane components X(u), Y(v), Z(w), Phi(u+v) at a point of
/// the constraint plane; w is stored implicitly as -u - v.
#[derive(Debug, Clone)]
pub struct PlaneJet {
    pub u: f64,
    pub v: f64,
    pub x: Jet3,
    pub y: Jet3,
    pub z: Jet3,
    pub phi: Option<Jet3>,
}

impl PlaneJet {
    pub fn w(&self) -> f64 {
        -self.u - self.v
    }

    pub fn grad_u(&self) -> Grad3<f64> {
        Grad3::of_u(self.u, 1.0)
    }

    pub fn grad_v(&self) -> Grad3<f64> {
        Grad3::of_v(self.v, 1.0)
    }

    pub fn grad_w(&self) -> Grad3<f64> {
        Grad3::of_w(self.w(), 1.0)
    }

    pub fn grad_x(&self) -> Grad3<f64> {
        Grad3::of_u(self.x.value, self.x.d1)
    }

    pub fn grad_y(&self) -> Grad3<f64> {
        Grad3::of_v(self.y.value, self.y.d1)
    }

    pub fn grad_z(&self) -> Grad3<f64> {
        Grad3::of_w(self.z.value, self.z.d1)
    }

    pub fn grad_phi(&self) -> Option<Grad3<f64>> {
        self.phi
            .map(|p| Grad3::of_u_plus_v(p.value, p.d1))
    }
}

/// Raw partials (A_u, A_v, A_w) of an expression built over the plane
/// components. Identity checks assert these are pairwise equal whenever
/// the expression vanishes identically on the plane.
pub fn plane_partials(
    components: &PlaneJet,
    expression: impl Fn(&PlaneJet) -> Result<Grad3<f64>, JetError>,
) -> Result<(f64, f64, f64), JetError> {
    Ok(expression(components)?.partials())
}

/// Tangential derivatives (A_u - A_w, A_v - A_w) along the plane; these are
/// the total derivatives obtained by substituting w = -u - v.
pub fn plane_tangent_derivatives(
    components: &PlaneJet,
    expression: impl Fn(&PlaneJet) -> Result<Grad3<f64>, JetError>,
) -> Result<(f64, f64), JetError> {
    Ok(expression(components)?.tangent_derivatives())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jet_of_x_squared() {
        let x = Jet3::variable(2.0);
        let sq = x * x;
        assert_eq!(sq, Jet3::new(4.0, 4.0, 2.0, 0.0));
    }

    #[test]
    fn sqrt_of_x_squared_is_x() {
        let sq = Jet3::new(4.0, 4.0, 2.0, 0.0);
        let r = sq.sqrt().unwrap();
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-14);
        assert_relative_eq!(r.d1, 1.0, epsilon = 1e-14);
        assert_relative_eq!(r.d2, 0.0, epsilon = 1e-14);
        assert_relative_eq!(r.d3, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn pow_3_2_of_constant_one() {
        let one = Jet3::constant(1.0);
        assert_eq!(one.pow_3_2().unwrap(), Jet3::constant(1.0));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let a = Jet3::variable(1.0);
        assert_eq!(a.div(Jet3::constant(0.0)), Err(JetError::DivisionByZero));
        assert!(matches!(
            Jet3::constant(-1.0).sqrt(),
            Err(JetError::NonPositiveRadicand(_))
        ));
    }

    #[test]
    fn catalog_cosh_sq_at_zero() {
        let f = catalog("cosh_sq", &[]).unwrap();
        let j = f.eval(0.0).unwrap();
        assert_relative_eq!(j.value, 1.0, epsilon = 1e-14);
        assert_relative_eq!(j.d1, 0.0, epsilon = 1e-14);
        assert_relative_eq!(j.d2, 2.0, epsilon = 1e-14);
        assert_relative_eq!(j.d3, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn catalog_quadratic_at_three() {
        let f = catalog("quadratic", &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.eval(3.0).unwrap(), Jet3::new(9.0, 6.0, 2.0, 0.0));
    }

    #[test]
    fn catalog_log_cos_at_zero() {
        let f = catalog("log_cos", &[]).unwrap();
        let j = f.eval(0.0).unwrap();
        assert_relative_eq!(j.value, 0.0, epsilon = 1e-14);
        assert_relative_eq!(j.d1, 0.0, epsilon = 1e-14);
        assert_relative_eq!(j.d2, -1.0, epsilon = 1e-14);
        assert_relative_eq!(j.d3, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let f = catalog("log_cos", &[]).unwrap();
        assert!(matches!(f.eval(2.0), Err(JetError::OutOfDomain { .. })));
        assert!(matches!(
            f.eval(FRAC_PI_2),
            Err(JetError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn unknown_catalog_name() {
        assert!(matches!(
            catalog("nope", &[]),
            Err(JetError::UnknownCatalogEntry(_))
        ));
    }

    /// Central finite differences of the catalog value against the stored
    /// derivatives, the independent oracle for every closed form.
    fn fd_check(f: &C3Function, x: f64) {
        let v = |t: f64| f.eval(t).unwrap().value;
        let j = f.eval(x).unwrap();
        let h1 = 1e-5;
        let d1 = (v(x + h1) - v(x - h1)) / (2.0 * h1);
        let h2 = 1e-4;
        let d2 = (v(x + h2) - 2.0 * v(x) + v(x - h2)) / (h2 * h2);
        let h3 = 1e-3;
        let d3 = (v(x + 2.0 * h3) - 2.0 * v(x + h3) + 2.0 * v(x - h3) - v(x - 2.0 * h3))
            / (2.0 * h3.powi(3));
        let scale = 1.0 + j.d1.abs().max(j.d2.abs()).max(j.d3.abs());
        assert!((j.d1 - d1).abs() <= 1e-5 * scale, "d1 {} vs fd {}", j.d1, d1);
        assert!((j.d2 - d2).abs() <= 1e-5 * scale, "d2 {} vs fd {}", j.d2, d2);
        assert!((j.d3 - d3).abs() <= 1e-4 * scale, "d3 {} vs fd {}", j.d3, d3);
    }

    #[test]
    fn catalog_derivatives_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let entries: Vec<(C3Function, f64, f64)> = vec![
            (catalog("quadratic", &[1.5, -0.3, 2.0]).unwrap(), -2.0, 2.0),
            (catalog("affine", &[0.7, 1.1]).unwrap(), -2.0, 2.0),
            (catalog("cosh_sq", &[]).unwrap(), -1.5, 1.5),
            (catalog("neg_cosh_sq", &[]).unwrap(), -1.5, 1.5),
            (catalog("log_cos", &[]).unwrap(), -1.2, 1.2),
            (catalog("neg_log_cos", &[]).unwrap(), -1.2, 1.2),
            (catalog("sqrt_circle", &[0.5, 1.0]).unwrap(), -0.8, 0.8),
            (catalog("prop1", &[2.0, 4.0, 0.5]).unwrap(), -2.0, 2.0),
        ];
        for (f, lo, hi) in &entries {
            for _ in 0..100 {
                let x = rng.gen_range(*lo..*hi);
                fd_check(f, x);
            }
        }
    }

    #[test]
    fn jet_ring_axioms_at_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let random_jet = |rng: &mut rand_chacha::ChaCha8Rng| {
            Jet3::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            )
        };
        for _ in 0..200 {
            let a = random_jet(&mut rng);
            let b = random_jet(&mut rng);
            let c = random_jet(&mut rng);
            let assoc = (a * b) * c - a * (b * c);
            let dist = a * (b + c) - (a * b + a * c);
            for r in [assoc, dist] {
                for comp in [r.value, r.d1, r.d2, r.d3] {
                    assert!(comp.abs() <= 1e-12 * 64.0, "residual {comp}");
                }
            }
        }
    }

    #[test]
    fn plane_partials_of_u_plus_v_plus_w() {
        let pj = PlaneJet {
            u: 1.0,
            v: 2.0,
            x: Jet3::constant(0.0),
            y: Jet3::constant(0.0),
            z: Jet3::constant(0.0),
            phi: None,
        };
        let expr = |p: &PlaneJet| Ok(p.grad_u() + p.grad_v() + p.grad_w());
        let (du, dv, dw) = plane_partials(&pj, expr).unwrap();
        assert_eq!((du, dv, dw), (1.0, 1.0, 1.0));
        // along the plane the identically-zero function has no directional change
        let (tu, tv) = plane_tangent_derivatives(&pj, expr).unwrap();
        assert_eq!((tu, tv), (0.0, 0.0));
    }

    #[test]
    fn plane_partials_of_vanishing_product() {
        // A = (u+v+w) * u vanishes on the plane; the equal-partials rule gives A_u = A_v = A_w = u
        let pj = PlaneJet {
            u: 1.0,
            v: 2.0,
            x: Jet3::constant(0.0),
            y: Jet3::constant(0.0),
            z: Jet3::constant(0.0),
            phi: None,
        };
        let (du, dv, dw) = plane_partials(&pj, |p| {
            Ok((p.grad_u() + p.grad_v() + p.grad_w()) * p.grad_u())
        })
        .unwrap();
        assert_eq!((du, dv, dw), (1.0, 1.0, 1.0));
    }

    #[test]
    fn plane_partials_of_phi_only() {
        let pj = PlaneJet {
            u: 0.3,
            v: 0.4,
            x: Jet3::constant(0.0),
            y: Jet3::constant(0.0),
            z: Jet3::constant(0.0),
            phi: Some(Jet3::new(2.0, 5.0, 0.0, 0.0)),
        };
        let (du, dv, dw) = plane_partials(&pj, |p| Ok(p.grad_phi().unwrap())).unwrap();
        assert_eq!((du, dv, dw), (5.0, 5.0, 0.0));
    }
}
