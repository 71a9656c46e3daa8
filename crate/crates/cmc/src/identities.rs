//! Exact verification of the elimination chain from the separable CMC
//! equation down to the rotational conclusion.
//!
//! Polynomial steps are tested over exact rationals at random assignments
//! (Schwartz-Zippel style); differential steps use [`Grad3`] jets with the
//! plane constraint u + v + w = 0. The 3/2-power factors are eliminated by
//! carrying the square root of X + Y + Z as an explicit rational symbol, so
//! no fractional powers appear in exact-mode checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::jets::{C3Function, Grad3};
use crate::surface::SeparableSurface;

#[derive(Debug, Clone, Error)]
pub enum IdentityError {
    #[error("check `{check}`: precondition not satisfied: {detail}")]
    Precondition { check: String, detail: String },
    #[error("vanishing first derivative at sample x = {0}")]
    VanishingDerivative(f64),
    #[error("nonpositive X + Y + Z = {0} at a sample")]
    NonPositiveSum(f64),
    #[error(transparent)]
    Jet(#[from] crate::jets::JetError),
    #[error(transparent)]
    Surface(#[from] crate::surface::SurfaceError),
}

/// How a check was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Rational arithmetic; pass requires the error to be identically zero.
    ExactRational,
    /// Floating-point jets; pass requires the error below a scaled 1e-9.
    FloatJet,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::ExactRational => "exact_rational",
            Mode::FloatJet => "float_jet",
        })
    }
}

/// Outcome of one identity check over a number of trials.
#[derive(Debug, Clone)]
pub struct IdentityReport {
    pub name: String,
    pub trials: usize,
    /// 0 for passing exact-rational checks.
    pub max_abs_error: f64,
    pub pass: bool,
    pub mode: Mode,
}

impl std::fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} mode={} trials={} max_abs_error={:e} {}",
            self.name,
            self.mode,
            self.trials,
            self.max_abs_error,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

impl IdentityReport {
    fn exact(name: &str, trials: usize, pass: bool, err: &BigRational) -> Self {
        IdentityReport {
            name: name.into(),
            trials,
            max_abs_error: if pass { 0.0 } else { rat_to_f64(err) },
            pass,
            mode: Mode::ExactRational,
        }
    }
}

/// Single sign flips applied to the convenience definitions, for mutation
/// testing: each one must make its check fail within a few random trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    FlipP,
    FlipQ,
    FlipL,
    FlipM,
    FlipNCoef,
    FlipRCoef,
    FlipA6,
}

/// Random rational evaluation point for the indeterminates of the
/// elimination chain. `t` carries (X + Y + Z)^(1/2) as an explicit symbol
/// so the squaring steps stay in exact arithmetic.
#[derive(Debug, Clone)]
pub struct Assignment {
    pub x: BigRational,
    pub y: BigRational,
    pub z: BigRational,
    pub xp: BigRational,
    pub yp: BigRational,
    pub zp: BigRational,
    pub xpp: BigRational,
    pub ypp: BigRational,
    pub zpp: BigRational,
    pub xppp: BigRational,
    pub h: BigRational,
    pub t: BigRational,
    pub phi1: BigRational,
    pub phi1p: BigRational,
    pub phi2: BigRational,
    pub phi2p: BigRational,
    pub phi3: BigRational,
    pub phi3p: BigRational,
    pub u: BigRational,
    pub v: BigRational,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.numer()
        .to_f64()
        .map(|n| n / r.denom().to_f64().unwrap_or(f64::NAN))
        .unwrap_or(f64::NAN)
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    // small numerators and bounded denominators keep the exact arithmetic
    // cheap through the degree-7 expansions
    rat(rng.gen_range(-12..=12), rng.gen_range(1..=16))
}

fn random_nonzero(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let r = random_rational(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

impl Assignment {
    /// Fully random assignment; no relation between the fields.
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let mut a = Assignment {
            x: random_rational(rng),
            y: random_rational(rng),
            z: random_rational(rng),
            xp: random_rational(rng),
            yp: random_rational(rng),
            zp: random_rational(rng),
            xpp: random_rational(rng),
            ypp: random_rational(rng),
            zpp: random_rational(rng),
            xppp: random_rational(rng),
            h: random_nonzero(rng),
            t: random_rational(rng),
            phi1: random_rational(rng),
            phi1p: random_rational(rng),
            phi2: random_rational(rng),
            phi2p: random_rational(rng),
            phi3: random_rational(rng),
            phi3p: random_rational(rng),
            u: random_rational(rng),
            v: random_rational(rng),
        };
        if a.t.is_negative() || a.t.is_zero() {
            a.t = a.t.abs() + BigRational::one();
        }
        a
    }

    /// Random assignment satisfying the differential preconditions: t is a
    /// positive rational with t^2 = X + Y + Z, Z' solves the first-derivative
    /// relation (X+Y)Z' + (X'+Y')Z + X'Y + XY' = -4H t^3, Y'' solves the
    /// second-derivative relation X'' - Y'' = 24 H^2 (X'-Y')/(X'+Y'), and
    /// X''' equals that relation's u-derivative 48 H^2 X'' Y'/(X'+Y')^2.
    pub fn consistent(rng: &mut ChaCha8Rng) -> Self {
        let mut a = Assignment::random(rng);
        // X + Y != 0 so the first-derivative relation can be solved for Z'
        while (a.x.clone() + a.y.clone()).is_zero() {
            a.x = random_rational(rng);
        }
        // X' + Y' != 0, the running hypothesis on the non-rotational branch
        while (a.xp.clone() + a.yp.clone()).is_zero() {
            a.xp = random_rational(rng);
        }
        a.z = a.t.clone() * a.t.clone() - a.x.clone() - a.y.clone();
        let four = rat(4, 1);
        let t3 = a.t.clone() * a.t.clone() * a.t.clone();
        a.zp = -((a.xp.clone() + a.yp.clone()) * a.z.clone()
            + a.xp.clone() * a.y.clone()
            + a.x.clone() * a.yp.clone()
            + four * a.h.clone() * t3)
            / (a.x.clone() + a.y.clone());
        let sp = a.xp.clone() + a.yp.clone();
        let h2_24 = rat(24, 1) * a.h.clone() * a.h.clone();
        a.ypp = a.xpp.clone() - h2_24.clone() * (a.xp.clone() - a.yp.clone()) / sp.clone();
        a.xppp =
            rat(48, 1) * a.h.clone() * a.h.clone() * a.xpp.clone() * a.yp.clone() / (sp.clone() * sp);
        a
    }
}

/// Dense polynomial in Z with rational coefficients.
#[derive(Debug, Clone, PartialEq)]
struct Poly(Vec<BigRational>);

impl Poly {
    /// c1 Z + c0.
    fn linear(c1: BigRational, c0: BigRational) -> Self {
        Poly(vec![c0, c1])
    }

    fn coeff(&self, i: usize) -> BigRational {
        self.0.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    fn sub(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a.clone() * b.clone();
            }
        }
        Poly(out)
    }

    fn scale(&self, c: &BigRational) -> Poly {
        Poly(self.0.iter().map(|a| a.clone() * c.clone()).collect())
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(BigRational::is_zero)
    }

    fn max_coeff(&self) -> BigRational {
        self.0
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    fn eval(&self, z: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * z.clone() + c.clone();
        }
        acc
    }
}

/// Coefficients of the linear-in-Z factor P Z + Q that isolates the square
/// root, with optional sign-flip mutations on the last term.
fn pq(a: &Assignment, mutation: Option<Mutation>) -> (BigRational, BigRational) {
    let s = a.x.clone() + a.y.clone();
    let p_tail = s.clone() * (a.xpp.clone() - a.ypp.clone());
    let q_tail = s * (a.xpp.clone() * a.y.clone() - a.x.clone() * a.ypp.clone());
    let mut p = a.xp.clone() * a.xp.clone() - a.yp.clone() * a.yp.clone() - p_tail.clone();
    let mut q = (a.xp.clone() - a.yp.clone())
        * (a.xp.clone() * a.y.clone() + a.x.clone() * a.yp.clone())
        - q_tail.clone();
    match mutation {
        Some(Mutation::FlipP) => p += p_tail.clone() + p_tail,
        Some(Mutation::FlipQ) => q += q_tail.clone() + q_tail,
        _ => {}
    }
    (p, q)
}

/// Both sides of the squared square-root isolation as polynomials in Z:
/// the expanded square and the cubic L Z^3 + M Z^2 + N Z + R.
fn pz_square_sides(a: &Assignment, mutation: Option<Mutation>) -> (Poly, Poly) {
    let s = a.x.clone() + a.y.clone();
    let k = a.xp.clone() - a.yp.clone();
    let h2 = a.h.clone() * a.h.clone();
    let four_h2_k2 = rat(4, 1) * h2.clone() * k.clone() * k.clone();

    // left: 4 H^2 (X'-Y')^2 (s - 2Z)^2 (s + Z) - (P Z + Q)^2, with the
    // mutated P, Q feeding only the squared linear factor
    let (pm, qm) = pq(a, mutation);
    let lin = Poly::linear(rat(-2, 1), s.clone());
    let left = lin
        .mul(&lin)
        .mul(&Poly::linear(BigRational::one(), s.clone()))
        .scale(&four_h2_k2);
    let pzq = Poly::linear(pm, qm);
    let left = left.sub(&pzq.mul(&pzq));

    // right: the cubic with the convenience coefficients as printed
    let (p, q) = pq(a, None);
    let mut l = rat(16, 1) * h2.clone() * k.clone() * k.clone();
    let mut m = -(p.clone() * p.clone());
    let mut n = -(rat(12, 1) * h2.clone() * s.clone() * s.clone() * k.clone() * k.clone())
        - rat(2, 1) * p * q.clone();
    let mut r = rat(4, 1) * h2 * s.clone() * s.clone() * s * k.clone() * k - q.clone() * q;
    match mutation {
        Some(Mutation::FlipL) => l = -l,
        Some(Mutation::FlipM) => m = -m,
        Some(Mutation::FlipNCoef) => n = -n,
        Some(Mutation::FlipRCoef) => r = -r,
        _ => {}
    }
    (left, Poly(vec![r, n, m, l]))
}

/// Checks the squared square-root isolation against the cubic in Z as an
/// exact polynomial identity.
pub fn check_pz_square(rng: &mut ChaCha8Rng, trials: usize) -> IdentityReport {
    check_pz_square_mutated(rng, trials, None)
}

/// Mutation-aware variant; `None` verifies the identity as printed.
pub fn check_pz_square_mutated(
    rng: &mut ChaCha8Rng,
    trials: usize,
    mutation: Option<Mutation>,
) -> IdentityReport {
    let mut worst = BigRational::zero();
    for _ in 0..trials {
        let a = Assignment::random(rng);
        let (left, right) = pz_square_sides(&a, mutation);
        let diff = left.sub(&right);
        if !diff.is_zero() {
            worst = worst.max(diff.max_coeff());
        }
    }
    IdentityReport::exact("pz_square", trials, worst.is_zero(), &worst)
}

/// Integer witness of the squared identity: both sides at
/// (X, Y, Z, X', Y', X'', Y'', H) = (1, 2, 3, 5, 7, 0, 0, 1).
pub fn pz_square_witness() -> (BigRational, BigRational) {
    let mut a = Assignment::random(&mut ChaCha8Rng::seed_from_u64(0));
    a.x = rat(1, 1);
    a.y = rat(2, 1);
    a.z = rat(3, 1);
    a.xp = rat(5, 1);
    a.yp = rat(7, 1);
    a.xpp = rat(0, 1);
    a.ypp = rat(0, 1);
    a.h = rat(1, 1);
    let (left, right) = pz_square_sides(&a, None);
    (left.eval(&a.z), right.eval(&a.z))
}

/// Numerically verifies X'(u) = 2 f''(x) through u = f(x) for each
/// component of the surface (and its g/h analogues).
pub fn check_uvw_chain(
    surface: &SeparableSurface,
    samples: usize,
) -> Result<IdentityReport, IdentityError> {
    let mut max_err = 0.0_f64;
    for func in [&surface.f, &surface.g, &surface.h] {
        max_err = max_err.max(chain_error_one(func, samples)?);
    }
    Ok(IdentityReport {
        name: "uvw_chain".into(),
        trials: samples,
        max_abs_error: max_err,
        pass: max_err <= 1e-9,
        mode: Mode::FloatJet,
    })
}

fn chain_error_one(func: &C3Function, samples: usize) -> Result<f64, IdentityError> {
    let (lo, hi) = func.domain();
    let mut max_rel = 0.0_f64;
    for i in 0..samples {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
        let j = func.eval(x)?;
        if j.d1.abs() < 1e-8 {
            return Err(IdentityError::VanishingDerivative(x));
        }
        let u = j.value;
        let du = 1e-6 * (1.0 + u.abs());
        // invert u = f(x) near x by Newton, then difference X(u) = f'(x)^2
        let invert = |target: f64| -> Result<f64, IdentityError> {
            let mut xt = x;
            for _ in 0..50 {
                let jt = func.eval(xt)?;
                if jt.d1 == 0.0 {
                    return Err(IdentityError::VanishingDerivative(xt));
                }
                let step = (jt.value - target) / jt.d1;
                xt -= step;
                if step.abs() <= 1e-15 * (1.0 + xt.abs()) {
                    break;
                }
            }
            Ok(xt)
        };
        let xa = invert(u - du)?;
        let xb = invert(u + du)?;
        let xd = |xs: f64| -> Result<f64, IdentityError> {
            let js = func.eval(xs)?;
            Ok(js.d1 * js.d1)
        };
        let numeric = (xd(xb)? - xd(xa)?) / (2.0 * du);
        let analytic = 2.0 * j.d2;
        max_rel = max_rel.max((numeric - analytic).abs() / (1.0 + analytic.abs()));
    }
    Ok(max_rel)
}

/// Evaluates the separable CMC relation
/// `(Y+Z)X' + (X+Z)Y' + (X+Y)Z' = -4H (X+Y+Z)^(3/2)` at
/// random on-plane points and reports the largest residual.
pub fn check_eq2(
    x_fn: &C3Function,
    y_fn: &C3Function,
    z_fn: &C3Function,
    mean: f64,
    samples: usize,
    seed: u64,
) -> Result<IdentityReport, IdentityError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ulo, uhi) = x_fn.domain();
    let (vlo, vhi) = y_fn.domain();
    let (wlo, whi) = z_fn.domain();
    let mut max_err = 0.0_f64;
    let mut found = 0;
    let mut draws = 0;
    while found < samples && draws < 200 * samples {
        draws += 1;
        let u = rng.gen_range(ulo..uhi);
        let v = rng.gen_range(vlo..vhi);
        let w = -u - v;
        if !(w > wlo && w < whi) {
            continue;
        }
        let (xj, yj, zj) = (x_fn.eval(u)?, y_fn.eval(v)?, z_fn.eval(w)?);
        let total = xj.value + yj.value + zj.value;
        if total <= 0.0 {
            return Err(IdentityError::NonPositiveSum(total));
        }
        let lhs = (yj.value + zj.value) * xj.d1
            + (xj.value + zj.value) * yj.d1
            + (xj.value + yj.value) * zj.d1;
        let rhs = -4.0 * mean * total.powf(1.5);
        let scale = 1.0 + lhs.abs().max(rhs.abs());
        max_err = max_err.max((lhs - rhs).abs() / scale);
        found += 1;
    }
    Ok(IdentityReport {
        name: "eq2_plane".into(),
        trials: found,
        max_abs_error: max_err,
        pass: found == samples && max_err <= 1e-9,
        mode: Mode::FloatJet,
    })
}

/// Checks the equal-partials rule A_u = A_v = A_w exactly for random
/// expressions that vanish on the plane, built as (u+v+w) * B.
pub fn check_lemma1(rng: &mut ChaCha8Rng, trials: usize) -> IdentityReport {
    let mut pass = true;
    let mut worst = BigRational::zero();
    for _ in 0..trials {
        let u = random_rational(rng);
        let v = random_rational(rng);
        let uu: Grad3<BigRational> = Grad3::of_u(u.clone(), BigRational::one());
        let vv = Grad3::of_v(v.clone(), BigRational::one());
        let ww = Grad3::of_w(-u.clone() - v.clone(), BigRational::one());
        let plane = uu.clone() + vv.clone() + ww;
        // B mixes functions of u, of v and of u+v with random jets
        let b = Grad3::of_u(random_rational(rng), random_rational(rng))
            * Grad3::of_v(random_rational(rng), random_rational(rng))
            + Grad3::of_u_plus_v(random_rational(rng), random_rational(rng))
            + Grad3::constant(random_rational(rng)) * uu * vv;
        let a = plane * b;
        let (au, av, aw) = a.partials();
        let d1 = au.clone() - av.clone();
        let d2 = av - aw;
        if !d1.is_zero() || !d2.is_zero() {
            pass = false;
            worst = worst.max(d1.abs().max(d2.abs()));
        }
    }
    IdentityReport::exact("lemma1_plane", trials, pass, &worst)
}

/// Checks that the u/v difference of raw partials applied to the
/// first-derivative relation reproduces the -6H display, exactly.
pub fn check_eq3_derivative(a: &Assignment) -> Result<IdentityReport, IdentityError> {
    let t2 = a.t.clone() * a.t.clone();
    let total = a.x.clone() + a.y.clone() + a.z.clone();
    if t2 != total {
        return Err(IdentityError::Precondition {
            check: "eq3_derivative".into(),
            detail: "t^2 != X + Y + Z".into(),
        });
    }
    let t3 = t2 * a.t.clone();
    let eq9 = (a.x.clone() + a.y.clone()) * a.zp.clone()
        + (a.xp.clone() + a.yp.clone()) * a.z.clone()
        + a.xp.clone() * a.y.clone()
        + a.x.clone() * a.yp.clone()
        + rat(4, 1) * a.h.clone() * t3;
    if !eq9.is_zero() {
        return Err(IdentityError::Precondition {
            check: "eq3_derivative".into(),
            detail: "first-derivative relation does not hold for the assignment".into(),
        });
    }
    // jet computation of (d_u - d_v) applied to the first-derivative
    // relation; the sqrt symbol t differentiates as t_u = X'/(2t) etc.
    let xg = Grad3::of_u(a.x.clone(), a.xp.clone());
    let yg = Grad3::of_v(a.y.clone(), a.yp.clone());
    let zg = Grad3::of_w(a.z.clone(), a.zp.clone());
    let xpg = Grad3::of_u(a.xp.clone(), a.xpp.clone());
    let ypg = Grad3::of_v(a.yp.clone(), a.ypp.clone());
    let zpg = Grad3::of_w(a.zp.clone(), a.zpp.clone());
    let half_t = rat(1, 2) / a.t.clone();
    let tg = Grad3 {
        value: a.t.clone(),
        du: a.xp.clone() * half_t.clone(),
        dv: a.yp.clone() * half_t.clone(),
        dw: a.zp.clone() * half_t,
    };
    let four_h = Grad3::constant(rat(4, 1) * a.h.clone());
    let lhs = (xg.clone() + yg.clone()) * zpg
        + (xpg.clone() + ypg.clone()) * zg
        + xpg * yg
        + xg * ypg
        + four_h * tg.clone() * tg.clone() * tg;
    let jet = lhs.du.clone() - lhs.dv.clone();
    // the displayed equation, moved to one side
    let display = (a.xp.clone() - a.yp.clone()) * a.zp.clone()
        + (a.xpp.clone() - a.ypp.clone()) * a.z.clone()
        + a.xpp.clone() * a.y.clone()
        - a.x.clone() * a.ypp.clone()
        + rat(6, 1) * a.h.clone() * (a.xp.clone() - a.yp.clone()) * a.t.clone();
    let diff = jet - display;
    Ok(IdentityReport::exact(
        "eq3_derivative",
        1,
        diff.is_zero(),
        &diff.abs(),
    ))
}

/// Degree-7 polynomial expansion of the squared relation, as RHS - LHS.
fn degree7_poly(a: &Assignment) -> Poly {
    let s = a.x.clone() + a.y.clone();
    let h2 = a.h.clone() * a.h.clone();
    // A = 3Z^2 + 2 Phi1 Z + Phi2
    let aq = Poly(vec![a.phi2.clone(), rat(2, 1) * a.phi1.clone(), rat(3, 1)]);
    // B = (X'+Y') Z + X'Y + XY'
    let b = Poly::linear(
        a.xp.clone() + a.yp.clone(),
        a.xp.clone() * a.y.clone() + a.x.clone() * a.yp.clone(),
    );
    // C = Phi1' Z^2 + Phi2' Z + Phi3'
    let c = Poly(vec![a.phi3p.clone(), a.phi2p.clone(), a.phi1p.clone()]);
    let spz = Poly::linear(BigRational::one(), s.clone());
    let rhs = aq
        .mul(&aq)
        .mul(&spz.mul(&spz).mul(&spz))
        .scale(&(rat(16, 1) * h2));
    let lhs = aq
        .mul(&aq)
        .mul(&b.mul(&b))
        .add(&c.mul(&c).scale(&(s.clone() * s.clone())))
        .add(&aq.mul(&b).mul(&c).scale(&(rat(2, 1) * s)));
    rhs.sub(&lhs)
}

/// Checks a7 = 144 H^2 and the printed a6 formula against the full
/// polynomial expansion, exactly.
pub fn check_a7_a6(rng: &mut ChaCha8Rng, trials: usize) -> IdentityReport {
    check_a7_a6_mutated(rng, trials, None)
}

/// Mutation-aware variant; `Some(FlipA6)` flips the sign of the
/// 9(X'+Y')^2 term in the printed a6 formula.
pub fn check_a7_a6_mutated(
    rng: &mut ChaCha8Rng,
    trials: usize,
    mutation: Option<Mutation>,
) -> IdentityReport {
    let mut worst = BigRational::zero();
    for _ in 0..trials {
        let a = Assignment::random(rng);
        let poly = degree7_poly(&a);
        let h2 = a.h.clone() * a.h.clone();
        let a7_expected = rat(144, 1) * h2.clone();
        let sp = a.xp.clone() + a.yp.clone();
        let tail = rat(9, 1) * sp.clone() * sp;
        let mut a6_expected = rat(16, 1)
            * h2
            * (rat(27, 1) * (a.x.clone() + a.y.clone()) + rat(12, 1) * a.phi1.clone())
            - tail.clone();
        if mutation == Some(Mutation::FlipA6) {
            a6_expected += tail.clone() + tail;
        }
        let d7 = poly.coeff(7) - a7_expected;
        let d6 = poly.coeff(6) - a6_expected;
        if !d7.is_zero() || !d6.is_zero() {
            worst = worst.max(d7.abs().max(d6.abs()));
        }
    }
    IdentityReport::exact("a7_a6", trials, worst.is_zero(), &worst)
}

/// Checks (a6)_u - (a6)_v = 18 [24 H^2 (X'-Y') - (X'+Y')(X''-Y'')] exactly
/// via the plane jet rules; the Phi1' contributions cancel.
pub fn check_eq10_reduction(rng: &mut ChaCha8Rng, trials: usize) -> IdentityReport {
    let mut worst = BigRational::zero();
    for _ in 0..trials {
        let a = Assignment::random(rng);
        let h2 = Grad3::constant(a.h.clone() * a.h.clone());
        let xg = Grad3::of_u(a.x.clone(), a.xp.clone());
        let yg = Grad3::of_v(a.y.clone(), a.yp.clone());
        let xpg = Grad3::of_u(a.xp.clone(), a.xpp.clone());
        let ypg = Grad3::of_v(a.yp.clone(), a.ypp.clone());
        let phi1 = Grad3::of_u_plus_v(a.phi1.clone(), a.phi1p.clone());
        let sp = xpg + ypg;
        let a6 = Grad3::constant(rat(16, 1)) * h2
            * (Grad3::constant(rat(27, 1)) * (xg + yg) + Grad3::constant(rat(12, 1)) * phi1)
            - Grad3::constant(rat(9, 1)) * sp.clone() * sp;
        let jet = a6.du - a6.dv;
        let expected = rat(18, 1)
            * (rat(24, 1) * a.h.clone() * a.h.clone() * (a.xp.clone() - a.yp.clone())
                - (a.xp.clone() + a.yp.clone()) * (a.xpp.clone() - a.ypp.clone()));
        let diff = jet - expected;
        if !diff.is_zero() {
            worst = worst.max(diff.abs());
        }
    }
    IdentityReport::exact("eq10_reduction", trials, worst.is_zero(), &worst)
}

/// Value of the final contradiction display
/// 48 H^2 (X'-Y') X'' Y'' / (X'+Y')^3 for an assignment.
pub fn eq11_contradiction_term(a: &Assignment) -> BigRational {
    let sp = a.xp.clone() + a.yp.clone();
    rat(48, 1) * a.h.clone() * a.h.clone() * (a.xp.clone() - a.yp.clone()) * a.xpp.clone()
        * a.ypp.clone()
        / (sp.clone() * sp.clone() * sp)
}

/// Checks the two derivative steps after the second-derivative relation
/// X'' - Y'' = 24 H^2 (X'-Y')/(X'+Y'): its u-derivative equals
/// 48 H^2 X'' Y' / (X'+Y')^2 = X''', and the v-derivative of that equals
/// the final contradiction display, both exactly.
pub fn check_eq11_chain(a: &Assignment) -> Result<IdentityReport, IdentityError> {
    let sp = a.xp.clone() + a.yp.clone();
    if sp.is_zero() {
        return Err(IdentityError::Precondition {
            check: "eq11_chain".into(),
            detail: "X' + Y' = 0".into(),
        });
    }
    let h2_24 = rat(24, 1) * a.h.clone() * a.h.clone();
    let eq15 = h2_24.clone() * (a.xp.clone() - a.yp.clone()) / sp.clone()
        - (a.xpp.clone() - a.ypp.clone());
    if !eq15.is_zero() {
        return Err(IdentityError::Precondition {
            check: "eq11_chain".into(),
            detail: "second-derivative relation does not hold for the assignment".into(),
        });
    }
    let xpg = Grad3::of_u(a.xp.clone(), a.xpp.clone());
    let ypg = Grad3::of_v(a.yp.clone(), a.ypp.clone());
    // (i): d_u of the relation's left side by the quotient rule
    let e15 = Grad3::constant(h2_24) * (xpg.clone() - ypg.clone()) / (xpg.clone() + ypg.clone());
    let formula_i = rat(48, 1) * a.h.clone() * a.h.clone() * a.xpp.clone() * a.yp.clone()
        / (sp.clone() * sp.clone());
    let d_i = e15.du.clone() - formula_i.clone();
    // ... which must equal X''' since d_u (X''-Y'') = X'''
    let d_x3 = formula_i.clone() - a.xppp.clone();
    // (ii): d_v of the formula in (i) equals the contradiction display
    let spg = xpg.clone() + ypg;
    let f = Grad3::constant(rat(48, 1) * a.h.clone() * a.h.clone())
        * Grad3::of_u(a.xpp.clone(), a.xppp.clone())
        * Grad3::of_v(a.yp.clone(), a.ypp.clone())
        / (spg.clone() * spg);
    let d_ii = f.dv.clone() - eq11_contradiction_term(a);
    let pass = d_i.is_zero() && d_x3.is_zero() && d_ii.is_zero();
    let worst = d_i.abs().max(d_x3.abs()).max(d_ii.abs());
    Ok(IdentityReport::exact("eq11_chain", 1, pass, &worst))
}

/// Checks that f(x) = (ax + c1)^2 / (4a) - b1/a satisfies
/// f'^2 - a f - b1 = 0 at 20 sample points.
pub fn check_prop1(a: f64, b1: f64, c1: f64) -> Result<IdentityReport, IdentityError> {
    if a == 0.0 {
        return Err(IdentityError::Precondition {
            check: "prop1".into(),
            detail: "a must be nonzero (a = 0 is the affine branch)".into(),
        });
    }
    let f = crate::jets::catalog("prop1", &[a, b1, c1])?.restrict(-3.0, 3.0)?;
    let mut max_err = 0.0_f64;
    for i in 0..20 {
        let x = -3.0 + 6.0 * (i as f64 + 0.5) / 20.0;
        let j = f.eval(x)?;
        let resid = j.d1 * j.d1 - a * j.value - b1;
        let scale = 1.0 + (j.d1 * j.d1).abs().max((a * j.value + b1).abs());
        max_err = max_err.max(resid.abs() / scale);
    }
    Ok(IdentityReport {
        name: "prop1".into(),
        trials: 20,
        max_abs_error: max_err,
        pass: max_err <= 1e-12,
        mode: Mode::FloatJet,
    })
}

/// Runs every identity check; deterministic per seed. `trials = 0` yields
/// an empty list, which callers must treat as an overall failure.
pub fn run_all(seed: u64, trials: usize) -> Result<Vec<IdentityReport>, IdentityError> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::new();

    // numeric chain-rule check on a surface with nonvanishing derivatives
    let quad = crate::jets::catalog("quadratic", &[1.0, 0.0, 0.0])?.restrict(0.25, 2.0)?;
    let cat_h = crate::jets::catalog("neg_cosh_sq", &[])?.restrict(0.2, 1.2)?;
    let strip = SeparableSurface::new(quad.clone(), quad, cat_h, "catenoid strip");
    reports.push(check_uvw_chain(&strip, 20.min(trials))?);

    // separable CMC relation on the sphere (H = -1) and the catenoid (H = 0)
    let aff4 = crate::jets::catalog("affine", &[4.0, 0.0])?.restrict(-1.0, 1.0)?;
    let z_sphere = crate::jets::catalog("affine", &[4.0, 4.0])?.restrict(-2.0, 2.0)?;
    reports.push(check_eq2(&aff4, &aff4, &z_sphere, -1.0, 50.min(trials), seed)?);
    let z_cat = crate::jets::catalog("quadratic", &[4.0, 4.0, 0.0])?.restrict(-0.4, 0.4)?;
    let mut cat_report = check_eq2(&aff4, &aff4, &z_cat, 0.0, 50.min(trials), seed ^ 1)?;
    cat_report.name = "eq2_plane_catenoid".into();
    reports.push(cat_report);

    reports.push(check_lemma1(&mut rng, trials));
    reports.push(check_pz_square(&mut rng, trials));

    let mut eq3 = IdentityReport::exact("eq3_derivative", trials, true, &BigRational::zero());
    let mut eq11 = IdentityReport::exact("eq11_chain", trials, true, &BigRational::zero());
    for _ in 0..trials {
        let a = Assignment::consistent(&mut rng);
        let r = check_eq3_derivative(&a)?;
        if !r.pass {
            eq3.pass = false;
            eq3.max_abs_error = eq3.max_abs_error.max(r.max_abs_error);
        }
        let r = check_eq11_chain(&a)?;
        if !r.pass {
            eq11.pass = false;
            eq11.max_abs_error = eq11.max_abs_error.max(r.max_abs_error);
        }
    }
    reports.push(eq3);

    reports.push(check_a7_a6(&mut rng, trials));
    reports.push(check_eq10_reduction(&mut rng, trials));
    reports.push(eq11);
    reports.push(check_prop1(2.0, 4.0, 0.0)?);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn integer_witness_evaluates_to_minus_10372() {
        let (left, right) = pz_square_witness();
        assert_eq!(left, rat(-10372, 1));
        assert_eq!(right, rat(-10372, 1));
        // and the intermediate convenience values as hand-computed
        let mut a = Assignment::random(&mut rng(0));
        a.x = rat(1, 1);
        a.y = rat(2, 1);
        a.z = rat(3, 1);
        a.xp = rat(5, 1);
        a.yp = rat(7, 1);
        a.xpp = rat(0, 1);
        a.ypp = rat(0, 1);
        a.h = rat(1, 1);
        let (p, q) = pq(&a, None);
        assert_eq!(p, rat(-24, 1));
        assert_eq!(q, rat(-34, 1));
        let (_, cubic) = pz_square_sides(&a, None);
        assert_eq!(cubic.coeff(3), rat(64, 1));
        assert_eq!(cubic.coeff(2), rat(-576, 1));
        assert_eq!(cubic.coeff(1), rat(-2064, 1));
        assert_eq!(cubic.coeff(0), rat(-724, 1));
    }

    #[test]
    fn pz_square_identity_over_random_assignments() {
        let report = check_pz_square(&mut rng(7), 1000);
        assert!(report.pass, "max error {}", report.max_abs_error);
        assert_eq!(report.max_abs_error, 0.0);
        assert_eq!(report.mode, Mode::ExactRational);
    }

    #[test]
    fn pz_square_degenerate_equal_slopes() {
        // X' = Y' kills every 4H^2 term; both sides reduce to -(PZ+Q)^2
        let mut a = Assignment::random(&mut rng(3));
        a.yp = a.xp.clone();
        let (left, right) = pz_square_sides(&a, None);
        assert!(left.sub(&right).is_zero());
    }

    #[test]
    fn mutations_fail_within_five_trials() {
        for m in [
            Mutation::FlipP,
            Mutation::FlipQ,
            Mutation::FlipL,
            Mutation::FlipM,
            Mutation::FlipNCoef,
            Mutation::FlipRCoef,
        ] {
            let report = check_pz_square_mutated(&mut rng(11), 5, Some(m));
            assert!(!report.pass, "{m:?} did not fail");
            assert!(report.max_abs_error != 0.0);
        }
        let report = check_a7_a6_mutated(&mut rng(11), 5, Some(Mutation::FlipA6));
        assert!(!report.pass, "FlipA6 did not fail");
    }

    #[test]
    fn a7_is_144_h_squared() {
        let mut a = Assignment::random(&mut rng(5));
        a.h = rat(2, 1);
        let poly = degree7_poly(&a);
        assert_eq!(poly.coeff(7), rat(576, 1));
    }

    #[test]
    fn a6_formula_example() {
        // X+Y = 3, Phi1 = 1, X'+Y' = 2, H = 1 -> a6 = 16(81+12) - 36 = 1452
        let mut a = Assignment::random(&mut rng(6));
        a.x = rat(1, 1);
        a.y = rat(2, 1);
        a.phi1 = rat(1, 1);
        a.xp = rat(3, 2);
        a.yp = rat(1, 2);
        a.h = rat(1, 1);
        let poly = degree7_poly(&a);
        assert_eq!(poly.coeff(6), rat(1452, 1));
    }

    #[test]
    fn a7_a6_match_expansion_over_random_assignments() {
        let report = check_a7_a6(&mut rng(8), 200);
        assert!(report.pass, "max error {}", report.max_abs_error);
    }

    #[test]
    fn lemma1_examples() {
        // A = (u+v+w) * u at (u, v) = (1, 2): all partials equal u = 1
        let u = rat(1, 1);
        let v = rat(2, 1);
        let uu: Grad3<BigRational> = Grad3::of_u(u.clone(), BigRational::one());
        let vv = Grad3::of_v(v.clone(), BigRational::one());
        let ww = Grad3::of_w(-u - v, BigRational::one());
        let a = (uu.clone() + vv + ww) * uu;
        let (au, av, aw) = a.partials();
        assert_eq!(au, rat(1, 1));
        assert_eq!(av, rat(1, 1));
        assert_eq!(aw, rat(1, 1));
        let report = check_lemma1(&mut rng(9), 500);
        assert!(report.pass);
    }

    #[test]
    fn eq3_derivative_sphere_and_random() {
        // sphere assignment X=4u, Y=4v, Z=4w+4, H=-1 at (u,v)=(1/5,-1/10)
        let mut a = Assignment::random(&mut rng(10));
        a.x = rat(4, 5);
        a.y = rat(-2, 5);
        a.z = rat(18, 5);
        a.xp = rat(4, 1);
        a.yp = rat(4, 1);
        a.zp = rat(4, 1);
        a.xpp = rat(0, 1);
        a.ypp = rat(0, 1);
        a.zpp = rat(0, 1);
        a.h = rat(-1, 1);
        a.t = rat(2, 1);
        let report = check_eq3_derivative(&a).unwrap();
        assert!(report.pass);

        let mut r = rng(12);
        for _ in 0..200 {
            let a = Assignment::consistent(&mut r);
            let report = check_eq3_derivative(&a).unwrap();
            assert!(report.pass);
        }
    }

    #[test]
    fn eq3_derivative_guards_nonsolutions() {
        let mut r = rng(13);
        let mut a = Assignment::consistent(&mut r);
        a.zp += rat(1, 1);
        assert!(matches!(
            check_eq3_derivative(&a),
            Err(IdentityError::Precondition { .. })
        ));
        let mut b = Assignment::consistent(&mut r);
        b.z += rat(1, 1);
        assert!(matches!(
            check_eq3_derivative(&b),
            Err(IdentityError::Precondition { .. })
        ));
    }

    #[test]
    fn eq10_reduction_exact_and_degenerate() {
        let report = check_eq10_reduction(&mut rng(14), 500);
        assert!(report.pass);
        // X'=Y', X''=Y'' makes both sides vanish
        let mut a = Assignment::random(&mut rng(15));
        a.yp = a.xp.clone();
        a.ypp = a.xpp.clone();
        let expected = rat(18, 1)
            * (rat(24, 1) * a.h.clone() * a.h.clone() * (a.xp.clone() - a.yp.clone())
                - (a.xp.clone() + a.yp.clone()) * (a.xpp.clone() - a.ypp.clone()));
        assert!(expected.is_zero());
    }

    #[test]
    fn eq11_chain_checks() {
        let mut r = rng(16);
        for _ in 0..200 {
            let a = Assignment::consistent(&mut r);
            let report = check_eq11_chain(&a).unwrap();
            assert!(report.pass);
        }
        // X'' = 0 forces X''' = 0 and the check still passes
        let mut a = Assignment::consistent(&mut r);
        a.xpp = BigRational::zero();
        let sp = a.xp.clone() + a.yp.clone();
        a.ypp = -(rat(24, 1) * a.h.clone() * a.h.clone() * (a.xp.clone() - a.yp.clone()) / sp);
        a.xppp = BigRational::zero();
        let report = check_eq11_chain(&a).unwrap();
        assert!(report.pass);
        // generic contradiction term is nonzero: the engine of the proof
        let mut b = Assignment::consistent(&mut r);
        while b.xpp.is_zero() || b.ypp.is_zero() || b.xp == b.yp {
            b = Assignment::consistent(&mut r);
        }
        assert!(!eq11_contradiction_term(&b).is_zero());
    }

    #[test]
    fn eq11_chain_guards() {
        let mut a = Assignment::consistent(&mut rng(17));
        a.ypp += rat(1, 1);
        assert!(matches!(
            check_eq11_chain(&a),
            Err(IdentityError::Precondition { .. })
        ));
        let mut b = Assignment::consistent(&mut rng(18));
        b.yp = -b.xp.clone();
        assert!(matches!(
            check_eq11_chain(&b),
            Err(IdentityError::Precondition { .. })
        ));
    }

    #[test]
    fn uvw_chain_on_simple_surfaces() {
        // f = x^2: X(u) = 4u, X' = 4 = 2 f''
        let quad = crate::jets::catalog("quadratic", &[1.0, 0.0, 0.0])
            .unwrap()
            .restrict(0.5, 2.0)
            .unwrap();
        let aff = crate::jets::catalog("affine", &[1.0, 0.0])
            .unwrap()
            .restrict(0.5, 2.0)
            .unwrap();
        let s = SeparableSurface::new(quad.clone(), quad, aff, "test");
        let report = check_uvw_chain(&s, 20).unwrap();
        assert!(report.pass, "max err {}", report.max_abs_error);

        // vanishing f' inside the sample range is an error
        let sym = crate::jets::catalog("quadratic", &[1.0, 0.0, 0.0])
            .unwrap()
            .restrict(-1.0, 1.0)
            .unwrap();
        let s2 = SeparableSurface::new(sym.clone(), sym.clone(), sym, "singular");
        assert!(matches!(
            check_uvw_chain(&s2, 21),
            Err(IdentityError::VanishingDerivative(_))
        ));
    }

    #[test]
    fn eq2_sphere_and_catenoid() {
        let aff4 = crate::jets::catalog("affine", &[4.0, 0.0])
            .unwrap()
            .restrict(-1.0, 1.0)
            .unwrap();
        let z_sphere = crate::jets::catalog("affine", &[4.0, 4.0])
            .unwrap()
            .restrict(-2.0, 2.0)
            .unwrap();
        let report = check_eq2(&aff4, &aff4, &z_sphere, -1.0, 50, 1).unwrap();
        assert!(report.pass, "sphere eq2 err {}", report.max_abs_error);
        assert!(report.max_abs_error <= 1e-12);

        let z_cat = crate::jets::catalog("quadratic", &[4.0, 4.0, 0.0])
            .unwrap()
            .restrict(-0.4, 0.4)
            .unwrap();
        let report = check_eq2(&aff4, &aff4, &z_cat, 0.0, 50, 2).unwrap();
        assert!(report.pass, "catenoid eq2 err {}", report.max_abs_error);
    }

    #[test]
    fn prop1_identity_examples() {
        // a=2, c1=0, b1=4: f = x^2/2 - 2, f'^2 = x^2 = a f + b1
        let report = check_prop1(2.0, 4.0, 0.0).unwrap();
        assert!(report.pass);
        let report = check_prop1(1.0, 0.0, 1.0).unwrap();
        assert!(report.pass);
        let report = check_prop1(-3.0, 0.7, -0.4).unwrap();
        assert!(report.pass);
        assert!(matches!(
            check_prop1(0.0, 1.0, 1.0),
            Err(IdentityError::Precondition { .. })
        ));
    }

    #[test]
    fn run_all_passes_and_is_deterministic() {
        let reports = run_all(1, 50).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.pass, "{} failed with error {}", r.name, r.max_abs_error);
        }
        let again = run_all(1, 50).unwrap();
        for (a, b) in reports.iter().zip(again.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.max_abs_error, b.max_abs_error);
        }
        assert!(run_all(1, 0).unwrap().is_empty());
    }
}
