//! Homogeneous foliations `A dx + B dy` of the projective plane: the Gauss
//! map on the line of directions, critical fibers and their classification,
//! the Legendre (dual web) transform, the holomorphy criterion for the dual
//! web along a component `{p = p0}`, the flatness decision, Galois
//! detection, and the Klein catalog of Galois coverings of the sphere.
//!
//! Conventions. A foliation pairs `(A, B)` homogeneous of degree `d` with
//! `gcd(A, B) = 1`; its direction map is `G(z) = -A(1, z)/B(1, z)` on the
//! line `z = y/x`, so that finite fiber data of a value `v` lives in the
//! polynomial `C(z) = A(1,z) + v B(1,z)` and the direction `z = infinity`
//! appears as the degree drop of `C`. A free-standing rational map carries
//! its own homogeneous pair with `f(z) = P(z, 1)/Q(z, 1)`.
//!
//! The exact criterion value for a component `{p = p0}` is
//! `S = sum_i (nu_i - 1)(p0 - r_i) psi_i` over the fiber, with
//! `psi_i = (1/nu_i) [ (nu_i - 2)(d + (p0 - r_i) B_y(1, r_i)/B(1, r_i))
//!        + 2(nu_i + 1)(d - nu_i + (p0 - r_i) f_i'(r_i)/f_i(r_i)) ]`
//! where `f_i = C/(z - r_i)^{nu_i}`; per squarefree root class the ratio
//! `f_i'/f_i` is local Taylor data of `C` and the sum over the class is a
//! trace, so `S` stays in `K` without any root extraction.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{ctx_compatible, FieldCtx, FieldElem, FieldScalar, QTheta, Rat};
use crate::numeric::{self, BigFloat, CBig, NumericFiber};
use crate::poly::{MultiPoly, Var};
use crate::roots::{local_taylor, root_classes, trace_poly, RootClass};
use crate::upoly::UPoly;
use crate::web::{make_web, ImplicitWeb};

// ---------------------------------------------------------------------------
// Values on the projective line
// ---------------------------------------------------------------------------

/// An element of `K union {infinity}` (a point of the dual pencil).
#[derive(Clone, Debug, PartialEq)]
pub enum ExtValue {
    Finite(FieldScalar),
    Infinity,
}

impl ExtValue {
    pub fn zero(ctx: &Arc<FieldCtx>) -> Self {
        ExtValue::Finite(FieldScalar::zero(ctx))
    }

    pub fn one(ctx: &Arc<FieldCtx>) -> Self {
        ExtValue::Finite(FieldScalar::one(ctx))
    }

    pub fn render(&self) -> String {
        match self {
            ExtValue::Finite(v) => crate::expr::render_scalar(v),
            ExtValue::Infinity => String::from("inf"),
        }
    }
}

// ---------------------------------------------------------------------------
// Numeric configuration
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct NumericCfg {
    pub prec: u32,
    /// Zero threshold is `10^-tol_exp`; the gray zone is `[tol, 10 tol]`.
    pub tol_exp: u32,
    pub seed: u64,
}

impl Default for NumericCfg {
    fn default() -> Self {
        NumericCfg { prec: numeric::DEFAULT_PRECISION, tol_exp: 20, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Numeric,
}

// ---------------------------------------------------------------------------
// Foliations and rational maps
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousFoliation {
    a: MultiPoly,
    b: MultiPoly,
    degree: u32,
}

impl HomogeneousFoliation {
    /// Validate homogeneity of common degree and projective coprimality.
    pub fn new(a: MultiPoly, b: MultiPoly) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::invalid("a foliation needs a nonzero 1-form"));
        }
        for f in [&a, &b] {
            if f.uses_var(Var::P) || f.uses_var(Var::Z) || f.uses_var(Var::Q) {
                return Err(Error::invalid("foliation coefficients live in x, y"));
            }
        }
        let d = a.total_degree().max(b.total_degree()) as u32;
        for f in [&a, &b] {
            if !f.is_zero() && !crate::forms::euler_residual(f, d)?.is_zero() {
                return Err(Error::invalid("coefficients must be homogeneous of equal degree"));
            }
        }
        let az = dehom_1z(&a)?;
        let bz = dehom_1z(&b)?;
        let g = az.gcd(&bz)?;
        if g.deg() != 0 && !(az.is_zero() || bz.is_zero()) {
            return Err(Error::invalid("A and B share a common factor"));
        }
        // the direction x = 0 (z = infinity): common factor x
        let x0 = |f: &MultiPoly| f.eval_var(Var::X, &FieldScalar::zero(f.ctx())).is_zero();
        if (x0(&a) || a.is_zero()) && (x0(&b) || b.is_zero()) {
            return Err(Error::invalid("A and B share the factor x"));
        }
        if az.is_zero() && bz.is_zero() {
            return Err(Error::invalid("degenerate foliation"));
        }
        Ok(HomogeneousFoliation { a, b, degree: d })
    }

    pub fn coefficients(&self) -> (&MultiPoly, &MultiPoly) {
        (&self.a, &self.b)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.a.ctx()
    }
}

/// A rational self-map of the projective line, `f(z) = P(z,1)/Q(z,1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalSphereMap {
    num: MultiPoly,
    den: MultiPoly,
    degree: u32,
}

impl RationalSphereMap {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        if den.is_zero() && num.is_zero() {
            return Err(Error::invalid("zero map"));
        }
        let d = num.total_degree().max(den.total_degree()) as u32;
        for f in [&num, &den] {
            if !f.is_zero() && !crate::forms::euler_residual(f, d)?.is_zero() {
                return Err(Error::invalid("map components must be homogeneous of equal degree"));
            }
        }
        let nz = dehom_z1(&num)?;
        let dz = dehom_z1(&den)?;
        if !nz.is_zero() && !dz.is_zero() && nz.gcd(&dz)?.deg() != 0 {
            return Err(Error::invalid("map components share a common factor"));
        }
        let y0 = |f: &MultiPoly| f.eval_var(Var::Y, &FieldScalar::zero(f.ctx())).is_zero();
        if (y0(&num) || num.is_zero()) && (y0(&den) || den.is_zero()) {
            return Err(Error::invalid("map components share the factor y"));
        }
        // Canonical scale: make the graded-lex leading coefficient of the
        // denominator (or the numerator when the map is polynomial) one.
        let scale = if !den.is_zero() {
            den.leading().unwrap().1.clone()
        } else {
            num.leading().unwrap().1.clone()
        };
        let inv = scale.inv()?;
        Ok(RationalSphereMap { num: num.scale(&inv), den: den.scale(&inv), degree: d })
    }

    pub fn components(&self) -> (&MultiPoly, &MultiPoly) {
        (&self.num, &self.den)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.num.ctx()
    }
}

/// Dehomogenize at `(1, z)`: the chart used by direction maps of foliations.
fn dehom_1z(f: &MultiPoly) -> Result<UPoly<FieldScalar>> {
    let ctx = f.ctx();
    let g = f.substitute(&[
        (Var::X, MultiPoly::one(ctx)),
        (Var::Y, MultiPoly::var(ctx, Var::Z)),
    ])?;
    let c = g
        .to_univariate(Var::Z)
        .ok_or_else(|| Error::invalid("dehomogenization left extra variables"))?;
    Ok(UPoly::new(c))
}

/// Dehomogenize at `(z, 1)`: the chart used by free-standing rational maps.
fn dehom_z1(f: &MultiPoly) -> Result<UPoly<FieldScalar>> {
    let ctx = f.ctx();
    let g = f.substitute(&[
        (Var::X, MultiPoly::var(ctx, Var::Z)),
        (Var::Y, MultiPoly::one(ctx)),
    ])?;
    let c = g
        .to_univariate(Var::Z)
        .ok_or_else(|| Error::invalid("dehomogenization left extra variables"))?;
    Ok(UPoly::new(c))
}

/// The direction map `G(z) = -A(1,z)/B(1,z)` of a foliation, as a rational
/// sphere map (`G(z) = P(z,1)/Q(z,1)` with `P(x,y) = -A(y,x)`,
/// `Q(x,y) = B(y,x)`).
pub fn gauss_map(h: &HomogeneousFoliation) -> Result<RationalSphereMap> {
    let swap = |f: &MultiPoly| -> Result<MultiPoly> {
        let ctx = f.ctx();
        f.substitute(&[
            (Var::X, MultiPoly::var(ctx, Var::Y)),
            (Var::Y, MultiPoly::var(ctx, Var::X)),
        ])
    };
    RationalSphereMap::new(swap(&h.a)?.neg(), swap(&h.b)?)
}

/// The foliation whose direction map is `f`: `omega = P(y,x) dx - Q(y,x) dy`.
pub fn associated_foliation(f: &RationalSphereMap) -> Result<HomogeneousFoliation> {
    let swap = |g: &MultiPoly| -> Result<MultiPoly> {
        let ctx = g.ctx();
        g.substitute(&[
            (Var::X, MultiPoly::var(ctx, Var::Y)),
            (Var::Y, MultiPoly::var(ctx, Var::X)),
        ])
    };
    HomogeneousFoliation::new(swap(&f.num)?, swap(&f.den)?.neg())
}

/// Postcompose a map with the Moebius transformation
/// `h(w) = (alpha w + beta)/(gamma w + delta)`.
pub fn postcompose(
    f: &RationalSphereMap,
    alpha: &FieldScalar,
    beta: &FieldScalar,
    gamma: &FieldScalar,
    delta: &FieldScalar,
) -> Result<RationalSphereMap> {
    let det = alpha.mul(delta).sub(&beta.mul(gamma));
    if det.is_zero() {
        return Err(Error::invalid("singular Moebius transformation"));
    }
    RationalSphereMap::new(
        f.num.scale(alpha).add(&f.den.scale(beta)),
        f.num.scale(gamma).add(&f.den.scale(delta)),
    )
}

/// Conjugate a foliation by an invertible linear map
/// `T(x, y) = (m11 x + m12 y, m21 x + m22 y)` (pullback of the 1-form).
pub fn linear_conjugate(
    h: &HomogeneousFoliation,
    m: &[[FieldScalar; 2]; 2],
) -> Result<HomogeneousFoliation> {
    let det = m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0]));
    if det.is_zero() {
        return Err(Error::invalid("singular linear conjugation"));
    }
    let ctx = h.ctx();
    let x = MultiPoly::var(ctx, Var::X);
    let y = MultiPoly::var(ctx, Var::Y);
    let tx = x.scale(&m[0][0]).add(&y.scale(&m[0][1]));
    let ty = x.scale(&m[1][0]).add(&y.scale(&m[1][1]));
    let sub = |f: &MultiPoly| f.substitute(&[(Var::X, tx.clone()), (Var::Y, ty.clone())]);
    let a_t = sub(&h.a)?;
    let b_t = sub(&h.b)?;
    HomogeneousFoliation::new(
        a_t.scale(&m[0][0]).add(&b_t.scale(&m[1][0])),
        a_t.scale(&m[0][1]).add(&b_t.scale(&m[1][1])),
    )
}

// ---------------------------------------------------------------------------
// Critical fibers
// ---------------------------------------------------------------------------

/// One squarefree class of fiber directions, with ramification index and
/// fixed-point flag (`G(r) = r`, i.e. the modulus divides `A(1,z) + z B(1,z)`).
#[derive(Clone, Debug)]
pub struct FiberClass {
    pub modulus: UPoly<FieldScalar>,
    pub nu: u32,
    pub fixed: bool,
}

impl FiberClass {
    pub fn weight(&self) -> u64 {
        self.nu as u64 * self.modulus.deg() as u64
    }
}

/// A critical (or plain) value of the direction map with its exact fiber.
#[derive(Clone, Debug)]
pub struct CriticalValueRecord {
    pub value: ExtValue,
    pub classes: Vec<FiberClass>,
    /// Ramification index at the direction `z = infinity`, 0 when absent,
    /// together with its fixed flag.
    pub infinity_nu: u32,
    pub infinity_fixed: bool,
    /// Leading constant `c` with `A(1,z) + v B(1,z) = c prod (z - r_i)^nu_i`.
    pub lead: FieldScalar,
}

impl CriticalValueRecord {
    /// Total fiber weight; always equals the map degree.
    pub fn total_weight(&self) -> u64 {
        self.classes.iter().map(FiberClass::weight).sum::<u64>() + self.infinity_nu as u64
    }

    /// Ramification contribution `sum (nu - 1)` over the fiber.
    pub fn ramification_weight(&self) -> u64 {
        let finite: u64 = self
            .classes
            .iter()
            .map(|c| (c.nu as u64 - 1) * c.modulus.deg() as u64)
            .sum();
        finite + self.infinity_nu.saturating_sub(1) as u64
    }

    pub fn is_critical(&self) -> bool {
        self.ramification_weight() > 0
    }

    /// True when every ramified point of the fiber is fixed (the component
    /// is a line dual to radial singularities only).
    pub fn radial_only(&self) -> bool {
        self.classes.iter().all(|c| c.nu == 1 || c.fixed)
            && (self.infinity_nu <= 1 || self.infinity_fixed)
    }

    /// Uniform ramification index across the whole fiber, if any.
    pub fn uniform_nu(&self) -> Option<u32> {
        let mut nu = None;
        for c in &self.classes {
            match nu {
                None => nu = Some(c.nu),
                Some(n) if n != c.nu => return None,
                _ => {}
            }
        }
        if self.infinity_nu > 0 {
            match nu {
                None => nu = Some(self.infinity_nu),
                Some(n) if n != self.infinity_nu => return None,
                _ => {}
            }
        }
        nu
    }
}

/// Exact fiber of the direction map over `value`.
pub fn fiber_record(h: &HomogeneousFoliation, value: &ExtValue) -> Result<CriticalValueRecord> {
    let az = dehom_1z(&h.a)?;
    let bz = dehom_1z(&h.b)?;
    let c = match value {
        ExtValue::Finite(v) => az.add(&bz.scale(v)),
        ExtValue::Infinity => bz.clone(),
    };
    if c.is_zero() {
        return Err(Error::invalid("fiber polynomial vanishes identically"));
    }
    let infinity_nu = h.degree - c.deg() as u32;
    let infinity_fixed = matches!(value, ExtValue::Infinity);
    let (lead, raw) = root_classes(&c)?;
    // Fixed directions: roots of A(1,z) + z B(1,z).
    let zvar = UPoly::new(vec![
        FieldScalar::zero(h.ctx()),
        FieldScalar::one(h.ctx()),
    ]);
    let fix = az.add(&bz.mul(&zvar));
    let mut classes = Vec::new();
    for rc in raw {
        let g = if fix.is_zero() {
            rc.modulus.clone()
        } else {
            rc.modulus.gcd(&fix)?
        };
        if g.deg() == 0 {
            classes.push(FiberClass { modulus: rc.modulus, nu: rc.nu, fixed: false });
        } else if g.deg() == rc.modulus.deg() {
            classes.push(FiberClass { modulus: rc.modulus, nu: rc.nu, fixed: true });
        } else {
            let rest = rc.modulus.exact_div(&g)?;
            classes.push(FiberClass { modulus: g, nu: rc.nu, fixed: true });
            classes.push(FiberClass { modulus: rest, nu: rc.nu, fixed: false });
        }
    }
    let record = CriticalValueRecord {
        value: value.clone(),
        classes,
        infinity_nu,
        infinity_fixed,
        lead,
    };
    debug_assert_eq!(record.total_weight(), h.degree as u64);
    Ok(record)
}

/// Exact enumeration of the critical values of the direction map.
///
/// Finite candidates are located numerically on the squarefree part of the
/// Wronskian (after specializing any parameters), recognized as rationals,
/// and then verified exactly through their fibers; completeness is
/// certified by the Riemann-Hurwitz count `sum (nu - 1) = 2d - 2`. A
/// shortfall means some critical value lies outside `Q union {infinity}`
/// and exact mode cannot continue.
pub fn critical_values(h: &HomogeneousFoliation) -> Result<Vec<ExtValue>> {
    let ctx = h.ctx().clone();
    let d = h.degree;
    if d < 2 {
        return Ok(vec![]);
    }
    let wr = h
        .a
        .partial_derivative(Var::X)
        .mul(&h.b.partial_derivative(Var::Y))?
        .sub(&h.a.partial_derivative(Var::Y).mul(&h.b.partial_derivative(Var::X))?);
    let wz = dehom_1z(&wr)?;
    let mut values: Vec<ExtValue> = Vec::new();
    let mut push = |v: ExtValue, values: &mut Vec<ExtValue>| {
        if !values.contains(&v) {
            values.push(v);
        }
    };
    // Candidate from the direction z = infinity (degree drop of the
    // Wronskian): its value is exact.
    let zero = FieldScalar::zero(&ctx);
    let one = FieldScalar::one(&ctx);
    let wr_inf = wr.eval_var(Var::X, &zero).eval_var(Var::Y, &one);
    if wr_inf.is_zero() || wz.deg() < (2 * d - 2) as usize {
        let a_inf = h.a.eval_var(Var::X, &zero).eval_var(Var::Y, &one).as_constant().unwrap();
        let b_inf = h.b.eval_var(Var::X, &zero).eval_var(Var::Y, &one).as_constant().unwrap();
        let v = if b_inf.is_zero() {
            ExtValue::Infinity
        } else {
            ExtValue::Finite(a_inf.div(&b_inf)?.neg())
        };
        push(v, &mut values);
    }
    // Infinity as a critical value: some root of B is critical.
    let bz = dehom_1z(&h.b)?;
    let binf_critical = if bz.is_zero() {
        true
    } else {
        !bz.gcd(&wz)?.deg() == 0 && false // placeholder, replaced below
    };
    let _ = binf_critical;
    if !bz.is_zero() && bz.gcd(&wz)?.deg() > 0 {
        push(ExtValue::Infinity, &mut values);
    }
    if (bz.deg() as u32) < d {
        // z = infinity maps to infinity when B(0,1) = 0; it is critical
        // when nu >= 2 there, which fiber verification settles.
        push(ExtValue::Infinity, &mut values);
    }
    // Finite candidates by numeric location + rational recognition.
    if !wz.is_constant() {
        let sq = {
            let g = wz.gcd(&wz.derivative())?;
            wz.exact_div(&g)?
        };
        let spec_ctx = FieldCtx::new(ctx.theta.clone(), Vec::new());
        let vals: Vec<QTheta> = (0..ctx.nparams())
            .map(|i| {
                QTheta::from_rat(
                    &ctx.theta,
                    Rat::new((23 + 14 * i as i64).into(), (9 + 4 * i as i64).into()),
                )
            })
            .collect();
        let specialize_up = |p: &UPoly<FieldScalar>| -> Result<UPoly<FieldScalar>> {
            Ok(UPoly::new(
                p.c.iter()
                    .map(|c| c.specialize(&vals, &spec_ctx))
                    .collect::<Result<Vec<_>>>()?,
            ))
        };
        let sqs = specialize_up(&sq)?;
        let azs = specialize_up(&dehom_1z(&h.a)?)?;
        let bzs = specialize_up(&bz)?;
        if sqs.deg() > 0 {
            const PREC: u32 = 192;
            let theta = numeric::theta_embedding(&spec_ctx, PREC)?;
            let roots = numeric::numeric_roots(&sqs, &theta, PREC, 31)?;
            let an = numeric::embed_upoly(&azs, &theta, PREC)?;
            let bn = numeric::embed_upoly(&bzs, &theta, PREC)?;
            for r in roots {
                let aval = eval_cbig(&an, &r.value);
                let bval = eval_cbig(&bn, &r.value);
                if bval.is_zero() {
                    push(ExtValue::Infinity, &mut values);
                    continue;
                }
                let v = aval.div(&bval)?.neg();
                let big = BigFloat::pow2((PREC / 2) as i64, PREC);
                if v.abs().cmp(&big) == core::cmp::Ordering::Greater {
                    push(ExtValue::Infinity, &mut values);
                    continue;
                }
                let im_tol = BigFloat::pow2(-((PREC / 3) as i64), PREC)
                    .mul(&BigFloat::from_i64(1, PREC).max(&v.abs()));
                if v.im.abs().cmp(&im_tol) == core::cmp::Ordering::Greater {
                    continue;
                }
                if let Some(q) = numeric::recognize_rational(&v.re, 72) {
                    push(ExtValue::Finite(FieldScalar::from_rat(&ctx, q)), &mut values);
                }
            }
        }
    }
    // Exact verification and Riemann-Hurwitz completeness certificate.
    let mut kept: Vec<ExtValue> = Vec::new();
    let mut total = 0u64;
    for v in values {
        let rec = fiber_record(h, &v)?;
        if rec.is_critical() {
            total += rec.ramification_weight();
            kept.push(v);
        }
    }
    if total != (2 * d - 2) as u64 {
        return Err(Error::ExactUnsupported(format!(
            "critical values outside Q: certified ramification {total} of {}",
            2 * d - 2
        )));
    }
    kept.sort_by(|a, b| ext_value_order(a).cmp(&ext_value_order(b)));
    Ok(kept)
}

fn ext_value_order(v: &ExtValue) -> (u8, String) {
    match v {
        ExtValue::Finite(s) => (0, crate::expr::render_scalar(s)),
        ExtValue::Infinity => (1, String::new()),
    }
}

fn eval_cbig(coeffs: &[CBig], z: &CBig) -> CBig {
    let prec = z.prec();
    let mut acc = CBig::zero(prec);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(c);
    }
    acc
}

// ---------------------------------------------------------------------------
// delta-shift and the Legendre transform
// ---------------------------------------------------------------------------

/// Conjugate by `(x + delta y, y)` with the smallest nonnegative integer
/// `delta` that moves every fiber direction of `p0` away from `z = infinity`
/// and keeps the transformed value `p0/(1 - delta p0)` finite.
pub fn delta_shift(
    h: &HomogeneousFoliation,
    p0: &FieldScalar,
) -> Result<(HomogeneousFoliation, i64, FieldScalar)> {
    let rec = fiber_record(h, &ExtValue::Finite(p0.clone()))?;
    let ctx = h.ctx().clone();
    'outer: for delta in 0..256i64 {
        if rec.infinity_nu > 0 && delta == 0 {
            continue;
        }
        let ds = FieldScalar::from_i64(&ctx, delta);
        // keep the critical value finite
        let denom = FieldScalar::one(&ctx).sub(&ds.mul(p0));
        if denom.is_zero() {
            continue;
        }
        if delta > 0 {
            // every finite fiber direction must avoid z = 1/delta
            let inv = FieldScalar::from_i64(&ctx, delta).inv()?;
            for c in &rec.classes {
                if c.modulus.eval(&inv).is_zero() {
                    continue 'outer;
                }
            }
        }
        let ht = if delta == 0 {
            h.clone()
        } else {
            let x = MultiPoly::var(&ctx, Var::X);
            let y = MultiPoly::var(&ctx, Var::Y);
            let shift = x.add(&y.scale(&ds));
            let a_t = h.a.substitute(&[(Var::X, shift.clone())])?;
            let b_t = h.b.substitute(&[(Var::X, shift)])?;
            HomogeneousFoliation::new(a_t.clone(), a_t.scale(&ds).add(&b_t))?
        };
        let p0_t = p0.div(&denom)?;
        let check = fiber_record(&ht, &ExtValue::Finite(p0_t.clone()))?;
        if check.infinity_nu == 0 {
            return Ok((ht, delta, p0_t));
        }
    }
    Err(Error::invalid("no admissible shift found"))
}

/// The dual web in the chart `(p, q)` of the dual plane, as the implicit
/// equation `A(x, px - q) + p B(x, px - q) = 0` with `x = dq/dp`. The web
/// is returned in the standard chart letters: web-x is `p`, web-y is `q`,
/// and the web slope variable is `x`.
pub fn legendre(h: &HomogeneousFoliation) -> Result<ImplicitWeb> {
    let ctx = h.ctx();
    let xw = MultiPoly::var(ctx, Var::X); // dual: the slope dq/dp (old x)
    let yw = MultiPoly::var(ctx, Var::Y);
    let pw = MultiPoly::var(ctx, Var::P);
    // original x -> P (the web abscissa), original y -> X*P - Y
    let arg = xw.mul(&pw)?.sub(&yw);
    let sub = |f: &MultiPoly| {
        f.substitute(&[(Var::X, pw.clone()), (Var::Y, arg.clone())])
    };
    let f = sub(&h.a)?.add(&sub(&h.b)?.mul(&MultiPoly::var(ctx, Var::P))?);
    // In the standard letters the web coordinates are (x, y) = (p, q) and
    // the fiber coordinate is p = dq/dp = old x; rename accordingly.
    let renamed = f.substitute(&[
        (Var::X, MultiPoly::var(ctx, Var::P)),
        (Var::P, MultiPoly::var(ctx, Var::X)),
    ])?;
    make_web(&renamed)
}

/// The normalized local model of the dual web along `{p = p0}`: coordinates
/// `(x, y, p) = (q, p - p0, 1/(dq/dp))`, in which the component is `{y = 0}`
/// and `F(x, 0, p) = c (-x)^d prod (p - (p0 - r_i)/x)^{nu_i}`.
///
/// The fiber of `p0` must avoid the vertical direction; apply
/// [`delta_shift`] first.
pub fn normalized_legendre(
    h: &HomogeneousFoliation,
    p0: &FieldScalar,
) -> Result<ImplicitWeb> {
    let rec = fiber_record(h, &ExtValue::Finite(p0.clone()))?;
    if rec.infinity_nu > 0 {
        return Err(Error::invalid(
            "fiber touches the vertical direction; apply the delta-shift first",
        ));
    }
    let ctx = h.ctx().clone();
    let az = dehom_1z(&h.a)?;
    let bz = dehom_1z(&h.b)?;
    let c = az.add(&bz.scale(p0));
    // u = y + p0 - p x
    let x = MultiPoly::var(&ctx, Var::X);
    let y = MultiPoly::var(&ctx, Var::Y);
    let p = MultiPoly::var(&ctx, Var::P);
    let u = y
        .add(&MultiPoly::constant(p0.clone()))
        .sub(&p.mul(&x)?);
    let eval_at_u = |q: &UPoly<FieldScalar>| -> Result<MultiPoly> {
        let mut acc = MultiPoly::zero(&ctx);
        for coeff in q.c.iter().rev() {
            acc = acc.mul(&u)?.add(&MultiPoly::constant(coeff.clone()));
        }
        Ok(acc)
    };
    let f = y.mul(&eval_at_u(&bz)?)?.add(&eval_at_u(&c)?);
    make_web(&f)
}

// ---------------------------------------------------------------------------
// The criterion sum for a dual-web component
// ---------------------------------------------------------------------------

/// Exact and numeric criterion values for one component `{p = p0}`.
#[derive(Clone, Debug)]
pub struct CriterionValue {
    pub exact: Option<FieldScalar>,
    pub numeric: Option<CBig>,
    pub holomorphic: bool,
}

/// Exact criterion sum `S` over the fiber of a finite `p0` with no vertical
/// direction. Fixed classes contribute zero through the factor `(p0 - z)`.
fn theorem3_exact_shifted(
    h: &HomogeneousFoliation,
    p0: &FieldScalar,
    rec: &CriticalValueRecord,
) -> Result<FieldScalar> {
    let ctx = h.ctx().clone();
    let d = h.degree as i64;
    let az = dehom_1z(&h.a)?;
    let bz = dehom_1z(&h.b)?;
    let by = dehom_1z(&h.b.partial_derivative(Var::Y))?;
    let c = az.add(&bz.scale(p0));
    let mut s = FieldScalar::zero(&ctx);
    let p0z = UPoly::new(vec![p0.clone(), FieldScalar::from_i64(&ctx, -1)]); // p0 - z
    for class in &rec.classes {
        if class.nu < 2 {
            continue;
        }
        let m = &class.modulus;
        let nu = class.nu;
        let rc = RootClass { modulus: m.clone(), nu };
        let taylor = local_taylor(&c, &rc, nu + 1)?;
        let c_nu = &taylor[nu as usize];
        let c_nu1 = &taylor[nu as usize + 1];
        let inv_b = bz.inv_mod(m).map_err(|e| match e {
            Error::ZeroDivisor(g) => Error::ZeroDivisor(format!(
                "B vanishes on a fiber direction of a finite value: {g}"
            )),
            e => e,
        })?;
        let inv_cnu = c_nu.inv_mod(m)?;
        let pz = p0z.rem(m)?;
        let t1 = pz.mul_mod(&by.rem(m)?, m)?.mul_mod(&inv_b, m)?;
        let t2 = pz.mul_mod(c_nu1, m)?.mul_mod(&inv_cnu, m)?;
        // psi = ((nu-2)(d + t1) + 2(nu+1)(d - nu + t2)) / nu
        let dconst = UPoly::constant(FieldScalar::from_i64(&ctx, d));
        let dnu = UPoly::constant(FieldScalar::from_i64(&ctx, d - nu as i64));
        let part1 = dconst.add(&t1).scale(&FieldScalar::from_i64(&ctx, nu as i64 - 2));
        let part2 = dnu.add(&t2).scale(&FieldScalar::from_i64(&ctx, 2 * (nu as i64 + 1)));
        let psi = part1
            .add(&part2)
            .scale(&FieldScalar::rational(&ctx, 1, nu as i64));
        let g = pz
            .mul_mod(&psi, m)?
            .scale(&FieldScalar::from_i64(&ctx, nu as i64 - 1));
        s = s.add(&trace_poly(&g, m)?);
    }
    Ok(s)
}

/// Numeric evaluation of the printed criterion sum
/// `S = sum (1 - 1/nu_i)(p0 - r_i) Q_i(1, r_i)/(P_i(1, r_i) B(1, r_i))`
/// over a numerically clustered fiber. Deliberately follows the published
/// determinant formula rather than the trace path, so the two routes are
/// independent.
fn theorem3_numeric_shifted(
    h: &HomogeneousFoliation,
    p0: &FieldScalar,
    cfg: &NumericCfg,
) -> Result<CBig> {
    let ctx = h.ctx();
    if ctx.nparams() > 0 {
        return Err(Error::ExactUnsupported(
            "numeric evaluation requires all parameters specialized".into(),
        ));
    }
    let prec = cfg.prec;
    let theta = numeric::theta_embedding(ctx, prec)?;
    let az = numeric::embed_upoly(&dehom_1z(&h.a)?, &theta, prec)?;
    let bz = numeric::embed_upoly(&dehom_1z(&h.b)?, &theta, prec)?;
    let ay = numeric::embed_upoly(&dehom_1z(&h.a.partial_derivative(Var::Y))?, &theta, prec)?;
    let bx = numeric::embed_upoly(&dehom_1z(&h.b.partial_derivative(Var::X))?, &theta, prec)?;
    let p0n = numeric::embed_scalar(p0, &theta, prec)?;
    let d = h.degree;
    // fiber of p0: roots of A(1,z) + p0 B(1,z) (no vertical direction here)
    let neg = p0n.neg();
    let fiber = numeric::numeric_fiber(&az, &bz, Some(&neg), prec, cfg.seed)?;
    if fiber.infinity_multiplicity > 0 {
        return Err(Error::invalid("numeric fiber touches the vertical direction"));
    }
    let mut s = CBig::zero(prec);
    for pt in &fiber.points {
        let nu = pt.multiplicity;
        if nu < 2 {
            continue;
        }
        let r = &pt.center;
        let b_r = eval_cbig(&bz, r);
        let a_r = eval_cbig(&az, r);
        // P_i(1, z) = (A(1,z) B(1,r) - A(1,r) B(1,z)) / (z - r)^nu
        let dmax = az.len().max(bz.len());
        let mut pnum: Vec<CBig> = Vec::with_capacity(dmax);
        for k in 0..dmax {
            let a_k = az.get(k).cloned().unwrap_or_else(|| CBig::zero(prec));
            let b_k = bz.get(k).cloned().unwrap_or_else(|| CBig::zero(prec));
            pnum.push(a_k.mul(&b_r).sub(&a_r.mul(&b_k)));
        }
        for _ in 0..nu {
            pnum = synthetic_divide(&pnum, r, prec);
        }
        let p_val = eval_cbig(&pnum, r);
        let pder: Vec<CBig> = pnum
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.mul(&CBig::from_i64(k as i64, prec)))
            .collect();
        let dp_val = eval_cbig(&pder, r); // d/dz P(1,z) = P_y at (1, r)
        // Euler: P_x(1,r) = (d - nu) P(1,r) - r P_y(1,r)
        let px_val = CBig::from_i64((d - nu) as i64, prec)
            .mul(&p_val)
            .sub(&r.mul(&dp_val));
        let curl = eval_cbig(&bx, r).sub(&eval_cbig(&ay, r));
        let q_val = CBig::from_i64(nu as i64 - 2, prec)
            .mul(&curl)
            .mul(&p_val)
            .add(
                &CBig::from_i64(2 * (nu as i64 + 1), prec)
                    .mul(&px_val.mul(&b_r).sub(&dp_val.mul(&a_r))),
            );
        let weight = CBig::from_i64(1, prec)
            .sub(&CBig::from_i64(1, prec).div(&CBig::from_i64(nu as i64, prec))?);
        let term = weight
            .mul(&p0n.sub(r))
            .mul(&q_val)
            .div(&p_val.mul(&b_r))?;
        s = s.add(&term);
    }
    Ok(s)
}

fn synthetic_divide(c: &[CBig], r: &CBig, prec: u32) -> Vec<CBig> {
    // divide by (z - r), dropping the (numerically tiny) remainder
    let mut out = vec![CBig::zero(prec); c.len().saturating_sub(1)];
    let mut acc = CBig::zero(prec);
    for k in (0..c.len()).rev() {
        let v = c[k].add(&acc);
        if k == 0 {
            break;
        }
        out[k - 1] = v.clone();
        acc = v.mul(r);
    }
    out
}

/// Decide `|s| = 0` against the tolerance policy: below `tol` is zero,
/// above `10 tol` is nonzero, the gray zone escalates once via `retry`.
fn certify_zero(
    s: &CBig,
    cfg: &NumericCfg,
    retry: impl FnOnce(NumericCfg) -> Result<CBig>,
) -> Result<bool> {
    let prec = cfg.prec;
    let tol = pow10_neg(cfg.tol_exp, prec);
    let ten_tol = tol.mul(&BigFloat::from_i64(10, prec));
    let a = s.abs();
    if a.cmp(&tol) != core::cmp::Ordering::Greater {
        return Ok(true);
    }
    if a.cmp(&ten_tol) == core::cmp::Ordering::Greater {
        return Ok(false);
    }
    let cfg2 = NumericCfg { prec: cfg.prec * 2, ..*cfg };
    let s2 = retry(cfg2)?;
    let tol2 = pow10_neg(cfg.tol_exp, cfg2.prec);
    let ten_tol2 = tol2.mul(&BigFloat::from_i64(10, cfg2.prec));
    let a2 = s2.abs();
    if a2.cmp(&tol2) != core::cmp::Ordering::Greater {
        return Ok(true);
    }
    if a2.cmp(&ten_tol2) == core::cmp::Ordering::Greater {
        return Ok(false);
    }
    Err(Error::Indeterminate(format!(
        "criterion value stayed in the gray zone near 10^-{}",
        cfg.tol_exp
    )))
}

fn pow10_neg(exp: u32, prec: u32) -> BigFloat {
    let mut ten = BigFloat::from_i64(1, prec);
    for _ in 0..exp {
        ten = ten.mul(&BigFloat::from_i64(10, prec));
    }
    BigFloat::from_i64(1, prec).div(&ten).expect("power of ten")
}

/// Criterion value for the component `{p = p0}` of the dual web.
///
/// `p0 = infinity` is handled by swapping the affine chart of the plane
/// (which exchanges the roles of `A` and `B`); a fiber direction at
/// `z = infinity` is removed by [`delta_shift`]. In exact mode the value is
/// an element of `K` and the verdict is exact; the numeric value is also
/// reported when the field embeds (no free parameters).
pub fn theorem3_sum(
    h: &HomogeneousFoliation,
    p0: &ExtValue,
    mode: Mode,
    cfg: &NumericCfg,
) -> Result<CriterionValue> {
    // Reduce p0 = infinity to 0 of the chart-swapped foliation.
    let (hw, p0f) = match p0 {
        ExtValue::Infinity => {
            let ctx = h.ctx();
            let swap = |f: &MultiPoly| -> Result<MultiPoly> {
                f.substitute(&[
                    (Var::X, MultiPoly::var(ctx, Var::Y)),
                    (Var::Y, MultiPoly::var(ctx, Var::X)),
                ])
            };
            (
                HomogeneousFoliation::new(swap(&h.b)?, swap(&h.a)?)?,
                FieldScalar::zero(ctx),
            )
        }
        ExtValue::Finite(v) => (h.clone(), v.clone()),
    };
    let (hs, _delta, p0s) = delta_shift(&hw, &p0f)?;
    let rec = fiber_record(&hs, &ExtValue::Finite(p0s.clone()))?;
    match mode {
        Mode::Exact => {
            let s = theorem3_exact_shifted(&hs, &p0s, &rec)?;
            let numeric = if hs.ctx().nparams() == 0 {
                theorem3_numeric_shifted(&hs, &p0s, cfg).ok()
            } else {
                None
            };
            Ok(CriterionValue { holomorphic: s.is_zero(), exact: Some(s), numeric })
        }
        Mode::Numeric => {
            let s = theorem3_numeric_shifted(&hs, &p0s, cfg)?;
            let hs2 = hs.clone();
            let p0s2 = p0s.clone();
            let holomorphic = certify_zero(&s, cfg, move |c2| {
                theorem3_numeric_shifted(&hs2, &p0s2, &c2)
            })?;
            Ok(CriterionValue { exact: None, numeric: Some(s), holomorphic })
        }
    }
}

/// Uniform-fiber shortcut: for `nu = 2` the curvature is holomorphic
/// unconditionally; for `nu >= 3` it is holomorphic iff
/// `sum (p0 - r_i)(B_x - A_y)(1, r_i)/B(1, r_i) = 0` over the fiber.
pub fn remark33_shortcut(h: &HomogeneousFoliation, p0: &ExtValue) -> Result<bool> {
    let (hw, p0f) = match p0 {
        ExtValue::Infinity => {
            let ctx = h.ctx();
            let swap = |f: &MultiPoly| -> Result<MultiPoly> {
                f.substitute(&[
                    (Var::X, MultiPoly::var(ctx, Var::Y)),
                    (Var::Y, MultiPoly::var(ctx, Var::X)),
                ])
            };
            (
                HomogeneousFoliation::new(swap(&h.b)?, swap(&h.a)?)?,
                FieldScalar::zero(ctx),
            )
        }
        ExtValue::Finite(v) => (h.clone(), v.clone()),
    };
    let (hs, _, p0s) = delta_shift(&hw, &p0f)?;
    let rec = fiber_record(&hs, &ExtValue::Finite(p0s.clone()))?;
    let nu = rec
        .uniform_nu()
        .ok_or_else(|| Error::invalid("fiber has mixed ramification indices"))?;
    if nu < 2 {
        return Err(Error::invalid("the value is not critical"));
    }
    if nu == 2 {
        return Ok(true);
    }
    let ctx = hs.ctx().clone();
    let bz = dehom_1z(&hs.b)?;
    let curl = dehom_1z(
        &hs.b
            .partial_derivative(Var::X)
            .sub(&hs.a.partial_derivative(Var::Y)),
    )?;
    let p0z = UPoly::new(vec![p0s.clone(), FieldScalar::from_i64(&ctx, -1)]);
    let mut s = FieldScalar::zero(&ctx);
    for class in &rec.classes {
        let m = &class.modulus;
        let inv_b = bz.inv_mod(m)?;
        let g = p0z.rem(m)?.mul_mod(&curl.rem(m)?, m)?.mul_mod(&inv_b, m)?;
        s = s.add(&trace_poly(&g, m)?);
    }
    Ok(s.is_zero())
}

/// The inflection-line check: for a transverse inflection line
/// `T = (a x + b y = 0)` of order `nu - 1` whose direction is the only
/// non-fixed critical point in its fiber, the curvature is holomorphic on
/// the image line iff `Q(b, -a) = 0`, with
/// `P = (A(x,y) B(b,-a) - A(b,-a) B(x,y)) / (a x + b y)^nu` and
/// `Q = (nu - 2)(B_x - A_y) P + 2(nu + 1)(P_x B - P_y A)`.
pub fn corollary37_check(
    h: &HomogeneousFoliation,
    a: &FieldScalar,
    b: &FieldScalar,
    nu: u32,
) -> Result<bool> {
    let ctx = h.ctx().clone();
    let point_x = b.clone();
    let point_y = a.neg();
    let a_at = h.a.eval_var(Var::X, &point_x).eval_var(Var::Y, &point_y).as_constant().unwrap();
    let b_at = h.b.eval_var(Var::X, &point_x).eval_var(Var::Y, &point_y).as_constant().unwrap();
    let det = h.a.scale(&b_at).sub(&h.b.scale(&a_at));
    let line = MultiPoly::var(&ctx, Var::X)
        .scale(a)
        .add(&MultiPoly::var(&ctx, Var::Y).scale(b));
    let divisor = line.pow(nu)?;
    let p = det.exact_div(&divisor).ok_or_else(|| {
        Error::invalid("(ax + by)^nu does not divide the determinant: inconsistent order")
    })?;
    let curl = h
        .b
        .partial_derivative(Var::X)
        .sub(&h.a.partial_derivative(Var::Y));
    let q = curl
        .mul(&p)?
        .scale(&FieldScalar::from_i64(&ctx, nu as i64 - 2))
        .add(
            &p.partial_derivative(Var::X)
                .mul(&h.b)?
                .sub(&p.partial_derivative(Var::Y).mul(&h.a)?)
                .scale(&FieldScalar::from_i64(&ctx, 2 * (nu as i64 + 1))),
        );
    let q_at = q
        .eval_var(Var::X, &point_x)
        .eval_var(Var::Y, &point_y)
        .as_constant()
        .unwrap();
    Ok(q_at.is_zero())
}

// ---------------------------------------------------------------------------
// Flatness decision
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentClass {
    /// Every ramified fiber direction is fixed: dual to radial
    /// singularities only, automatically holomorphic.
    RadialOnly,
    /// Uniform ramification 2 over the fiber: automatically holomorphic.
    NuTwoTrivial,
    /// Carries a transverse inflection: the criterion sum decides.
    TransverseInflection,
}

#[derive(Clone, Debug)]
pub struct ComponentVerdict {
    pub value: ExtValue,
    pub class: ComponentClass,
    pub criterion: Option<CriterionValue>,
    pub holomorphic: bool,
}

#[derive(Clone, Debug)]
pub struct FlatnessReport {
    pub components: Vec<ComponentVerdict>,
    pub flat: bool,
    pub mode: Mode,
}

/// Decide flatness of the dual web: enumerate the critical values of the
/// direction map and test the curvature along every component
/// `{p = p0}` of the dual discriminant away from the origin-dual line.
pub fn flatness_decision(
    h: &HomogeneousFoliation,
    mode: Mode,
    cfg: &NumericCfg,
) -> Result<FlatnessReport> {
    if h.degree < 3 {
        return Err(Error::invalid("flatness analysis needs degree >= 3"));
    }
    let values = match mode {
        Mode::Exact => critical_values(h)?,
        Mode::Numeric => critical_values(h)?, // exact enumeration also serves numeric mode
    };
    let mut components = Vec::new();
    let mut flat = true;
    for v in values {
        let rec = fiber_record(h, &v)?;
        let (class, criterion, holomorphic) = if rec.radial_only() {
            (ComponentClass::RadialOnly, None, true)
        } else if rec.uniform_nu() == Some(2) {
            (ComponentClass::NuTwoTrivial, None, true)
        } else {
            let c = theorem3_sum(h, &v, mode, cfg)?;
            let hol = c.holomorphic;
            (ComponentClass::TransverseInflection, Some(c), hol)
        };
        flat &= holomorphic;
        components.push(ComponentVerdict { value: v, class, criterion, holomorphic });
    }
    Ok(FlatnessReport { components, flat, mode })
}

// ---------------------------------------------------------------------------
// Galois maps and the Klein catalog
// ---------------------------------------------------------------------------

/// One critical value of a map with its ramification pattern.
#[derive(Clone, Debug)]
pub struct PortraitEntry {
    pub value: ExtValue,
    /// Multiset of ramification indices over the fiber.
    pub indices: Vec<u32>,
    pub fiber_size: u32,
}

#[derive(Clone, Debug)]
pub struct RamificationPortrait {
    pub entries: Vec<PortraitEntry>,
    pub galois: bool,
}

/// Exact fiber indices of a free-standing map over a value.
fn map_fiber_indices(f: &RationalSphereMap, v: &ExtValue) -> Result<Vec<u32>> {
    let nz = dehom_z1(&f.num)?;
    let dz = dehom_z1(&f.den)?;
    let c = match v {
        ExtValue::Finite(w) => nz.sub(&dz.scale(w)),
        ExtValue::Infinity => dz.clone(),
    };
    if c.is_zero() {
        return Err(Error::invalid("degenerate fiber"));
    }
    let mut out = Vec::new();
    let drop = f.degree - c.deg() as u32;
    if drop > 0 {
        out.push(drop);
    }
    let (_, classes) = root_classes(&c)?;
    for rc in classes {
        for _ in 0..rc.count() {
            out.push(rc.nu);
        }
    }
    out.sort();
    Ok(out)
}

/// Critical values of a free-standing map, via the associated foliation
/// machinery on the mirrored pair.
fn map_critical_values(f: &RationalSphereMap) -> Result<Vec<ExtValue>> {
    let h = associated_foliation(f)?;
    critical_values(&h)
}

/// Ramification portrait and the Galois test: the covering is Galois iff
/// on every critical fiber all ramification indices agree.
pub fn is_galois(f: &RationalSphereMap, mode: Mode, cfg: &NumericCfg) -> Result<RamificationPortrait> {
    match mode {
        Mode::Exact => {
            let values = map_critical_values(f)?;
            let mut entries = Vec::new();
            let mut galois = true;
            for v in values {
                let indices = map_fiber_indices(f, &v)?;
                let uniform = indices.windows(2).all(|w| w[0] == w[1]);
                galois &= uniform;
                entries.push(PortraitEntry {
                    fiber_size: indices.len() as u32,
                    indices,
                    value: v,
                });
            }
            Ok(RamificationPortrait { entries, galois })
        }
        Mode::Numeric => is_galois_numeric(f, cfg),
    }
}

fn is_galois_numeric(f: &RationalSphereMap, cfg: &NumericCfg) -> Result<RamificationPortrait> {
    let ctx = f.ctx();
    if ctx.nparams() > 0 {
        return Err(Error::ExactUnsupported("numeric mode needs specialized parameters".into()));
    }
    let prec = cfg.prec;
    let theta = numeric::theta_embedding(ctx, prec)?;
    let nz = dehom_z1(&f.num)?;
    let dz = dehom_z1(&f.den)?;
    let nn = numeric::embed_upoly(&nz, &theta, prec)?;
    let dn = numeric::embed_upoly(&dz, &theta, prec)?;
    // critical points: squarefree part of the Wronskian in the (z,1) chart
    let wr = f
        .num
        .partial_derivative(Var::X)
        .mul(&f.den.partial_derivative(Var::Y))?
        .sub(&f.num.partial_derivative(Var::Y).mul(&f.den.partial_derivative(Var::X))?);
    let wz = dehom_z1(&wr)?;
    let mut crit_pts: Vec<Option<CBig>> = Vec::new(); // None = z at infinity
    if (wz.deg() as u32) < 2 * f.degree - 2 {
        crit_pts.push(None);
    }
    if wz.deg() > 0 {
        let g = wz.gcd(&wz.derivative())?;
        let sq = wz.exact_div(&g)?;
        let roots = numeric::numeric_roots(&sq, &theta, prec, cfg.seed ^ 7)?;
        for r in roots {
            crit_pts.push(Some(r.value));
        }
    }
    // critical values, clustered
    let mut values: Vec<Option<CBig>> = Vec::new(); // None = infinity
    let vtol = BigFloat::pow2(-((prec / 3) as i64), prec);
    let huge = BigFloat::pow2((prec / 2) as i64, prec);
    for cp in &crit_pts {
        let v = match cp {
            None => {
                // f(infinity) from the homogeneous pair at (1, 0)
                let ninf = eval_pair_at_inf(&f.num)?;
                let dinf = eval_pair_at_inf(&f.den)?;
                if dinf.is_zero() {
                    None
                } else {
                    Some(
                        numeric::embed_scalar(&ninf, &theta, prec)?
                            .div(&numeric::embed_scalar(&dinf, &theta, prec)?)?,
                    )
                }
            }
            Some(z) => {
                let dv = eval_cbig(&dn, z);
                if dv.is_zero() {
                    None
                } else {
                    let v = eval_cbig(&nn, z).div(&dv)?;
                    if v.abs().cmp(&huge) == core::cmp::Ordering::Greater {
                        None
                    } else {
                        Some(v)
                    }
                }
            }
        };
        let dup = values.iter().any(|u| match (u, &v) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                let scale = BigFloat::from_i64(1, prec).max(&a.abs());
                a.dist(b).cmp(&vtol.mul(&scale)) != core::cmp::Ordering::Greater
            }
            _ => false,
        });
        if !dup {
            values.push(v);
        }
    }
    let mut entries = Vec::new();
    let mut galois = true;
    for v in values {
        let fiber: NumericFiber = numeric::numeric_fiber(
            &nn,
            &dn,
            v.as_ref(),
            prec,
            cfg.seed ^ 99,
        )?;
        let mut indices: Vec<u32> = fiber.points.iter().map(|p| p.multiplicity).collect();
        if fiber.infinity_multiplicity > 0 {
            indices.push(fiber.infinity_multiplicity);
        }
        indices.sort();
        let uniform = indices.windows(2).all(|w| w[0] == w[1]);
        galois &= uniform;
        entries.push(PortraitEntry {
            fiber_size: indices.len() as u32,
            indices,
            value: match v {
                None => ExtValue::Infinity,
                Some(c) => ExtValue::Finite(FieldScalar::from_rat(
                    ctx,
                    numeric::recognize_rational(&c.re, 72)
                        .unwrap_or_else(|| Rat::from_integer(0.into())),
                )),
            },
        });
    }
    Ok(RamificationPortrait { entries, galois })
}

fn eval_pair_at_inf(f: &MultiPoly) -> Result<FieldScalar> {
    let ctx = f.ctx();
    Ok(f
        .eval_var(Var::Y, &FieldScalar::zero(ctx))
        .eval_var(Var::X, &FieldScalar::one(ctx))
        .as_constant()
        .expect("homogeneous evaluation"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaloisType {
    Cyclic,
    NonCyclic,
}

/// A Galois covering has cyclic group iff it has exactly two critical
/// points, both totally ramified.
pub fn galois_group_type(portrait: &RamificationPortrait, degree: u32) -> Result<GaloisType> {
    if !portrait.galois {
        return Err(Error::invalid("the map is not Galois"));
    }
    let mut critical_points = 0u32;
    let mut totally_ramified = true;
    for e in &portrait.entries {
        for &nu in &e.indices {
            if nu >= 2 {
                critical_points += 1;
                totally_ramified &= nu == degree;
            }
        }
    }
    if critical_points == 2 && totally_ramified {
        Ok(GaloisType::Cyclic)
    } else {
        Ok(GaloisType::NonCyclic)
    }
}

/// The Klein catalog of Galois coverings of the sphere.
///
/// `1`: `z^d`; `2`: `(z^k + 1)^2 / (4 z^k)`; `3`: degree 12 (needs
/// `theta^2 + 3 = 0`); `4`: degree 24; `5`: degree 60.
pub fn klein_map(ctx: &Arc<FieldCtx>, index: u8, dk: u32) -> Result<RationalSphereMap> {
    let x = MultiPoly::var(ctx, Var::X);
    let y = MultiPoly::var(ctx, Var::Y);
    match index {
        1 => {
            if dk < 1 {
                return Err(Error::invalid("degree must be >= 1"));
            }
            RationalSphereMap::new(x.pow(dk)?, y.pow(dk)?)
        }
        2 => {
            if dk < 1 {
                return Err(Error::invalid("k must be >= 1"));
            }
            let num = x.pow(dk)?.add(&y.pow(dk)?).pow(2)?;
            let den = x
                .pow(dk)?
                .mul(&y.pow(dk)?)?
                .scale(&FieldScalar::from_i64(ctx, 4));
            RationalSphereMap::new(num, den)
        }
        3 => {
            if !is_sqrt_minus3(ctx) {
                return Err(Error::invalid(
                    "the tetrahedral map needs the field theta^2 + 3 = 0",
                ));
            }
            let t2 = FieldScalar::theta(ctx).mul(&FieldScalar::from_i64(ctx, 2));
            let core = x.pow(4)?.add(&y.pow(4)?);
            let mid = x.pow(2)?.mul(&y.pow(2)?)?.scale(&t2);
            let num = core.add(&mid).pow(3)?;
            let den = core.sub(&mid).pow(3)?;
            RationalSphereMap::new(num, den)
        }
        4 => {
            let num = x
                .pow(8)?
                .add(&x.pow(4)?.mul(&y.pow(4)?)?.scale(&FieldScalar::from_i64(ctx, 14)))
                .add(&y.pow(8)?)
                .pow(3)?;
            let den = x
                .pow(4)?
                .mul(&y.pow(4)?)?
                .mul(&x.pow(4)?.sub(&y.pow(4)?).pow(4)?)?
                .scale(&FieldScalar::from_i64(ctx, 108));
            let m = RationalSphereMap::new(num, den)?;
            debug_assert_eq!(m.degree(), 24);
            Ok(m)
        }
        5 => {
            let x5 = x.pow(5)?;
            let y5 = y.pow(5)?;
            let num = x5
                .pow(4)?
                .sub(&x5.pow(3)?.mul(&y5)?.scale(&FieldScalar::from_i64(ctx, 228)))
                .add(&x5.pow(2)?.mul(&y5.pow(2)?)?.scale(&FieldScalar::from_i64(ctx, 494)))
                .add(&x5.mul(&y5.pow(3)?)?.scale(&FieldScalar::from_i64(ctx, 228)))
                .add(&y5.pow(4)?)
                .pow(3)?;
            let den = x5
                .mul(&y5)?
                .mul(
                    &x5.pow(2)?
                        .add(&x5.mul(&y5)?.scale(&FieldScalar::from_i64(ctx, 11)))
                        .sub(&y5.pow(2)?)
                        .pow(5)?,
                )?
                .scale(&FieldScalar::from_i64(ctx, -1728));
            let m = RationalSphereMap::new(num, den)?;
            debug_assert_eq!(m.degree(), 60);
            Ok(m)
        }
        _ => Err(Error::invalid("Klein type must be 1..=5")),
    }
}

fn is_sqrt_minus3(ctx: &FieldCtx) -> bool {
    use num_bigint::BigInt;
    ctx.theta.min_poly == vec![BigInt::from(3), BigInt::from(0), BigInt::from(1)]
}

// ---------------------------------------------------------------------------
// The Moebius-family sums
// ---------------------------------------------------------------------------

/// The three sums deciding holomorphy of the dual-web curvature along
/// `{p = h(p0)}` for every Moebius postcomposition `h` at once. Uses the
/// map's own pair: for finite `p0` the denominator, for `p0 = infinity`
/// the numerator.
#[derive(Clone, Debug)]
pub struct MoebiusFamilyVerdict {
    /// `None` in the unconditional `nu = 2` case.
    pub sums: Option<[FieldScalar; 3]>,
    pub nu: u32,
    pub holomorphic_for_all: bool,
}

pub fn lemma47_sums(f: &RationalSphereMap, p0: &ExtValue) -> Result<MoebiusFamilyVerdict> {
    let ctx = f.ctx().clone();
    let nz = dehom_z1(&f.num)?;
    let dz = dehom_z1(&f.den)?;
    let c = match p0 {
        ExtValue::Finite(w) => nz.sub(&dz.scale(w)),
        ExtValue::Infinity => dz.clone(),
    };
    if c.is_zero() {
        return Err(Error::invalid("degenerate fiber"));
    }
    let drop = f.degree - c.deg() as u32;
    let (_, classes) = root_classes(&c)?;
    // uniform ramification across the fiber
    let mut nu_opt = if drop > 0 { Some(drop) } else { None };
    for rc in &classes {
        match nu_opt {
            None => nu_opt = Some(rc.nu),
            Some(n) if n != rc.nu => {
                return Err(Error::invalid("fiber ramification is not uniform"))
            }
            _ => {}
        }
    }
    let nu = nu_opt.ok_or_else(|| Error::invalid("empty fiber"))?;
    if nu == 2 {
        return Ok(MoebiusFamilyVerdict { sums: None, nu, holomorphic_for_all: true });
    }
    // G = denominator pair member for finite p0, numerator for infinity.
    let g_poly = match p0 {
        ExtValue::Finite(_) => &f.den,
        ExtValue::Infinity => &f.num,
    };
    let g = dehom_z1(g_poly)?;
    let gx = dehom_z1(&g_poly.partial_derivative(Var::X))?;
    let gy = dehom_z1(&g_poly.partial_derivative(Var::Y))?;
    let zvar = UPoly::new(vec![FieldScalar::zero(&ctx), FieldScalar::one(&ctx)]);
    let mut s1 = FieldScalar::zero(&ctx);
    let mut s2 = FieldScalar::zero(&ctx);
    let mut s3 = FieldScalar::zero(&ctx);
    for rc in &classes {
        let m = &rc.modulus;
        let inv_g = g.inv_mod(m)?;
        let gx_m = gx.rem(m)?;
        let gy_m = gy.rem(m)?;
        let z_m = zvar.rem(m)?;
        s1 = s1.add(&trace_poly(&gx_m.mul_mod(&inv_g, m)?, m)?);
        s2 = s2.add(&trace_poly(
            &gy_m.sub(&z_m.mul_mod(&gx_m, m)?).mul_mod(&inv_g, m)?,
            m,
        )?);
        s3 = s3.add(&trace_poly(&z_m.mul_mod(&gy_m, m)?.mul_mod(&inv_g, m)?, m)?);
    }
    if drop > 0 {
        // fiber point [1 : 0]: only the b-free terms survive
        let g_inf = eval_pair_at_inf(g_poly)?;
        let gx_inf = eval_pair_at_inf(&g_poly.partial_derivative(Var::X))?;
        let gy_inf = eval_pair_at_inf(&g_poly.partial_derivative(Var::Y))?;
        if g_inf.is_zero() {
            return Err(Error::invalid("pair member vanishes on the fiber at infinity"));
        }
        s2 = s2.sub(&gx_inf.div(&g_inf)?);
        s3 = s3.add(&gy_inf.div(&g_inf)?);
    }
    let holomorphic = s1.is_zero() && s2.is_zero() && s3.is_zero();
    Ok(MoebiusFamilyVerdict { sums: Some([s1, s2, s3]), nu, holomorphic_for_all: holomorphic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_poly;

    const XY: &[Var] = &[Var::X, Var::Y];

    fn ctx() -> Arc<FieldCtx> {
        FieldCtx::rational()
    }

    fn foliation(ctx: &Arc<FieldCtx>, a: &str, b: &str) -> HomogeneousFoliation {
        HomogeneousFoliation::new(
            parse_poly(a, ctx, XY).unwrap(),
            parse_poly(b, ctx, XY).unwrap(),
        )
        .unwrap()
    }

    fn cfg() -> NumericCfg {
        NumericCfg::default()
    }

    #[test]
    fn gauss_map_round_trip() {
        let c = ctx();
        // omega_1^3 = y^3 dx - x^3 dy: direction map z^3
        let h = foliation(&c, "y^3", "-x^3");
        let g = gauss_map(&h).unwrap();
        let f1 = klein_map(&c, 1, 3).unwrap();
        assert_eq!(g, f1);
        let h2 = associated_foliation(&g).unwrap();
        assert_eq!(gauss_map(&h2).unwrap(), g);
    }

    #[test]
    fn fiber_of_total_ramification() {
        let c = ctx();
        let h = foliation(&c, "y^3", "-x^3");
        // fiber of 0: A(1,z) = z^3, totally ramified at the fixed point 0
        let rec = fiber_record(&h, &ExtValue::zero(&c)).unwrap();
        assert_eq!(rec.classes.len(), 1);
        assert_eq!(rec.classes[0].nu, 3);
        assert!(rec.classes[0].fixed);
        assert_eq!(rec.total_weight(), 3);
        // fiber of infinity: B(1,z) = -1, everything at z = infinity, fixed
        let rec = fiber_record(&h, &ExtValue::Infinity).unwrap();
        assert!(rec.classes.is_empty());
        assert_eq!(rec.infinity_nu, 3);
        assert!(rec.infinity_fixed);
    }

    #[test]
    fn degree_2k_fiber_structure() {
        // A = y^k (y - x)^k, B = (y - lambda x)^k (y - mu x)^k at k = 2,
        // lambda = 2, mu = 3: fiber of 0 is {0 fixed, 1 non-fixed}, nu = k.
        let c = ctx();
        let h = foliation(&c, "y^2*(y - x)^2", "(y - 2*x)^2*(y - 3*x)^2");
        let rec = fiber_record(&h, &ExtValue::zero(&c)).unwrap();
        assert_eq!(rec.infinity_nu, 0);
        let mut flags: Vec<(u32, bool, usize)> = rec
            .classes
            .iter()
            .map(|cl| (cl.nu, cl.fixed, cl.modulus.deg()))
            .collect();
        flags.sort();
        assert_eq!(flags, vec![(2, false, 1), (2, true, 1)]);
    }

    #[test]
    fn critical_values_of_klein_maps() {
        let c = ctx();
        // f1 = z^d: {0, infinity}
        let h1 = associated_foliation(&klein_map(&c, 1, 4).unwrap()).unwrap();
        let vals = critical_values(&h1).unwrap();
        assert_eq!(vals, vec![ExtValue::zero(&c), ExtValue::Infinity]);
        // f2, k = 2: {0, 1, infinity}
        let h2 = associated_foliation(&klein_map(&c, 2, 2).unwrap()).unwrap();
        let vals = critical_values(&h2).unwrap();
        assert_eq!(vals, vec![ExtValue::zero(&c), ExtValue::one(&c), ExtValue::Infinity]);
    }

    #[test]
    fn legendre_of_omega1_cubed() {
        let c = ctx();
        let h = foliation(&c, "y^3", "-x^3");
        let web = legendre(&h).unwrap();
        // (px - q)^3 - p x^3 rendered in standard web letters:
        // (p y_w ... ) check degree and a golden coefficient instead
        assert_eq!(web.degree(), 3);
    }

    #[test]
    fn normalized_legendre_smooth() {
        let c = ctx();
        let h = foliation(&c, "y^2*(y - x)^2", "(y - 2*x)^2*(y - 3*x)^2");
        let w = normalized_legendre(&h, &FieldScalar::zero(&c)).unwrap();
        let rep = crate::web::smooth_along(&w).unwrap();
        assert!(rep.smooth);
    }

    #[test]
    fn hand_checked_nonflat_cyclic_example() {
        // H(h . f1), h(z) = (z+1)/(z-1), d = 3: S(-1) = -2, S(1) = -2.
        let c = ctx();
        let h = foliation(&c, "y^3 + x^3", "x^3 - y^3");
        let minus1 = ExtValue::Finite(FieldScalar::from_i64(&c, -1));
        let v = theorem3_sum(&h, &minus1, Mode::Exact, &cfg()).unwrap();
        assert_eq!(v.exact.as_ref().unwrap(), &FieldScalar::from_i64(&c, -2));
        assert!(!v.holomorphic);
        // exact and numeric routes agree
        let n = v.numeric.as_ref().expect("numeric value");
        let expect = CBig::from_i64(-2, 256);
        let err = n.sub(&expect).abs();
        assert_eq!(
            err.cmp(&BigFloat::pow2(-80, 256)),
            core::cmp::Ordering::Less
        );
        let plus1 = ExtValue::Finite(FieldScalar::from_i64(&c, 1));
        let v = theorem3_sum(&h, &plus1, Mode::Exact, &cfg()).unwrap();
        assert_eq!(v.exact.as_ref().unwrap(), &FieldScalar::from_i64(&c, -2));
        // numeric mode certifies non-holomorphy
        let v = theorem3_sum(&h, &minus1, Mode::Numeric, &cfg()).unwrap();
        assert!(!v.holomorphic);
    }

    #[test]
    fn omega_families_are_flat() {
        let c = ctx();
        for d in 3..=4u32 {
            let h1 = foliation(&c, &format!("y^{d}"), &format!("-x^{d}"));
            let r = flatness_decision(&h1, Mode::Exact, &cfg()).unwrap();
            assert!(r.flat, "omega_1^{d}");
            assert!(r
                .components
                .iter()
                .all(|cv| cv.class == ComponentClass::RadialOnly));
            let h2 = foliation(&c, &format!("x^{d}"), &format!("-y^{d}"));
            let r = flatness_decision(&h2, Mode::Exact, &cfg()).unwrap();
            assert!(r.flat, "omega_2^{d}");
        }
    }

    #[test]
    fn conjugated_cyclic_map_is_not_flat() {
        let c = ctx();
        let h = foliation(&c, "y^3 + x^3", "x^3 - y^3");
        let r = flatness_decision(&h, Mode::Exact, &cfg()).unwrap();
        assert!(!r.flat);
        let r = flatness_decision(&h, Mode::Numeric, &cfg()).unwrap();
        assert!(!r.flat);
    }

    #[test]
    fn degree_2k_symbolic_criterion() {
        // k = 3 with symbolic lambda, mu: S at p0 = 0 is proportional to
        // lambda + mu - 2 lambda mu; hand derivation gives
        // 2 (lambda + mu - 2 lambda mu) / ((1 - lambda)(1 - mu)).
        let c = FieldCtx::with_params(&["lambda", "mu"]);
        let h = HomogeneousFoliation::new(
            parse_poly("y^3*(y - x)^3", &c, XY).unwrap(),
            parse_poly("(y - lambda*x)^3*(y - mu*x)^3", &c, XY).unwrap(),
        )
        .unwrap();
        let v = theorem3_sum(&h, &ExtValue::zero(&c), Mode::Exact, &cfg()).unwrap();
        let s = v.exact.unwrap();
        let expect = {
            let l = FieldScalar::param(&c, "lambda").unwrap();
            let m = FieldScalar::param(&c, "mu").unwrap();
            let one = FieldScalar::one(&c);
            let num = l.add(&m).sub(&l.mul(&m).mul(&FieldScalar::from_i64(&c, 2)));
            let den = one.sub(&l).mul(&one.sub(&m));
            num.mul(&FieldScalar::from_i64(&c, 2)).div(&den).unwrap()
        };
        assert_eq!(s, expect);
    }

    #[test]
    fn degree_2k_keq2_unconditional() {
        let c = FieldCtx::with_params(&["lambda", "mu"]);
        let h = HomogeneousFoliation::new(
            parse_poly("y^2*(y - x)^2", &c, XY).unwrap(),
            parse_poly("(y - lambda*x)^2*(y - mu*x)^2", &c, XY).unwrap(),
        )
        .unwrap();
        let v = theorem3_sum(&h, &ExtValue::zero(&c), Mode::Exact, &cfg()).unwrap();
        assert!(v.holomorphic);
        assert!(remark33_shortcut(&h, &ExtValue::zero(&c)).unwrap());
    }

    #[test]
    fn klein_degrees() {
        let c = ctx();
        assert_eq!(klein_map(&c, 1, 7).unwrap().degree(), 7);
        assert_eq!(klein_map(&c, 2, 3).unwrap().degree(), 6);
        assert_eq!(klein_map(&c, 4, 0).unwrap().degree(), 24);
        assert_eq!(klein_map(&c, 5, 0).unwrap().degree(), 60);
        assert!(klein_map(&c, 3, 0).is_err());
        let c3 = FieldCtx::with_theta(vec![3.into(), 0.into(), 1.into()]).unwrap();
        assert_eq!(klein_map(&c3, 3, 0).unwrap().degree(), 12);
    }

    #[test]
    fn galois_detection() {
        let c = ctx();
        let f1 = klein_map(&c, 1, 5).unwrap();
        let p = is_galois(&f1, Mode::Exact, &cfg()).unwrap();
        assert!(p.galois);
        assert_eq!(galois_group_type(&p, 5).unwrap(), GaloisType::Cyclic);
        let f2 = klein_map(&c, 2, 2).unwrap();
        let p = is_galois(&f2, Mode::Exact, &cfg()).unwrap();
        assert!(p.galois);
        assert_eq!(galois_group_type(&p, 4).unwrap(), GaloisType::NonCyclic);
        // z^3 + z is not Galois: its portrait mixes indices {1, 2}
        let znum = parse_poly("x^3 + x*y^2", &c, XY).unwrap();
        let zden = parse_poly("y^3", &c, XY).unwrap();
        let f = RationalSphereMap::new(znum, zden).unwrap();
        let p = is_galois(&f, Mode::Numeric, &cfg()).unwrap();
        assert!(!p.galois);
    }

    #[test]
    fn lemma47_for_f2_at_infinity() {
        let c = ctx();
        for k in 3..=4u32 {
            let f2 = klein_map(&c, 2, k).unwrap();
            let v = lemma47_sums(&f2, &ExtValue::Infinity).unwrap();
            assert_eq!(v.nu, k);
            let sums = v.sums.unwrap();
            assert!(sums.iter().all(FieldScalar::is_zero));
            assert!(v.holomorphic_for_all);
        }
        // k = 2: unconditional
        let f2 = klein_map(&c, 2, 2).unwrap();
        let v = lemma47_sums(&f2, &ExtValue::Infinity).unwrap();
        assert!(v.sums.is_none() && v.holomorphic_for_all);
    }

    #[test]
    fn postcompose_and_conjugation() {
        let c = ctx();
        let f1 = klein_map(&c, 1, 3).unwrap();
        // h = 1/z swaps 0 and infinity; portrait stays Galois-cyclic
        let g = postcompose(
            &f1,
            &FieldScalar::zero(&c),
            &FieldScalar::one(&c),
            &FieldScalar::one(&c),
            &FieldScalar::zero(&c),
        )
        .unwrap();
        let p = is_galois(&g, Mode::Exact, &cfg()).unwrap();
        assert!(p.galois);
        assert_eq!(galois_group_type(&p, 3).unwrap(), GaloisType::Cyclic);
        // identity postcomposition returns the same map
        let id = postcompose(
            &f1,
            &FieldScalar::one(&c),
            &FieldScalar::zero(&c),
            &FieldScalar::zero(&c),
            &FieldScalar::one(&c),
        )
        .unwrap();
        assert_eq!(id, f1);
    }

    #[test]
    fn conjugation_invariance_of_flatness() {
        let c = ctx();
        let h = foliation(&c, "y^3 + x^3", "x^3 - y^3");
        let m = [
            [FieldScalar::from_i64(&c, 2), FieldScalar::from_i64(&c, 1)],
            [FieldScalar::from_i64(&c, 1), FieldScalar::from_i64(&c, 1)],
        ];
        let hc = linear_conjugate(&h, &m).unwrap();
        let r1 = flatness_decision(&h, Mode::Exact, &cfg()).unwrap();
        let r2 = flatness_decision(&hc, Mode::Exact, &cfg()).unwrap();
        assert_eq!(r1.flat, r2.flat);
        assert_eq!(r1.components.len(), r2.components.len());
    }

    #[test]
    fn corollary37_on_degree_2k() {
        // k = 3, T = {y = x} i.e. a = -1, b = 1 (line -x + y = 0), nu = 3:
        // Q(b, -a) = 0 iff lambda + mu - 2 lambda mu = 0.
        let c = FieldCtx::with_params(&["lambda", "mu"]);
        let h = HomogeneousFoliation::new(
            parse_poly("y^3*(y - x)^3", &c, XY).unwrap(),
            parse_poly("(y - lambda*x)^3*(y - mu*x)^3", &c, XY).unwrap(),
        )
        .unwrap();
        let a = FieldScalar::from_i64(&c, -1);
        let b = FieldScalar::from_i64(&c, 1);
        assert!(!corollary37_check(&h, &a, &b, 3).unwrap());
        // specialization on the vanishing locus: lambda = 2, mu = 2/3
        let q = FieldCtx::rational();
        let hs = HomogeneousFoliation::new(
            parse_poly("y^3*(y - x)^3", &q, XY).unwrap(),
            parse_poly("(y - 2*x)^3*(y - 2/3*x)^3", &q, XY).unwrap(),
        )
        .unwrap();
        let a = FieldScalar::from_i64(&q, -1);
        let b = FieldScalar::from_i64(&q, 1);
        assert!(corollary37_check(&hs, &a, &b, 3).unwrap());
    }
}
