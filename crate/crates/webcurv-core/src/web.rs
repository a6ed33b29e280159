//! Implicit planar webs `F(x, y, p) = 0`, `p = dy/dx`, in one affine chart:
//! discriminant components, smoothness of the characteristic surface along a
//! component, slope spectra, the holomorphy criterion for the curvature
//! along a smooth component, and the fundamental form of completely
//! decomposable webs.
//!
//! The criterion engine works along a component normalized to `{y = 0}`.
//! Writing `F(x,0,p) = a0(x) prod (p - phi_a(x))^(nu_a)`, the fundamental
//! form `eta(W)` has at most a simple pole along the component, with residue
//! assembled from the per-slope quantities
//!
//! `psi_a = (1/nu_a) [ (nu_a-2)(d - phi_a * F_py/F_y) -
//!          2(nu_a+1) sum_{b != a} nu_b phi_b / (phi_a - phi_b) ]`,
//!
//! and the curvature is holomorphic along the component iff
//! `sum (nu_a - 1) phi_a psi_a = 0` and `sum (nu_a - 1) psi_a' = 0`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem, FieldScalar, QTheta, Rat};
use crate::forms::{exterior_derivative, OneForm, TwoForm};
use crate::numeric::{self, BigFloat, CBig};
use crate::poly::{MultiPoly, Var};
use crate::ratfunc::RationalFunction;
use crate::upoly::UPoly;

// ---------------------------------------------------------------------------
// Webs and components
// ---------------------------------------------------------------------------

/// A line component of the discriminant, in the chart `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Line {
    /// `{ y = c }`
    YConst(FieldScalar),
    /// `{ x = c }`
    XConst(FieldScalar),
    /// `{ y = slope * x + intercept }`
    YLinear { slope: FieldScalar, intercept: FieldScalar },
}

impl Line {
    pub fn y_zero(ctx: &Arc<FieldCtx>) -> Self {
        Line::YConst(FieldScalar::zero(ctx))
    }
}

/// Record of the affine change used to move a component to `{y = 0}`.
#[derive(Clone, Debug, PartialEq)]
pub enum ChartMove {
    Identity,
    /// `y -> y + c`
    ShiftY(FieldScalar),
    /// `(x, y) -> (x, y + a x + b)`, `p -> p + a`
    Shear { slope: FieldScalar, intercept: FieldScalar },
    /// `(x, y) -> (y, x + c)`, `p -> 1/p`
    SwapShift(FieldScalar),
}

/// The web as a reduced implicit differential equation.
#[derive(Clone, Debug)]
pub struct ImplicitWeb {
    f: MultiPoly,
    degree: u32,
    /// True when construction had to drop a repeated `p`-factor.
    reduced: bool,
}

impl ImplicitWeb {
    pub fn polynomial(&self) -> &MultiPoly {
        &self.f
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn was_reduced(&self) -> bool {
        self.reduced
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.f.ctx()
    }
}

/// Build a web from `F`, taking the squarefree part in `p` over `K(x, y)`
/// when necessary.
pub fn make_web(f: &MultiPoly) -> Result<ImplicitWeb> {
    if f.is_zero() {
        return Err(Error::invalid("the zero polynomial defines no web"));
    }
    if f.uses_var(Var::Z) || f.uses_var(Var::Q) {
        return Err(Error::invalid("webs live in the variables x, y, p"));
    }
    let d = f.degree_in(Var::P);
    if d == 0 {
        return Err(Error::invalid("a web needs positive degree in p"));
    }
    // Squarefree in p over K(x, y): divide out the p-positive part of
    // gcd(F, F_p), keeping any (x, y)-content of F itself.
    let g = f.gcd(&f.partial_derivative(Var::P))?;
    let (poly, reduced) = if g.degree_in(Var::P) == 0 {
        (f.clone(), false)
    } else {
        let gp = g.primitive_part_in(Var::P)?;
        let q = f
            .exact_div(&gp)
            .ok_or_else(|| Error::invalid("squarefree reduction division failed"))?;
        (q, true)
    };
    let d = poly.degree_in(Var::P);
    if d == 0 {
        return Err(Error::invalid(
            "degenerate web: squarefree reduction removed every direction",
        ));
    }
    Ok(ImplicitWeb { f: poly, degree: d, reduced })
}

/// Move a line component to `{y = 0}`, transforming the web accordingly.
pub fn normalize_component(web: &ImplicitWeb, line: &Line) -> Result<(ImplicitWeb, ChartMove)> {
    let ctx = web.ctx().clone();
    let x = MultiPoly::var(&ctx, Var::X);
    let y = MultiPoly::var(&ctx, Var::Y);
    let p = MultiPoly::var(&ctx, Var::P);
    match line {
        Line::YConst(c) => {
            if c.is_zero() {
                return Ok((web.clone(), ChartMove::Identity));
            }
            let f = web
                .f
                .substitute(&[(Var::Y, y.add(&MultiPoly::constant(c.clone())))])?;
            Ok((make_web(&f)?, ChartMove::ShiftY(c.clone())))
        }
        Line::YLinear { slope, intercept } => {
            let newy = y
                .add(&x.scale(slope))
                .add(&MultiPoly::constant(intercept.clone()));
            let newp = p.add(&MultiPoly::constant(slope.clone()));
            let f = web.f.substitute(&[(Var::Y, newy), (Var::P, newp)])?;
            Ok((
                make_web(&f)?,
                ChartMove::Shear { slope: slope.clone(), intercept: intercept.clone() },
            ))
        }
        Line::XConst(c) => {
            // (x, y) -> (y, x): p becomes 1/p, cleared by p^d; then shift.
            let d = web.degree;
            let coeffs = web.f.coeffs_in(Var::P);
            let mut f = MultiPoly::zero(&ctx);
            for (k, a) in coeffs.iter().enumerate() {
                let sw = a.substitute(&[(Var::X, y.clone()), (Var::Y, x.clone())])?;
                f = f.add(&sw.mul_var_pow(Var::P, d - k as u32));
            }
            let f = f.substitute(&[(Var::Y, y.add(&MultiPoly::constant(c.clone())))])?;
            Ok((make_web(&f)?, ChartMove::SwapShift(c.clone())))
        }
    }
}

/// Fiber shear `(x, y) -> (x + beta y, y)`: sends the slope at `p = infinity`
/// to `1/beta` while keeping the component `{y = 0}` in place. Used when the
/// leading coefficient of `F(x, 0, p)` vanishes identically.
pub fn shear_fiber(web: &ImplicitWeb, beta: i64) -> Result<ImplicitWeb> {
    let ctx = web.ctx().clone();
    let d = web.degree;
    let x = MultiPoly::var(&ctx, Var::X);
    let y = MultiPoly::var(&ctx, Var::Y);
    let p = MultiPoly::var(&ctx, Var::P);
    let b = MultiPoly::from_i64(&ctx, beta);
    let coeffs = web.f.coeffs_in(Var::P);
    // F'(x,y,p) = sum_k A_k(x + beta y, y) p^k (1 + beta p)^(d-k)
    let shift = x.add(&b.mul(&y)?);
    let unit = MultiPoly::one(&ctx).add(&b.mul(&p)?);
    let mut out = MultiPoly::zero(&ctx);
    for (k, a) in coeffs.iter().enumerate() {
        let ak = a.substitute(&[(Var::X, shift.clone())])?;
        let term = ak
            .mul(&p.pow(k as u32)?)?
            .mul(&unit.pow(d - k as u32)?)?;
        out = out.add(&term);
    }
    make_web(&out)
}

// ---------------------------------------------------------------------------
// Slope spectrum along {y = 0}
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum SlopeEntry {
    /// A slope `p = phi(x)` rational over `K(x)`, of multiplicity `nu`.
    Rational { phi: RationalFunction, nu: u32 },
    /// A squarefree class of degree >= 2 in `p` over `K(x)`; its roots are
    /// slopes algebraic over `K(x)`, each of multiplicity `nu`.
    Algebraic { class: Vec<RationalFunction>, nu: u32 },
}

impl SlopeEntry {
    pub fn nu(&self) -> u32 {
        match self {
            SlopeEntry::Rational { nu, .. } | SlopeEntry::Algebraic { nu, .. } => *nu,
        }
    }

    pub fn weight(&self) -> u64 {
        match self {
            SlopeEntry::Rational { nu, .. } => *nu as u64,
            SlopeEntry::Algebraic { class, nu } => *nu as u64 * (class.len() as u64 - 1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SlopeSpectrum {
    pub entries: Vec<SlopeEntry>,
    /// Leading coefficient `a0(x)` of `F(x, 0, p)`.
    pub lead: RationalFunction,
    /// `deg_p F - deg_p F(x,0,p)`: positive when a slope sits at `p = infinity`.
    pub degree_drop: u32,
    pub web_degree: u32,
}

impl SlopeSpectrum {
    pub fn all_rational(&self) -> bool {
        self.entries
            .iter()
            .all(|e| matches!(e, SlopeEntry::Rational { .. }))
    }

    pub fn rational_slopes(&self) -> Vec<(RationalFunction, u32)> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                SlopeEntry::Rational { phi, nu } => Some((phi.clone(), *nu)),
                SlopeEntry::Algebraic { .. } => None,
            })
            .collect()
    }
}

/// Factor `F(x, 0, p)` over `K(x)`: squarefree split by multiplicity, then
/// exact extraction of the rational branches of each squarefree class.
pub fn slope_spectrum(web: &ImplicitWeb) -> Result<SlopeSpectrum> {
    let g = web.f.eval_var(Var::Y, &FieldScalar::zero(web.ctx()));
    if g.is_zero() {
        return Err(Error::invalid(
            "F(x, 0, p) vanishes identically: the component divides every coefficient",
        ));
    }
    let dp = g.degree_in(Var::P);
    let drop = web.degree - dp;
    let lifted: UPoly<RationalFunction> = UPoly::new(RationalFunction::lift_coeffs(&g, Var::P));
    let lead = lifted.lead().cloned().unwrap_or_else(|| RationalFunction::one(web.ctx()));
    let mut entries = Vec::new();
    if dp > 0 {
        let (_, parts) = lifted.squarefree_decomposition()?;
        for (h, nu) in parts {
            let (phis, residual) = extract_rational_branches(&h, web.ctx())?;
            for phi in phis {
                entries.push(SlopeEntry::Rational { phi, nu });
            }
            if residual.deg() > 0 {
                entries.push(SlopeEntry::Algebraic { class: residual.c.clone(), nu });
            }
        }
    }
    Ok(SlopeSpectrum { entries, lead, degree_drop: drop, web_degree: web.degree })
}

// ---------------------------------------------------------------------------
// Rational-branch extraction over K(x)
// ---------------------------------------------------------------------------
//
// A monic squarefree class h(p) over K(x) may hide several rational slopes
// (they share one multiplicity, so the squarefree split cannot separate
// them). They are recovered exactly: sample the class at a good rational
// point x0, locate the rational roots of the sampled polynomial (numeric
// roots + continued-fraction recognition, then exact verification), lift
// each root to a power-series branch by Newton iteration, reconstruct a
// rational function by Pade approximation, and verify the candidate by
// substitution. Verification and deflation are exact, so recognition
// failures can only cause a branch to stay in the algebraic residual.

fn extract_rational_branches(
    h: &UPoly<RationalFunction>,
    ctx: &Arc<FieldCtx>,
) -> Result<(Vec<RationalFunction>, UPoly<RationalFunction>)> {
    let deg = h.deg();
    if deg == 0 {
        return Ok((vec![], h.clone()));
    }
    if deg == 1 {
        // monic: p + c -> phi = -c
        let phi = h.c[0].neg();
        return Ok((vec![phi], UPoly::constant(h.c[0].one_like())));
    }
    // Clear denominators: H in K[x][p], coefficients dense in x.
    let hx = class_to_bivariate(h, ctx)?;
    let m = hx.iter().map(|c| c.deg()).max().unwrap_or(0);
    let order = 2 * m + 3;
    let x0 = choose_sample_point(&hx, ctx)?;
    let sampled = eval_x_coeffs(&hx, &x0);
    let candidates = rational_root_candidates(&sampled, ctx)?;
    let mut found: Vec<RationalFunction> = Vec::new();
    let mut residual = h.clone();
    for w in candidates {
        let w0 = FieldScalar::from_rat(ctx, w);
        if !sampled.eval(&w0).is_zero() {
            continue;
        }
        if let Some(phi) = lift_branch(&hx, &x0, &w0, m, order, ctx)? {
            if verify_branch(h, &phi) {
                found.push(phi);
            }
        }
    }
    for phi in &found {
        let lin = UPoly::new(vec![phi.neg(), RationalFunction::one(ctx)]);
        residual = residual.exact_div(&lin)?;
    }
    Ok((found, residual))
}

/// Clear denominators of a class, producing dense `K[x]` coefficients per
/// power of `p`.
fn class_to_bivariate(
    h: &UPoly<RationalFunction>,
    ctx: &Arc<FieldCtx>,
) -> Result<Vec<UPoly<FieldScalar>>> {
    let mut den = MultiPoly::one(ctx);
    for c in &h.c {
        let g = den.gcd(c.denominator())?;
        let extra = c
            .denominator()
            .exact_div(&g)
            .ok_or_else(|| Error::invalid("lcm failure"))?;
        den = den.mul(&extra)?;
    }
    let mut out = Vec::with_capacity(h.c.len());
    for c in &h.c {
        let factor = den
            .exact_div(c.denominator())
            .ok_or_else(|| Error::invalid("lcm failure"))?;
        let poly = c.numerator().mul(&factor)?;
        let coeffs = poly
            .to_univariate(Var::X)
            .ok_or_else(|| Error::invalid("class coefficients must involve x only"))?;
        out.push(UPoly::new(coeffs));
    }
    Ok(out)
}

/// A sample point where the class keeps full degree and stays squarefree.
fn choose_sample_point(hx: &[UPoly<FieldScalar>], ctx: &Arc<FieldCtx>) -> Result<FieldScalar> {
    for k in 0..64i64 {
        let cand = if k % 2 == 0 { k / 2 + 1 } else { -(k / 2 + 1) };
        let x0 = FieldScalar::from_i64(ctx, cand);
        let lead = hx.last().unwrap().eval(&x0);
        if lead.is_zero() {
            continue;
        }
        let sampled = eval_x_coeffs(hx, &x0);
        let g = sampled.gcd(&sampled.derivative())?;
        if g.deg() == 0 {
            return Ok(x0);
        }
    }
    Err(Error::invalid("no good sample point for branch extraction"))
}

fn eval_x_coeffs(hx: &[UPoly<FieldScalar>], x0: &FieldScalar) -> UPoly<FieldScalar> {
    UPoly::new(hx.iter().map(|c| c.eval(x0)).collect())
}

/// Locate candidate rational roots of a `K`-polynomial: specialize free
/// parameters, embed numerically, and recognize rationals. Exactness is
/// restored downstream by symbolic verification.
fn rational_root_candidates(
    f: &UPoly<FieldScalar>,
    ctx: &Arc<FieldCtx>,
) -> Result<Vec<Rat>> {
    const PREC: u32 = 192;
    if f.deg() == 0 {
        return Ok(vec![]);
    }
    // Specialize parameters deterministically; collisions at the special
    // point only ever hide candidates behind exact verification.
    let spec_ctx = FieldCtx::new(ctx.theta.clone(), Vec::new());
    let vals: Vec<QTheta> = (0..ctx.nparams())
        .map(|i| {
            QTheta::from_rat(
                &ctx.theta,
                Rat::new((17 + 10 * i as i64).into(), (7 + 2 * i as i64).into()),
            )
        })
        .collect();
    let mut spec = Vec::with_capacity(f.c.len());
    for c in &f.c {
        spec.push(c.specialize(&vals, &spec_ctx)?);
    }
    let spec = UPoly::new(spec);
    if spec.deg() == 0 {
        return Ok(vec![]);
    }
    let theta = numeric::theta_embedding(&spec_ctx, PREC)?;
    let roots = numeric::numeric_roots(&spec, &theta, PREC, 20240601)?;
    let mut out: Vec<Rat> = Vec::new();
    let imag_tol = BigFloat::pow2(-((PREC / 3) as i64), PREC);
    for r in roots {
        if r.value.im.abs().cmp(&imag_tol) == core::cmp::Ordering::Greater {
            continue;
        }
        if let Some(q) = numeric::recognize_rational(&r.value.re, 72) {
            if !out.contains(&q) {
                out.push(q);
            }
        }
    }
    Ok(out)
}

/// Newton-lift the branch through `(x0, w0)` as a power series in `t = x - x0`.
fn lift_branch(
    hx: &[UPoly<FieldScalar>],
    x0: &FieldScalar,
    w0: &FieldScalar,
    m: usize,
    order: usize,
    ctx: &Arc<FieldCtx>,
) -> Result<Option<RationalFunction>> {
    // Shift coefficients to series around x0.
    let shifted: Vec<UPoly<FieldScalar>> = hx.iter().map(|c| c.taylor_shift(x0)).collect();
    let eval_series = |coeffs: &[UPoly<FieldScalar>], phi: &UPoly<FieldScalar>, n: usize| {
        let mut acc = UPoly::zero();
        for c in coeffs.iter().rev() {
            acc = acc.mul_trunc(phi, n).add(&c.truncate(n));
        }
        acc
    };
    let deriv: Vec<UPoly<FieldScalar>> = shifted
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.scale(&FieldScalar::from_i64(ctx, k as i64)))
        .collect();
    // H_p(x0, w0) must be a unit (the sample point keeps the class
    // squarefree, so every root is simple). Each Newton step doubles the
    // number of correct series terms, starting from the constant term.
    let mut phi = UPoly::constant(w0.clone());
    let mut correct = 1usize;
    while correct < order {
        let n = (2 * correct).min(order);
        let hval = eval_series(&shifted, &phi, n);
        let hder = eval_series(&deriv, &phi, n);
        if hder.c.first().map(FieldElem::is_zero).unwrap_or(true) {
            return Ok(None);
        }
        let corr = hval.mul_trunc(&hder.series_inv(n)?, n);
        phi = phi.sub(&corr).truncate(n);
        correct = n;
    }
    // Pade reconstruction u/v with deg <= m from `order` series terms.
    let (u, v) = match pade(&phi, m, order) {
        Some(p) => p,
        None => return Ok(None),
    };
    // Back to the x coordinate: substitute t = x - x0.
    let neg_x0 = x0.neg();
    let u_x = u.taylor_shift(&neg_x0);
    let v_x = v.taylor_shift(&neg_x0);
    let to_poly = |p: &UPoly<FieldScalar>| MultiPoly::from_univariate(ctx, Var::X, &p.c);
    let phi_x = RationalFunction::new(to_poly(&u_x), to_poly(&v_x))?;
    Ok(Some(phi_x))
}

/// Pade approximant `u/v` with `deg u, deg v <= m` matching the series to
/// order `n`, via the extended Euclidean scheme on `(t^n, s)`.
fn pade(
    s: &UPoly<FieldScalar>,
    m: usize,
    n: usize,
) -> Option<(UPoly<FieldScalar>, UPoly<FieldScalar>)> {
    let sample = s.c.first()?;
    let tn = UPoly::constant(sample.one_like()).mul_xpow(n);
    let mut r0 = tn;
    let mut r1 = s.truncate(n);
    let mut v0: UPoly<FieldScalar> = UPoly::zero();
    let mut v1 = UPoly::constant(sample.one_like());
    while !r1.is_zero() && r1.deg() > m {
        let (q, r) = r0.div_rem(&r1).ok()?;
        let v = v0.sub(&q.mul(&v1));
        r0 = r1;
        r1 = r;
        v0 = v1;
        v1 = v;
    }
    if r1.is_zero() {
        // The series is a polynomial of degree <= m.
        return Some((r0.clone(), v0));
    }
    if v1.c.first().map(FieldElem::is_zero).unwrap_or(true) || v1.deg() > m {
        return None;
    }
    Some((r1, v1))
}

fn verify_branch(h: &UPoly<RationalFunction>, phi: &RationalFunction) -> bool {
    h.eval(phi).is_zero()
}

// ---------------------------------------------------------------------------
// Smoothness along {y = 0}
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct EntrySmoothness {
    pub nu: u32,
    /// `None` for simple slopes (automatically smooth through `F_p != 0`).
    pub partial_y: Option<RationalFunction>,
    pub smooth: bool,
    /// For a smooth multiple slope, the finitely many `x` where the
    /// witnessing partial degenerates (numerator of `F_y(x, 0, phi(x))`).
    pub vanishing_locus: Option<MultiPoly>,
}

#[derive(Clone, Debug)]
pub struct SmoothnessReport {
    pub smooth: bool,
    pub entries: Vec<EntrySmoothness>,
    pub spectrum: SlopeSpectrum,
}

/// Decide smoothness of the characteristic surface along `{y = 0}`.
///
/// Along a multiple slope both `F_x` and `F_p` vanish identically, so the
/// surface is smooth over generic points iff `F_y(x, 0, phi(x))` is not
/// identically zero (classes of algebraic slopes are tested modulo the
/// class). The caller must first clear a slope at `p = infinity` with
/// [`shear_fiber`]; that situation is reported as an error here.
pub fn smooth_along(web: &ImplicitWeb) -> Result<SmoothnessReport> {
    let spectrum = slope_spectrum(web)?;
    if spectrum.degree_drop > 0 {
        return Err(Error::invalid(
            "slope at p = infinity along the component; apply the fiber shear and retry",
        ));
    }
    let ctx = web.ctx();
    let fy = web.f.partial_derivative(Var::Y).eval_var(Var::Y, &FieldScalar::zero(ctx));
    let mut entries = Vec::new();
    let mut smooth = true;
    for e in &spectrum.entries {
        match e {
            SlopeEntry::Rational { phi, nu } => {
                if *nu == 1 {
                    entries.push(EntrySmoothness {
                        nu: 1,
                        partial_y: None,
                        smooth: true,
                        vanishing_locus: None,
                    });
                    continue;
                }
                let val = RationalFunction::eval_poly(&fy, Var::P, phi)?;
                let ok = !val.is_zero();
                smooth &= ok;
                entries.push(EntrySmoothness {
                    nu: *nu,
                    partial_y: Some(val.clone()),
                    smooth: ok,
                    vanishing_locus: if ok { Some(val.numerator().clone()) } else { None },
                });
            }
            SlopeEntry::Algebraic { class, nu } => {
                if *nu == 1 {
                    entries.push(EntrySmoothness {
                        nu: 1,
                        partial_y: None,
                        smooth: true,
                        vanishing_locus: None,
                    });
                    continue;
                }
                // F_y(x, 0, p) reduced modulo the class: smooth iff the
                // residue shares no branch with the class.
                let cls = UPoly::new(class.clone());
                let fy_lift = UPoly::new(RationalFunction::lift_coeffs(&fy, Var::P));
                let residue = fy_lift.rem(&cls)?;
                let g = if residue.is_zero() {
                    cls.clone()
                } else {
                    cls.gcd(&residue)?
                };
                let ok = g.deg() == 0;
                smooth &= ok;
                entries.push(EntrySmoothness { nu: *nu, partial_y: None, smooth: ok, vanishing_locus: None });
            }
        }
    }
    Ok(SmoothnessReport { smooth, entries, spectrum })
}

// ---------------------------------------------------------------------------
// The holomorphy criterion along a smooth component
// ---------------------------------------------------------------------------

/// Symbolic verdict: the two residual identities, the assembled simple-pole
/// part of `eta(W)` along the component, and the per-slope data.
#[derive(Clone, Debug)]
pub struct WebVerdict {
    pub holomorphic: bool,
    /// `sum (nu_a - 1) phi_a psi_a`
    pub sum_phi_psi: RationalFunction,
    /// `sum (nu_a - 1) d(psi_a)/dx`
    pub sum_dpsi: RationalFunction,
    /// `dx`-coefficient of the pole part `theta / y` of `eta(W)`.
    pub theta_dx: RationalFunction,
    /// `dy`-coefficient of the pole part `theta / y` of `eta(W)`.
    pub theta_dy: RationalFunction,
    /// `(phi_a, nu_a, psi_a)` with `psi` present for `nu >= 2`.
    pub slopes: Vec<(RationalFunction, u32, Option<RationalFunction>)>,
}

/// `psi` for one slope of the spectrum (`nu >= 2`), from the printed
/// formula.
pub fn psi_alpha(
    web_degree: u32,
    fy0: &MultiPoly,
    fpy0: &MultiPoly,
    slopes: &[(RationalFunction, u32)],
    alpha: usize,
) -> Result<RationalFunction> {
    let (phi_a, nu_a) = &slopes[alpha];
    let ctx = phi_a.ctx().clone();
    if *nu_a < 2 {
        return Err(Error::invalid("psi is defined for multiplicities >= 2"));
    }
    let fy_at = RationalFunction::eval_poly(fy0, Var::P, phi_a)?;
    if fy_at.is_zero() {
        return Err(Error::invalid(
            "F_y vanishes along the slope; the web is not smooth there",
        ));
    }
    let fpy_at = RationalFunction::eval_poly(fpy0, Var::P, phi_a)?;
    let ratio = fpy_at.div(&fy_at)?;
    let d = RationalFunction::constant(FieldScalar::from_i64(&ctx, web_degree as i64));
    let first = d.sub(&phi_a.mul(&ratio)?)?
        .scale(&FieldScalar::from_i64(&ctx, *nu_a as i64 - 2));
    let mut cross = RationalFunction::zero(&ctx);
    for (beta, (phi_b, nu_b)) in slopes.iter().enumerate() {
        if beta == alpha {
            continue;
        }
        let diff = phi_a.sub(phi_b)?;
        if diff.is_zero() {
            return Err(Error::invalid("coincident slopes in the spectrum"));
        }
        let term = phi_b
            .scale(&FieldScalar::from_i64(&ctx, *nu_b as i64))
            .div(&diff)?;
        cross = cross.add(&term)?;
    }
    let second = cross.scale(&FieldScalar::from_i64(&ctx, 2 * (*nu_a as i64 + 1)));
    Ok(first
        .sub(&second)?
        .scale(&FieldScalar::rational(&ctx, 1, *nu_a as i64)))
}

/// Full criterion along a normalized component `{y = 0}`.
///
/// Preconditions: the web is smooth along the component and the spectrum is
/// rational over `K(x)`; a slope at `p = infinity` is first removed by the
/// smallest working [`shear_fiber`]. The returned web/verdict pair refers to
/// the chart actually used.
pub fn theorem1_criterion(web: &ImplicitWeb) -> Result<(ImplicitWeb, WebVerdict)> {
    let mut work = web.clone();
    let mut spectrum = slope_spectrum(&work)?;
    if spectrum.degree_drop > 0 {
        let mut done = false;
        for beta in 1..64i64 {
            let cand = shear_fiber(&work, beta)?;
            let s = slope_spectrum(&cand)?;
            if s.degree_drop == 0 {
                work = cand;
                spectrum = s;
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::invalid("could not clear the slope at p = infinity"));
        }
    }
    let report = smooth_along(&work)?;
    if !report.smooth {
        return Err(Error::invalid(
            "the web is not smooth along the component; the criterion does not apply",
        ));
    }
    if !spectrum.all_rational() {
        return Err(Error::ExactUnsupported(String::from(
            "spectrum has slopes algebraic over K(x); use the dual-web pipeline or numeric mode",
        )));
    }
    let verdict = criterion_from_spectrum(&work, &spectrum)?;
    Ok((work, verdict))
}

fn criterion_from_spectrum(
    web: &ImplicitWeb,
    spectrum: &SlopeSpectrum,
) -> Result<WebVerdict> {
    let ctx = web.ctx().clone();
    let zero_y = FieldScalar::zero(&ctx);
    let fy0 = web.f.partial_derivative(Var::Y).eval_var(Var::Y, &zero_y);
    let fpy0 = fy0.partial_derivative(Var::P);
    let slopes = spectrum.rational_slopes();
    let mut sum_phi_psi = RationalFunction::zero(&ctx);
    let mut sum_dpsi = RationalFunction::zero(&ctx);
    let mut theta_dx = RationalFunction::zero(&ctx);
    let mut theta_dy = RationalFunction::zero(&ctx);
    let mut out_slopes = Vec::with_capacity(slopes.len());
    let sixth = FieldScalar::rational(&ctx, 1, 6);
    for (alpha, (phi, nu)) in slopes.iter().enumerate() {
        if *nu < 2 {
            out_slopes.push((phi.clone(), *nu, None));
            continue;
        }
        let psi = psi_alpha(web.degree, &fy0, &fpy0, &slopes, alpha)?;
        let w = FieldScalar::from_i64(&ctx, *nu as i64 - 1);
        sum_phi_psi = sum_phi_psi.add(&phi.mul(&psi)?.scale(&w))?;
        sum_dpsi = sum_dpsi.add(&psi.derivative(Var::X)?.scale(&w))?;
        // theta = (1/6) sum (nu-1) [ psi (dy - phi dx) + (nu-2) dy ]
        theta_dx = theta_dx.sub(&psi.mul(phi)?.scale(&w.mul(&sixth)))?;
        theta_dy = theta_dy.add(
            &psi.add(&RationalFunction::constant(FieldScalar::from_i64(
                &ctx,
                *nu as i64 - 2,
            )))?
            .scale(&w.mul(&sixth)),
        )?;
        out_slopes.push((phi.clone(), *nu, Some(psi)));
    }
    let holomorphic = sum_phi_psi.is_zero() && sum_dpsi.is_zero();
    Ok(WebVerdict {
        holomorphic,
        sum_phi_psi,
        sum_dpsi,
        theta_dx,
        theta_dy,
        slopes: out_slopes,
    })
}

/// The single-multiple-slope corollary: spectrum `(p - phi0)^nu * prod
/// simple`, holomorphic iff `phi0 = 0` or `psi = 0` with
/// `psi = (nu-2)(d - phi0 F_py/F_y) - 2(nu+1) sum phi_a/(phi0 - phi_a)`.
pub fn corollary_criterion(web: &ImplicitWeb) -> Result<(bool, RationalFunction)> {
    let spectrum = slope_spectrum(web)?;
    if spectrum.degree_drop > 0 {
        return Err(Error::invalid("clear the slope at infinity first"));
    }
    if !spectrum.all_rational() {
        return Err(Error::ExactUnsupported(String::from("rational spectrum required")));
    }
    let slopes = spectrum.rational_slopes();
    let multiples: Vec<usize> = slopes
        .iter()
        .enumerate()
        .filter(|(_, (_, nu))| *nu >= 2)
        .map(|(i, _)| i)
        .collect();
    if multiples.len() != 1 {
        return Err(Error::invalid(
            "corollary shape: exactly one multiple slope with all others simple",
        ));
    }
    let report = smooth_along(web)?;
    if !report.smooth {
        return Err(Error::invalid("web not smooth along the component"));
    }
    let ctx = web.ctx().clone();
    let a = multiples[0];
    let (phi0, nu) = &slopes[a];
    let zero_y = FieldScalar::zero(&ctx);
    let fy0 = web.f.partial_derivative(Var::Y).eval_var(Var::Y, &zero_y);
    let fpy0 = fy0.partial_derivative(Var::P);
    let fy_at = RationalFunction::eval_poly(&fy0, Var::P, phi0)?;
    let fpy_at = RationalFunction::eval_poly(&fpy0, Var::P, phi0)?;
    let ratio = fpy_at.div(&fy_at)?;
    let d = RationalFunction::constant(FieldScalar::from_i64(&ctx, web.degree as i64));
    let first = d
        .sub(&phi0.mul(&ratio)?)?
        .scale(&FieldScalar::from_i64(&ctx, *nu as i64 - 2));
    let mut cross = RationalFunction::zero(&ctx);
    for (b, (phi_b, _)) in slopes.iter().enumerate() {
        if b == a {
            continue;
        }
        cross = cross.add(&phi_b.div(&phi0.sub(phi_b)?)?)?;
    }
    let psi = first.sub(&cross.scale(&FieldScalar::from_i64(&ctx, 2 * (*nu as i64 + 1))))?;
    Ok((phi0.is_zero() || psi.is_zero(), psi))
}

/// Uniform-multiplicity shortcut. For `nu = 2` the curvature is always
/// holomorphic; for `nu >= 3` it is holomorphic iff
/// `sum phi_a (d - rho_a) = 0` and `sum rho_a' = 0` with
/// `rho_a = phi_a F_py/F_y (x, 0, phi_a)`.
pub fn remark23_criterion(web: &ImplicitWeb) -> Result<bool> {
    let spectrum = slope_spectrum(web)?;
    if spectrum.degree_drop > 0 {
        return Err(Error::invalid("clear the slope at infinity first"));
    }
    if !spectrum.all_rational() {
        return Err(Error::ExactUnsupported(String::from("rational spectrum required")));
    }
    let slopes = spectrum.rational_slopes();
    let nu0 = slopes.first().map(|(_, nu)| *nu).unwrap_or(1);
    if !slopes.iter().all(|(_, nu)| *nu == nu0) || nu0 < 2 {
        return Err(Error::invalid("uniform multiplicity >= 2 required"));
    }
    if nu0 == 2 {
        return Ok(true);
    }
    let ctx = web.ctx().clone();
    let zero_y = FieldScalar::zero(&ctx);
    let fy0 = web.f.partial_derivative(Var::Y).eval_var(Var::Y, &zero_y);
    let fpy0 = fy0.partial_derivative(Var::P);
    let d = RationalFunction::constant(FieldScalar::from_i64(&ctx, web.degree as i64));
    let mut s1 = RationalFunction::zero(&ctx);
    let mut s2 = RationalFunction::zero(&ctx);
    for (phi, _) in &slopes {
        let fy_at = RationalFunction::eval_poly(&fy0, Var::P, phi)?;
        if fy_at.is_zero() {
            return Err(Error::invalid("web not smooth along the component"));
        }
        let rho = phi.mul(&RationalFunction::eval_poly(&fpy0, Var::P, phi)?.div(&fy_at)?)?;
        s1 = s1.add(&phi.mul(&d.sub(&rho)?)?)?;
        s2 = s2.add(&rho.derivative(Var::X)?)?;
    }
    Ok(s1.is_zero() && s2.is_zero())
}

/// Direct barycenter-invariance route (the `nu = 2` specialization): the
/// component is invariant by the 2-web (`phi0 = 0`) or by the barycenter of
/// the residual web with respect to it (`sum phi_a/(phi0 - phi_a) = 0`).
/// Kept as an independent oracle for the corollary.
pub fn barycenter_criterion(
    phi0: &RationalFunction,
    simple: &[RationalFunction],
) -> Result<bool> {
    if phi0.is_zero() {
        return Ok(true);
    }
    let mut s = RationalFunction::zero(phi0.ctx());
    for phi in simple {
        s = s.add(&phi.div(&phi0.sub(phi)?)?)?;
    }
    Ok(s.is_zero())
}

// ---------------------------------------------------------------------------
// Fundamental form of completely decomposable webs
// ---------------------------------------------------------------------------

/// Fundamental form of the 3-web with slopes `lambda_1, lambda_2, lambda_3`
/// (1-forms `dy - lambda_i dx`):
/// `eta = sum over cyclic (i,j,k) of
///  [d_y(lambda_i lambda_j) - d_x lambda_k] /
///  [(lambda_i - lambda_k)(lambda_j - lambda_k)] * (dy - lambda_k dx)`.
pub fn eta3(slopes: &[RationalFunction; 3]) -> Result<OneForm> {
    let ctx = slopes[0].ctx().clone();
    let mut a = RationalFunction::zero(&ctx);
    let mut b = RationalFunction::zero(&ctx);
    for (i, j, k) in [(0usize, 1usize, 2usize), (2, 0, 1), (1, 2, 0)] {
        let li = &slopes[i];
        let lj = &slopes[j];
        let lk = &slopes[k];
        let dik = li.sub(lk)?;
        let djk = lj.sub(lk)?;
        if dik.is_zero() || djk.is_zero() {
            return Err(Error::invalid("coincident slopes define no 3-web"));
        }
        let num = li.mul(lj)?.derivative(Var::Y)?.sub(&lk.derivative(Var::X)?)?;
        let coef = num.div(&dik.mul(&djk)?)?;
        b = b.add(&coef)?;
        a = a.sub(&coef.mul(lk)?)?;
    }
    Ok(OneForm::new(a, b))
}

/// Fundamental form of a completely decomposable web: the sum of `eta3`
/// over all slope triples.
pub fn eta_full(slopes: &[RationalFunction]) -> Result<OneForm> {
    let d = slopes.len();
    if d < 3 {
        return Err(Error::invalid("a web needs at least 3 slopes"));
    }
    for i in 0..d {
        for j in i + 1..d {
            if slopes[i].sub(&slopes[j])?.is_zero() {
                return Err(Error::invalid("coincident slopes"));
            }
        }
    }
    let ctx = slopes[0].ctx().clone();
    let mut eta = OneForm::zero(&ctx);
    for i in 0..d {
        for j in i + 1..d {
            for k in j + 1..d {
                let t = eta3(&[slopes[i].clone(), slopes[j].clone(), slopes[k].clone()])?;
                eta = eta.add(&t)?;
            }
        }
    }
    Ok(eta)
}

/// Curvature of the web with the given fundamental form.
pub fn curvature(eta: &OneForm) -> Result<TwoForm> {
    exterior_derivative(eta)
}

/// Flatness of a completely decomposable web given by its slopes.
pub fn is_flat(slopes: &[RationalFunction]) -> Result<bool> {
    Ok(curvature(&eta_full(slopes)?)?.is_zero())
}

// ---------------------------------------------------------------------------
// Numeric embedding of a web fiber (used by numeric cross-checks)
// ---------------------------------------------------------------------------

/// Embed `F(x0, y0, p)` as a complex-coefficient polynomial in `p`.
pub fn embed_fiber(
    web: &ImplicitWeb,
    x0: &FieldScalar,
    y0: &FieldScalar,
    theta: &CBig,
    prec: u32,
) -> Result<Vec<CBig>> {
    let g = web.f.eval_var(Var::X, x0).eval_var(Var::Y, y0);
    let coeffs = g
        .to_univariate(Var::P)
        .ok_or_else(|| Error::invalid("fiber evaluation left spurious variables"))?;
    coeffs
        .iter()
        .map(|c| numeric::embed_scalar(c, theta, prec))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_poly;

    const XYP: &[Var] = &[Var::X, Var::Y, Var::P];

    fn ctx() -> Arc<FieldCtx> {
        FieldCtx::rational()
    }

    fn example_web_12(ctx: &Arc<FieldCtx>) -> ImplicitWeb {
        // (y^2 - x) p^2 + 2xp - x
        make_web(&parse_poly("(y^2 - x)*p^2 + 2*x*p - x", ctx, XYP).unwrap()).unwrap()
    }

    #[test]
    fn make_web_basics() {
        let c = ctx();
        let w = example_web_12(&c);
        assert_eq!(w.degree(), 2);
        assert!(!w.was_reduced());
        // (p - x)^2 reduces with a warning
        let w = make_web(&parse_poly("(p - x)^2", &c, XYP).unwrap()).unwrap();
        assert!(w.was_reduced());
        assert_eq!(w.degree(), 1);
        assert!(make_web(&MultiPoly::zero(&c)).is_err());
    }

    #[test]
    fn spectrum_splits_simple_rational_slopes() {
        let c = ctx();
        // (p - x)(p - 2x)(p - 3x): three simple rational slopes
        let w = make_web(&parse_poly("(p - x)*(p - 2*x)*(p - 3*x)", &c, XYP).unwrap()).unwrap();
        let s = slope_spectrum(&w).unwrap();
        assert_eq!(s.degree_drop, 0);
        assert!(s.all_rational());
        let mut slopes: Vec<String> = s
            .rational_slopes()
            .iter()
            .map(|(phi, _)| crate::expr::render_rational(phi))
            .collect();
        slopes.sort();
        assert_eq!(slopes, vec!["2*x", "3*x", "x"]);
    }

    #[test]
    fn spectrum_extracts_hidden_rational_pair() {
        let c = ctx();
        // (p - 1/x)^3 (p + 2/x)^3 style: same multiplicity, one Yun class
        let w = make_web(
            &parse_poly("(x*p - 1)^3*(x*p + 2)^3 + y*p", &c, XYP).unwrap(),
        )
        .unwrap();
        let s = slope_spectrum(&w).unwrap();
        let mut got: Vec<(String, u32)> = s
            .rational_slopes()
            .iter()
            .map(|(phi, nu)| (crate::expr::render_rational(phi), *nu))
            .collect();
        got.sort();
        assert_eq!(
            got,
            vec![("(-2)/(x)".into(), 3u32), ("(1)/(x)".into(), 3u32)]
        );
    }

    #[test]
    fn spectrum_keeps_algebraic_classes() {
        let c = ctx();
        // p^2 - x is irreducible over Q(x)
        let w = make_web(&parse_poly("p^2 - x + y", &c, XYP).unwrap()).unwrap();
        let s = slope_spectrum(&w).unwrap();
        assert_eq!(s.entries.len(), 1);
        assert!(matches!(s.entries[0], SlopeEntry::Algebraic { nu: 1, .. }));
    }

    #[test]
    fn smoothness_of_the_intro_example() {
        let c = ctx();
        let w = example_web_12(&c);
        // Along {y = 0}: F(x,0,p) = -x (p-1)^2, not smooth.
        let r = smooth_along(&w).unwrap();
        assert!(!r.smooth);
        // Along {x = 0}: smooth (after swap and fiber shear).
        let (swapped, mv) = normalize_component(&w, &Line::XConst(FieldScalar::zero(&c))).unwrap();
        assert_eq!(mv, ChartMove::SwapShift(FieldScalar::zero(&c)));
        let s = slope_spectrum(&swapped).unwrap();
        assert!(s.degree_drop > 0);
        let sheared = shear_fiber(&swapped, 1).unwrap();
        let r = smooth_along(&sheared).unwrap();
        assert!(r.smooth);
    }

    #[test]
    fn henaut_cubic_not_smooth() {
        let c = ctx();
        // kappa = 2, lambda = 1
        let f = parse_poly(
            "((x^2 - 1)*p + (x - 3)*y^2)*((x^2 - 1)*p + (x + 3)*y^2)*((x^2 - 1)*p - 2*x*y^2)",
            &c,
            XYP,
        )
        .unwrap();
        let w = make_web(&f).unwrap();
        let r = smooth_along(&w).unwrap();
        assert!(!r.smooth);
        assert_eq!(r.spectrum.rational_slopes().len(), 1);
        assert_eq!(r.spectrum.rational_slopes()[0].1, 3);
    }

    #[test]
    fn eta3_constant_slopes() {
        let c = ctx();
        let s = |n: i64| RationalFunction::constant(FieldScalar::from_i64(&c, n));
        let eta = eta3(&[s(0), s(1), s(2)]).unwrap();
        assert!(eta.is_zero());
        assert!(eta3(&[s(1), s(1), s(2)]).is_err());
    }

    #[test]
    fn eta3_golden_henaut_slopes() {
        // slopes of the kappa=2, lambda=1 cubic:
        // -(x-3)y^2/(x^2-1), -(x+3)y^2/(x^2-1), 2xy^2/(x^2-1)
        let c = ctx();
        let parse = |s: &str| crate::expr::parse_rational(s, &c, &[Var::X, Var::Y]).unwrap();
        let l1 = parse("(-(x - 3)*y^2)/(x^2 - 1)");
        let l2 = parse("(-(x + 3)*y^2)/(x^2 - 1)");
        let l3 = parse("(2*x*y^2)/(x^2 - 1)");
        let eta = eta3(&[l1, l2, l3]).unwrap();
        // In the polynomial gauge of the defining cubic (leading coefficient
        // a0 = (x^2-1)^3) the form gains d(a0)/a0 and matches the printed
        // value 14x/(3(x^2-1)) dx + (4/y - 1/(3y^2)) dy.
        let a0 = parse("(x^2 - 1)^3");
        let gauge = crate::forms::log_derivative(&a0).unwrap();
        let gauged = eta.add(&gauge).unwrap();
        let expect_a = parse("(14*x)/(3*(x^2 - 1))");
        let expect_b = parse("4/y - 1/(3*y^2)");
        assert_eq!(gauged.a, expect_a);
        assert_eq!(gauged.b, expect_b);
        // gauge terms are closed: both charts give vanishing curvature
        assert!(curvature(&eta).unwrap().is_zero());
        assert!(curvature(&gauged).unwrap().is_zero());
    }

    #[test]
    fn eta3_permutation_invariance() {
        let c = ctx();
        let parse = |s: &str| crate::expr::parse_rational(s, &c, &[Var::X, Var::Y]).unwrap();
        let l = [parse("x + y"), parse("x - y"), parse("x*y + 1")];
        let base = eta3(&l).unwrap();
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let eta = eta3(&[l[p[0]].clone(), l[p[1]].clone(), l[p[2]].clone()]).unwrap();
            assert_eq!(eta, base);
        }
    }

    #[test]
    fn theorem1_on_totally_invariant_component() {
        let c = ctx();
        // Totally invariant component: F = p^3 - y has spectrum p^3 and
        // F_y = -1, so it is smooth along {y = 0}.
        let w = make_web(&parse_poly("p^3 - y", &c, XYP).unwrap()).unwrap();
        let (_, v) = theorem1_criterion(&w).unwrap();
        assert!(v.holomorphic);
        assert!(v.sum_phi_psi.is_zero() && v.sum_dpsi.is_zero());
    }

    #[test]
    fn corollary_agrees_with_full_criterion() {
        let c = ctx();
        // one double slope x, simple slopes -x and 3x+1, deformed in y
        let w = make_web(
            &parse_poly("(p - x)^2*(p + x)*(p - 3*x - 1) + y*(p + 1)", &c, XYP).unwrap(),
        )
        .unwrap();
        let (_, v) = theorem1_criterion(&w).unwrap();
        let (cor, _) = corollary_criterion(&w).unwrap();
        assert_eq!(v.holomorphic, cor);
    }
}
