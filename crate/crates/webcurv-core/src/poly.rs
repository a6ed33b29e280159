//! Sparse multivariate polynomials over the coefficient field.
//!
//! The variable universe is fixed: `x, y, p` for implicit webs, `z` for the
//! direction line of a rational map, `q` for the dual chart. Monomials are
//! ordered graded-lexicographically, which fixes leading terms, canonical
//! rendering and the denominator normalization of rational functions.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::field::{ctx_compatible, FieldCtx, FieldScalar};

/// Total-degree cap for products, powers and substitutions. The largest
/// legitimate objects here are the degree-60 Klein forms and their
/// conjugates; anything past the cap is a runaway computation.
pub const DEGREE_CAP: u64 = 1_000_000;

pub const NVARS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    X = 0,
    Y = 1,
    P = 2,
    Z = 3,
    Q = 4,
}

impl Var {
    pub const ALL: [Var; NVARS] = [Var::X, Var::Y, Var::P, Var::Z, Var::Q];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> char {
        match self {
            Var::X => 'x',
            Var::Y => 'y',
            Var::P => 'p',
            Var::Z => 'z',
            Var::Q => 'q',
        }
    }

    pub fn from_letter(c: char) -> Option<Var> {
        match c {
            'x' => Some(Var::X),
            'y' => Some(Var::Y),
            'p' => Some(Var::P),
            'z' => Some(Var::Z),
            'q' => Some(Var::Q),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Exponent vector; `Ord` is graded-lex (total degree first, then lex with
/// `x > y > p > z > q`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mono(pub [u32; NVARS]);

impl Mono {
    pub const ONE: Mono = Mono([0; NVARS]);

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn of_var(v: Var, e: u32) -> Mono {
        let mut m = [0u32; NVARS];
        m[v.index()] = e;
        Mono(m)
    }

    fn mul(&self, o: &Mono) -> Mono {
        let mut m = [0u32; NVARS];
        for i in 0..NVARS {
            m[i] = self.0[i] + o.0[i];
        }
        Mono(m)
    }

    fn div(&self, o: &Mono) -> Option<Mono> {
        let mut m = [0u32; NVARS];
        for i in 0..NVARS {
            m[i] = self.0[i].checked_sub(o.0[i])?;
        }
        Some(Mono(m))
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial. Invariant: no stored coefficient is zero.
#[derive(Clone, Debug)]
pub struct MultiPoly {
    ctx: Arc<FieldCtx>,
    pub terms: BTreeMap<Mono, FieldScalar>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for MultiPoly {}

impl MultiPoly {
    pub fn zero(ctx: &Arc<FieldCtx>) -> Self {
        MultiPoly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ctx: &Arc<FieldCtx>) -> Self {
        Self::constant(FieldScalar::one(ctx))
    }

    pub fn constant(c: FieldScalar) -> Self {
        let ctx = c.ctx().clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::ONE, c);
        }
        MultiPoly { ctx, terms }
    }

    pub fn var(ctx: &Arc<FieldCtx>, v: Var) -> Self {
        Self::monomial(FieldScalar::one(ctx), Mono::of_var(v, 1))
    }

    pub fn monomial(c: FieldScalar, m: Mono) -> Self {
        let ctx = c.ctx().clone();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { ctx, terms }
    }

    pub fn from_i64(ctx: &Arc<FieldCtx>, n: i64) -> Self {
        Self::constant(FieldScalar::from_i64(ctx, n))
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.total() == 0)
    }

    pub fn as_constant(&self) -> Option<FieldScalar> {
        if self.is_zero() {
            return Some(FieldScalar::zero(&self.ctx));
        }
        if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(Mono::total).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.0[v.index()]).max().unwrap_or(0)
    }

    pub fn uses_var(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.0[v.index()] > 0)
    }

    /// The set of variables occurring with positive exponent.
    pub fn vars(&self) -> Vec<Var> {
        Var::ALL
            .into_iter()
            .filter(|&v| self.uses_var(v))
            .collect()
    }

    pub fn leading(&self) -> Option<(&Mono, &FieldScalar)> {
        self.terms.iter().next_back()
    }

    fn insert_add(&mut self, m: Mono, c: FieldScalar) {
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert!(ctx_compatible(&self.ctx, &o.ctx));
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_add(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_add(*m, c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        debug_assert!(ctx_compatible(&self.ctx, &o.ctx));
        let bound = self.total_degree() + o.total_degree();
        if bound > DEGREE_CAP {
            return Err(Error::DegreeCap { cap: DEGREE_CAP, attempted: bound });
        }
        let mut out = MultiPoly::zero(&self.ctx);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.insert_add(m1.mul(m2), c1.mul(c2));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &FieldScalar) -> Self {
        if c.is_zero() {
            return MultiPoly::zero(&self.ctx);
        }
        MultiPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, v)| (*m, v.mul(c))).collect(),
        }
    }

    pub fn mul_var_pow(&self, v: Var, e: u32) -> Self {
        MultiPoly {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.mul(&Mono::of_var(v, e)), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let bound = self.total_degree() * e as u64;
        if bound > DEGREE_CAP {
            return Err(Error::DegreeCap { cap: DEGREE_CAP, attempted: bound });
        }
        let mut acc = MultiPoly::one(&self.ctx);
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn partial_derivative(&self, v: Var) -> Self {
        let i = v.index();
        let mut out = MultiPoly::zero(&self.ctx);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = *m;
            m2.0[i] = e - 1;
            out.insert_add(m2, c.mul(&FieldScalar::from_i64(&self.ctx, e as i64)));
        }
        out
    }

    /// Dense coefficient list in `v`: `self = sum coeffs[k] * v^k`.
    pub fn coeffs_in(&self, v: Var) -> Vec<MultiPoly> {
        let i = v.index();
        let d = self.degree_in(v) as usize;
        let mut out = vec![MultiPoly::zero(&self.ctx); d + 1];
        for (m, c) in &self.terms {
            let e = m.0[i] as usize;
            let mut m2 = *m;
            m2.0[i] = 0;
            out[e].insert_add(m2, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(
        ctx: &Arc<FieldCtx>,
        v: Var,
        coeffs: &[MultiPoly],
    ) -> Self {
        let i = v.index();
        let mut out = MultiPoly::zero(ctx);
        for (e, c) in coeffs.iter().enumerate() {
            for (m, val) in &c.terms {
                let mut m2 = *m;
                m2.0[i] += e as u32;
                out.insert_add(m2, val.clone());
            }
        }
        out
    }

    /// Coefficient of `v^k` (a polynomial in the other variables).
    pub fn coeff_of(&self, v: Var, k: u32) -> Self {
        let i = v.index();
        let mut out = MultiPoly::zero(&self.ctx);
        for (m, c) in &self.terms {
            if m.0[i] == k {
                let mut m2 = *m;
                m2.0[i] = 0;
                out.insert_add(m2, c.clone());
            }
        }
        out
    }

    /// Leading coefficient as a polynomial in the remaining variables.
    pub fn leading_coeff_in(&self, v: Var) -> Self {
        self.coeff_of(v, self.degree_in(v))
    }

    /// Dense scalar coefficients when the polynomial involves only `v`.
    pub fn to_univariate(&self, v: Var) -> Option<Vec<FieldScalar>> {
        let i = v.index();
        for m in self.terms.keys() {
            if m.total() != m.0[i] as u64 {
                return None;
            }
        }
        let d = self.degree_in(v) as usize;
        let mut out = vec![FieldScalar::zero(&self.ctx); d + 1];
        for (m, c) in &self.terms {
            out[m.0[i] as usize] = c.clone();
        }
        Some(out)
    }

    pub fn from_univariate(ctx: &Arc<FieldCtx>, v: Var, coeffs: &[FieldScalar]) -> Self {
        let mut out = MultiPoly::zero(ctx);
        for (e, c) in coeffs.iter().enumerate() {
            out.insert_add(Mono::of_var(v, e as u32), c.clone());
        }
        out
    }

    /// Simultaneous substitution of polynomials for variables.
    pub fn substitute(&self, map: &[(Var, MultiPoly)]) -> Result<Self> {
        // Power caches, one per substituted variable.
        let mut caches: BTreeMap<usize, Vec<MultiPoly>> = BTreeMap::new();
        for (v, g) in map {
            caches.insert(v.index(), vec![MultiPoly::one(&self.ctx), g.clone()]);
        }
        let power = |i: usize, e: u32, cache: &mut BTreeMap<usize, Vec<MultiPoly>>| -> Result<MultiPoly> {
            let c = cache.get_mut(&i).expect("cached substitution variable");
            while c.len() <= e as usize {
                let next = c.last().unwrap().mul(&c[1])?;
                c.push(next);
            }
            Ok(c[e as usize].clone())
        };
        let mut out = MultiPoly::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut term = MultiPoly::constant(c.clone());
            for i in 0..NVARS {
                let e = m.0[i];
                if e == 0 {
                    continue;
                }
                if caches.contains_key(&i) {
                    let p = power(i, e, &mut caches)?;
                    term = term.mul(&p)?;
                } else {
                    term = term.mul_var_pow(Var::ALL[i], e);
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Substitute a scalar for one variable.
    pub fn eval_var(&self, v: Var, value: &FieldScalar) -> Self {
        let coeffs = self.coeffs_in(v);
        let mut acc = MultiPoly::zero(&self.ctx);
        for c in coeffs.into_iter().rev() {
            acc = acc.scale(value).add(&c);
        }
        acc
    }

    /// Exact division; `None` when `o` does not divide `self`.
    pub fn exact_div(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        let (lm, lc) = o.leading().unwrap();
        let (lm, lc) = (*lm, lc.clone());
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero(&self.ctx);
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.div(&lm)?;
            let qc = rc.div(&lc).ok()?;
            let t = MultiPoly::monomial(qc, qm);
            let prod = t.mul(o).ok()?;
            rem = rem.sub(&prod);
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Divide by the leading coefficient, making the graded-lex leading
    /// term 1.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some((_, lc)) => {
                let inv = lc.inv().expect("nonzero leading coefficient");
                self.scale(&inv)
            }
        }
    }

    /// Apply a scalar map to every coefficient (parameter specialization).
    pub fn map_coeffs<F>(&self, ctx: &Arc<FieldCtx>, f: F) -> Result<Self>
    where
        F: Fn(&FieldScalar) -> Result<FieldScalar>,
    {
        let mut out = MultiPoly::zero(ctx);
        for (m, c) in &self.terms {
            out.insert_add(*m, f(c)?);
        }
        Ok(out)
    }

    /// Max coefficient bit size (telemetry for blowup guards).
    pub fn bit_size(&self) -> u64 {
        self.terms.values().map(FieldScalar::bit_size).max().unwrap_or(0)
    }

    /// Multivariate gcd by recursive primitive pseudo-remainder sequences,
    /// monic under graded-lex.
    pub fn gcd(&self, o: &Self) -> Result<Self> {
        let g = gcd_inner(self, o)?;
        Ok(g.monic())
    }

    /// Gcd of the coefficients with respect to `v`.
    pub fn content_in(&self, v: Var) -> Result<Self> {
        vec_content(&self.coeffs_in(v))
    }

    /// `self` divided by its `v`-content.
    pub fn primitive_part_in(&self, v: Var) -> Result<Self> {
        let c = self.content_in(v)?;
        self.exact_div(&c)
            .ok_or_else(|| Error::invalid("content does not divide the polynomial"))
    }

    /// Squarefree part: `self / gcd(self, all partial derivatives)`.
    pub fn squarefree_part(&self) -> Result<Self> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let mut g = self.clone();
        for v in self.vars() {
            g = g.gcd(&self.partial_derivative(v))?;
            if g.is_constant() {
                break;
            }
        }
        if g.is_constant() {
            return Ok(self.monic());
        }
        self.exact_div(&g)
            .map(|q| q.monic())
            .ok_or_else(|| Error::invalid("squarefree part division failed"))
    }

    /// Equal up to a nonzero scalar factor.
    pub fn eq_up_to_unit(&self, o: &Self) -> bool {
        if self.is_zero() || o.is_zero() {
            return self.is_zero() && o.is_zero();
        }
        self.monic() == o.monic()
    }
}

fn main_var(a: &MultiPoly, b: &MultiPoly) -> Option<Var> {
    Var::ALL
        .into_iter()
        .rev()
        .find(|&v| a.degree_in(v) > 0 || b.degree_in(v) > 0)
}

fn vec_trim(v: &mut Vec<MultiPoly>) {
    while v.last().is_some_and(MultiPoly::is_zero) {
        v.pop();
    }
}

fn pseudo_rem(a: &[MultiPoly], b: &[MultiPoly]) -> Result<Vec<MultiPoly>> {
    let mut rem: Vec<MultiPoly> = a.to_vec();
    vec_trim(&mut rem);
    let lb = b.last().unwrap();
    while rem.len() >= b.len() {
        let k = rem.len() - b.len();
        let lr = rem.last().unwrap().clone();
        for c in rem.iter_mut() {
            *c = c.mul(lb)?;
        }
        for (j, bc) in b.iter().enumerate() {
            let s = lr.mul(bc)?;
            rem[k + j] = rem[k + j].sub(&s);
        }
        vec_trim(&mut rem);
        if rem.is_empty() {
            break;
        }
    }
    Ok(rem)
}

fn vec_content(coeffs: &[MultiPoly]) -> Result<MultiPoly> {
    let mut c: Option<MultiPoly> = None;
    for q in coeffs {
        if q.is_zero() {
            continue;
        }
        c = Some(match c {
            None => q.clone(),
            Some(g) => gcd_inner(&g, q)?,
        });
        if c.as_ref().is_some_and(MultiPoly::is_constant) {
            break;
        }
    }
    c.ok_or_else(|| Error::invalid("content of zero polynomial"))
}

fn div_all(coeffs: &[MultiPoly], c: &MultiPoly) -> Result<Vec<MultiPoly>> {
    coeffs
        .iter()
        .map(|q| {
            if q.is_zero() {
                Ok(q.clone())
            } else {
                q.exact_div(c)
                    .ok_or_else(|| Error::invalid("content division failed in gcd"))
            }
        })
        .collect()
}

fn gcd_inner(a: &MultiPoly, b: &MultiPoly) -> Result<MultiPoly> {
    if a.is_zero() {
        return Ok(b.clone());
    }
    if b.is_zero() {
        return Ok(a.clone());
    }
    if a.is_constant() || b.is_constant() {
        return Ok(MultiPoly::one(a.ctx()));
    }
    let v = match main_var(a, b) {
        Some(v) => v,
        None => return Ok(MultiPoly::one(a.ctx())),
    };
    let ac = a.coeffs_in(v);
    let bc = b.coeffs_in(v);
    let a_cont = vec_content(&ac)?;
    let b_cont = vec_content(&bc)?;
    let g_cont = gcd_inner(&a_cont, &b_cont)?;

    let mut f = div_all(&ac, &a_cont)?;
    let mut g = div_all(&bc, &b_cont)?;
    if f.len() < g.len() {
        core::mem::swap(&mut f, &mut g);
    }
    loop {
        let r = pseudo_rem(&f, &g)?;
        if r.is_empty() {
            break;
        }
        if r.len() == 1 {
            return Ok(g_cont);
        }
        let rc = vec_content(&r)?;
        let rp = div_all(&r, &rc)?;
        f = g;
        g = rp;
    }
    let ctx = a.ctx().clone();
    let gp = MultiPoly::from_coeffs_in(&ctx, v, &g);
    gp.mul(&g_cont)
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::expr::render_poly(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<FieldCtx> {
        FieldCtx::rational()
    }

    fn x(c: &Arc<FieldCtx>) -> MultiPoly {
        MultiPoly::var(c, Var::X)
    }

    fn y(c: &Arc<FieldCtx>) -> MultiPoly {
        MultiPoly::var(c, Var::Y)
    }

    #[test]
    fn product_identity() {
        let c = ctx();
        let lhs = x(&c).add(&y(&c)).mul(&x(&c).sub(&y(&c))).unwrap();
        let rhs = x(&c).pow(2).unwrap().sub(&y(&c).pow(2).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitute_y_by_px_minus_q() {
        let c = ctx();
        let px_minus_q = MultiPoly::var(&c, Var::P)
            .mul(&x(&c))
            .unwrap()
            .sub(&MultiPoly::var(&c, Var::Q));
        let f = y(&c).pow(3).unwrap();
        let g = f.substitute(&[(Var::Y, px_minus_q.clone())]).unwrap();
        assert_eq!(g, px_minus_q.pow(3).unwrap());
    }

    #[test]
    fn binomial_coefficient() {
        // coefficient of x^5 in (x+1)^10 is 252
        let c = ctx();
        let f = x(&c).add(&MultiPoly::one(&c)).pow(10).unwrap();
        let coeff = f.coeff_of(Var::X, 5).as_constant().unwrap();
        assert_eq!(coeff, FieldScalar::from_i64(&c, 252));
    }

    #[test]
    fn partial_derivatives() {
        let c = ctx();
        // d/dx (x^2 y) = 2xy
        let f = x(&c).pow(2).unwrap().mul(&y(&c)).unwrap();
        let fx = f.partial_derivative(Var::X);
        let expect = x(&c).mul(&y(&c)).unwrap().scale(&FieldScalar::from_i64(&c, 2));
        assert_eq!(fx, expect);
        // d/dy of a constant is 0
        assert!(MultiPoly::from_i64(&c, 7).partial_derivative(Var::Y).is_zero());
        // d/dp of (y^2-x)p^2 + 2xp - x = 2(y^2-x)p + 2x
        let p = MultiPoly::var(&c, Var::P);
        let f = y(&c)
            .pow(2)
            .unwrap()
            .sub(&x(&c))
            .mul(&p.pow(2).unwrap())
            .unwrap()
            .add(&x(&c).mul(&p).unwrap().scale(&FieldScalar::from_i64(&c, 2)))
            .sub(&x(&c));
        let fp = f.partial_derivative(Var::P);
        let expect = y(&c)
            .pow(2)
            .unwrap()
            .sub(&x(&c))
            .scale(&FieldScalar::from_i64(&c, 2))
            .mul(&p)
            .unwrap()
            .add(&x(&c).scale(&FieldScalar::from_i64(&c, 2)));
        assert_eq!(fp, expect);
    }

    #[test]
    fn exact_division_and_gcd() {
        let c = ctx();
        let f = x(&c).add(&y(&c)).pow(3).unwrap();
        let g = x(&c).add(&y(&c)).pow(2).unwrap();
        let q = f.exact_div(&g).unwrap();
        assert_eq!(q, x(&c).add(&y(&c)));
        let h = f
            .mul(&x(&c))
            .unwrap()
            .gcd(&g.mul(&y(&c)).unwrap())
            .unwrap();
        assert_eq!(h, g.monic());
        assert!(x(&c).exact_div(&y(&c)).is_none());
    }

    #[test]
    fn squarefree_part_of_product() {
        let c = ctx();
        let f = x(&c)
            .pow(2)
            .unwrap()
            .mul(&y(&c).pow(3).unwrap())
            .unwrap();
        let sf = f.squarefree_part().unwrap();
        assert_eq!(sf, x(&c).mul(&y(&c)).unwrap());
    }

    #[test]
    fn degree_cap_enforced() {
        let c = ctx();
        let f = x(&c).pow(1000).unwrap();
        let mut g = f.clone();
        // 1000 -> 10^6 is fine, one more multiplication overflows the cap
        for _ in 0..999 {
            g = g.mul(&f).unwrap();
        }
        assert!(matches!(
            g.mul(&f),
            Err(Error::DegreeCap { .. })
        ));
    }
}
