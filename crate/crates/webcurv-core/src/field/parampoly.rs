//! Sparse polynomials in the transcendental parameters over `Q(theta)`.
//!
//! These are the numerators and denominators of [`crate::FieldScalar`]. The
//! parameter count is tiny in practice (the worked examples use at most two),
//! so the gcd here is a straightforward recursive primitive-PRS; it is what
//! keeps criterion values like `(lambda + mu - 2*lambda*mu)/(...)` in lowest
//! terms.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::qtheta::{QTheta, ThetaRing};
use crate::error::{Error, Result};

/// Exponent vector over the parameter list, ordered graded-lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PMono(pub Vec<u32>);

impl PMono {
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    fn mul(&self, o: &PMono) -> PMono {
        PMono(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn div(&self, o: &PMono) -> Option<PMono> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&o.0) {
            if a < b {
                return None;
            }
            out.push(a - b);
        }
        Some(PMono(out))
    }
}

impl Ord for PMono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for PMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse parameter polynomial; no zero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamPoly {
    /// Number of parameters (length of every exponent vector).
    pub nparams: usize,
    pub terms: BTreeMap<PMono, QTheta>,
}

impl ParamPoly {
    pub fn zero(nparams: usize) -> Self {
        ParamPoly { nparams, terms: BTreeMap::new() }
    }

    pub fn constant(nparams: usize, c: QTheta) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(PMono(vec![0; nparams]), c);
        }
        ParamPoly { nparams, terms }
    }

    /// The monomial `param_i`.
    pub fn param(nparams: usize, i: usize, ring: &ThetaRing) -> Self {
        let mut e = vec![0u32; nparams];
        e[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(PMono(e), QTheta::one(ring));
        ParamPoly { nparams, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.total() == 0)
    }

    pub fn as_constant(&self) -> Option<QTheta> {
        if self.terms.is_empty() {
            return None; // caller handles zero separately
        }
        if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<(&PMono, &QTheta)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(PMono::total).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    fn insert_add(&mut self, m: PMono, c: QTheta) {
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
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_add(m.clone(), c.neg());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ParamPoly {
            nparams: self.nparams,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }

    pub fn mul(&self, o: &Self, ring: &ThetaRing) -> Self {
        let mut out = ParamPoly::zero(self.nparams);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.insert_add(m1.mul(m2), c1.mul(c2, ring));
            }
        }
        out
    }

    pub fn scale(&self, c: &QTheta, ring: &ThetaRing) -> Self {
        if c.is_zero() {
            return ParamPoly::zero(self.nparams);
        }
        ParamPoly {
            nparams: self.nparams,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.mul(c, ring)))
                .collect(),
        }
    }

    /// Exact multivariate division; `None` when not divisible.
    pub fn exact_div(&self, o: &Self, ring: &ThetaRing) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        if let Some(c) = o.as_constant() {
            let inv = c.inv(ring).ok()?;
            return Some(self.scale(&inv, ring));
        }
        let (lm, lc) = o.leading().unwrap();
        let (lm, lc) = (lm.clone(), lc.clone());
        let lc_inv = lc.inv(ring).ok()?;
        let mut rem = self.clone();
        let mut quot = ParamPoly::zero(self.nparams);
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.div(&lm)?;
            let qc = rc.mul(&lc_inv, ring);
            let mut t = ParamPoly::zero(self.nparams);
            t.terms.insert(qm, qc);
            rem = rem.sub(&t.mul(o, ring));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    pub fn pow(&self, e: u32, ring: &ThetaRing) -> Self {
        let mut acc = ParamPoly::constant(self.nparams, QTheta::one(ring));
        for _ in 0..e {
            acc = acc.mul(self, ring);
        }
        acc
    }

    /// Substitute rational values for every parameter, landing in `Q(theta)`.
    pub fn eval_params(&self, vals: &[QTheta], ring: &ThetaRing) -> QTheta {
        let mut acc = QTheta::zero(ring);
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&vals[i].pow(e as u64, ring), ring);
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    /// View as a dense univariate polynomial in parameter `i`, with
    /// [`ParamPoly`] coefficients free of that parameter.
    fn coeffs_in(&self, i: usize) -> Vec<ParamPoly> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![ParamPoly::zero(self.nparams); d + 1];
        for (m, c) in &self.terms {
            let e = m.0[i] as usize;
            let mut m2 = m.clone();
            m2.0[i] = 0;
            out[e].insert_add(m2, c.clone());
        }
        out
    }

    fn from_coeffs_in(i: usize, coeffs: Vec<ParamPoly>, nparams: usize, ring: &ThetaRing) -> Self {
        let mut out = ParamPoly::zero(nparams);
        for (e, c) in coeffs.into_iter().enumerate() {
            for (m, v) in c.terms {
                let mut m2 = m;
                m2.0[i] += e as u32;
                out.insert_add(m2, v.clone());
            }
        }
        let _ = ring;
        out
    }

    /// Gcd, monic in the graded-lex leading coefficient.
    ///
    /// Recursive primitive PRS: pick the highest parameter actually present,
    /// split into content and primitive part over the remaining parameters,
    /// and run a pseudo-remainder sequence on the primitive parts.
    pub fn gcd(&self, o: &Self, ring: &ThetaRing) -> Result<Self> {
        let g = gcd_inner(self, o, ring)?;
        // Normalize: monic leading coefficient.
        if let Some((_, lc)) = g.leading() {
            let inv = lc.clone().inv(ring)?;
            Ok(g.scale(&inv, ring))
        } else {
            Ok(g)
        }
    }
}

fn main_param(a: &ParamPoly, b: &ParamPoly) -> Option<usize> {
    (0..a.nparams)
        .rev()
        .find(|&i| a.degree_in(i) > 0 || b.degree_in(i) > 0)
}

fn vec_trim(v: &mut Vec<ParamPoly>) {
    while v.last().is_some_and(ParamPoly::is_zero) {
        v.pop();
    }
}

/// Pseudo-remainder of dense coefficient vectors over the parameter ring.
fn pseudo_rem(
    a: &[ParamPoly],
    b: &[ParamPoly],
    nparams: usize,
    ring: &ThetaRing,
) -> Vec<ParamPoly> {
    let mut rem: Vec<ParamPoly> = a.to_vec();
    vec_trim(&mut rem);
    let lb = b.last().unwrap();
    while rem.len() >= b.len() {
        let k = rem.len() - b.len();
        let lr = rem.last().unwrap().clone();
        // rem <- lb*rem - lr * x^k * b
        for c in rem.iter_mut() {
            *c = c.mul(lb, ring);
        }
        for (j, bc) in b.iter().enumerate() {
            let s = lr.mul(bc, ring);
            rem[k + j] = rem[k + j].sub(&s);
        }
        vec_trim(&mut rem);
        if rem.is_empty() {
            break;
        }
        let _ = nparams;
    }
    rem
}

fn content(coeffs: &[ParamPoly], nparams: usize, ring: &ThetaRing) -> Result<ParamPoly> {
    let mut c = ParamPoly::zero(nparams);
    for q in coeffs {
        if q.is_zero() {
            continue;
        }
        c = if c.is_zero() { q.clone() } else { gcd_inner(&c, q, ring)? };
        if c.is_constant() {
            break;
        }
    }
    Ok(c)
}

fn gcd_inner(a: &ParamPoly, b: &ParamPoly, ring: &ThetaRing) -> Result<ParamPoly> {
    if a.is_zero() {
        return Ok(b.clone());
    }
    if b.is_zero() {
        return Ok(a.clone());
    }
    if a.is_constant() || b.is_constant() {
        return Ok(ParamPoly::constant(a.nparams, QTheta::one(ring)));
    }
    let v = match main_param(a, b) {
        Some(v) => v,
        None => return Ok(ParamPoly::constant(a.nparams, QTheta::one(ring))),
    };
    let ac = a.coeffs_in(v);
    let bc = b.coeffs_in(v);
    let a_cont = content(&ac, a.nparams, ring)?;
    let b_cont = content(&bc, a.nparams, ring)?;
    let g_cont = gcd_inner(&a_cont, &b_cont, ring)?;

    let div_all = |coeffs: &[ParamPoly], c: &ParamPoly| -> Result<Vec<ParamPoly>> {
        coeffs
            .iter()
            .map(|q| {
                if q.is_zero() {
                    Ok(q.clone())
                } else {
                    q.exact_div(c, ring).ok_or_else(|| {
                        Error::ZeroDivisor(alloc::string::String::from(
                            "content division failed in parameter gcd",
                        ))
                    })
                }
            })
            .collect()
    };

    let mut f = div_all(&ac, &a_cont)?;
    let mut g = div_all(&bc, &b_cont)?;
    if f.len() < g.len() {
        core::mem::swap(&mut f, &mut g);
    }
    // Primitive PRS.
    loop {
        let r = pseudo_rem(&f, &g, a.nparams, ring);
        if r.is_empty() {
            break;
        }
        let rc = content(&r, a.nparams, ring)?;
        let rp = div_all(&r, &rc)?;
        f = g;
        g = rp;
        if g.len() == 1 {
            // Coprime primitive parts.
            return Ok(g_cont);
        }
    }
    let gp = ParamPoly::from_coeffs_in(v, g, a.nparams, ring);
    Ok(gp.mul(&g_cont, ring))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> ThetaRing {
        ThetaRing::rational()
    }

    fn lam(r: &ThetaRing) -> ParamPoly {
        ParamPoly::param(2, 0, r)
    }

    fn mu(r: &ThetaRing) -> ParamPoly {
        ParamPoly::param(2, 1, r)
    }

    #[test]
    fn gcd_of_products() {
        let r = ring();
        let one = ParamPoly::constant(2, QTheta::one(&r));
        let a = lam(&r).sub(&one); // lambda - 1
        let b = mu(&r).sub(&one); // mu - 1
        let p = a.mul(&a, &r).mul(&b, &r);
        let q = a.mul(&b, &r).mul(&b, &r);
        let g = p.gcd(&q, &r).unwrap();
        assert_eq!(g, a.mul(&b, &r).neg().neg());
        assert!(p.exact_div(&g, &r).is_some());
        assert!(q.exact_div(&g, &r).is_some());
    }

    #[test]
    fn exact_div_detects_failure() {
        let r = ring();
        let one = ParamPoly::constant(2, QTheta::one(&r));
        let a = lam(&r).sub(&one);
        let b = mu(&r);
        assert!(a.exact_div(&b, &r).is_none());
    }
}
