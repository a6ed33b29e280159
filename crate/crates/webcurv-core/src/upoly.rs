//! Dense univariate polynomial algorithms, generic over the coefficient
//! field.
//!
//! Instantiated with [`crate::FieldScalar`] for root classes over `K`, with
//! [`crate::RationalFunction`] for slope spectra over `K(x)`, and with the
//! software complex big-float for the numeric engine. Coefficients are stored
//! lowest degree first with no trailing zeros; the empty vector is zero.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::FieldElem;

#[derive(Clone, Debug, PartialEq)]
pub struct UPoly<F: FieldElem> {
    pub c: Vec<F>,
}

impl<F: FieldElem> UPoly<F> {
    pub fn new(mut c: Vec<F>) -> Self {
        while c.last().is_some_and(FieldElem::is_zero) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn zero() -> Self {
        UPoly { c: vec![] }
    }

    pub fn constant(v: F) -> Self {
        Self::new(vec![v])
    }

    /// The monomial `v - r` (handy for planting roots in tests).
    pub fn linear_root(r: &F) -> Self {
        UPoly { c: vec![r.neg(), r.one_like()] }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn lead(&self) -> Option<&F> {
        self.c.last()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.c.get(i);
            let b = o.c.get(i);
            out.push(match (a, b) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Self::new(out)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        UPoly { c: self.c.iter().map(FieldElem::neg).collect() }
    }

    pub fn scale(&self, k: &F) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        UPoly { c: self.c.iter().map(|a| a.mul(k)).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![self.c[0].zero_like(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self::new(out)
    }

    pub fn mul_xpow(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![self.c[0].zero_like(); k];
        c.extend(self.c.iter().cloned());
        UPoly { c }
    }

    pub fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return match self.c.first() {
                Some(s) => Self::constant(s.one_like()),
                None => Self::zero(), // 0^0 never queried in practice
            };
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return Self::zero();
        }
        let mut out = Vec::with_capacity(self.c.len() - 1);
        for (i, a) in self.c.iter().enumerate().skip(1) {
            out.push(a.mul(&a.from_i64_like(i as i64)));
        }
        Self::new(out)
    }

    pub fn eval(&self, at: &F) -> F {
        match self.c.last() {
            None => at.zero_like(),
            Some(last) => {
                let mut acc = last.clone();
                for a in self.c.iter().rev().skip(1) {
                    acc = acc.mul(at).add(a);
                }
                acc
            }
        }
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Result<Self> {
        match self.lead() {
            None => Ok(self.clone()),
            Some(l) => {
                let inv = l.inv()?;
                Ok(self.scale(&inv))
            }
        }
    }

    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let dl = d.lead().ok_or(Error::DivisionByZero)?;
        let dinv = dl.inv()?;
        let mut rem = self.clone();
        if rem.c.len() < d.c.len() {
            return Ok((Self::zero(), rem));
        }
        let mut quot = vec![dl.zero_like(); rem.c.len() - d.c.len() + 1];
        while rem.c.len() >= d.c.len() {
            let k = rem.c.len() - d.c.len();
            let q = rem.c.last().unwrap().mul(&dinv);
            for (j, b) in d.c.iter().enumerate() {
                rem.c[k + j] = rem.c[k + j].sub(&q.mul(b));
            }
            quot[k] = q;
            while rem.c.last().is_some_and(FieldElem::is_zero) {
                rem.c.pop();
            }
            if rem.is_zero() {
                break;
            }
        }
        Ok((Self::new(quot), rem))
    }

    pub fn rem(&self, d: &Self) -> Result<Self> {
        Ok(self.div_rem(d)?.1)
    }

    /// Exact division; errors when the remainder is nonzero.
    pub fn exact_div(&self, d: &Self) -> Result<Self> {
        let (q, r) = self.div_rem(d)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::invalid("polynomial division is not exact"))
        }
    }

    /// Monic gcd by the Euclidean algorithm; `gcd(0, 0) = 0`.
    pub fn gcd(&self, o: &Self) -> Result<Self> {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            // Normalizing each remainder keeps coefficient growth in check
            // over Q and over rational-function fields alike.
            let bm = b.monic()?;
            let r = a.rem(&bm)?;
            a = bm;
            b = r;
        }
        a.monic()
    }

    /// Extended gcd: returns `(g, s, t)` with `g = s*self + t*o`, `g` monic.
    pub fn extended_gcd(&self, o: &Self) -> Result<(Self, Self, Self)> {
        let mut r0 = self.clone();
        let mut r1 = o.clone();
        let sample = self
            .c
            .first()
            .or(o.c.first())
            .ok_or_else(|| Error::invalid("extended gcd of zero polynomials"))?;
        let mut s0 = Self::constant(sample.one_like());
        let mut s1 = Self::zero();
        let mut t0 = Self::zero();
        let mut t1 = Self::constant(sample.one_like());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1)?;
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
            t0 = t1;
            t1 = t;
        }
        let l = r0.lead().ok_or(Error::DivisionByZero)?.clone();
        let inv = l.inv()?;
        Ok((r0.scale(&inv), s0.scale(&inv), t0.scale(&inv)))
    }

    /// Inverse of `self` modulo `m`; fails with the offending gcd when the
    /// residue class is a zero divisor.
    pub fn inv_mod(&self, m: &Self) -> Result<Self> {
        let a = self.rem(m)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (g, s, _) = a.extended_gcd(m)?;
        if g.degree() != Some(0) {
            return Err(Error::ZeroDivisor(render_generic(&g)));
        }
        s.rem(m)
    }

    pub fn mul_mod(&self, o: &Self, m: &Self) -> Result<Self> {
        self.mul(o).rem(m)
    }

    /// Squarefree decomposition (Yun). Returns the leading unit and the
    /// pairwise-coprime monic squarefree factors with their multiplicities,
    /// in increasing multiplicity order.
    pub fn squarefree_decomposition(&self) -> Result<(F, Vec<(Self, u32)>)> {
        let lead = self
            .lead()
            .ok_or_else(|| Error::invalid("squarefree decomposition of zero"))?
            .clone();
        let f = self.monic()?;
        if f.deg() == 0 {
            return Ok((lead, vec![]));
        }
        let fp = f.derivative();
        let a = f.gcd(&fp)?;
        let mut b = f.exact_div(&a)?;
        let mut d = fp.exact_div(&a)?.sub(&b.derivative());
        let mut out = Vec::new();
        let mut i = 1u32;
        while b.deg() > 0 {
            let ai = b.gcd(&d)?;
            if ai.deg() > 0 {
                out.push((ai.clone(), i));
            }
            b = b.exact_div(&ai)?;
            let c = d.exact_div(&ai)?;
            d = c.sub(&b.derivative());
            i += 1;
        }
        Ok((lead, out))
    }

    /// Resultant of two polynomials over the field, by the Euclidean
    /// remainder sequence with leading-coefficient bookkeeping.
    pub fn resultant(&self, o: &Self) -> Result<F> {
        let sample = self
            .c
            .first()
            .or(o.c.first())
            .ok_or_else(|| Error::invalid("resultant of zero polynomials"))?;
        if self.is_zero() || o.is_zero() {
            return Ok(sample.zero_like());
        }
        let mut a = self.clone();
        let mut b = o.clone();
        let mut acc = sample.one_like();
        let mut sign_flip = false;
        loop {
            let db = match b.degree() {
                None => return Ok(sample.zero_like()),
                Some(0) => {
                    // res(a, const) = const^{deg a}
                    let mut p = sample.one_like();
                    for _ in 0..a.deg() {
                        p = p.mul(&b.c[0]);
                    }
                    let r = acc.mul(&p);
                    return Ok(if sign_flip { r.neg() } else { r });
                }
                Some(d) => d,
            };
            let da = a.deg();
            if da < db {
                core::mem::swap(&mut a, &mut b);
                if da % 2 == 1 && db % 2 == 1 {
                    sign_flip = !sign_flip;
                }
                continue;
            }
            let r = a.rem(&b)?;
            let dr = r.degree().map(|d| d as i64).unwrap_or(-1);
            // res(a,b) = (-1)^{da*db} lc(b)^{da - dr} res(b, r)
            if (da * db) % 2 == 1 {
                sign_flip = !sign_flip;
            }
            let lb = b.lead().unwrap().clone();
            for _ in 0..(da as i64 - dr) {
                acc = acc.mul(&lb);
            }
            a = b;
            b = r;
        }
    }

    /// Newton power sums `p_0 .. p_{count-1}` of the roots of a monic
    /// polynomial, straight from its coefficients.
    pub fn newton_power_sums(&self, count: usize) -> Result<Vec<F>> {
        let n = self.degree().ok_or_else(|| Error::invalid("power sums of zero"))?;
        let lead = self.lead().unwrap();
        if !lead.sub(&lead.one_like()).is_zero() {
            return Err(Error::invalid("power sums need a monic polynomial"));
        }
        let a = |j: usize| -> F {
            // coefficient of z^{n-j}
            if j <= n {
                self.c[n - j].clone()
            } else {
                lead.zero_like()
            }
        };
        let mut p: Vec<F> = Vec::with_capacity(count);
        p.push(lead.from_i64_like(n as i64));
        for k in 1..count {
            // p_k + sum_{j=1}^{k-1} a_j p_{k-j} + k a_k = 0
            let mut s = a(k).mul(&lead.from_i64_like(k as i64));
            for j in 1..k {
                s = s.add(&a(j).mul(&p[k - j]));
            }
            p.push(s.neg());
        }
        Ok(p)
    }

    /// Coefficients of `f(x0 + t)` as a polynomial in `t` (Taylor shift).
    pub fn taylor_shift(&self, x0: &F) -> Self {
        match self.c.last() {
            None => Self::zero(),
            Some(last) => {
                let mut acc = Self::constant(last.clone());
                for a in self.c.iter().rev().skip(1) {
                    // acc <- acc * (t + x0) + a
                    let shifted = acc.mul_xpow(1).add(&acc.scale(x0));
                    acc = shifted.add(&Self::constant(a.clone()));
                }
                acc
            }
        }
    }

    /// Truncate to degree `< n` (series order `n`).
    pub fn truncate(&self, n: usize) -> Self {
        Self::new(self.c.iter().take(n).cloned().collect())
    }

    /// Product truncated to order `n`.
    pub fn mul_trunc(&self, o: &Self, n: usize) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let len = (self.c.len() + o.c.len() - 1).min(n);
        let mut out = vec![self.c[0].zero_like(); len];
        for (i, a) in self.c.iter().enumerate() {
            if i >= n || a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        Self::new(out)
    }

    /// Multiplicative inverse as a power series to order `n`; requires a
    /// unit constant term.
    pub fn series_inv(&self, n: usize) -> Result<Self> {
        let c0 = self
            .c
            .first()
            .ok_or(Error::DivisionByZero)?;
        let c0_inv = c0.inv()?;
        let mut out = vec![c0.zero_like(); n];
        out[0] = c0_inv.clone();
        for k in 1..n {
            // c0 * out[k] + sum_{j=1..k} c_j out[k-j] = 0
            let mut s = c0.zero_like();
            for j in 1..=k.min(self.c.len() - 1) {
                s = s.add(&self.c[j].mul(&out[k - j]));
            }
            out[k] = s.neg().mul(&c0_inv);
        }
        Ok(Self::new(out))
    }

    /// `k`-th Hasse derivative: `D^(k) f = f^(k) / k!`, so that
    /// `f(z) = sum_k (D^(k) f)(r) (z - r)^k`.
    pub fn hasse_derivative(&self, k: u32) -> Self {
        let mut d = self.clone();
        for _ in 0..k {
            d = d.derivative();
        }
        if d.is_zero() {
            return d;
        }
        let sample = &d.c[0];
        let mut fact = sample.one_like();
        for i in 2..=k as i64 {
            fact = fact.mul(&sample.from_i64_like(i));
        }
        let inv = fact.inv().expect("factorial is invertible in characteristic zero");
        d.scale(&inv)
    }
}

fn render_generic<F: FieldElem>(p: &UPoly<F>) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    let _ = write!(s, "{:?}", p.c);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rat;
    use num_bigint::BigInt;

    fn q(n: i64) -> Rat {
        Rat::from_integer(BigInt::from(n))
    }

    fn poly(cs: &[i64]) -> UPoly<Rat> {
        UPoly::new(cs.iter().map(|&n| q(n)).collect())
    }

    #[test]
    fn gcd_basics() {
        // gcd(z^2 - 1, z - 1) = z - 1
        let g = poly(&[-1, 0, 1]).gcd(&poly(&[-1, 1])).unwrap();
        assert_eq!(g, poly(&[-1, 1]));
        // gcd(f, 0) = monic(f)
        let f = poly(&[2, 4]);
        assert_eq!(f.gcd(&UPoly::zero()).unwrap(), poly(&[1, 2]).monic().unwrap());
        // gcd(0, 0) = 0
        let z: UPoly<Rat> = UPoly::zero();
        assert!(z.gcd(&UPoly::zero()).unwrap().is_zero());
    }

    #[test]
    fn yun_squarefree() {
        // z^4 - 2 z^3 + z^2 = (z(z-1))^2
        let f = poly(&[0, 0, 1, -2, 1]);
        let (unit, parts) = f.squarefree_decomposition().unwrap();
        assert_eq!(unit, q(1));
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].1, 2);
        assert_eq!(parts[0].0, poly(&[0, -1, 1])); // z^2 - z
        // squarefree input -> single factor, multiplicity 1
        let g = poly(&[-1, 0, 1]);
        let (_, parts) = g.squarefree_decomposition().unwrap();
        assert_eq!(parts, alloc::vec![(poly(&[-1, 0, 1]), 1)]);
        // (z^2+1)^3
        let h = poly(&[1, 0, 1]).pow(3);
        let (_, parts) = h.squarefree_decomposition().unwrap();
        assert_eq!(parts, alloc::vec![(poly(&[1, 0, 1]), 3)]);
    }

    #[test]
    fn yun_reassembles() {
        // product over factors of factor^mult times unit equals the input
        let f = poly(&[0, 2, 0, 0, 1]).mul(&poly(&[1, 1]).pow(3)).scale(&q(5));
        let (unit, parts) = f.squarefree_decomposition().unwrap();
        let mut g = UPoly::constant(unit);
        for (m, e) in &parts {
            g = g.mul(&m.pow(*e));
        }
        assert_eq!(g, f);
    }

    #[test]
    fn resultant_values() {
        // res_z(z^2 - 3, z - 1) = 1 - 3 = -2 (evaluate z^2-3 at 1)
        let r = poly(&[-3, 0, 1]).resultant(&poly(&[-1, 1])).unwrap();
        assert_eq!(r, q(-2));
        // res(f, f) = 0 for nonconstant f
        let f = poly(&[1, 2, 1]);
        assert_eq!(f.resultant(&f).unwrap(), q(0));
        // Sylvester check: res(p^2 - x, 2p) in the pure-p world with x |-> 5:
        // res(p^2-5, 2p) = 4*(-5)*(-1)^? ... = -4*... directly: 2^2 * (0^2-5) = -20
        let r = poly(&[-5, 0, 1]).resultant(&poly(&[0, 2])).unwrap();
        assert_eq!(r, q(-20));
    }

    #[test]
    fn power_sums() {
        // z^2 - 5z + 6: roots 2,3 -> p0=2, p1=5, p2=13, p3=35
        let m = poly(&[6, -5, 1]);
        let p = m.newton_power_sums(4).unwrap();
        assert_eq!(p, alloc::vec![q(2), q(5), q(13), q(35)]);
    }

    #[test]
    fn hasse_expansion() {
        // f = z^3: D^2 f = 3z, D^3 f = 1
        let f = poly(&[0, 0, 0, 1]);
        assert_eq!(f.hasse_derivative(2), poly(&[0, 3]));
        assert_eq!(f.hasse_derivative(3), poly(&[1]));
    }

    #[test]
    fn inv_mod_works() {
        // inverse of z modulo z^2+1 is -z
        let m = poly(&[1, 0, 1]);
        let z = poly(&[0, 1]);
        let inv = z.inv_mod(&m).unwrap();
        assert_eq!(z.mul(&inv).rem(&m).unwrap(), poly(&[1]));
        // z - 1 is a zero divisor mod z^2 - 1
        let m2 = poly(&[-1, 0, 1]);
        assert!(matches!(
            poly(&[-1, 1]).inv_mod(&m2),
            Err(Error::ZeroDivisor(_))
        ));
    }
}
