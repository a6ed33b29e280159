//! Rational functions: fractions of [`MultiPoly`] kept in lowest terms with
//! a monic (graded-lex) denominator, so symbolic identities like the
//! curvature criterion sums can be decided by structural equality against
//! zero.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem, FieldScalar};
use crate::poly::{MultiPoly, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    num: MultiPoly,
    den: MultiPoly,
}

impl RationalFunction {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut rf = RationalFunction { num, den };
        rf.reduce()?;
        Ok(rf)
    }

    pub fn from_poly(num: MultiPoly) -> Self {
        let one = MultiPoly::one(num.ctx());
        RationalFunction { num, den: one }
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> Self {
        Self::from_poly(MultiPoly::zero(ctx))
    }

    pub fn one(ctx: &Arc<FieldCtx>) -> Self {
        Self::from_poly(MultiPoly::one(ctx))
    }

    pub fn constant(c: FieldScalar) -> Self {
        Self::from_poly(MultiPoly::constant(c))
    }

    pub fn var(ctx: &Arc<FieldCtx>, v: Var) -> Self {
        Self::from_poly(MultiPoly::var(ctx, v))
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        self.num.ctx()
    }

    pub fn numerator(&self) -> &MultiPoly {
        &self.num
    }

    pub fn denominator(&self) -> &MultiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<FieldScalar> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        n.div(&d).ok()
    }

    fn reduce(&mut self) -> Result<()> {
        if self.num.is_zero() {
            self.den = MultiPoly::one(self.num.ctx());
            return Ok(());
        }
        if !self.den.is_constant() {
            let g = self.num.gcd(&self.den)?;
            if !g.is_constant() {
                self.num = self
                    .num
                    .exact_div(&g)
                    .ok_or_else(|| Error::invalid("gcd does not divide numerator"))?;
                self.den = self
                    .den
                    .exact_div(&g)
                    .ok_or_else(|| Error::invalid("gcd does not divide denominator"))?;
            }
        }
        let lc = self.den.leading().expect("nonzero denominator").1.clone();
        let inv = lc.inv()?;
        self.num = self.num.scale(&inv);
        self.den = self.den.scale(&inv);
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let num = self
            .num
            .mul(&o.den)?
            .add(&o.num.mul(&self.den)?);
        let den = self.den.mul(&o.den)?;
        Self::new(num, den)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Self::new(self.num.mul(&o.num)?, self.den.mul(&o.den)?)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.mul(&o.inv()?)
    }

    pub fn scale(&self, c: &FieldScalar) -> Self {
        RationalFunction { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        Ok(RationalFunction {
            num: self.num.pow(e)?,
            den: self.den.pow(e)?,
        })
    }

    /// Formal partial derivative by the quotient rule.
    pub fn derivative(&self, v: Var) -> Result<Self> {
        let n = self.num.partial_derivative(v).mul(&self.den)?;
        let d = self.num.mul(&self.den.partial_derivative(v))?;
        Self::new(n.sub(&d), self.den.mul(&self.den)?)
    }

    /// Substitute a rational function for a variable of a polynomial.
    pub fn eval_poly(f: &MultiPoly, v: Var, at: &RationalFunction) -> Result<Self> {
        let coeffs = f.coeffs_in(v);
        let mut acc = Self::zero(f.ctx());
        for c in coeffs.into_iter().rev() {
            acc = acc.mul(at)?.add(&Self::from_poly(c))?;
        }
        Ok(acc)
    }

    /// Substitute rational functions for variables of `self`.
    pub fn substitute(&self, map: &[(Var, RationalFunction)]) -> Result<Self> {
        let subst = |p: &MultiPoly| -> Result<RationalFunction> {
            let mut acc = Self::from_poly(p.clone());
            // Substitute one variable at a time; callers only use disjoint
            // target/source variable sets here.
            for (v, r) in map {
                let mut num_acc = Self::zero(p.ctx());
                let coeffs = acc.num.coeffs_in(*v);
                for c in coeffs.into_iter().rev() {
                    num_acc = num_acc.mul(r)?.add(&Self::from_poly(c))?;
                }
                let mut den_acc = Self::zero(p.ctx());
                let coeffs = acc.den.coeffs_in(*v);
                for c in coeffs.into_iter().rev() {
                    den_acc = den_acc.mul(r)?.add(&Self::from_poly(c))?;
                }
                acc = num_acc.div(&den_acc)?;
            }
            Ok(acc)
        };
        subst(&self.num)?.div(&subst(&self.den)?)
    }

    /// Coefficients of the Laurent-style expansion in `v` around `v = 0`:
    /// returns `ord` and the cofactor data needed by pole-order checks.
    /// Specifically, writes `self = v^ord * (u/w)` with `u, w` not divisible
    /// by `v`; `ord` is negative for a pole.
    pub fn order_at_var(&self, v: Var) -> (i64, RationalFunction) {
        fn strip(p: &MultiPoly, v: Var) -> (u32, MultiPoly) {
            if p.is_zero() {
                return (0, p.clone());
            }
            let k = p.terms.keys().map(|m| m.0[v.index()]).min().unwrap_or(0);
            if k == 0 {
                return (0, p.clone());
            }
            let mut out = MultiPoly::zero(p.ctx());
            for (m, c) in &p.terms {
                let mut m2 = *m;
                m2.0[v.index()] -= k;
                out = out.add(&MultiPoly::monomial(c.clone(), m2));
            }
            (k, out)
        }
        let (kn, n) = strip(&self.num, v);
        let (kd, d) = strip(&self.den, v);
        (
            kn as i64 - kd as i64,
            RationalFunction { num: n, den: d },
        )
    }

    /// View a polynomial in `main` with coefficients in the remaining
    /// variables as a dense univariate polynomial over rational functions.
    pub fn lift_coeffs(f: &MultiPoly, main: Var) -> Vec<RationalFunction> {
        f.coeffs_in(main)
            .into_iter()
            .map(RationalFunction::from_poly)
            .collect()
    }
}

impl FieldElem for RationalFunction {
    fn zero_like(&self) -> Self {
        Self::zero(self.ctx())
    }
    fn one_like(&self) -> Self {
        Self::one(self.ctx())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Self::from_poly(MultiPoly::from_i64(self.ctx(), n))
    }
    fn is_zero(&self) -> bool {
        RationalFunction::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        RationalFunction::add(self, o).expect("rational function arithmetic")
    }
    fn sub(&self, o: &Self) -> Self {
        RationalFunction::sub(self, o).expect("rational function arithmetic")
    }
    fn neg(&self) -> Self {
        RationalFunction::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        RationalFunction::mul(self, o).expect("rational function arithmetic")
    }
    fn inv(&self) -> Result<Self> {
        RationalFunction::inv(self)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::expr::render_rational(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_is_canonical() {
        let ctx = FieldCtx::rational();
        let x = MultiPoly::var(&ctx, Var::X);
        let one = MultiPoly::one(&ctx);
        // (x^2-1)/(x-1) = x+1
        let r = RationalFunction::new(
            x.pow(2).unwrap().sub(&one),
            x.sub(&one),
        )
        .unwrap();
        assert_eq!(r, RationalFunction::from_poly(x.add(&one)));
        assert!(r.is_polynomial());
    }

    #[test]
    fn derivative_quotient_rule() {
        let ctx = FieldCtx::rational();
        let x = RationalFunction::var(&ctx, Var::X);
        // d/dx (1/x) = -1/x^2
        let inv = x.inv().unwrap();
        let d = inv.derivative(Var::X).unwrap();
        let expect = RationalFunction::new(
            MultiPoly::from_i64(&ctx, -1),
            MultiPoly::var(&ctx, Var::X).pow(2).unwrap(),
        )
        .unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn order_at_y() {
        let ctx = FieldCtx::rational();
        let y = MultiPoly::var(&ctx, Var::Y);
        let x = MultiPoly::var(&ctx, Var::X);
        // x / y^2 has order -2 at y
        let r = RationalFunction::new(x, y.pow(2).unwrap()).unwrap();
        assert_eq!(r.order_at_var(Var::Y).0, -2);
    }
}
