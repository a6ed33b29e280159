//! The coefficient field `K = Q(theta)(lambda_1, ..., lambda_m)`.
//!
//! `theta` is a residue class modulo a monic integer polynomial (degree 1
//! means plain `Q`); the `lambda_i` are free transcendental parameters.
//! [`FieldScalar`] is a fraction of parameter polynomials kept in canonical
//! form: gcd-reduced with a denominator whose graded-lex leading coefficient
//! is 1, so equality is structural equality.

pub mod parampoly;
pub mod qtheta;

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
pub use parampoly::{PMono, ParamPoly};
pub use qtheta::{QTheta, Rat, ThetaRing};

/// Immutable description of the coefficient field: the minimal polynomial of
/// `theta` and the parameter names. Shared by every value of a computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldCtx {
    pub theta: ThetaRing,
    pub params: Vec<String>,
}

impl FieldCtx {
    pub fn new(theta: ThetaRing, params: Vec<String>) -> Arc<Self> {
        Arc::new(FieldCtx { theta, params })
    }

    /// Plain rationals, no parameters.
    pub fn rational() -> Arc<Self> {
        Self::new(ThetaRing::rational(), Vec::new())
    }

    /// `Q(theta)` with `theta^2 = -n` style rings, no parameters.
    pub fn with_theta(min_poly: Vec<BigInt>) -> Result<Arc<Self>> {
        Ok(Self::new(ThetaRing::new(min_poly)?, Vec::new()))
    }

    pub fn with_params(params: &[&str]) -> Arc<Self> {
        Self::new(
            ThetaRing::rational(),
            params.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn nparams(&self) -> usize {
        self.params.len()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p == name)
    }

    /// `i` is only meaningful when `theta^2 + 1 = 0`.
    pub fn has_imaginary_unit(&self) -> bool {
        self.theta.min_poly.len() == 3
            && self.theta.min_poly[0] == BigInt::one()
            && self.theta.min_poly[1] == BigInt::zero()
    }
}

pub fn ctx_compatible(a: &Arc<FieldCtx>, b: &Arc<FieldCtx>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Element of `K` in canonical fraction form.
#[derive(Clone, Debug)]
pub struct FieldScalar {
    ctx: Arc<FieldCtx>,
    num: ParamPoly,
    den: ParamPoly,
}

impl PartialEq for FieldScalar {
    fn eq(&self, other: &Self) -> bool {
        debug_assert!(ctx_compatible(&self.ctx, &other.ctx));
        self.num == other.num && self.den == other.den
    }
}

impl Eq for FieldScalar {}

impl FieldScalar {
    fn make(ctx: Arc<FieldCtx>, num: ParamPoly, den: ParamPoly) -> Result<Self> {
        let mut s = FieldScalar { ctx, num, den };
        s.normalize()?;
        Ok(s)
    }

    fn normalize(&mut self) -> Result<()> {
        if self.den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let ring = &self.ctx.theta;
        if self.num.is_zero() {
            self.den = ParamPoly::constant(self.ctx.nparams(), QTheta::one(ring));
            return Ok(());
        }
        if !self.den.is_constant() {
            let g = self.num.gcd(&self.den, ring)?;
            if !g.is_constant() {
                self.num = self.num.exact_div(&g, ring).ok_or_else(|| {
                    Error::ZeroDivisor("gcd does not divide numerator".into())
                })?;
                self.den = self.den.exact_div(&g, ring).ok_or_else(|| {
                    Error::ZeroDivisor("gcd does not divide denominator".into())
                })?;
            }
        }
        // Monic denominator under graded-lex.
        let lc = self.den.leading().expect("nonzero denominator").1.clone();
        let inv = lc.inv(ring)?;
        self.num = self.num.scale(&inv, ring);
        self.den = self.den.scale(&inv, ring);
        Ok(())
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> Self {
        FieldScalar {
            ctx: ctx.clone(),
            num: ParamPoly::zero(ctx.nparams()),
            den: ParamPoly::constant(ctx.nparams(), QTheta::one(&ctx.theta)),
        }
    }

    pub fn one(ctx: &Arc<FieldCtx>) -> Self {
        Self::from_qtheta(ctx, QTheta::one(&ctx.theta))
    }

    pub fn from_qtheta(ctx: &Arc<FieldCtx>, c: QTheta) -> Self {
        FieldScalar {
            ctx: ctx.clone(),
            num: ParamPoly::constant(ctx.nparams(), c),
            den: ParamPoly::constant(ctx.nparams(), QTheta::one(&ctx.theta)),
        }
    }

    pub fn from_rat(ctx: &Arc<FieldCtx>, r: Rat) -> Self {
        Self::from_qtheta(ctx, QTheta::from_rat(&ctx.theta, r))
    }

    pub fn from_i64(ctx: &Arc<FieldCtx>, n: i64) -> Self {
        Self::from_qtheta(ctx, QTheta::from_i64(&ctx.theta, n))
    }

    pub fn rational(ctx: &Arc<FieldCtx>, num: i64, den: i64) -> Self {
        Self::from_rat(ctx, Rat::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn theta(ctx: &Arc<FieldCtx>) -> Self {
        Self::from_qtheta(ctx, QTheta::theta(&ctx.theta))
    }

    pub fn param(ctx: &Arc<FieldCtx>, name: &str) -> Result<Self> {
        let i = ctx
            .param_index(name)
            .ok_or_else(|| Error::invalid("unknown parameter"))?;
        Ok(FieldScalar {
            ctx: ctx.clone(),
            num: ParamPoly::param(ctx.nparams(), i, &ctx.theta),
            den: ParamPoly::constant(ctx.nparams(), QTheta::one(&ctx.theta)),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_constant()
            && self
                .num
                .as_constant()
                .is_some_and(|c| c == QTheta::one(&self.ctx.theta))
            && self
                .den
                .as_constant()
                .is_some_and(|c| c == QTheta::one(&self.ctx.theta))
    }

    pub fn numerator(&self) -> &ParamPoly {
        &self.num
    }

    pub fn denominator(&self) -> &ParamPoly {
        &self.den
    }

    /// Present as an element of `Q(theta)` when parameter-free.
    pub fn as_qtheta(&self) -> Option<QTheta> {
        let ring = &self.ctx.theta;
        if self.num.is_zero() {
            return Some(QTheta::zero(ring));
        }
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n.mul(&d.inv(ring).ok()?, ring))
    }

    pub fn as_rat(&self) -> Option<Rat> {
        self.as_qtheta().and_then(|q| q.is_rational().cloned())
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert!(ctx_compatible(&self.ctx, &o.ctx));
        let ring = &self.ctx.theta;
        let num = self
            .num
            .mul(&o.den, ring)
            .add(&o.num.mul(&self.den, ring));
        let den = self.den.mul(&o.den, ring);
        Self::make(self.ctx.clone(), num, den).expect("nonzero denominator product")
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        FieldScalar {
            ctx: self.ctx.clone(),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert!(ctx_compatible(&self.ctx, &o.ctx));
        let ring = &self.ctx.theta;
        let num = self.num.mul(&o.num, ring);
        let den = self.den.mul(&o.den, ring);
        Self::make(self.ctx.clone(), num, den).expect("nonzero denominator product")
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::make(self.ctx.clone(), self.den.clone(), self.num.clone())
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.ctx);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitute exact values for all parameters; the result lives in the
    /// parameter-free context `to`.
    pub fn specialize(&self, vals: &[QTheta], to: &Arc<FieldCtx>) -> Result<Self> {
        if vals.len() != self.ctx.nparams() {
            return Err(Error::invalid("specialization value count mismatch"));
        }
        let ring = &self.ctx.theta;
        let n = self.num.eval_params(vals, ring);
        let d = self.den.eval_params(vals, ring);
        if d.is_zero() {
            return Err(Error::invalid(
                "parameter specialization hits a pole of a coefficient",
            ));
        }
        Ok(Self::from_qtheta(to, n.mul(&d.inv(ring)?, ring)))
    }

    /// Coefficient-size telemetry: max bit length across the fraction.
    pub fn bit_size(&self) -> u64 {
        self.num
            .terms
            .values()
            .chain(self.den.terms.values())
            .map(QTheta::bit_size)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::expr::render_scalar(self))
    }
}

/// Field operations by reference, with element-scoped constants so generic
/// code never needs a context argument of its own.
pub trait FieldElem: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn inv(&self) -> Result<Self>;
    fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }
}

impl FieldElem for FieldScalar {
    fn zero_like(&self) -> Self {
        Self::zero(&self.ctx)
    }
    fn one_like(&self) -> Self {
        Self::one(&self.ctx)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Self::from_i64(&self.ctx, n)
    }
    fn is_zero(&self) -> bool {
        FieldScalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        FieldScalar::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        FieldScalar::sub(self, o)
    }
    fn neg(&self) -> Self {
        FieldScalar::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        FieldScalar::mul(self, o)
    }
    fn inv(&self) -> Result<Self> {
        FieldScalar::inv(self)
    }
}

/// Rational numbers as a [`FieldElem`] (used by tests and the numeric layer).
impl FieldElem for Rat {
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
    fn one_like(&self) -> Self {
        Rat::one()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Rat::from_integer(BigInt::from(n))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn inv(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            Err(Error::DivisionByZero)
        } else {
            Ok(Rat::one() / self)
        }
    }
}

/// Parse a signed decimal integer into a scalar (helper for the parser).
pub fn scalar_from_bigint(ctx: &Arc<FieldCtx>, n: BigInt) -> FieldScalar {
    FieldScalar::from_rat(ctx, Rat::from_integer(n))
}

/// Render a rational in `a/b` or integer form.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        let mut s = r.numer().to_string();
        s.push('/');
        s.push_str(&r.denom().to_string());
        s
    }
}

/// True when the rational is negative (for renderer sign placement).
pub fn rat_is_negative(r: &Rat) -> bool {
    r.numer().is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_fraction_two_params() {
        let ctx = FieldCtx::with_params(&["lambda", "mu"]);
        let l = FieldScalar::param(&ctx, "lambda").unwrap();
        let m = FieldScalar::param(&ctx, "mu").unwrap();
        let one = FieldScalar::one(&ctx);
        // (l^2 - 1)/(l - 1) reduces to l + 1
        let num = l.mul(&l).sub(&one);
        let den = l.sub(&one);
        let q = num.div(&den).unwrap();
        assert_eq!(q, l.add(&one));
        // cross-parameter cancellation
        let p = l.sub(&one).mul(&m);
        let r = p.div(&l.sub(&one)).unwrap();
        assert_eq!(r, m);
    }

    #[test]
    fn division_by_zero_rejected() {
        let ctx = FieldCtx::rational();
        let z = FieldScalar::zero(&ctx);
        assert!(matches!(FieldScalar::one(&ctx).div(&z), Err(Error::DivisionByZero)));
        assert!(matches!(z.inv(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn theta_reduction_in_scalars() {
        let ctx = FieldCtx::with_theta(alloc::vec![
            BigInt::from(3),
            BigInt::from(0),
            BigInt::from(1)
        ])
        .unwrap(); // theta^2 + 3 = 0
        let t = FieldScalar::theta(&ctx);
        assert_eq!(t.mul(&t), FieldScalar::from_i64(&ctx, -3));
        let inv = t.inv().unwrap();
        assert_eq!(t.mul(&inv), FieldScalar::one(&ctx));
    }

    #[test]
    fn specialization() {
        let ctx = FieldCtx::with_params(&["lambda"]);
        let l = FieldScalar::param(&ctx, "lambda").unwrap();
        let e = l.mul(&l).sub(&FieldScalar::one(&ctx));
        let q = FieldCtx::rational();
        let v = e
            .specialize(&[QTheta::from_i64(&q.theta, 3)], &q)
            .unwrap();
        assert_eq!(v, FieldScalar::from_i64(&q, 8));
    }
}
