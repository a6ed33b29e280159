//! Differential forms in the chart `(x, y)` and the Euler homogeneity check.

use crate::error::Result;
use crate::poly::{MultiPoly, Var};
use crate::ratfunc::RationalFunction;

/// `a dx + b dy` with rational-function components.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    pub a: RationalFunction,
    pub b: RationalFunction,
}

/// `c dx /\ dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    pub c: RationalFunction,
}

impl OneForm {
    pub fn new(a: RationalFunction, b: RationalFunction) -> Self {
        OneForm { a, b }
    }

    pub fn zero(ctx: &alloc::sync::Arc<crate::field::FieldCtx>) -> Self {
        OneForm { a: RationalFunction::zero(ctx), b: RationalFunction::zero(ctx) }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        Ok(OneForm { a: self.a.add(&o.a)?, b: self.b.add(&o.b)? })
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl TwoForm {
    pub fn is_zero(&self) -> bool {
        self.c.is_zero()
    }
}

/// `d(a dx + b dy) = (d_x b - d_y a) dx /\ dy`.
pub fn exterior_derivative(eta: &OneForm) -> Result<TwoForm> {
    let c = eta.b.derivative(Var::X)?.sub(&eta.a.derivative(Var::Y)?)?;
    Ok(TwoForm { c })
}

/// The closed logarithmic form `dg/g` (the gauge ambiguity of fundamental
/// forms).
pub fn log_derivative(g: &RationalFunction) -> Result<OneForm> {
    Ok(OneForm::new(
        g.derivative(Var::X)?.div(g)?,
        g.derivative(Var::Y)?.div(g)?,
    ))
}

/// `x d_x A + y d_y A - d A`; identically zero exactly when `A` is
/// homogeneous of degree `d` in `(x, y)`.
pub fn euler_residual(a: &MultiPoly, d: u32) -> Result<MultiPoly> {
    let ctx = a.ctx();
    let x = MultiPoly::var(ctx, Var::X);
    let y = MultiPoly::var(ctx, Var::Y);
    let s = x
        .mul(&a.partial_derivative(Var::X))?
        .add(&y.mul(&a.partial_derivative(Var::Y))?);
    Ok(s.sub(&a.scale(&crate::field::FieldScalar::from_i64(ctx, d as i64))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    #[test]
    fn d_of_x_dy() {
        let ctx = FieldCtx::rational();
        let eta = OneForm::new(
            RationalFunction::zero(&ctx),
            RationalFunction::var(&ctx, Var::X),
        );
        let k = exterior_derivative(&eta).unwrap();
        assert_eq!(k.c, RationalFunction::one(&ctx));
    }

    #[test]
    fn logarithmic_forms_are_closed() {
        // d(dg/g) = 0 for polynomial g
        let ctx = FieldCtx::rational();
        let x = MultiPoly::var(&ctx, Var::X);
        let y = MultiPoly::var(&ctx, Var::Y);
        let g = x
            .pow(3)
            .unwrap()
            .add(&x.mul(&y).unwrap())
            .add(&MultiPoly::from_i64(&ctx, 7));
        let gr = RationalFunction::from_poly(g.clone());
        let eta = OneForm::new(
            RationalFunction::from_poly(g.partial_derivative(Var::X))
                .div(&gr)
                .unwrap(),
            RationalFunction::from_poly(g.partial_derivative(Var::Y))
                .div(&gr)
                .unwrap(),
        );
        assert!(exterior_derivative(&eta).unwrap().is_zero());
    }

    #[test]
    fn euler_residual_detects_homogeneity() {
        let ctx = FieldCtx::rational();
        let x = MultiPoly::var(&ctx, Var::X);
        let y = MultiPoly::var(&ctx, Var::Y);
        // y^3 is homogeneous of degree 3
        assert!(euler_residual(&y.pow(3).unwrap(), 3).unwrap().is_zero());
        // x^2 + y is not homogeneous of degree 2; residual is -y
        let r = euler_residual(&x.pow(2).unwrap().add(&y), 2).unwrap();
        assert_eq!(r, y.neg());
        // (x+y)^4
        assert!(euler_residual(&x.add(&y).pow(4).unwrap(), 4).unwrap().is_zero());
    }
}
