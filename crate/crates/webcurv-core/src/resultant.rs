//! Resultants and discriminants with respect to one variable, fraction-free
//! over the polynomial coefficients in the remaining variables.
//!
//! The production path is the subresultant pseudo-remainder sequence;
//! [`sylvester_resultant`] is a deliberately independent Bareiss-determinant
//! route kept as the cross-checking oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::poly::{MultiPoly, Var};

fn trim(v: &mut Vec<MultiPoly>) {
    while v.last().is_some_and(MultiPoly::is_zero) {
        v.pop();
    }
}

/// Classical pseudo-remainder `rem(lc(b)^(deg a - deg b + 1) * a, b)`.
fn prem(a: &[MultiPoly], b: &[MultiPoly]) -> Result<Vec<MultiPoly>> {
    let lb = b.last().expect("nonzero divisor");
    let delta = a.len() as i64 - b.len() as i64;
    debug_assert!(delta >= 0);
    let mut scale = MultiPoly::one(lb.ctx());
    for _ in 0..=(delta as u32) {
        scale = scale.mul(lb)?;
    }
    let mut r: Vec<MultiPoly> = a
        .iter()
        .map(|c| c.mul(&scale))
        .collect::<Result<_>>()?;
    trim(&mut r);
    while r.len() >= b.len() {
        let k = r.len() - b.len();
        let q = r
            .last()
            .unwrap()
            .exact_div(lb)
            .ok_or_else(|| Error::invalid("pseudo-division step not exact"))?;
        for (j, bc) in b.iter().enumerate() {
            let s = q.mul(bc)?;
            r[k + j] = r[k + j].sub(&s);
        }
        trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    Ok(r)
}

fn pow_poly(p: &MultiPoly, e: u32) -> Result<MultiPoly> {
    let mut acc = MultiPoly::one(p.ctx());
    for _ in 0..e {
        acc = acc.mul(p)?;
    }
    Ok(acc)
}

/// Resultant of `f` and `g` with respect to `v`, by the subresultant PRS.
///
/// Conventions are those of the Sylvester determinant with the rows of `f`
/// first; `resultant(f, g) = (-1)^(deg f * deg g) resultant(g, f)`.
pub fn resultant_in(f: &MultiPoly, g: &MultiPoly, v: Var) -> Result<MultiPoly> {
    if f.is_zero() && g.is_zero() {
        return Err(Error::invalid("resultant of two zero polynomials"));
    }
    let ctx = f.ctx().clone();
    if f.is_zero() || g.is_zero() {
        return Ok(MultiPoly::zero(&ctx));
    }
    let mut a = f.coeffs_in(v);
    let mut b = g.coeffs_in(v);
    trim(&mut a);
    trim(&mut b);
    let mut sign_flip = false;
    if a.len() < b.len() {
        if (a.len() - 1) % 2 == 1 && (b.len() - 1) % 2 == 1 {
            sign_flip = !sign_flip;
        }
        core::mem::swap(&mut a, &mut b);
    }
    if b.len() == 1 {
        // res(a, const) = const^{deg a}
        let r = pow_poly(&b[0], (a.len() - 1) as u32)?;
        return Ok(if sign_flip { r.neg() } else { r });
    }
    let mut g_coef = MultiPoly::one(&ctx);
    let mut h_coef = MultiPoly::one(&ctx);
    loop {
        let da = a.len() - 1;
        let db = b.len() - 1;
        let delta = (da - db) as u32;
        if da % 2 == 1 && db % 2 == 1 {
            sign_flip = !sign_flip;
        }
        let r = prem(&a, &b)?;
        a = b;
        // b <- r / (g * h^delta)
        let divisor = g_coef.mul(&pow_poly(&h_coef, delta)?)?;
        b = r
            .iter()
            .map(|c| {
                if c.is_zero() {
                    Ok(c.clone())
                } else {
                    c.exact_div(&divisor)
                        .ok_or_else(|| Error::invalid("subresultant division not exact"))
                }
            })
            .collect::<Result<_>>()?;
        trim(&mut b);
        g_coef = a.last().unwrap().clone();
        if delta > 0 {
            // h <- g^delta / h^(delta-1)
            let num = pow_poly(&g_coef, delta)?;
            h_coef = num
                .exact_div(&pow_poly(&h_coef, delta - 1)?)
                .ok_or_else(|| Error::invalid("subresultant h-update not exact"))?;
        }
        if b.is_empty() {
            // common factor of positive degree
            return Ok(MultiPoly::zero(&ctx));
        }
        if b.len() == 1 {
            break;
        }
    }
    // res = s * lc(b)^(deg a) / h^(deg a - 1)
    let da = (a.len() - 1) as u32;
    let num = pow_poly(&b[0], da)?;
    let res = if da >= 1 {
        num.exact_div(&pow_poly(&h_coef, da - 1)?)
            .ok_or_else(|| Error::invalid("subresultant final division not exact"))?
    } else {
        num
    };
    Ok(if sign_flip { res.neg() } else { res })
}

/// Reference route: the Sylvester matrix evaluated by fraction-free Bareiss
/// elimination. Used by the test suite to validate [`resultant_in`].
pub fn sylvester_resultant(f: &MultiPoly, g: &MultiPoly, v: Var) -> Result<MultiPoly> {
    if f.is_zero() && g.is_zero() {
        return Err(Error::invalid("resultant of two zero polynomials"));
    }
    let ctx = f.ctx().clone();
    if f.is_zero() || g.is_zero() {
        return Ok(MultiPoly::zero(&ctx));
    }
    let mut a = f.coeffs_in(v);
    let mut b = g.coeffs_in(v);
    trim(&mut a);
    trim(&mut b);
    let (m, n) = (a.len() - 1, b.len() - 1);
    if m == 0 && n == 0 {
        return Ok(MultiPoly::one(&ctx));
    }
    let size = m + n;
    // Row i (i < n): coefficients of f shifted by i; then rows of g.
    let mut mat = vec![vec![MultiPoly::zero(&ctx); size]; size];
    for i in 0..n {
        for (j, c) in a.iter().rev().enumerate() {
            mat[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in b.iter().rev().enumerate() {
            mat[n + i][i + j] = c.clone();
        }
    }
    // Bareiss elimination.
    let mut sign = false;
    let mut prev = MultiPoly::one(&ctx);
    for k in 0..size - 1 {
        if mat[k][k].is_zero() {
            let swap = (k + 1..size).find(|&r| !mat[r][k].is_zero());
            match swap {
                Some(r) => {
                    mat.swap(k, r);
                    sign = !sign;
                }
                None => return Ok(MultiPoly::zero(&ctx)),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let t1 = mat[i][j].mul(&mat[k][k])?;
                let t2 = mat[i][k].mul(&mat[k][j])?;
                let num = t1.sub(&t2);
                mat[i][j] = if num.is_zero() {
                    num
                } else {
                    num.exact_div(&prev)
                        .ok_or_else(|| Error::invalid("Bareiss division not exact"))?
                };
            }
            mat[i][k] = MultiPoly::zero(&ctx);
        }
        prev = mat[k][k].clone();
    }
    let det = mat[size - 1][size - 1].clone();
    Ok(if sign { det.neg() } else { det })
}

/// Discriminant of `F` in `v` together with its squarefree support.
#[derive(Clone, Debug)]
pub struct Discriminant {
    /// `(-1)^(d(d-1)/2) * res_v(F, dF/dv) / lc_v(F)`.
    pub poly: MultiPoly,
    /// Product of the distinct irreducible factors, monic.
    pub squarefree_support: MultiPoly,
}

pub fn discriminant_in(f: &MultiPoly, v: Var) -> Result<Discriminant> {
    let d = f.degree_in(v);
    if d == 0 {
        return Err(Error::invalid("discriminant of a polynomial constant in the variable"));
    }
    let lead = f.leading_coeff_in(v);
    let res = resultant_in(f, &f.partial_derivative(v), v)?;
    let quot = if res.is_zero() {
        res
    } else {
        res.exact_div(&lead)
            .ok_or_else(|| Error::invalid("leading coefficient does not divide the resultant"))?
    };
    let signed = if (d as u64 * (d as u64 - 1) / 2) % 2 == 1 {
        quot.neg()
    } else {
        quot
    };
    let support = if signed.is_zero() {
        signed.clone()
    } else {
        signed.squarefree_part()?
    };
    Ok(Discriminant { poly: signed, squarefree_support: support })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldCtx, FieldScalar};

    fn ctx() -> alloc::sync::Arc<FieldCtx> {
        FieldCtx::rational()
    }

    #[test]
    fn resultant_of_linear_pair() {
        let c = ctx();
        let p = MultiPoly::var(&c, Var::P);
        let x = MultiPoly::var(&c, Var::X);
        let y = MultiPoly::var(&c, Var::Y);
        // res_p(p - x, p - y) = x - y
        let r = resultant_in(&p.sub(&x), &p.sub(&y), Var::P).unwrap();
        assert_eq!(r, x.sub(&y));
        let s = sylvester_resultant(&p.sub(&x), &p.sub(&y), Var::P).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn resultant_with_derivative() {
        let c = ctx();
        let p = MultiPoly::var(&c, Var::P);
        let x = MultiPoly::var(&c, Var::X);
        let two_p = p.scale(&FieldScalar::from_i64(&c, 2));
        // Sylvester determinant gives -4x for res_p(p^2 - x, 2p)
        let f = p.pow(2).unwrap().sub(&x);
        let r = resultant_in(&f, &two_p, Var::P).unwrap();
        assert_eq!(r, x.scale(&FieldScalar::from_i64(&c, -4)));
        assert_eq!(r, sylvester_resultant(&f, &two_p, Var::P).unwrap());
    }

    #[test]
    fn resultant_of_poly_with_itself_is_zero() {
        let c = ctx();
        let p = MultiPoly::var(&c, Var::P);
        let f = p.pow(3).unwrap().add(&MultiPoly::var(&c, Var::X));
        assert!(resultant_in(&f, &f, Var::P).unwrap().is_zero());
    }

    #[test]
    fn discriminant_example_web() {
        // F = (y^2 - x) p^2 + 2xp - x has p-discriminant 4xy^2
        let c = ctx();
        let p = MultiPoly::var(&c, Var::P);
        let x = MultiPoly::var(&c, Var::X);
        let y = MultiPoly::var(&c, Var::Y);
        let f = y
            .pow(2)
            .unwrap()
            .sub(&x)
            .mul(&p.pow(2).unwrap())
            .unwrap()
            .add(&x.mul(&p).unwrap().scale(&FieldScalar::from_i64(&c, 2)))
            .sub(&x);
        let disc = discriminant_in(&f, Var::P).unwrap();
        let expect = x
            .mul(&y.pow(2).unwrap())
            .unwrap()
            .scale(&FieldScalar::from_i64(&c, 4));
        assert_eq!(disc.poly, expect);
        assert_eq!(disc.squarefree_support, x.mul(&y).unwrap());
    }

    #[test]
    fn discriminant_unit_case() {
        // p^2 - 1 -> discriminant 4, empty locus
        let c = ctx();
        let p = MultiPoly::var(&c, Var::P);
        let f = p.pow(2).unwrap().sub(&MultiPoly::one(&c));
        let disc = discriminant_in(&f, Var::P).unwrap();
        assert_eq!(disc.poly, MultiPoly::from_i64(&c, 4));
    }

    #[test]
    fn rejects_constant_input() {
        let c = ctx();
        assert!(discriminant_in(&MultiPoly::from_i64(&c, 3), Var::P).is_err());
    }
}
