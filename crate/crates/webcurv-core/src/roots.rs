//! Algebraic root classes of univariate polynomials over `K`, exact trace
//! sums of rational functions over root sets, and local Taylor data at
//! algebraic points.
//!
//! A root class is a monic squarefree modulus `m(z)` together with the
//! common ramification multiplicity `nu` of its roots. Working per class
//! (instead of per root) is what keeps every criterion sum inside `K`:
//! a sum over the roots of `m` is the trace of a residue class in
//! `K[z]/(m)`, computable from Newton power sums of `m` without ever
//! splitting `m` into irreducible factors.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldScalar};
use crate::upoly::UPoly;

/// Roots of a monic squarefree modulus, all carrying multiplicity `nu`.
#[derive(Clone, Debug, PartialEq)]
pub struct RootClass {
    /// Monic squarefree polynomial over `K`.
    pub modulus: UPoly<FieldScalar>,
    /// Ramification multiplicity attached to every root of the modulus.
    pub nu: u32,
}

impl RootClass {
    pub fn new(modulus: UPoly<FieldScalar>, nu: u32) -> Result<Self> {
        if nu == 0 {
            return Err(Error::invalid("root class multiplicity must be >= 1"));
        }
        let d = modulus
            .degree()
            .ok_or_else(|| Error::invalid("root class modulus must be nonzero"))?;
        if d == 0 {
            return Err(Error::invalid("root class modulus must be nonconstant"));
        }
        let g = modulus.gcd(&modulus.derivative())?;
        if g.deg() != 0 {
            return Err(Error::invalid("root class modulus must be squarefree"));
        }
        Ok(RootClass { modulus, nu })
    }

    /// Number of distinct roots in the class.
    pub fn count(&self) -> usize {
        self.modulus.deg()
    }

    /// Total root count with multiplicity.
    pub fn weight(&self) -> u64 {
        self.nu as u64 * self.count() as u64
    }
}

/// Multiplicity-graded squarefree classes of a univariate polynomial:
/// `C = lead * prod_j modulus_j ^ nu_j` with pairwise coprime squarefree
/// monic moduli.
pub fn root_classes(c: &UPoly<FieldScalar>) -> Result<(FieldScalar, Vec<RootClass>)> {
    if c.is_zero() {
        return Err(Error::invalid("root classes of the zero polynomial"));
    }
    let (lead, parts) = c.squarefree_decomposition()?;
    let mut out = Vec::with_capacity(parts.len());
    for (m, nu) in parts {
        out.push(RootClass { modulus: m, nu });
    }
    debug_assert_eq!(
        out.iter().map(RootClass::weight).sum::<u64>(),
        c.deg() as u64
    );
    Ok((lead, out))
}

/// Exact `sum over roots r of m` of `num(r)/den(r)`, as the trace of
/// `num * den^{-1}` in `K[z]/(m)` computed from the Newton power sums of
/// `m`. The denominator must be coprime to `m`; the offending gcd is
/// reported otherwise.
pub fn trace_sum(
    num: &UPoly<FieldScalar>,
    den: &UPoly<FieldScalar>,
    m: &UPoly<FieldScalar>,
) -> Result<FieldScalar> {
    let n = m
        .degree()
        .ok_or_else(|| Error::invalid("trace over the zero modulus"))?;
    if n == 0 {
        return Err(Error::invalid("trace over a constant modulus"));
    }
    let sample = m.lead().unwrap();
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let g = den.gcd(m)?;
    if g.deg() != 0 {
        return Err(Error::ZeroDivisor(format!(
            "denominator shares roots with the modulus; gcd = {}",
            render_upoly(&g)
        )));
    }
    let den_inv = den.inv_mod(m)?;
    let w = num.rem(m)?.mul_mod(&den_inv, m)?;
    let sums = m.monic()?.newton_power_sums(n)?;
    let mut acc = sample.zero_like();
    for (k, c) in w.c.iter().enumerate() {
        acc = acc.add(&c.mul(&sums[k]));
    }
    Ok(acc)
}

/// Trace of a plain polynomial over the roots of `m`.
pub fn trace_poly(num: &UPoly<FieldScalar>, m: &UPoly<FieldScalar>) -> Result<FieldScalar> {
    let one = UPoly::constant(m.lead().expect("nonzero modulus").one_like());
    trace_sum(num, &one, m)
}

/// Coefficients `c_0 .. c_k` of the expansion of `C` around the generic
/// root `r` of the class, as residue classes in `K[z]/(m)`:
/// `C(z) = sum_j c_j (z - r)^j` with `c_j = (D^(j) C)(r)` (Hasse
/// derivatives).
///
/// For a class of multiplicity `nu` inside `C`, the coefficients
/// `c_0 .. c_{nu-1}` vanish identically and `c_nu` is a unit; a
/// non-invertible `c_nu` means the class data is inconsistent with `C`
/// and is reported as [`Error::ZeroDivisor`].
pub fn local_taylor(
    c: &UPoly<FieldScalar>,
    class: &RootClass,
    k: u32,
) -> Result<Vec<UPoly<FieldScalar>>> {
    let m = &class.modulus;
    let mut out = Vec::with_capacity(k as usize + 1);
    for j in 0..=k {
        // (D^(j) C)(r) as an element of K[z]/(m): reduce the Hasse
        // derivative modulo m.
        let dj = c.hasse_derivative(j);
        out.push(dj.rem(m)?);
    }
    for (j, cj) in out.iter().enumerate().take(class.nu as usize) {
        if !cj.is_zero() {
            return Err(Error::invalid(format!(
                "Taylor coefficient c_{j} does not vanish; declared multiplicity {} is wrong",
                class.nu
            )));
        }
    }
    if out.len() > class.nu as usize {
        let cnu = &out[class.nu as usize];
        // c_nu must be a unit in K[z]/(m).
        let g = cnu.gcd(m)?;
        if cnu.is_zero() || g.deg() != 0 {
            return Err(Error::ZeroDivisor(format!(
                "leading Taylor coefficient shares roots with the modulus; gcd = {}",
                render_upoly(&g)
            )));
        }
    }
    Ok(out)
}

fn render_upoly(p: &UPoly<FieldScalar>) -> String {
    match p.c.first() {
        None => String::from("0"),
        Some(c) => {
            let ctx = c.ctx().clone();
            crate::expr::render_poly(&crate::poly::MultiPoly::from_univariate(
                &ctx,
                crate::poly::Var::Z,
                &p.c,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use alloc::sync::Arc;
    use alloc::vec;

    fn ctx() -> Arc<FieldCtx> {
        FieldCtx::rational()
    }

    fn poly(ctx: &Arc<FieldCtx>, cs: &[i64]) -> UPoly<FieldScalar> {
        UPoly::new(cs.iter().map(|&n| FieldScalar::from_i64(ctx, n)).collect())
    }

    #[test]
    fn classes_of_total_ramification() {
        let c = ctx();
        // z^3: single class (z, nu = 3)
        let f = poly(&c, &[0, 0, 0, 1]);
        let (lead, classes) = root_classes(&f).unwrap();
        assert_eq!(lead, FieldScalar::from_i64(&c, 1));
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].nu, 3);
        assert_eq!(classes[0].modulus, poly(&c, &[0, 1]));
        assert_eq!(classes[0].weight(), 3);
    }

    #[test]
    fn class_weights_partition_degree() {
        let c = ctx();
        // 4 z^2 (from B_2(1,z) = 4 z^k at k = 2)
        let f = poly(&c, &[0, 0, 4]);
        let (lead, classes) = root_classes(&f).unwrap();
        assert_eq!(lead, FieldScalar::from_i64(&c, 4));
        assert_eq!(classes[0].nu, 2);
        assert_eq!(classes.iter().map(RootClass::weight).sum::<u64>(), 2);
    }

    #[test]
    fn trace_of_square_over_gaussian_roots() {
        let c = ctx();
        // m = z^2 + 1: roots +-i, trace of z^2 is -2
        let m = poly(&c, &[1, 0, 1]);
        let t = trace_poly(&poly(&c, &[0, 0, 1]), &m).unwrap();
        assert_eq!(t, FieldScalar::from_i64(&c, -2));
        // trace of 1 is deg m
        let t = trace_poly(&poly(&c, &[1]), &m).unwrap();
        assert_eq!(t, FieldScalar::from_i64(&c, 2));
    }

    #[test]
    fn trace_of_odd_function_vanishes() {
        let c = ctx();
        // m = z^2 - 2, g = 1/z: 1/sqrt2 - 1/sqrt2 = 0
        let m = poly(&c, &[-2, 0, 1]);
        let t = trace_sum(&poly(&c, &[1]), &poly(&c, &[0, 1]), &m).unwrap();
        assert!(t.is_zero());
    }

    #[test]
    fn trace_rejects_shared_roots() {
        let c = ctx();
        let m = poly(&c, &[0, 1]); // z
        let e = trace_sum(&poly(&c, &[1]), &poly(&c, &[0, 1]), &m);
        assert!(matches!(e, Err(Error::ZeroDivisor(_))));
    }

    #[test]
    fn trace_linearity() {
        let c = ctx();
        let m = poly(&c, &[3, -1, -4, 1]);
        let g1 = poly(&c, &[1, 2, 7]);
        let g2 = poly(&c, &[-5, 0, 0, 3]);
        let t1 = trace_poly(&g1, &m).unwrap();
        let t2 = trace_poly(&g2, &m).unwrap();
        let ts = trace_poly(&g1.add(&g2), &m).unwrap();
        assert_eq!(ts, t1.add(&t2));
    }

    #[test]
    fn taylor_at_a_double_root_class() {
        let c = ctx();
        // C = z^2 (z - 1), class (z, nu = 2): c_2 = -1, c_3 = 1
        let cc = poly(&c, &[0, 0, -1, 1]);
        let class = RootClass::new(poly(&c, &[0, 1]), 2).unwrap();
        let t = local_taylor(&cc, &class, 3).unwrap();
        assert!(t[0].is_zero() && t[1].is_zero());
        assert_eq!(t[2], poly(&c, &[-1]));
        assert_eq!(t[3], poly(&c, &[1]));
    }

    #[test]
    fn taylor_at_a_triple_root() {
        let c = ctx();
        // C = (z - 1)^3, class (z - 1, nu = 3): c_3 = 1, c_4 = 0
        let zm1 = poly(&c, &[-1, 1]);
        let cc = zm1.pow(3);
        let class = RootClass::new(zm1, 3).unwrap();
        let t = local_taylor(&cc, &class, 4).unwrap();
        assert!(t[0].is_zero() && t[1].is_zero() && t[2].is_zero());
        assert_eq!(t[3], poly(&c, &[1]));
        assert!(t[4].is_zero());
    }

    #[test]
    fn taylor_detects_wrong_multiplicity() {
        let c = ctx();
        let cc = poly(&c, &[0, 0, -1, 1]); // z^2(z-1)
        let class = RootClass::new(poly(&c, &[0, 1]), 3).unwrap();
        assert!(local_taylor(&cc, &class, 3).is_err());
    }

    #[test]
    fn trace_over_klein_f5_modulus() {
        // m(z) = z^20 - 228 z^15 + 494 z^10 + 228 z^5 + 1 (the fiber of 0
        // of the degree-60 icosahedral map). Newton sums only hit powers
        // divisible by 5; trace of 1 must be 20 and trace of z must be 0.
        let c = ctx();
        let mut coeffs = vec![0i64; 21];
        coeffs[0] = 1;
        coeffs[5] = 228;
        coeffs[10] = 494;
        coeffs[15] = -228;
        coeffs[20] = 1;
        let m = poly(&c, &coeffs);
        assert_eq!(trace_poly(&poly(&c, &[1]), &m).unwrap(), FieldScalar::from_i64(&c, 20));
        assert!(trace_poly(&poly(&c, &[0, 1]), &m).unwrap().is_zero());
        // sum of z^5 over the roots = 5 * sum of w_j (w_j roots of the
        // quartic w^4 - 228 w^3 + 494 w^2 + 228 w + 1) = 5 * 228
        let mut z5 = vec![0i64; 6];
        z5[5] = 1;
        assert_eq!(
            trace_poly(&poly(&c, &z5), &m).unwrap(),
            FieldScalar::from_i64(&c, 5 * 228)
        );
    }
}
