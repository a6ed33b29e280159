//! Arithmetic in `Q[t]/(mu(t))` for a monic integer polynomial `mu`.
//!
//! Elements are coefficient vectors of fixed length `deg mu`. When `mu` is
//! irreducible this is the number field `Q(theta)`; we never verify
//! irreducibility (factorization is out of scope), so inversion can hit a
//! zero divisor, which is reported as an error instead of a wrong value.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// The residue ring data: a monic integer polynomial, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaRing {
    /// Coefficients of `mu`, constant term first; leading coefficient is 1.
    pub min_poly: Vec<BigInt>,
}

impl ThetaRing {
    pub fn new(min_poly: Vec<BigInt>) -> Result<Self> {
        if min_poly.len() < 2 {
            return Err(Error::invalid("theta minimal polynomial must have degree >= 1"));
        }
        if !min_poly.last().unwrap().is_one() {
            return Err(Error::invalid("theta minimal polynomial must be monic"));
        }
        Ok(ThetaRing { min_poly })
    }

    /// `Q` itself: residues modulo `t`.
    pub fn rational() -> Self {
        ThetaRing { min_poly: vec![BigInt::zero(), BigInt::one()] }
    }

    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }

    pub fn is_rational(&self) -> bool {
        self.degree() == 1
    }
}

/// An element of `Q[t]/(mu)`, stored as exactly `deg mu` rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QTheta(pub Vec<Rat>);

impl QTheta {
    pub fn zero(ring: &ThetaRing) -> Self {
        QTheta(vec![Rat::zero(); ring.degree()])
    }

    pub fn one(ring: &ThetaRing) -> Self {
        let mut c = vec![Rat::zero(); ring.degree()];
        c[0] = Rat::one();
        QTheta(c)
    }

    pub fn from_rat(ring: &ThetaRing, r: Rat) -> Self {
        let mut c = vec![Rat::zero(); ring.degree()];
        c[0] = r;
        QTheta(c)
    }

    pub fn from_i64(ring: &ThetaRing, n: i64) -> Self {
        Self::from_rat(ring, Rat::from_integer(BigInt::from(n)))
    }

    /// The residue class of `t`. In the degree-1 ring this is the rational
    /// root of `mu`, i.e. `-mu(0)`.
    pub fn theta(ring: &ThetaRing) -> Self {
        if ring.degree() == 1 {
            return Self::from_rat(ring, -Rat::from_integer(ring.min_poly[0].clone()));
        }
        let mut c = vec![Rat::zero(); ring.degree()];
        c[1] = Rat::one();
        QTheta(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Rat::is_zero)
    }

    pub fn is_rational(&self) -> Option<&Rat> {
        if self.0[1..].iter().all(Rat::is_zero) {
            Some(&self.0[0])
        } else {
            None
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        QTheta(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        QTheta(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        QTheta(self.0.iter().map(|a| -a).collect())
    }

    pub fn mul(&self, o: &Self, ring: &ThetaRing) -> Self {
        let d = ring.degree();
        let mut prod = vec![Rat::zero(); 2 * d - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                prod[i + j] += a * b;
            }
        }
        reduce_mod(&mut prod, ring);
        prod.truncate(d);
        prod.resize(d, Rat::zero());
        QTheta(prod)
    }

    /// Inverse via the extended Euclidean algorithm in `Q[t]`.
    ///
    /// Fails with [`Error::ZeroDivisor`] when `self` is not coprime to `mu`
    /// (possible only if `mu` is reducible) and with
    /// [`Error::DivisionByZero`] on zero.
    pub fn inv(&self, ring: &ThetaRing) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let d = ring.degree();
        if d == 1 {
            return Ok(QTheta(vec![Rat::one() / &self.0[0]]));
        }
        // Extended Euclid on (mu, self) over Q[t], tracking only the
        // cofactor of `self`.
        let mut r0: Vec<Rat> = ring
            .min_poly
            .iter()
            .map(|c| Rat::from_integer(c.clone()))
            .collect();
        let mut r1 = self.0.clone();
        trim(&mut r1);
        let mut s0: Vec<Rat> = vec![];
        let mut s1: Vec<Rat> = vec![Rat::one()];
        while !r1.is_empty() {
            let (q, r) = poly_div_rem(&r0, &r1);
            let sq = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = sq;
        }
        // r0 = gcd(mu, self) up to a unit; invertible iff it is a nonzero constant.
        if r0.len() != 1 {
            return Err(Error::ZeroDivisor(render_poly(&r0)));
        }
        let unit = &r0[0];
        let mut c: Vec<Rat> = s0.iter().map(|s| s / unit).collect();
        c.resize(d, Rat::zero());
        Ok(QTheta(c))
    }

    pub fn pow(&self, mut e: u64, ring: &ThetaRing) -> Self {
        let mut base = self.clone();
        let mut acc = QTheta::one(ring);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, ring);
            }
            base = base.mul(&base, ring);
            e >>= 1;
        }
        acc
    }

    /// Height proxy used by coefficient-size telemetry: max bit length over
    /// numerators and denominators of the coordinates.
    pub fn bit_size(&self) -> u64 {
        self.0
            .iter()
            .flat_map(|r| [r.numer().abs().bits(), r.denom().abs().bits()])
            .max()
            .unwrap_or(0)
    }
}

fn reduce_mod(c: &mut Vec<Rat>, ring: &ThetaRing) {
    let d = ring.degree();
    for i in (d..c.len()).rev() {
        let lead = core::mem::replace(&mut c[i], Rat::zero());
        if lead.is_zero() {
            continue;
        }
        for (j, m) in ring.min_poly.iter().take(d).enumerate() {
            if !m.is_zero() {
                let sub = &lead * Rat::from_integer(m.clone());
                c[i - d + j] -= sub;
            }
        }
    }
    c.truncate(d.max(1));
}

fn trim(c: &mut Vec<Rat>) {
    while c.last().is_some_and(Rat::is_zero) {
        c.pop();
    }
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

fn poly_div_rem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    debug_assert!(!b.is_empty());
    let mut rem = a.to_vec();
    trim(&mut rem);
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let mut quot = vec![Rat::zero(); rem.len() - b.len() + 1];
    let lead = b.last().unwrap();
    while rem.len() >= b.len() {
        let k = rem.len() - b.len();
        let q = rem.last().unwrap() / lead;
        for (j, c) in b.iter().enumerate() {
            let sub = &q * c;
            rem[k + j] -= sub;
        }
        quot[k] = q;
        trim(&mut rem);
        if rem.is_empty() {
            break;
        }
    }
    (quot, rem)
}

fn render_poly(c: &[Rat]) -> alloc::string::String {
    use core::fmt::Write;
    let mut s = alloc::string::String::new();
    for (i, r) in c.iter().enumerate().rev() {
        if r.is_zero() {
            continue;
        }
        if !s.is_empty() {
            s.push_str(" + ");
        }
        let _ = write!(s, "{r}*t^{i}");
    }
    if s.is_empty() {
        "0".to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring_i() -> ThetaRing {
        // t^2 + 1
        ThetaRing::new(vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)]).unwrap()
    }

    #[test]
    fn theta_squared_reduces() {
        let ring = ring_i();
        let t = QTheta::theta(&ring);
        let t2 = t.mul(&t, &ring);
        assert_eq!(t2, QTheta::from_i64(&ring, -1));
    }

    #[test]
    fn inverse_of_theta() {
        let ring = ring_i();
        let t = QTheta::theta(&ring);
        let inv = t.inv(&ring).unwrap();
        assert_eq!(t.mul(&inv, &ring), QTheta::one(&ring));
        // 1/i = -i
        assert_eq!(inv, t.neg());
    }

    #[test]
    fn zero_divisor_detected() {
        // t^2 - 1 is reducible; t - 1 is a zero divisor.
        let ring =
            ThetaRing::new(vec![BigInt::from(-1), BigInt::from(0), BigInt::from(1)]).unwrap();
        let t = QTheta::theta(&ring);
        let e = t.sub(&QTheta::one(&ring));
        assert!(matches!(e.inv(&ring), Err(Error::ZeroDivisor(_))));
    }

    #[test]
    fn degree_one_ring_is_q() {
        let ring = ThetaRing::rational();
        assert!(ring.is_rational());
        assert!(QTheta::theta(&ring).is_zero());
        let two = QTheta::from_i64(&ring, 2);
        assert_eq!(
            two.inv(&ring).unwrap(),
            QTheta::from_rat(&ring, Rat::new(BigInt::from(1), BigInt::from(2)))
        );
    }
}
