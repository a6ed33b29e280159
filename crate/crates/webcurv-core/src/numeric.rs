//! Arbitrary-precision numeric layer: software binary floats, complex
//! arithmetic, simultaneous (Aberth) root refinement, root clustering and
//! the exact-to-numeric embedding.
//!
//! Everything is deterministic: initial guesses come from a seeded LCG and a
//! Pythagorean rotation (no transcendental functions), root lists are sorted
//! lexicographically by (real, imaginary) part, and all arithmetic is
//! dyadic, so identical inputs give bit-identical outputs on any platform.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
#[allow(unused_imports)]
use num_traits::float::FloatCore;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem, FieldScalar, QTheta, Rat};
use crate::upoly::UPoly;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

// ---------------------------------------------------------------------------
// BigFloat
// ---------------------------------------------------------------------------

/// Software binary float `m * 2^e` with mantissas truncated to `prec` bits.
/// Values with small mantissas stay exact; comparisons are exact.
#[derive(Clone, Debug)]
pub struct BigFloat {
    m: BigInt,
    e: i64,
    prec: u32,
}

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat { m: BigInt::zero(), e: 0, prec }
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        let mut f = BigFloat { m: BigInt::from(n), e: 0, prec };
        f.normalize();
        f
    }

    pub fn from_bigint(n: BigInt, prec: u32) -> Self {
        let mut f = BigFloat { m: n, e: 0, prec };
        f.normalize();
        f
    }

    pub fn from_rat(r: &Rat, prec: u32) -> Self {
        let num = Self::from_bigint(r.numer().clone(), prec);
        let den = Self::from_bigint(r.denom().clone(), prec);
        num.div(&den).expect("rational denominator is nonzero")
    }

    /// `2^k` exactly.
    pub fn pow2(k: i64, prec: u32) -> Self {
        BigFloat { m: BigInt::one(), e: k, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.m.is_negative()
    }

    fn normalize(&mut self) {
        if self.m.is_zero() {
            self.e = 0;
            return;
        }
        let bits = self.m.magnitude().bits();
        if bits > self.prec as u64 {
            let shift = bits - self.prec as u64;
            self.m = &self.m >> shift;
            self.e += shift as i64;
        }
    }

    /// Exponent of the most significant bit, `None` for zero.
    fn msb(&self) -> Option<i64> {
        if self.m.is_zero() {
            None
        } else {
            Some(self.m.magnitude().bits() as i64 + self.e)
        }
    }

    pub fn neg(&self) -> Self {
        BigFloat { m: -&self.m, e: self.e, prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        BigFloat { m: self.m.abs(), e: self.e, prec: self.prec }
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        if self.is_zero() {
            let mut r = o.clone();
            r.prec = prec;
            return r;
        }
        if o.is_zero() {
            let mut r = self.clone();
            r.prec = prec;
            return r;
        }
        let (ma, mb) = (self.msb().unwrap(), o.msb().unwrap());
        // A summand far below the rounding tail of the other is dropped.
        if ma > mb + prec as i64 + 4 {
            let mut r = self.clone();
            r.prec = prec;
            return r;
        }
        if mb > ma + prec as i64 + 4 {
            let mut r = o.clone();
            r.prec = prec;
            return r;
        }
        let e = self.e.min(o.e);
        let a = &self.m << (self.e - e) as u64;
        let b = &o.m << (o.e - e) as u64;
        let mut r = BigFloat { m: a + b, e, prec };
        r.normalize();
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        let mut r = BigFloat { m: &self.m * &o.m, e: self.e + o.e, prec };
        r.normalize();
        r
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let prec = self.prec.max(o.prec);
        if self.is_zero() {
            return Ok(Self::zero(prec));
        }
        let abits = self.m.magnitude().bits() as i64;
        let bbits = o.m.magnitude().bits() as i64;
        let shift = (prec as i64 + 2 + bbits - abits).max(0) as u64;
        let m = (&self.m << shift) / &o.m;
        let mut r = BigFloat { m, e: self.e - o.e - shift as i64, prec };
        r.normalize();
        Ok(r)
    }

    /// Square root of a nonnegative value.
    pub fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::Numeric("square root of a negative value".into()));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let prec = self.prec;
        let bits = self.m.magnitude().bits() as i64;
        // Scale so the mantissa has ~2*prec bits and the exponent is even.
        let mut shift = (2 * prec as i64 + 2 - bits).max(0);
        if (self.e - shift) % 2 != 0 {
            shift += 1;
        }
        let m = (&self.m << shift as u64).sqrt();
        let mut r = BigFloat { m, e: (self.e - shift) / 2, prec };
        r.normalize();
        Ok(r)
    }

    /// Exact ordering (values are dyadic rationals).
    pub fn cmp(&self, o: &Self) -> Ordering {
        let sa = self.m.sign();
        let sb = o.m.sign();
        if sa != sb {
            return match (sa, sb) {
                (num_bigint::Sign::Minus, _) => Ordering::Less,
                (_, num_bigint::Sign::Minus) => Ordering::Greater,
                (num_bigint::Sign::NoSign, num_bigint::Sign::Plus) => Ordering::Less,
                (num_bigint::Sign::Plus, num_bigint::Sign::NoSign) => Ordering::Greater,
                _ => Ordering::Equal,
            };
        }
        if self.m.is_zero() {
            return Ordering::Equal;
        }
        match (self.msb(), o.msb()) {
            (Some(a), Some(b)) if a != b => {
                let mag = a.cmp(&b);
                if self.m.is_negative() {
                    mag.reverse()
                } else {
                    mag
                }
            }
            _ => {
                let e = self.e.min(o.e);
                let a = &self.m << (self.e - e) as u64;
                let b = &o.m << (o.e - e) as u64;
                a.cmp(&b)
            }
        }
    }

    pub fn max(&self, o: &Self) -> Self {
        if self.cmp(o) == Ordering::Less {
            o.clone()
        } else {
            self.clone()
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.m.magnitude().bits();
        let (top, e) = if bits > 53 {
            ((&self.m >> (bits - 53)).to_f64().unwrap_or(0.0), self.e + (bits - 53) as i64)
        } else {
            (self.m.to_f64().unwrap_or(0.0), self.e)
        };
        if e > 1_000_000 {
            return if top >= 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        if e < -1_100 {
            // Scale in two steps to dodge subnormal truncation.
            return top * 2f64.powi(-600) * 2f64.powi((e + 600).max(-1074) as i32);
        }
        top * 2f64.powi(e as i32)
    }

    /// Decimal rendering with the given number of fractional digits,
    /// truncated toward zero.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        if self.is_zero() {
            return String::from("0");
        }
        let neg = self.m.is_negative();
        let mag = self.m.abs();
        let ten = BigInt::from(10u32).pow(digits);
        let scaled = if self.e >= 0 {
            (mag * ten) << self.e as u64
        } else {
            (mag * ten) >> (-self.e) as u64
        };
        let s = scaled.to_string();
        let (int_part, frac_part) = if s.len() > digits as usize {
            let split = s.len() - digits as usize;
            (String::from(&s[..split]), String::from(&s[split..]))
        } else {
            let mut frac = String::new();
            for _ in 0..(digits as usize - s.len()) {
                frac.push('0');
            }
            frac.push_str(&s);
            (String::from("0"), frac)
        };
        let frac_trimmed = frac_part.trim_end_matches('0');
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&int_part);
        if !frac_trimmed.is_empty() {
            out.push('.');
            out.push_str(frac_trimmed);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Complex values
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CBig {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl CBig {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        CBig { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        CBig { re: BigFloat::zero(prec), im: BigFloat::zero(prec) }
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        CBig { re: BigFloat::from_i64(n, prec), im: BigFloat::zero(prec) }
    }

    pub fn from_rat(r: &Rat, prec: u32) -> Self {
        CBig { re: BigFloat::from_rat(r, prec), im: BigFloat::zero(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        CBig { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CBig { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> Self {
        CBig { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        CBig {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    pub fn norm_sqr(&self) -> BigFloat {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn abs(&self) -> BigFloat {
        self.norm_sqr().sqrt().expect("norm is nonnegative")
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        let n = o.norm_sqr();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let conj = CBig { re: o.re.clone(), im: o.im.neg() };
        let t = self.mul(&conj);
        Ok(CBig { re: t.re.div(&n)?, im: t.im.div(&n)? })
    }

    pub fn scale(&self, f: &BigFloat) -> Self {
        CBig { re: self.re.mul(f), im: self.im.mul(f) }
    }

    pub fn dist(&self, o: &Self) -> BigFloat {
        self.sub(o).abs()
    }

    /// Lexicographic order by (re, im); exact and deterministic.
    pub fn lex_cmp(&self, o: &Self) -> Ordering {
        self.re.cmp(&o.re).then_with(|| self.im.cmp(&o.im))
    }
}

impl PartialEq for CBig {
    fn eq(&self, other: &Self) -> bool {
        self.re.cmp(&other.re) == Ordering::Equal && self.im.cmp(&other.im) == Ordering::Equal
    }
}

impl FieldElem for CBig {
    fn zero_like(&self) -> Self {
        CBig::zero(self.prec())
    }
    fn one_like(&self) -> Self {
        CBig::from_i64(1, self.prec())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        CBig::from_i64(n, self.prec())
    }
    fn is_zero(&self) -> bool {
        CBig::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        CBig::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        CBig::sub(self, o)
    }
    fn neg(&self) -> Self {
        CBig::neg(self)
    }
    fn mul(&self, o: &Self) -> Self {
        CBig::mul(self, o)
    }
    fn inv(&self) -> Result<Self> {
        CBig::from_i64(1, self.prec()).div(self)
    }
}

// ---------------------------------------------------------------------------
// Exact-to-numeric embedding
// ---------------------------------------------------------------------------

/// Deterministic numeric value for `theta`: the root of the minimal
/// polynomial that is largest in the lexicographic (re, im) order.
pub fn theta_embedding(ctx: &Arc<FieldCtx>, prec: u32) -> Result<CBig> {
    let ring = &ctx.theta;
    if ring.degree() == 1 {
        let v = -Rat::from_integer(ring.min_poly[0].clone());
        return Ok(CBig::from_rat(&v, prec));
    }
    let wp = prec + 32;
    let coeffs: Vec<CBig> = ring
        .min_poly
        .iter()
        .map(|c| CBig::from_rat(&Rat::from_integer(c.clone()), wp))
        .collect();
    let roots = aberth_roots(&coeffs, wp, 1)?;
    let chosen = roots
        .into_iter()
        .max_by(|a, b| a.value.lex_cmp(&b.value))
        .ok_or_else(|| Error::Numeric("theta minimal polynomial has no roots".into()))?;
    Ok(chosen.value)
}

pub fn embed_qtheta(q: &QTheta, theta: &CBig, prec: u32) -> CBig {
    let mut acc = CBig::zero(prec);
    let mut pw = CBig::from_i64(1, prec);
    for c in &q.0 {
        if !Zero::is_zero(c) {
            acc = acc.add(&CBig::from_rat(c, prec).mul(&pw));
        }
        pw = pw.mul(theta);
    }
    acc
}

/// Embed a parameter-free scalar; parameters must be specialized first.
pub fn embed_scalar(s: &FieldScalar, theta: &CBig, prec: u32) -> Result<CBig> {
    let q = s.as_qtheta().ok_or_else(|| {
        Error::ExactUnsupported("cannot embed a scalar containing free parameters".into())
    })?;
    Ok(embed_qtheta(&q, theta, prec))
}

pub fn embed_upoly(p: &UPoly<FieldScalar>, theta: &CBig, prec: u32) -> Result<Vec<CBig>> {
    p.c.iter().map(|c| embed_scalar(c, theta, prec)).collect()
}

// ---------------------------------------------------------------------------
// Aberth-Ehrlich simultaneous iteration
// ---------------------------------------------------------------------------

/// A numeric root with an a-posteriori error radius.
#[derive(Clone, Debug)]
pub struct NumericRoot {
    pub value: CBig,
    pub radius: BigFloat,
}

fn eval_poly(coeffs: &[CBig], z: &CBig) -> CBig {
    let mut acc = coeffs.last().expect("nonempty coefficients").clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.mul(z).add(c);
    }
    acc
}

/// Magnitude bound `sum |c_j| max(1,|z|)^j`, the scale for backward-error
/// convergence tests.
fn eval_scale(abs_coeffs: &[BigFloat], zabs: &BigFloat, prec: u32) -> BigFloat {
    let one = BigFloat::from_i64(1, prec);
    let zm = zabs.max(&one);
    let mut acc = BigFloat::zero(prec);
    let mut pw = one;
    for a in abs_coeffs {
        acc = acc.add(&a.mul(&pw));
        pw = pw.mul(&zm);
    }
    acc
}

struct Lcg(u64);

impl Lcg {
    fn next_unit(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((self.0 >> 33) as f64) / ((1u64 << 31) as f64)
    }
}

/// All complex roots of the polynomial by Aberth-Ehrlich iteration from
/// perturbed-circle starts. Multiple roots converge as clusters; callers
/// needing certified simple roots must pass squarefree input.
pub fn aberth_roots(coeffs: &[CBig], prec: u32, seed: u64) -> Result<Vec<NumericRoot>> {
    let mut c: Vec<CBig> = coeffs.to_vec();
    while c.last().is_some_and(CBig::is_zero) {
        c.pop();
    }
    if c.len() <= 1 {
        return Err(Error::invalid("root finding needs positive degree"));
    }
    // Exact zero roots deflate immediately.
    let mut zero_roots = 0usize;
    while c.first().is_some_and(CBig::is_zero) {
        c.remove(0);
        zero_roots += 1;
    }
    let n = c.len() - 1;
    let mut roots: Vec<NumericRoot> = Vec::with_capacity(n + zero_roots);
    for _ in 0..zero_roots {
        roots.push(NumericRoot {
            value: CBig::zero(prec),
            radius: BigFloat::zero(prec),
        });
    }
    if n == 0 {
        return Ok(roots);
    }

    let deriv: Vec<CBig> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| a.mul(&CBig::from_i64(i as i64, prec)))
        .collect();

    // Cauchy bound 1 + max |c_i| / |c_n|.
    let abs_coeffs: Vec<BigFloat> = c.iter().map(CBig::abs).collect();
    let lead = abs_coeffs.last().unwrap().clone();
    let mut maxq = BigFloat::zero(prec);
    for a in &abs_coeffs[..n] {
        maxq = maxq.max(&a.div(&lead)?);
    }
    let bound = BigFloat::from_i64(1, prec).add(&maxq);

    // Starting points: a Pythagorean rotation walks the circle, the LCG
    // jitters the radius; everything is rational, hence reproducible.
    let mut rng = Lcg(seed ^ 0x9e3779b97f4a7c15);
    let rot = CBig::new(
        BigFloat::from_rat(&Rat::new(BigInt::from(3), BigInt::from(5)), prec),
        BigFloat::from_rat(&Rat::new(BigInt::from(4), BigInt::from(5)), prec),
    );
    let mut dir = CBig::new(
        BigFloat::from_rat(&Rat::new(BigInt::from(12), BigInt::from(13)), prec),
        BigFloat::from_rat(&Rat::new(BigInt::from(5), BigInt::from(13)), prec),
    );
    let mut z: Vec<CBig> = Vec::with_capacity(n);
    for k in 0..n {
        let jitter = rng.next_unit();
        // radius in (0.35, 1.15) * bound, spread with the index
        let r_num = 35 + (80 * k) / n.max(1) + (jitter * 7.0) as usize;
        let radius = bound.mul(&BigFloat::from_rat(
            &Rat::new(BigInt::from(r_num as i64), BigInt::from(100)),
            prec,
        ));
        z.push(dir.scale(&radius));
        dir = dir.mul(&rot);
    }

    let eps_bits = prec as i64 - 8;
    let max_iter = 600 + 20 * n;
    let mut converged = vec![false; n];
    for _iter in 0..max_iter {
        let mut all_done = true;
        let snapshot = z.clone();
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let fz = eval_poly(&c, &snapshot[i]);
            let scale = eval_scale(&abs_coeffs, &snapshot[i].abs(), prec);
            let tol = scale.mul(&BigFloat::pow2(-eps_bits, prec));
            if fz.abs().cmp(&tol) != Ordering::Greater {
                converged[i] = true;
                continue;
            }
            all_done = false;
            let dfz = eval_poly(&deriv, &snapshot[i]);
            let newton = match fz.div(&dfz) {
                Ok(v) => v,
                Err(_) => {
                    // Derivative vanished at the iterate: nudge.
                    z[i] = snapshot[i].add(&CBig::new(
                        BigFloat::pow2(-((prec / 4) as i64), prec),
                        BigFloat::pow2(-((prec / 4) as i64 + 1), prec),
                    ));
                    continue;
                }
            };
            let mut s = CBig::zero(prec);
            for (j, zj) in snapshot.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = snapshot[i].sub(zj);
                match CBig::from_i64(1, prec).div(&d) {
                    Ok(inv) => s = s.add(&inv),
                    Err(_) => {
                        // Coincident iterates: separate them slightly.
                        s = s.add(&CBig::from_i64(1, prec));
                    }
                }
            }
            let denom = CBig::from_i64(1, prec).sub(&newton.mul(&s));
            let w = match newton.div(&denom) {
                Ok(v) => v,
                Err(_) => newton.clone(),
            };
            z[i] = snapshot[i].sub(&w);
        }
        if all_done {
            break;
        }
    }
    // Final check and radii.
    for (i, zi) in z.iter().enumerate() {
        let fz = eval_poly(&c, zi);
        let scale = eval_scale(&abs_coeffs, &zi.abs(), prec);
        let tol = scale.mul(&BigFloat::pow2(-(prec as i64 - 16), prec));
        if fz.abs().cmp(&tol) == Ordering::Greater {
            return Err(Error::Numeric(format!(
                "root iteration did not converge at index {i}"
            )));
        }
        let dfz = eval_poly(&deriv, zi);
        let radius = if dfz.is_zero() {
            BigFloat::pow2(-((prec / 4) as i64), prec)
        } else {
            fz.abs()
                .div(&dfz.abs())?
                .mul(&BigFloat::from_i64(c.len() as i64, prec))
        };
        roots.push(NumericRoot { value: zi.clone(), radius });
    }
    roots.sort_by(|a, b| a.value.lex_cmp(&b.value));
    Ok(roots)
}

/// Squarefree-input wrapper with the precision escalation policy: escalate
/// once on failure, then report.
pub fn numeric_roots(
    p: &UPoly<FieldScalar>,
    theta: &CBig,
    prec: u32,
    seed: u64,
) -> Result<Vec<NumericRoot>> {
    let coeffs = embed_upoly(p, theta, prec)?;
    match aberth_roots(&coeffs, prec, seed) {
        Ok(r) => Ok(r),
        Err(Error::Numeric(_)) => {
            let coeffs = embed_upoly(p, theta, prec * 2)?;
            aberth_roots(&coeffs, prec * 2, seed)
        }
        Err(e) => Err(e),
    }
}

/// Recognize a dyadic value as a small rational by continued fractions.
/// Returns the first convergent within `2^-(prec/2)` of the value whose
/// denominator stays below `max_den_bits` bits.
pub fn recognize_rational(v: &BigFloat, max_den_bits: u32) -> Option<Rat> {
    let prec = v.prec();
    // Exact rational value of the dyadic float.
    let exact = {
        let m = v.clone();
        if m.is_zero() {
            return Some(Rat::zero());
        }
        dyadic_to_rat(&m)
    };
    let tol = BigFloat::pow2(-((prec / 2) as i64), prec)
        .mul(&BigFloat::from_i64(1, prec).max(&v.abs()));
    let mut x = exact.clone();
    let (mut h0, mut h1) = (BigInt::one(), floor_rat(&x));
    let (mut k0, mut k1) = (BigInt::zero(), BigInt::one());
    x = &x - Rat::from_integer(h1.clone());
    for _ in 0..128 {
        let cand = Rat::new(h1.clone(), k1.clone());
        let err = BigFloat::from_rat(&(&exact - &cand), prec).abs();
        if err.cmp(&tol) != Ordering::Greater {
            if k1.magnitude().bits() <= max_den_bits as u64 {
                return Some(cand);
            }
            return None;
        }
        if Zero::is_zero(&x) {
            return None;
        }
        x = Rat::new(x.denom().clone(), x.numer().clone()); // 1/x
        let a = floor_rat(&x);
        x = &x - Rat::from_integer(a.clone());
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        h0 = core::mem::replace(&mut h1, h2);
        k0 = core::mem::replace(&mut k1, k2);
        if k1.magnitude().bits() > max_den_bits as u64 + 8 {
            return None;
        }
    }
    None
}

fn dyadic_to_rat(v: &BigFloat) -> Rat {
    if v.e >= 0 {
        Rat::from_integer(&v.m << v.e as u64)
    } else {
        Rat::new(v.m.clone(), BigInt::one() << (-v.e) as u64)
    }
}

fn floor_rat(r: &Rat) -> BigInt {
    let (q, rem) = num_integer::Integer::div_rem(r.numer(), r.denom());
    if rem.is_negative() {
        q - 1
    } else {
        q
    }
}

// ---------------------------------------------------------------------------
// Clustering and numeric fibers
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct NumericFiberPoint {
    pub center: CBig,
    pub multiplicity: u32,
    pub radius: BigFloat,
}

#[derive(Clone, Debug)]
pub struct NumericFiber {
    pub points: Vec<NumericFiberPoint>,
    /// Multiplicity at `z = infinity` (degree drop of the fiber polynomial).
    pub infinity_multiplicity: u32,
}

/// Group numeric roots into clusters of nearby points; multiplicity equals
/// cluster size. Fails when clusters are not well separated.
pub fn cluster_roots(roots: &[NumericRoot], prec: u32) -> Result<Vec<NumericFiberPoint>> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    let tau = BigFloat::pow2(-((prec / 3) as i64), prec);
    let one = BigFloat::from_i64(1, prec);
    for i in 0..n {
        for j in i + 1..n {
            let scale = one.max(&roots[i].value.abs());
            let thresh = tau.mul(&scale).add(&roots[i].radius).add(&roots[j].radius);
            if roots[i].value.dist(&roots[j].value).cmp(&thresh) != Ordering::Greater {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if group_of[r] == usize::MAX {
            group_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of[r]].push(i);
    }
    let mut points = Vec::with_capacity(groups.len());
    for g in &groups {
        let k = BigFloat::from_i64(g.len() as i64, prec);
        let mut cx = BigFloat::zero(prec);
        let mut cy = BigFloat::zero(prec);
        for &i in g {
            cx = cx.add(&roots[i].value.re);
            cy = cy.add(&roots[i].value.im);
        }
        let center = CBig::new(cx.div(&k)?, cy.div(&k)?);
        let mut radius = BigFloat::zero(prec);
        for &i in g {
            radius = radius.max(&center.dist(&roots[i].value).add(&roots[i].radius));
        }
        points.push(NumericFiberPoint { center, multiplicity: g.len() as u32, radius });
    }
    // Separation: distinct clusters must be far apart relative to their
    // diameters, otherwise the multiplicity assignment is ambiguous.
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[i].center.dist(&points[j].center);
            let danger = points[i]
                .radius
                .add(&points[j].radius)
                .mul(&BigFloat::from_i64(8, prec));
            if d.cmp(&danger) != Ordering::Greater {
                return Err(Error::Numeric("ambiguous root clustering".into()));
            }
        }
    }
    points.sort_by(|a, b| a.center.lex_cmp(&b.center));
    Ok(points)
}

/// Numeric fiber of `num/den` over `value`: roots of `num - value*den`
/// clustered by error disks, plus the multiplicity at infinity. `value`
/// of `None` means the fiber of infinity (roots of `den`).
pub fn numeric_fiber(
    num: &[CBig],
    den: &[CBig],
    value: Option<&CBig>,
    prec: u32,
    seed: u64,
) -> Result<NumericFiber> {
    let d = (num.len().max(den.len())) - 1;
    let mut c: Vec<CBig> = Vec::with_capacity(d + 1);
    for k in 0..=d {
        let a = num.get(k).cloned().unwrap_or_else(|| CBig::zero(prec));
        let b = den.get(k).cloned().unwrap_or_else(|| CBig::zero(prec));
        let v = match value {
            Some(v) => a.sub(&v.mul(&b)),
            None => b,
        };
        c.push(v);
    }
    // Drop leading coefficients that are numerically zero: they encode
    // fiber points at infinity.
    let mut maxabs = BigFloat::zero(prec);
    for a in &c {
        maxabs = maxabs.max(&a.abs());
    }
    let drop_tol = maxabs.mul(&BigFloat::pow2(-((prec / 2) as i64), prec));
    let mut eff = c.clone();
    while eff.len() > 1
        && eff.last().unwrap().abs().cmp(&drop_tol) != Ordering::Greater
    {
        eff.pop();
    }
    let infinity_multiplicity = (d + 1 - eff.len()) as u32;
    if eff.len() <= 1 {
        return Ok(NumericFiber { points: Vec::new(), infinity_multiplicity });
    }
    let run = |wp: u32| -> Result<Vec<NumericFiberPoint>> {
        let coeffs: Vec<CBig> = eff.iter().cloned().collect();
        let roots = aberth_roots(&coeffs, wp, seed)?;
        cluster_roots(&roots, wp)
    };
    let points = match run(prec) {
        Ok(p) => p,
        Err(Error::Numeric(_)) => run(prec * 2)?,
        Err(e) => return Err(e),
    };
    Ok(NumericFiber { points, infinity_multiplicity })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c64(n: i64) -> CBig {
        CBig::from_i64(n, DEFAULT_PRECISION)
    }

    fn upoly_q(cs: &[i64]) -> Vec<CBig> {
        cs.iter().map(|&n| c64(n)).collect()
    }

    #[test]
    fn bigfloat_sqrt() {
        let two = BigFloat::from_i64(2, 128);
        let r = two.sqrt().unwrap();
        let err = r.mul(&r).sub(&two).abs();
        assert_eq!(err.cmp(&BigFloat::pow2(-120, 128)), Ordering::Less);
    }

    #[test]
    fn roots_of_z2_plus_1() {
        let roots = aberth_roots(&upoly_q(&[1, 0, 1]), 256, 1).unwrap();
        assert_eq!(roots.len(), 2);
        let tol = BigFloat::pow2(-200, 256);
        let mut signs = 0i64;
        for r in &roots {
            assert_eq!(r.value.re.abs().cmp(&tol), Ordering::Less);
            let err = r.value.im.abs().sub(&BigFloat::from_i64(1, 256)).abs();
            assert_eq!(err.cmp(&tol), Ordering::Less);
            signs += if r.value.im.is_negative() { -1 } else { 1 };
        }
        // one root near +i and one near -i
        assert_eq!(signs, 0);
    }

    #[test]
    fn wilkinson_style_roots() {
        // prod (z - j), j = 1..10
        let mut c = upoly_q(&[1]);
        for j in 1..=10i64 {
            let f = upoly_q(&[-j, 1]);
            let mut out = alloc::vec![c64(0); c.len() + 1];
            for (i, a) in c.iter().enumerate() {
                for (k, b) in f.iter().enumerate() {
                    out[i + k] = out[i + k].add(&a.mul(b));
                }
            }
            c = out;
        }
        let roots = aberth_roots(&c, 256, 7).unwrap();
        assert_eq!(roots.len(), 10);
        let tol = BigFloat::pow2(-100, 256);
        for (r, j) in roots.iter().zip(1..=10i64) {
            let err = r.value.sub(&c64(j)).abs();
            assert_eq!(err.cmp(&tol), Ordering::Less, "root near {j}");
            assert_eq!(r.radius.cmp(&tol), Ordering::Less);
        }
    }

    #[test]
    fn quartic_with_known_radicals() {
        // z^4 - 228 z^3 + 494 z^2 + 228 z + 1: the w_j of the icosahedral
        // fiber; all real, values 57 -+ 25 sqrt5 +- 5 sqrt(255 -+ 114 sqrt5).
        let roots = aberth_roots(&upoly_q(&[1, 228, 494, -228, 1]), 256, 3).unwrap();
        assert_eq!(roots.len(), 4);
        let p = 256;
        let five = BigFloat::from_i64(5, p);
        let s5 = five.sqrt().unwrap();
        let t = |sign_inner: i64, sign_outer: i64| -> BigFloat {
            // 57 + sign_inner*25*sqrt5 + sign_outer*5*sqrt(255 + sign_inner*114*sqrt5)
            let inner = BigFloat::from_i64(255, p).add(
                &BigFloat::from_i64(sign_inner * 114, p).mul(&s5),
            );
            BigFloat::from_i64(57, p)
                .add(&BigFloat::from_i64(sign_inner * 25, p).mul(&s5))
                .add(&BigFloat::from_i64(sign_outer * 5, p).mul(&inner.sqrt().unwrap()))
        };
        let mut expected = [t(-1, 1), t(-1, -1), t(1, 1), t(1, -1)];
        expected.sort_by(|a, b| a.cmp(b));
        let tol = BigFloat::pow2(-180, p);
        for (r, e) in roots.iter().zip(expected.iter()) {
            assert!(r.value.im.abs().cmp(&tol) == Ordering::Less);
            assert!(r.value.re.sub(e).abs().cmp(&tol) == Ordering::Less);
        }
    }

    #[test]
    fn fiber_clustering_with_multiplicities() {
        // f(z) = z^3: fiber of 0 is one cluster of size 3 at 0
        let fiber = numeric_fiber(
            &upoly_q(&[0, 0, 0, 1]),
            &upoly_q(&[1]),
            Some(&c64(0)),
            256,
            1,
        )
        .unwrap();
        assert_eq!(fiber.infinity_multiplicity, 0);
        assert_eq!(fiber.points.len(), 1);
        assert_eq!(fiber.points[0].multiplicity, 3);

        // f(z) = z^3 + z at its critical value 2i/(3 sqrt 3): fiber has a
        // double point and a simple point.
        let p = 256;
        let three = BigFloat::from_i64(3, p);
        let s3 = three.sqrt().unwrap();
        let v = CBig::new(
            BigFloat::zero(p),
            BigFloat::from_i64(2, p).div(&three.mul(&s3)).unwrap(),
        );
        let fiber = numeric_fiber(
            &upoly_q(&[0, 1, 0, 1]),
            &upoly_q(&[1]),
            Some(&v),
            256,
            1,
        )
        .unwrap();
        let mut mults: Vec<u32> = fiber.points.iter().map(|c| c.multiplicity).collect();
        mults.sort();
        assert_eq!(mults, alloc::vec![1, 2]);
    }

    #[test]
    fn fiber_at_infinity_counts_degree_drop() {
        // f = (z^2+1)^2 / (4 z^2): fiber of infinity = zeros of 4z^2 plus
        // the point at infinity (degree drop 2), each with multiplicity 2.
        let num = upoly_q(&[1, 0, 2, 0, 1]);
        let den = upoly_q(&[0, 0, 4]);
        let fiber = numeric_fiber(&num, &den, None, 256, 1).unwrap();
        assert_eq!(fiber.infinity_multiplicity, 2);
        assert_eq!(fiber.points.len(), 1);
        assert_eq!(fiber.points[0].multiplicity, 2);
    }

    #[test]
    fn decimal_rendering() {
        let p = 128;
        let x = BigFloat::from_rat(&Rat::new(BigInt::from(1), BigInt::from(8)), p);
        assert_eq!(x.to_decimal_string(6), "0.125");
        assert_eq!(x.neg().to_decimal_string(6), "-0.125");
    }
}
