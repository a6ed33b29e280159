//! The expression grammar shared by the library renderers and the CLI.
//!
//! Variables `x y p z q`, integers, rationals `a/b`, `theta`, `i` (only when
//! the field contains `theta` with `theta^2 + 1 = 0`), parameter identifiers,
//! operators `+ - * / ^` and parentheses. Implicit multiplication is a syntax
//! error. Rendering is canonical (graded-lex descending, fixed factor order),
//! and `parse(render(v))` reproduces `v` for every value the crate prints.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::Write;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{rat_to_string, FieldCtx, FieldScalar, ParamPoly, QTheta, Rat};
use crate::poly::{MultiPoly, Var};
use crate::ratfunc::RationalFunction;

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn error(&self, at: usize, message: &str) -> Error {
        Error::Parse { offset: at, message: message.to_string() }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let at = self.pos;
            let c = self.src[self.pos];
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    out.push((at, Tok::Plus));
                    self.pos += 1;
                }
                b'-' => {
                    out.push((at, Tok::Minus));
                    self.pos += 1;
                }
                b'*' => {
                    out.push((at, Tok::Star));
                    self.pos += 1;
                }
                b'/' => {
                    out.push((at, Tok::Slash));
                    self.pos += 1;
                }
                b'^' => {
                    out.push((at, Tok::Caret));
                    self.pos += 1;
                }
                b'(' => {
                    out.push((at, Tok::LParen));
                    self.pos += 1;
                }
                b')' => {
                    out.push((at, Tok::RParen));
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    let start = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let n = text
                        .parse::<BigInt>()
                        .map_err(|_| self.error(start, "invalid integer"))?;
                    out.push((start, Tok::Int(n)));
                }
                b'a'..=b'z' | b'_' => {
                    let start = self.pos;
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_lowercase()
                            || self.src[self.pos].is_ascii_digit()
                            || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    out.push((start, Tok::Ident(text.to_string())));
                }
                _ => return Err(self.error(at, "unexpected character")),
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    ctx: &'a Arc<FieldCtx>,
    allowed: &'a [Var],
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.idx)
            .map(|(o, _)| *o)
            .unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn err(&self, message: &str) -> Error {
        Error::Parse { offset: self.offset(), message: message.to_string() }
    }

    fn expr(&mut self) -> Result<RationalFunction> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.factor()?)?;
                }
                Some(Tok::Slash) => {
                    let at = self.offset();
                    self.bump();
                    let rhs = self.factor()?;
                    acc = acc.mul(&rhs.inv().map_err(|_| Error::Parse {
                        offset: at,
                        message: "division by zero".to_string(),
                    })?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RationalFunction> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(self.factor()?.neg());
        }
        let mut base = self.primary()?;
        while matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            match self.bump() {
                Some(Tok::Int(n)) => {
                    let e = u32::try_from(&n)
                        .map_err(|_| self.err("exponent out of range"))?;
                    base = base.pow(e)?;
                }
                _ => return Err(self.err("expected a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<RationalFunction> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(RationalFunction::constant(FieldScalar::from_rat(
                self.ctx,
                Rat::from_integer(n),
            ))),
            Some(Tok::Ident(name)) => self.ident(at, &name),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Parse {
                        offset: self.offset(),
                        message: "expected closing parenthesis".to_string(),
                    }),
                }
            }
            Some(_) => Err(Error::Parse {
                offset: at,
                message: "expected an integer, identifier or parenthesis".to_string(),
            }),
            None => Err(Error::Parse {
                offset: at,
                message: "unexpected end of expression".to_string(),
            }),
        }
    }

    fn ident(&mut self, at: usize, name: &str) -> Result<RationalFunction> {
        if name == "theta" {
            return Ok(RationalFunction::constant(FieldScalar::theta(self.ctx)));
        }
        if name == "i" {
            if self.ctx.has_imaginary_unit() {
                return Ok(RationalFunction::constant(FieldScalar::theta(self.ctx)));
            }
            return Err(Error::Parse {
                offset: at,
                message: "`i` requires the field theta^2 + 1 = 0".to_string(),
            });
        }
        if name.len() == 1 {
            if let Some(v) = Var::from_letter(name.as_bytes()[0] as char) {
                if self.allowed.contains(&v) {
                    return Ok(RationalFunction::var(self.ctx, v));
                }
                return Err(Error::Parse {
                    offset: at,
                    message: "variable not allowed in this position".to_string(),
                });
            }
        }
        match FieldScalar::param(self.ctx, name) {
            Ok(s) => Ok(RationalFunction::constant(s)),
            Err(_) => Err(Error::Parse {
                offset: at,
                message: "unknown identifier".to_string(),
            }),
        }
    }
}

/// Parse a rational expression over the given variables.
pub fn parse_rational(
    src: &str,
    ctx: &Arc<FieldCtx>,
    allowed: &[Var],
) -> Result<RationalFunction> {
    let toks = Lexer::new(src).tokens()?;
    let mut p = Parser { toks, idx: 0, ctx, allowed, src_len: src.len() };
    let e = p.expr()?;
    if p.idx != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

/// Parse a polynomial expression; rejects nonconstant denominators.
pub fn parse_poly(src: &str, ctx: &Arc<FieldCtx>, allowed: &[Var]) -> Result<MultiPoly> {
    let r = parse_rational(src, ctx, allowed)?;
    if !r.is_polynomial() {
        return Err(Error::Parse {
            offset: 0,
            message: "expected a polynomial, found a nonconstant denominator".to_string(),
        });
    }
    let den = r
        .denominator()
        .as_constant()
        .expect("constant denominator");
    let inv = den.inv().expect("nonzero denominator");
    Ok(r.numerator().scale(&inv))
}

// ---------------------------------------------------------------------------
// Renderer
// ---------------------------------------------------------------------------

fn render_qtheta(q: &QTheta, out: &mut String) {
    // Sum over theta powers, descending.
    let mut first = true;
    for (k, c) in q.0.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.numer().is_negative();
        let mag = if neg { -c } else { c.clone() };
        if first {
            if neg {
                out.push('-');
            }
            first = false;
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if k == 0 {
            out.push_str(&rat_to_string(&mag));
        } else {
            if !mag.is_one() {
                out.push_str(&rat_to_string(&mag));
                out.push('*');
            }
            out.push_str("theta");
            if k > 1 {
                let _ = write!(out, "^{k}");
            }
        }
    }
    if first {
        out.push('0');
    }
}

fn qtheta_is_single_term(q: &QTheta) -> bool {
    q.0.iter().filter(|c| !c.is_zero()).count() <= 1
}

/// Render one product term `coef * mono` where the caller supplies the
/// monomial factor strings; returns the sign separately.
fn render_term(coef: &QTheta, factors: &[String], out: &mut String) -> bool {
    // Extract sign when the coefficient is a single theta-term.
    let single = qtheta_is_single_term(coef);
    let (neg, body) = if single {
        let (k, c) = coef
            .0
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, c.clone()))
            .unwrap_or((0, Rat::zero()));
        let neg = c.numer().is_negative();
        let mag = if neg { -c } else { c };
        let mut body = String::new();
        if k == 0 {
            if !mag.is_one() || factors.is_empty() {
                body.push_str(&rat_to_string(&mag));
            }
        } else {
            if !mag.is_one() {
                body.push_str(&rat_to_string(&mag));
                body.push('*');
            }
            body.push_str("theta");
            if k > 1 {
                let _ = write!(body, "^{k}");
            }
        }
        (neg, body)
    } else {
        let mut body = String::from("(");
        render_qtheta(coef, &mut body);
        body.push(')');
        (false, body)
    };
    let mut parts: Vec<&str> = Vec::new();
    if !body.is_empty() {
        parts.push(&body);
    }
    for f in factors {
        parts.push(f);
    }
    if parts.is_empty() {
        out.push('1');
    } else {
        out.push_str(&parts.join("*"));
    }
    neg
}

fn param_factors(ctx: &FieldCtx, exps: &[u32]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, &e) in exps.iter().enumerate() {
        if e == 0 {
            continue;
        }
        let mut s = ctx.params[i].clone();
        if e > 1 {
            let _ = write!(s, "^{e}");
        }
        out.push(s);
    }
    out
}

fn render_parampoly(ctx: &FieldCtx, p: &ParamPoly, out: &mut String) {
    if p.is_zero() {
        out.push('0');
        return;
    }
    let mut first = true;
    for (m, c) in p.terms.iter().rev() {
        let factors = param_factors(ctx, &m.0);
        let mut term = String::new();
        let neg = render_term(c, &factors, &mut term);
        if first {
            if neg {
                out.push('-');
            }
            first = false;
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&term);
    }
}

/// Canonical rendering of a scalar.
pub fn render_scalar(s: &FieldScalar) -> String {
    let ctx = s.ctx();
    let mut out = String::new();
    let den_is_one = s
        .denominator()
        .as_constant()
        .is_some_and(|c| c == QTheta::one(&ctx.theta));
    if den_is_one {
        render_parampoly(ctx, s.numerator(), &mut out);
    } else {
        out.push('(');
        render_parampoly(ctx, s.numerator(), &mut out);
        out.push_str(")/(");
        render_parampoly(ctx, s.denominator(), &mut out);
        out.push(')');
    }
    out
}

fn scalar_as_single_term(s: &FieldScalar) -> Option<(bool, String, Vec<String>)> {
    // A scalar that is one parameter-monomial with a single theta-term and
    // denominator 1 can be merged into a polynomial term without parens.
    let ctx = s.ctx();
    if !s
        .denominator()
        .as_constant()
        .is_some_and(|c| c == QTheta::one(&ctx.theta))
    {
        return None;
    }
    if s.numerator().terms.len() != 1 {
        return None;
    }
    let (m, c) = s.numerator().terms.iter().next().unwrap();
    if !qtheta_is_single_term(c) {
        return None;
    }
    let factors = param_factors(ctx, &m.0);
    let mut body = String::new();
    let neg = render_term(c, &[], &mut body);
    Some((neg, body, factors))
}

/// Canonical rendering of a multivariate polynomial.
pub fn render_poly(p: &MultiPoly) -> String {
    if p.is_zero() {
        return String::from("0");
    }
    let mut out = String::new();
    let mut first = true;
    for (m, c) in p.terms.iter().rev() {
        let mut var_factors: Vec<String> = Vec::new();
        for v in Var::ALL {
            let e = m.0[v.index()];
            if e == 0 {
                continue;
            }
            let mut s = String::new();
            s.push(v.letter());
            if e > 1 {
                let _ = write!(s, "^{e}");
            }
            var_factors.push(s);
        }
        let (neg, parts) = match scalar_as_single_term(c) {
            Some((neg, body, mut pfactors)) => {
                let mut parts: Vec<String> = Vec::new();
                let body_is_one = body == "1" || body.is_empty();
                if !body_is_one || (pfactors.is_empty() && var_factors.is_empty()) {
                    let b = if body.is_empty() { String::from("1") } else { body };
                    parts.push(b);
                }
                parts.append(&mut pfactors);
                parts.extend(var_factors.iter().cloned());
                (neg, parts)
            }
            None => {
                let mut parts: Vec<String> = Vec::new();
                let mut b = String::from("(");
                b.push_str(&render_scalar(c));
                b.push(')');
                parts.push(b);
                parts.extend(var_factors.iter().cloned());
                (false, parts)
            }
        };
        if first {
            if neg {
                out.push('-');
            }
            first = false;
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        out.push_str(&parts.join("*"));
    }
    out
}

/// Canonical rendering of a rational function: `num` or `(num)/(den)`.
pub fn render_rational(r: &RationalFunction) -> String {
    if r.is_polynomial() {
        // Fold the constant denominator into the numerator for display.
        let den = r.denominator().as_constant().expect("constant denominator");
        let inv = den.inv().expect("nonzero denominator");
        return render_poly(&r.numerator().scale(&inv));
    }
    let mut out = String::from("(");
    out.push_str(&render_poly(r.numerator()));
    out.push_str(")/(");
    out.push_str(&render_poly(r.denominator()));
    out.push(')');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const XY: &[Var] = &[Var::X, Var::Y];
    const XYP: &[Var] = &[Var::X, Var::Y, Var::P];

    #[test]
    fn parse_simple_polys() {
        let ctx = FieldCtx::rational();
        let f = parse_poly("y^3", &ctx, XY).unwrap();
        assert_eq!(f, MultiPoly::var(&ctx, Var::Y).pow(3).unwrap());
        let g = parse_poly("(y^2 - x)*p^2 + 2*x*p - x", &ctx, XYP).unwrap();
        assert_eq!(g.degree_in(Var::P), 2);
        assert_eq!(g.coeff_of(Var::P, 0), MultiPoly::var(&ctx, Var::X).neg());
    }

    #[test]
    fn syntax_error_offsets() {
        let ctx = FieldCtx::rational();
        let e = parse_poly("x^", &ctx, XY).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 2, .. }));
        let e = parse_poly("x y", &ctx, XY).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 2, .. }));
        let e = parse_poly("w + 1", &ctx, XY).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 0, .. }));
    }

    #[test]
    fn imaginary_unit_gate() {
        let q = FieldCtx::rational();
        assert!(parse_poly("i*x", &q, XY).is_err());
        let gauss = FieldCtx::with_theta(alloc::vec![
            BigInt::from(1),
            BigInt::from(0),
            BigInt::from(1),
        ])
        .unwrap();
        let f = parse_poly("i*x", &gauss, XY).unwrap();
        assert_eq!(f, MultiPoly::var(&gauss, Var::X).scale(&FieldScalar::theta(&gauss)));
    }

    #[test]
    fn render_parse_round_trip() {
        let ctx = FieldCtx::with_params(&["lambda", "mu"]);
        let samples = [
            "x^2*y - 3*x + 1/2",
            "lambda*x - mu*y^3",
            "-x",
            "0",
            "2/3",
        ];
        for s in samples {
            let f = parse_poly(s, &ctx, XY).unwrap();
            let rendered = render_poly(&f);
            let g = parse_poly(&rendered, &ctx, XY).unwrap();
            assert_eq!(f, g, "round trip through {rendered}");
            assert_eq!(rendered, render_poly(&g));
        }
    }

    #[test]
    fn render_rational_round_trip() {
        let ctx = FieldCtx::rational();
        let r = parse_rational("(14*x)/(3*x^2 - 3)", &ctx, XY).unwrap();
        let s = render_rational(&r);
        let r2 = parse_rational(&s, &ctx, XY).unwrap();
        assert_eq!(r, r2);
        assert_eq!(s, render_rational(&r2));
    }

    #[test]
    fn rationals_and_theta_render() {
        let gauss = FieldCtx::with_theta(alloc::vec![
            BigInt::from(1),
            BigInt::from(0),
            BigInt::from(1),
        ])
        .unwrap();
        let f = parse_poly("(2*theta + 1)*x + 5/3", &gauss, XY).unwrap();
        let s = render_poly(&f);
        let g = parse_poly(&s, &gauss, XY).unwrap();
        assert_eq!(f, g);
    }
}
