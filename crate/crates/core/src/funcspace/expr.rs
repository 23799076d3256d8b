//! Expression language for test functions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := rational | 'e' '(' poly ')' | 'indicator' '(' cond ')'
//!         | 'random' '(' ident ',' integer ')' | 'clamp01' '(' expr ')'
//!         | '(' expr ')'
//! poly   := pterm (('+' | '-') pterm)*      pterm := [rational '*'] 'n' ['^' int] | rational
//! cond   := 'n' 'mod' int '==' int | 'bohr' '(' rational ';' rational ')'
//!         | int '<=' 'n' '<=' int
//! ```
//!
//! Rationals are written `p`, `p/q` or as decimals (`0.25`), optionally
//! negative. Error offsets are 1-based byte positions.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::{DomainSpec, SampledFunction};
use crate::error::{Error, Result};
use crate::scalar::{dist_to_z, frac_f64, rat_to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(Rational),
    /// e(P(n)) = exp(2πi P(n))
    Phase(Poly),
    Indicator(Cond),
    Random { dist: Dist, seed: u64 },
    Clamp01(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

/// Polynomial in n with rational coefficients; zero coefficients are never
/// stored, so structural equality is polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    pub coeffs: BTreeMap<u32, Rational>,
}

impl Poly {
    pub fn add_term(&mut self, deg: u32, c: Rational) {
        let e = self.coeffs.entry(deg).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&deg);
        }
    }

    pub fn eval(&self, n: i64) -> Rational {
        let x = Rational::from_integer(BigInt::from(n));
        let mut acc = Rational::zero();
        for (&d, c) in &self.coeffs {
            let mut p = Rational::one();
            for _ in 0..d {
                p *= &x;
            }
            acc += c * p;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    /// n ≡ residue (mod modulus)
    Congruence { modulus: u64, residue: u64 },
    /// ‖θn‖_{R/Z} ≤ δ
    Bohr { theta: Rational, delta: Rational },
    /// lo ≤ n ≤ hi
    Interval { lo: i64, hi: i64 },
}

impl Cond {
    pub fn holds(&self, n: i64) -> bool {
        match self {
            Cond::Congruence { modulus, residue } => {
                n.rem_euclid(*modulus as i64) == (*residue % *modulus) as i64
            }
            Cond::Bohr { theta, delta } => {
                let x = theta * Rational::from_integer(BigInt::from(n));
                &dist_to_z(&x) <= delta
            }
            Cond::Interval { lo, hi } => *lo <= n && n <= *hi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    /// ±1 with equal probability
    Pm1,
    /// uniform on [0, 1)
    Unif,
    /// uniform on [−1, 1)
    Sym,
}

impl Dist {
    fn name(&self) -> &'static str {
        match self {
            Dist::Pm1 => "pm1",
            Dist::Unif => "unif",
            Dist::Sym => "sym",
        }
    }

    fn from_name(s: &str) -> Option<Dist> {
        match s {
            "pm1" => Some(Dist::Pm1),
            "unif" => Some(Dist::Unif),
            "sym" => Some(Dist::Sym),
            _ => None,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic noise value at n: a function of (seed, n) only.
fn noise(dist: Dist, seed: u64, n: i64) -> f64 {
    let h = splitmix64(splitmix64(seed) ^ (n as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    let u = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    match dist {
        Dist::Pm1 => {
            if h >> 63 == 1 {
                1.0
            } else {
                -1.0
            }
        }
        Dist::Unif => u,
        Dist::Sym => 2.0 * u - 1.0,
    }
}

impl Expr {
    pub fn eval_at(&self, n: i64) -> Complex64 {
        match self {
            Expr::Const(c) => Complex64::new(rat_to_f64(c), 0.0),
            Expr::Phase(p) => {
                let t = 2.0 * core::f64::consts::PI * frac_f64(&p.eval(n));
                Complex64::new(libm::cos(t), libm::sin(t))
            }
            Expr::Indicator(c) => Complex64::new(if c.holds(n) { 1.0 } else { 0.0 }, 0.0),
            Expr::Random { dist, seed } => Complex64::new(noise(*dist, *seed, n), 0.0),
            Expr::Clamp01(e) => Complex64::new(e.eval_at(n).re.clamp(0.0, 1.0), 0.0),
            Expr::Add(a, b) => a.eval_at(n) + b.eval_at(n),
            Expr::Sub(a, b) => a.eval_at(n) - b.eval_at(n),
            Expr::Mul(a, b) => a.eval_at(n) * b.eval_at(n),
        }
    }
}

/// Evaluate at every point of the domain (1-based on intervals, 0-based on
/// cyclic groups). The bound is 1 when the values allow it.
pub fn eval_expr(expr: &Expr, domain: DomainSpec) -> Result<SampledFunction> {
    let values = (0..domain.size()).map(|i| expr.eval_at(domain.point(i))).collect();
    SampledFunction::with_auto_bound(domain, values)
}

// ---------------------------------------------------------------- printing

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (&d, c)) in self.coeffs.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mono = match d {
                0 => String::new(),
                1 => "n".to_string(),
                _ => format!("n^{d}"),
            };
            if d == 0 {
                write!(f, "{}", fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", fmt_rational(&a))?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Congruence { modulus, residue } => write!(f, "n mod {modulus} == {residue}"),
            Cond::Bohr { theta, delta } => {
                write!(f, "bohr({}; {})", fmt_rational(theta), fmt_rational(delta))
            }
            Cond::Interval { lo, hi } => write!(f, "{lo} <= n <= {hi}"),
        }
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        _ => 3,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{}", fmt_rational(c)),
            Expr::Phase(p) => write!(f, "e({p})"),
            Expr::Indicator(c) => write!(f, "indicator({c})"),
            Expr::Random { dist, seed } => write!(f, "random({}, {seed})", dist.name()),
            Expr::Clamp01(e) => write!(f, "clamp01({e})"),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, "{}", if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, " * ")?;
                write_child(f, b, 3)
            }
        }
    }
}

// ----------------------------------------------------------------- parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Comma,
    Semi,
    EqEq,
    Le,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(r) => format!("number {}", fmt_rational(r)),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::End => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        let pos = i + 1;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && i + 1 < b.len() && b[i + 1].is_ascii_digit()) {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &src[start..i];
            let mut frac_part = "";
            if i < b.len() && b[i] == b'.' {
                i += 1;
                let fs = i;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &src[fs..i];
            }
            let digits = format!("{int_part}{frac_part}");
            let num: BigInt = digits.parse().map_err(|_| Error::Syntax {
                offset: pos,
                msg: "malformed number".into(),
            })?;
            let den = num_traits::pow(BigInt::from(10), frac_part.len());
            out.push((Tok::Num(Rational::new(num, den)), pos));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), pos));
            continue;
        }
        let (tok, len) = match c {
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'+' => (Tok::Plus, 1),
            b'-' => (Tok::Minus, 1),
            b'*' => (Tok::Star, 1),
            b'/' => (Tok::Slash, 1),
            b'^' => (Tok::Caret, 1),
            b',' => (Tok::Comma, 1),
            b';' => (Tok::Semi, 1),
            b'=' if b.get(i + 1) == Some(&b'=') => (Tok::EqEq, 2),
            b'<' if b.get(i + 1) == Some(&b'=') => (Tok::Le, 2),
            _ => {
                return Err(Error::Syntax {
                    offset: pos,
                    msg: format!("unexpected character `{}`", src[i..].chars().next().unwrap_or('?')),
                })
            }
        };
        out.push((tok, pos));
        i += len;
    }
    out.push((Tok::End, src.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset: self.offset(), msg: msg.into() })
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {}, found {}", describe(&t), describe(self.peek())))
        }
    }

    fn expect_ident(&mut self, name: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == name => {
                self.bump();
                Ok(())
            }
            t => {
                let d = describe(t);
                self.err(format!("expected `{name}`, found {d}"))
            }
        }
    }

    /// rational := ['-'] number ['/' number]
    fn rational(&mut self) -> Result<Rational> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let Tok::Num(mut r) = self.peek().clone() else {
            return self.err(format!("expected a number, found {}", describe(self.peek())));
        };
        self.bump();
        if *self.peek() == Tok::Slash {
            self.bump();
            let Tok::Num(d) = self.peek().clone() else {
                return self.err("expected a denominator");
            };
            if d.is_zero() {
                return self.err("zero denominator");
            }
            self.bump();
            r /= d;
        }
        Ok(if neg { -r } else { r })
    }

    fn integer(&mut self) -> Result<i64> {
        let off = self.offset();
        let r = self.rational()?;
        if !r.is_integer() {
            return Err(Error::Syntax { offset: off, msg: "expected an integer".into() });
        }
        i64::try_from(r.to_integer())
            .map_err(|_| Error::Syntax { offset: off, msg: "integer out of range".into() })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(_) | Tok::Minus => Ok(Expr::Const(self.rational()?)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "e" => {
                        self.expect(Tok::LParen)?;
                        let p = self.poly()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Phase(p))
                    }
                    "indicator" => {
                        self.expect(Tok::LParen)?;
                        let c = self.cond()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Indicator(c))
                    }
                    "random" => {
                        self.expect(Tok::LParen)?;
                        let Tok::Ident(d) = self.peek().clone() else {
                            return self.err("expected a distribution name");
                        };
                        let dist = Dist::from_name(&d).ok_or(Error::UnknownIdentifier(d))?;
                        self.bump();
                        self.expect(Tok::Comma)?;
                        let off = self.offset();
                        let seed = self.integer()?;
                        if seed < 0 {
                            return Err(Error::Syntax { offset: off, msg: "seed must be >= 0".into() });
                        }
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Random { dist, seed: seed as u64 })
                    }
                    "clamp01" => {
                        self.expect(Tok::LParen)?;
                        let e = self.expr()?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::Clamp01(Box::new(e)))
                    }
                    _ => Err(Error::UnknownIdentifier(name)),
                }
            }
            t => self.err(format!("unexpected {}", describe(&t))),
        }
    }

    fn poly(&mut self) -> Result<Poly> {
        let mut p = Poly::default();
        let mut sign = Rational::one();
        loop {
            if *self.peek() == Tok::Minus {
                self.bump();
                sign = -sign;
            }
            let (deg, c) = self.pterm()?;
            p.add_term(deg, sign * c);
            sign = match self.peek() {
                Tok::Plus => Rational::one(),
                Tok::Minus => -Rational::one(),
                _ => return Ok(p),
            };
            self.bump();
        }
    }

    fn pterm(&mut self) -> Result<(u32, Rational)> {
        let coef = match self.peek() {
            Tok::Num(_) => {
                let c = self.rational()?;
                if *self.peek() != Tok::Star {
                    return Ok((0, c));
                }
                self.bump();
                c
            }
            _ => Rational::one(),
        };
        match self.peek().clone() {
            Tok::Ident(s) if s == "n" => {
                self.bump();
            }
            Tok::Ident(s) => return Err(Error::UnknownIdentifier(s)),
            t => return self.err(format!("expected `n`, found {}", describe(&t))),
        }
        let mut deg = 1u32;
        if *self.peek() == Tok::Caret {
            self.bump();
            let off = self.offset();
            let d = self.integer()?;
            if !(0..=64).contains(&d) {
                return Err(Error::Syntax { offset: off, msg: "exponent must be in 0..=64".into() });
            }
            deg = d as u32;
        }
        Ok((deg, coef))
    }

    fn cond(&mut self) -> Result<Cond> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "n" => {
                self.bump();
                self.expect_ident("mod")?;
                let off = self.offset();
                let m = self.integer()?;
                if m < 1 {
                    return Err(Error::Syntax { offset: off, msg: "modulus must be >= 1".into() });
                }
                self.expect(Tok::EqEq)?;
                let off = self.offset();
                let r = self.integer()?;
                if r < 0 {
                    return Err(Error::Syntax { offset: off, msg: "residue must be >= 0".into() });
                }
                Ok(Cond::Congruence { modulus: m as u64, residue: r as u64 })
            }
            Tok::Ident(s) if s == "bohr" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let theta = self.rational()?;
                self.expect(Tok::Semi)?;
                let delta = self.rational()?;
                self.expect(Tok::RParen)?;
                Ok(Cond::Bohr { theta, delta })
            }
            Tok::Num(_) | Tok::Minus => {
                let lo = self.integer()?;
                self.expect(Tok::Le)?;
                self.expect_ident("n")?;
                self.expect(Tok::Le)?;
                let hi = self.integer()?;
                Ok(Cond::Interval { lo, hi })
            }
            Tok::Ident(s) => Err(Error::UnknownIdentifier(s)),
            t => self.err(format!("expected a condition, found {}", describe(&t))),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err(format!("trailing input: {}", describe(p.peek())));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use alloc::vec;

    #[test]
    fn phase_node_with_rational_coefficient() {
        let e = parse_expr("e(1/3*n^2)").unwrap();
        let mut p = Poly::default();
        p.add_term(2, rat(1, 3));
        assert_eq!(e, Expr::Phase(p));
    }

    #[test]
    fn linear_combination() {
        let e = parse_expr("0.5 + 0.5*e(1/7*n)").unwrap();
        assert!(matches!(e, Expr::Add(..)));
        assert_eq!(e.to_string(), "1/2 + 1/2 * e(1/7*n)");
    }

    #[test]
    fn unbalanced_paren_reports_offset_six() {
        assert_eq!(
            parse_expr("e(n^2").unwrap_err(),
            Error::Syntax { offset: 6, msg: "expected RParen, found end of input".into() }
        );
    }

    #[test]
    fn unknown_identifiers() {
        assert_eq!(parse_expr("cos(n)"), Err(Error::UnknownIdentifier("cos".into())));
        assert_eq!(parse_expr("random(cauchy, 1)"), Err(Error::UnknownIdentifier("cauchy".into())));
    }

    #[test]
    fn evaluation_examples() {
        let one = eval_expr(&parse_expr("1").unwrap(), DomainSpec::Interval(4)).unwrap();
        assert!(one.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));

        let alt = eval_expr(&parse_expr("e(1/2*n)").unwrap(), DomainSpec::Cyclic(2)).unwrap();
        assert!((alt.values()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((alt.values()[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);

        let ev = eval_expr(&parse_expr("indicator(n mod 2 == 0)").unwrap(), DomainSpec::Cyclic(4))
            .unwrap();
        let re: Vec<f64> = ev.values().iter().map(|v| v.re).collect();
        assert_eq!(re, vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn conditions() {
        let b = parse_expr("indicator(bohr(1/3; 0))").unwrap();
        let v = eval_expr(&b, DomainSpec::Interval(6)).unwrap();
        let re: Vec<f64> = v.values().iter().map(|v| v.re).collect();
        assert_eq!(re, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let iv = eval_expr(&parse_expr("indicator(2 <= n <= 3)").unwrap(), DomainSpec::Interval(4))
            .unwrap();
        let re: Vec<f64> = iv.values().iter().map(|v| v.re).collect();
        assert_eq!(re, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn random_is_reproducible_and_bounded() {
        let e = parse_expr("random(pm1, 7)").unwrap();
        let a = eval_expr(&e, DomainSpec::Cyclic(64)).unwrap();
        let b = eval_expr(&e, DomainSpec::Cyclic(64)).unwrap();
        assert_eq!(a, b);
        assert!(a.values().iter().all(|v| v.re == 1.0 || v.re == -1.0));
        let c = eval_expr(&parse_expr("random(pm1, 8)").unwrap(), DomainSpec::Cyclic(64)).unwrap();
        assert_ne!(a, c);
        let u = eval_expr(&parse_expr("random(unif, 1)").unwrap(), DomainSpec::Interval(100)).unwrap();
        assert!(u.values().iter().all(|v| (0.0..1.0).contains(&v.re)));
    }

    #[test]
    fn clamp_takes_real_part() {
        let e = parse_expr("clamp01(2 * e(1/4*n))").unwrap();
        let v = eval_expr(&e, DomainSpec::Cyclic(4)).unwrap();
        let re: Vec<f64> = v.values().iter().map(|v| v.re).collect();
        assert_eq!(re[0], 1.0);
        assert_eq!(re[2], 0.0);
    }

    #[test]
    fn printer_parenthesizes_where_needed() {
        for src in ["(1 + 2) * 3", "1 - (2 - 3)", "1 - -1/2", "-1/3 * e(n^2 - n + 1/5)", "2 * (3 * 4)"] {
            let e = parse_expr(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }
}
