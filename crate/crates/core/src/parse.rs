//! Input grammar for `f` and `P`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' INT)*
//! atom   := INT | 't' | 'z' | '(' expr ')'
//! ```
//!
//! Multiplication is always explicit (`7*t`, not `7t`). Exponents are
//! non-negative integer literals. `z` may not occur in a denominator, and
//! not at all in `P`. Error positions are 0-based character offsets.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::ffheight::DynPair;
use crate::poly::RatFunc;

/// Largest accepted exponent literal.
pub const MAX_EXPONENT: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    T,
    Z,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number {n}"),
        Tok::T => "'t'".into(),
        Tok::Z => "'z'".into(),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let tok = match c {
            _ if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                out.push((Tok::Int(digits.parse().unwrap()), start));
                continue;
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "t" => Tok::T,
                    "z" => Tok::Z,
                    _ => return Err(syntax(start, format!("unknown identifier '{word}'"))),
                };
                out.push((tok, start));
                continue;
            }
            '+' => Tok::Plus,
            '-' | '−' => Tok::Minus,
            '*' | '·' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(syntax(i, format!("unexpected character '{c}'"))),
        };
        out.push((tok, i));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

/// A polynomial in `z` with coefficients in Q(t), lowest degree first.
#[derive(Clone, Debug, PartialEq)]
struct ZPoly(Vec<RatFunc>);

impl ZPoly {
    fn constant(r: RatFunc) -> Self {
        ZPoly(vec![r]).trim()
    }

    fn z() -> Self {
        ZPoly(vec![RatFunc::zero(), RatFunc::one()])
    }

    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(RatFunc::is_zero) {
            self.0.pop();
        }
        self
    }

    fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn coeff(&self, i: usize) -> RatFunc {
        self.0.get(i).cloned().unwrap_or_else(RatFunc::zero)
    }

    fn add(&self, rhs: &ZPoly) -> ZPoly {
        let n = self.0.len().max(rhs.0.len());
        ZPoly((0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect()).trim()
    }

    fn neg(&self) -> ZPoly {
        ZPoly(self.0.iter().map(|c| -c).collect())
    }

    fn mul(&self, rhs: &ZPoly) -> ZPoly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return ZPoly(vec![]);
        }
        let mut out = vec![RatFunc::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        ZPoly(out).trim()
    }

    fn pow(&self, e: u32) -> ZPoly {
        let mut acc = ZPoly::constant(RatFunc::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
    first_z: Option<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.i].clone();
        if t.0 != Tok::End {
            self.i += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<ZPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<ZPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Slash => {
                    let (_, at) = self.bump();
                    let rhs = self.unary()?;
                    if rhs.degree() > 0 {
                        return Err(syntax(at, "division by an expression involving z"));
                    }
                    let r = rhs.coeff(0);
                    if r.is_zero() {
                        return Err(syntax(at, "division by zero"));
                    }
                    let inv = ZPoly::constant(r.recip()?);
                    acc = acc.mul(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ZPoly> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ZPoly> {
        let mut base = self.atom()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let (tok, at) = self.bump();
            let Tok::Int(n) = tok else {
                return Err(syntax(
                    at,
                    format!(
                        "exponent must be a non-negative integer literal, found {}",
                        describe(&tok)
                    ),
                ));
            };
            let e = n
                .to_u32()
                .filter(|e| *e <= MAX_EXPONENT)
                .ok_or_else(|| syntax(at, format!("exponent {n} exceeds {MAX_EXPONENT}")))?;
            base = base.pow(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ZPoly> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Int(n) => Ok(ZPoly::constant(RatFunc::constant(Rational::from_integer(
                n,
            )))),
            Tok::T => Ok(ZPoly::constant(RatFunc::t())),
            Tok::Z => {
                self.first_z.get_or_insert(at);
                Ok(ZPoly::z())
            }
            Tok::LParen => {
                let inner = self.expr()?;
                let (close, at) = self.bump();
                if close != Tok::RParen {
                    return Err(syntax(
                        at,
                        format!("expected ')', found {}", describe(&close)),
                    ));
                }
                Ok(inner)
            }
            other => Err(syntax(
                at,
                format!("expected a number, t, z or '(', found {}", describe(&other)),
            )),
        }
    }
}

/// Parses `src` into a polynomial in z; also returns the offset of the first `z`.
fn parse_zpoly(src: &str) -> Result<(ZPoly, Option<usize>)> {
    let mut p = Parser {
        toks: tokenize(src)?,
        i: 0,
        first_z: None,
    };
    if *p.peek() == Tok::End {
        return Err(syntax(0, "empty expression"));
    }
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(
            p.pos(),
            format!("unexpected {}", describe(p.peek())),
        ));
    }
    Ok((out, p.first_z))
}

/// Parses an element of Q(t).
pub fn parse_ratfunc(src: &str) -> Result<RatFunc> {
    let (e, z) = parse_zpoly(src)?;
    if let Some(pos) = z {
        if e.degree() > 0 {
            return Err(syntax(pos, "z is not allowed here"));
        }
    }
    Ok(e.coeff(0))
}

/// Parses a rational number such as `-3/7`.
pub fn parse_rational(src: &str) -> Result<Rational> {
    let r = parse_ratfunc(src)?;
    r.constant_value()
        .ok_or_else(|| syntax(0, format!("'{src}' is not a rational number")))
}

/// Parses `f` (a polynomial in z over Q(t)) and the point `P` in Q(t).
pub fn parse_dynpair(f_src: &str, p_src: &str) -> Result<DynPair> {
    let (f, _) = parse_zpoly(f_src)?;
    if f.degree() < 2 {
        return Err(Error::InvalidArgument(format!(
            "f = {f_src} has degree {} in z; need at least 2",
            f.degree()
        )));
    }
    let (p, z) = parse_zpoly(p_src)?;
    if let Some(pos) = z {
        return Err(syntax(pos, "P must not contain z"));
    }
    DynPair::new(f.0, p.coeff(0))
}

fn needs_parens(s: &str) -> bool {
    s.chars().skip(1).any(|c| c == '+' || c == '-' || c == '/')
}

/// Renders an element of Q(t) in the input grammar.
pub fn render_ratfunc(r: &RatFunc) -> String {
    r.render("t")
}

/// Renders `f` in the input grammar.
pub fn render_f(fp: &DynPair) -> String {
    let mut parts = Vec::new();
    for (i, a) in fp.coeffs().iter().enumerate().rev() {
        if a.is_zero() {
            continue;
        }
        let mono = match i {
            0 => None,
            1 => Some("z".to_string()),
            _ => Some(format!("z^{i}")),
        };
        let c = render_ratfunc(a);
        parts.push(match mono {
            None => {
                if needs_parens(&c) || c.starts_with('-') {
                    format!("({c})")
                } else {
                    c
                }
            }
            Some(m) if a == &RatFunc::one() => m,
            Some(m) if needs_parens(&c) || c.starts_with('-') => format!("({c})*{m}"),
            Some(m) => format!("{c}*{m}"),
        });
    }
    parts.join(" + ")
}
