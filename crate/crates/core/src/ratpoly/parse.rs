//! Text form of polynomials.
//!
//! ```text
//! expr     := ['-'] term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := rational | var ('^' posint)? | '(' expr ')'
//! rational := int ('/' posint)?
//! ```
//!
//! Whitespace is ignored. Variable names come from [`VarNames`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::{PolyError, Polynomial, Rational, StratifiedWeights, VarNames};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigUint),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn syntax(pos: usize, message: impl Into<String>) -> PolyError {
    PolyError::SyntaxError { pos, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, PolyError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'/' => out.push((start, Tok::Slash)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..i];
                let v = BigUint::parse_bytes(digits.as_bytes(), 10)
                    .ok_or_else(|| syntax(start, "malformed integer"))?;
                out.push((start, Tok::Int(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    names: &'a VarNames,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let negate = self.eat(&Tok::Minus);
        let mut acc = self.term()?;
        if negate {
            acc = -acc;
        }
        loop {
            if self.eat(&Tok::Plus) {
                let t = self.term()?;
                acc = &acc + &t;
            } else if self.eat(&Tok::Minus) {
                let t = self.term()?;
                acc = &acc - &t;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.factor()?;
        while self.eat(&Tok::Star) {
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn posint(&mut self, what: &str) -> Result<BigUint, PolyError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Int(v)) if !v.is_zero() => Ok(v),
            Some(Tok::Int(_)) => Err(syntax(at, format!("{what} must be positive"))),
            _ => Err(syntax(at, format!("expected {what}"))),
        }
    }

    fn factor(&mut self) -> Result<Polynomial, PolyError> {
        let n = self.names.len();
        let at = self.here();
        match self.bump() {
            Some(Tok::Int(num)) => {
                let mut value = Rational::from_integer(BigInt::from(num));
                if self.eat(&Tok::Slash) {
                    let den = self.posint("denominator")?;
                    value /= Rational::from_integer(BigInt::from(den));
                }
                Ok(Polynomial::constant(n, value))
            }
            Some(Tok::Ident(name)) => {
                let j = self
                    .names
                    .index_of(&name)
                    .ok_or(PolyError::UnknownVariable { name, pos: at })?;
                let mut exp = 1u32;
                if self.eat(&Tok::Caret) {
                    let at_exp = self.here();
                    let e = self.posint("exponent")?;
                    exp = u32::try_from(e).map_err(|_| syntax(at_exp, "exponent too large"))?;
                }
                Ok(Polynomial::var(n, j).pow(exp))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return Err(syntax(self.here(), "expected `)`"));
                }
                Ok(inner)
            }
            Some(_) => Err(syntax(at, "expected a number, a variable or `(`")),
            None => Err(syntax(at, "unexpected end of input")),
        }
    }
}

/// Parses with an explicit variable table (e.g. the doubled coordinates of a
/// group law).
pub fn parse_poly_with(text: &str, names: &VarNames) -> Result<Polynomial, PolyError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let mut p = Parser { toks, pos: 0, end: text.len(), names };
    let out = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(syntax(p.here(), "unexpected trailing input"));
    }
    Ok(out)
}

pub fn parse_poly(text: &str, w: &StratifiedWeights) -> Result<Polynomial, PolyError> {
    parse_poly_with(text, &VarNames::for_weights(w))
}

/// Parses `[-]int[/posint]` exactly, with the same token rules as polynomial
/// coefficients.
pub fn parse_rational(text: &str) -> Result<Rational, PolyError> {
    let toks = lex(text)?;
    let mut it = toks.into_iter().peekable();
    let neg = matches!(it.peek(), Some((_, Tok::Minus)));
    if neg {
        it.next();
    }
    let num = match it.next() {
        Some((_, Tok::Int(v))) => v,
        Some((p, _)) => return Err(syntax(p, "expected an integer")),
        None => return Err(syntax(text.len(), "expected an integer")),
    };
    let mut value = Rational::from_integer(BigInt::from(num));
    match it.next() {
        None => {}
        Some((_, Tok::Slash)) => match it.next() {
            Some((_, Tok::Int(d))) if !d.is_zero() => {
                value /= Rational::from_integer(BigInt::from(d));
            }
            Some((p, _)) => return Err(syntax(p, "denominator must be a positive integer")),
            None => return Err(syntax(text.len(), "expected a denominator")),
        },
        Some((p, _)) => return Err(syntax(p, "unexpected trailing input")),
    }
    if let Some((p, _)) = it.next() {
        return Err(syntax(p, "unexpected trailing input"));
    }
    Ok(if neg { -value } else { value })
}

/// `a` or `a/b`, sign included.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn print_poly_with(p: &Polynomial, names: &VarNames) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().enumerate() {
        let negative = c.is_negative();
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let mag = c.abs();
        let mut factors: Vec<String> = Vec::new();
        if m.is_constant() || !mag.is_one() {
            factors.push(format_rational(&mag));
        }
        for (j, &e) in m.exps().iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(names.name(j).to_string()),
                _ => factors.push(format!("{}^{}", names.name(j), e)),
            }
        }
        let _ = write!(out, "{}", factors.join("*"));
    }
    out
}

pub fn print_poly(p: &Polynomial, w: &StratifiedWeights) -> String {
    print_poly_with(p, &VarNames::for_weights(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::{int, rat};
    use alloc::vec;

    fn engel() -> StratifiedWeights {
        StratifiedWeights::new(&[2, 1, 1]).unwrap()
    }

    #[test]
    fn parses_engel_u() {
        let w = engel();
        let u = parse_poly("x2 + 1/2*x1^2*x2 - 1/6*x2^3 - 1/2*x1*y", &w).unwrap();
        let expected = Polynomial::from_terms(
            4,
            vec![
                (vec![0, 1, 0, 0], int(1)),
                (vec![2, 1, 0, 0], rat(1, 2)),
                (vec![0, 3, 0, 0], rat(-1, 6)),
                (vec![1, 0, 1, 0], rat(-1, 2)),
            ],
        )
        .unwrap();
        assert_eq!(u, expected);
        assert_eq!(print_poly(&u, &w), "x2 - 1/2*x1*y + 1/2*x1^2*x2 - 1/6*x2^3");
    }

    #[test]
    fn empty_is_syntax_error() {
        assert!(matches!(parse_poly("", &engel()), Err(PolyError::SyntaxError { pos: 0, .. })));
        assert!(matches!(parse_poly("   ", &engel()), Err(PolyError::SyntaxError { .. })));
    }

    #[test]
    fn trailing_operator_reports_position() {
        match parse_poly("x1 +", &engel()) {
            Err(PolyError::SyntaxError { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonicalizes() {
        let w = engel();
        assert_eq!(print_poly(&parse_poly("x1+x1", &w).unwrap(), &w), "2*x1");
        assert_eq!(print_poly(&parse_poly("x1 - x1", &w).unwrap(), &w), "0");
        assert_eq!(print_poly(&parse_poly("-(x1 - 2)*3", &w).unwrap(), &w), "6 - 3*x1");
    }

    #[test]
    fn unknown_variables() {
        let w = engel();
        assert_eq!(
            parse_poly("x1 + x3", &w),
            Err(PolyError::UnknownVariable { name: "x3".into(), pos: 5 })
        );
        assert!(parse_poly("y1*t1", &w).is_ok());
        let w2 = StratifiedWeights::new(&[2, 2]).unwrap();
        assert!(matches!(parse_poly("y", &w2), Err(PolyError::UnknownVariable { .. })));
        assert!(parse_poly("y2 - y1", &w2).is_ok());
    }

    #[test]
    fn grammar_edges() {
        let w = engel();
        assert!(parse_poly("x1^0", &w).is_err());
        assert!(parse_poly("1/0", &w).is_err());
        assert!(parse_poly("x1 x2", &w).is_err());
        assert!(parse_poly("(x1", &w).is_err());
        assert!(parse_poly("x1 * -x2", &w).is_err());
        assert!(parse_poly("x1 % 2", &w).is_err());
        assert_eq!(parse_poly("(-x1)", &w).unwrap(), -Polynomial::var(4, 0));
        let deep = StratifiedWeights::new(&[2, 1, 1, 2]).unwrap();
        assert_eq!(parse_poly("w4_2", &deep).unwrap(), Polynomial::var(6, 5));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational(" -6/4 ").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("0").unwrap(), int(0));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x1").is_err());
        assert!(parse_rational("1/2/3").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format_rational(&rat(-3, 2)), "-3/2");
        assert_eq!(format_rational(&int(4)), "4");
    }
}
