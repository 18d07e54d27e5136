//! Recursive-descent parser for polynomial text.
//!
//! Grammar:
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ('^' integer)?
//! atom   := number | identifier | '(' expr ')'
//! ```
//! Division is only allowed by a nonzero constant. Numbers may be integers
//! or decimals; decimals are converted exactly (`0.25` is `1/4`).

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Poly, Rational, VarNames};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("polynomial parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let text = &s[start..i];
            out.push((start, Tok::Num(parse_decimal(text, start)?)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(s[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError {
                pos: i,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

fn parse_decimal(text: &str, pos: usize) -> Result<Rational, ParseError> {
    let bad = || ParseError {
        pos,
        msg: format!("malformed number {text:?}"),
    };
    let (int, frac) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if (int.is_empty() && frac.is_empty()) || frac.contains('.') {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Ok(Rational::new(num, den))
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    names: &'a VarNames,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos(),
            msg: msg.into(),
        }
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let at = self.pos();
                let d = self.unary()?;
                match d.as_constant() {
                    Some(c) if !c.is_zero() => acc = acc.scale(&(Rational::one() / c)),
                    Some(_) => {
                        return Err(ParseError {
                            pos: at,
                            msg: "division by zero".into(),
                        })
                    }
                    None => {
                        return Err(ParseError {
                            pos: at,
                            msg: "division by a non-constant".into(),
                        })
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, ParseError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Poly, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(r)) if r.is_integer() => {
                    self.at += 1;
                    let e: u32 = r
                        .to_integer()
                        .try_into()
                        .map_err(|_| self.err("exponent too large"))?;
                    Ok(base.pow(e))
                }
                _ => Err(self.err("expected a non-negative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly, ParseError> {
        let nvars = self.names.len();
        match self.peek().cloned() {
            Some(Tok::Num(r)) => {
                self.at += 1;
                Ok(Poly::constant(nvars, r))
            }
            Some(Tok::Ident(name)) => match self.names.index_of(&name) {
                Some(i) => {
                    self.at += 1;
                    Ok(Poly::var(nvars, i))
                }
                None => Err(self.err(format!("unknown variable {name:?}"))),
            },
            Some(Tok::Op('(')) => {
                self.at += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(t) => Err(self.err(format!("unexpected token {t:?}"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

pub(super) fn parse(text: &str, names: &VarNames) -> Result<Poly, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        names,
        end: text.len(),
    };
    let out = p.expr()?;
    if p.at != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;

    #[test]
    fn decimals_are_exact() {
        let names = VarNames::params(1);
        let p = parse("0.25*t1 + 1.5", &names).unwrap();
        assert_eq!(p.coeff(&[1]), rat(1, 4));
        assert_eq!(p.coeff(&[0]), rat(3, 2));
    }

    #[test]
    fn tau_alias() {
        let names = VarNames::params(2);
        assert_eq!(
            parse("tau2^2", &names).unwrap(),
            parse("t2^2", &names).unwrap()
        );
    }

    #[test]
    fn malformed_inputs() {
        let names = VarNames::eikonal(1);
        for bad in [
            "x0 +", "x9", "x0 / x1", "(x0", "x0^u", "1/0", "x0 $ 2", "1..2",
        ] {
            assert!(parse(bad, &names).is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn parentheses_and_precedence() {
        let names = VarNames::eikonal(1);
        let a = parse("2*(x0 - u)^2 - -x1", &names).unwrap();
        let b = parse("2*x0^2 - 4*x0*u + 2*u^2 + x1", &names).unwrap();
        assert_eq!(a, b);
    }
}
