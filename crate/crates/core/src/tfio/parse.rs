//! Recursive-descent parser for rational expressions in `s`.
//!
//! Grammar:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := ('+' | '-') factor | power
//! power   := primary ('^' ['+' | '-'] integer)?
//! primary := number | number('i'|'j') | 'i' | 'j' | 's' | symbol | '(' expr ')'
//! ```
//!
//! At most one `/` may appear outside parentheses. Positions in errors are
//! zero-based character offsets.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE};

use super::poly::Poly;
use super::rational::RationalFunction;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(text: &str) -> Result<Lexer> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| Error::Syntax {
                pos: start,
                msg: format!("malformed number `{s}`"),
            })?;
            let imag = i < chars.len()
                && (chars[i] == 'i' || chars[i] == 'j')
                && !chars.get(i + 1).is_some_and(|c| c.is_alphanumeric() || *c == '_');
            if imag {
                i += 1;
                toks.push((Tok::Imag(v), start));
            } else {
                toks.push((Tok::Num(v), start));
            }
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), start));
            continue;
        }
        let t = match ch {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(ch),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{ch}`"),
                })
            }
        };
        toks.push((t, i));
        i += 1;
    }
    toks.push((Tok::End, chars.len()));
    Ok(Lexer { toks })
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    depth: usize,
    top_divisions: usize,
    symbols: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<RationalFunction> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalFunction> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc.mul(&self.factor()?);
                }
                Tok::Op('/') => {
                    if self.depth == 0 {
                        self.top_divisions += 1;
                        if self.top_divisions > 1 {
                            return self.err("more than one top-level `/`");
                        }
                    }
                    self.bump();
                    let d = self.factor()?;
                    acc = acc.div(&d)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<RationalFunction> {
        match self.peek() {
            Tok::Op('-') => {
                self.bump();
                Ok(self.factor()?.neg())
            }
            Tok::Op('+') => {
                self.bump();
                self.factor()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalFunction> {
        let base = self.primary()?;
        if self.peek() != &Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        let neg = match self.peek() {
            Tok::Op('-') => {
                self.bump();
                true
            }
            Tok::Op('+') => {
                self.bump();
                false
            }
            _ => false,
        };
        let pos = self.pos();
        let e = match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v <= 64.0 => v as u32,
            _ => {
                return Err(Error::Syntax {
                    pos,
                    msg: "exponent must be an integer literal between 0 and 64".into(),
                })
            }
        };
        let p = RationalFunction::new(base.num().pow(e), base.den().pow(e))?;
        if neg {
            RationalFunction::constant(ONE).div(&p).map_err(|_| Error::Syntax {
                pos,
                msg: "negative power of the zero polynomial".into(),
            })
        } else {
            Ok(p)
        }
    }

    fn primary(&mut self) -> Result<RationalFunction> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(RationalFunction::constant(C64::new(v, 0.0))),
            Tok::Imag(v) => Ok(RationalFunction::constant(C64::new(0.0, v))),
            Tok::Ident(name) => match name.as_str() {
                "s" => RationalFunction::new(Poly::s(), Poly::constant(ONE)),
                "i" | "j" => Ok(RationalFunction::constant(C64::new(0.0, 1.0))),
                _ => match self.symbols.get(&name) {
                    Some(&v) => Ok(RationalFunction::constant(C64::new(v, 0.0))),
                    None => Err(Error::UnresolvedSymbol(name)),
                },
            },
            Tok::LParen => {
                self.depth += 1;
                let e = self.expr()?;
                self.depth -= 1;
                let close = self.pos();
                match self.bump() {
                    Tok::RParen => Ok(e),
                    _ => Err(Error::Syntax {
                        pos: close,
                        msg: format!("expected `)` to close `(` at {pos}"),
                    }),
                }
            }
            Tok::End => Err(Error::Syntax {
                pos,
                msg: "unexpected end of expression".into(),
            }),
            t => Err(Error::Syntax {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
        }
    }
}

/// Parses `text` into expanded numerator and denominator coefficient lists.
///
/// Common factors are kept unless `reduce` is set.
pub fn parse_rational(text: &str, symbols: &BTreeMap<String, f64>, reduce: bool) -> Result<RationalFunction> {
    let lx = lex(text)?;
    let mut p = Parser {
        toks: lx.toks,
        at: 0,
        depth: 0,
        top_divisions: 0,
        symbols,
    };
    let r = p.expr()?;
    if p.peek() != &Tok::End {
        return p.err("trailing input");
    }
    if r.den().is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let r = RationalFunction::new(r.num().clone(), r.den().clone())?;
    Ok(if reduce { r.reduce() } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn syms() -> BTreeMap<String, f64> {
        BTreeMap::from([("s0".to_string(), 1.0)])
    }

    #[test]
    fn unstable_filter() {
        let g = parse_rational("(s - s0)/(s + s0)", &syms(), false).unwrap();
        assert_eq!(g.num().coeffs(), &[c(-1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(g.den().coeffs(), &[c(1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn constant_passthrough() {
        let g = parse_rational("1", &syms(), false).unwrap();
        assert_eq!(g.num().coeffs(), &[c(1.0, 0.0)]);
        assert_eq!(g.den().coeffs(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn reduction_cancels_common_factor() {
        let g = parse_rational("(s^2 + 3*s + 2)/(s + 1)", &syms(), true).unwrap();
        assert_eq!(g.num().coeffs(), &[c(2.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(g.den().coeffs(), &[c(1.0, 0.0)]);
        let kept = parse_rational("(s^2 + 3*s + 2)/(s + 1)", &syms(), false).unwrap();
        assert_eq!(kept.den().degree(), Some(1));
    }

    #[test]
    fn imaginary_literals() {
        let g = parse_rational("1/(s + 2i)", &syms(), false).unwrap();
        assert_eq!(g.den().coeffs(), &[c(0.0, 2.0), c(1.0, 0.0)]);
        let h = parse_rational("1/(s + j)", &syms(), false).unwrap();
        assert_eq!(h.den().coeffs(), &[c(0.0, 1.0), c(1.0, 0.0)]);
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_rational("(s + 1", &syms(), false) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 6),
            other => panic!("unexpected {other:?}"),
        }
        match parse_rational("s + * 2", &syms(), false) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unresolved_symbol() {
        assert!(matches!(
            parse_rational("s + w0", &syms(), false),
            Err(Error::UnresolvedSymbol(n)) if n == "w0"
        ));
    }

    #[test]
    fn zero_denominator() {
        assert!(matches!(
            parse_rational("1/(s - s)", &syms(), false),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn two_top_level_divisions_rejected() {
        assert!(matches!(
            parse_rational("1/s/s", &syms(), false),
            Err(Error::Syntax { .. })
        ));
        assert!(parse_rational("(1/2)*s/(s+1)", &syms(), false).is_ok());
    }

    #[test]
    fn negative_power() {
        let g = parse_rational("(s+1)^-2", &syms(), false).unwrap();
        assert_eq!(g.den().degree(), Some(2));
    }
}
