//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' integer)?
//! base   := number | ident | '(' expr ')' | func '(' expr ')' | '-' base
//! ```
//!
//! Numbers are integers or decimals and are stored as exact rationals;
//! `p/q` fractions arrive through the division operator and fold exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::pow::pow;

use crate::error::{Error, Result};

use super::{Chart, Func, ScalarExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
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
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>> {
        let mut out = Vec::new();
        while let Some(t) = self.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize)>> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'0'..=b'9' => {
                let mut end = self.pos;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
                let mut frac_digits = 0usize;
                if end < self.src.len() && self.src[end] == b'.' {
                    let frac_start = end + 1;
                    let mut f = frac_start;
                    while f < self.src.len() && self.src[f].is_ascii_digit() {
                        f += 1;
                    }
                    if f == frac_start {
                        return Err(Error::Parse {
                            pos: end,
                            msg: "expected digits after decimal point".into(),
                        });
                    }
                    frac_digits = f - frac_start;
                    end = f;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let digits: String = text.chars().filter(|c| *c != '.').collect();
                let numer: BigInt = digits.parse().map_err(|_| Error::Parse {
                    pos: self.pos,
                    msg: format!("invalid number `{text}`"),
                })?;
                let denom = pow(BigInt::from(10), frac_digits);
                self.pos = end;
                Tok::Num(BigRational::new(numer, denom))
            }
            _ => {
                let text = std::str::from_utf8(&self.src[self.pos..]).map_err(|_| Error::Parse {
                    pos: self.pos,
                    msg: "invalid utf-8".into(),
                })?;
                let first = text.chars().next().unwrap();
                if first.is_alphabetic() || first == '_' {
                    let ident: String = text
                        .chars()
                        .take_while(|c| c.is_alphanumeric() || *c == '_')
                        .collect();
                    self.pos += ident.len();
                    Tok::Ident(ident)
                } else {
                    return Err(Error::Parse {
                        pos: self.pos,
                        msg: format!("unexpected character `{first}`"),
                    });
                }
            }
        };
        Ok(Some((tok, start)))
    }
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    idx: usize,
    chart: &'a Chart,
    len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.tokens
            .get(self.idx)
            .map(|(_, p)| *p)
            .unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.idx).map(|(t, _)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            _ => Err(Error::Parse {
                pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = lhs.add(&rhs);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = lhs.sub(&rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = lhs.mul(&rhs);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = lhs.div(&rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<ScalarExpr> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let exp = self.integer_exponent()?;
            return Ok(base.powi(exp));
        }
        Ok(base)
    }

    /// Exponents are integer literals, optionally signed.
    fn integer_exponent(&mut self) -> Result<i64> {
        let mut sign = 1i64;
        if self.peek() == Some(&Tok::Minus) {
            self.bump();
            sign = -1;
        }
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(n)) if n.is_integer() => {
                let v: i64 = n.to_integer().try_into().map_err(|_| Error::Parse {
                    pos,
                    msg: "exponent out of range".into(),
                })?;
                Ok(sign * v)
            }
            _ => Err(Error::Parse {
                pos,
                msg: "expected integer exponent after `^`".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<ScalarExpr> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(ScalarExpr::constant(self.chart, n)),
            Some(Tok::Minus) => {
                let inner = self.base()?;
                Ok(inner.neg())
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if let Some(func) = Func::from_name(&name) {
                    if self.peek() == Some(&Tok::LParen) {
                        self.bump();
                        let arg = self.expr()?;
                        self.expect(Tok::RParen, "closing `)` of function call")?;
                        return Ok(arg.apply(func));
                    }
                    return Err(Error::Parse {
                        pos,
                        msg: format!("function `{name}` must be called with `(`"),
                    });
                }
                match self.chart.coord_index(&name) {
                    Some(i) => Ok(ScalarExpr::coord(self.chart, i)),
                    None => Err(Error::UnknownIdentifier { name, pos }),
                }
            }
            _ => Err(Error::Parse {
                pos,
                msg: "expected a number, identifier or `(`".into(),
            }),
        }
    }
}

/// Parses `src` against `chart`; see the grammar at the top of the module.
pub fn parse_scalar(src: &str, chart: &Chart) -> Result<ScalarExpr> {
    let tokens = Lexer::new(src).tokens()?;
    let mut parser = Parser {
        tokens,
        idx: 0,
        chart,
        len: src.len(),
    };
    let e = parser.expr()?;
    if parser.idx != parser.tokens.len() {
        return Err(Error::Parse {
            pos: parser.pos(),
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}
