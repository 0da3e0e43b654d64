use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num as _, Zero};

use super::{Expr, Node, Number};
use crate::error::{KlscError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.src.as_bytes().get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.src[self.pos..].chars().next() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || (c == '.' && self.src.as_bytes().get(self.pos + 1).is_some_and(u8::is_ascii_digit)) {
            return self.number(start).map(|t| (t, start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while self.src.as_bytes().get(self.pos).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if "+-*/^()".contains(c) {
            self.pos += 1;
            return Ok((Tok::Sym(c), start));
        }
        Err(KlscError::Syntax { offset: start, message: format!("unexpected character `{c}`") })
    }

    fn number(&mut self, start: usize) -> Result<Tok> {
        let int_part = self.digits().to_string();
        let bytes = self.src.as_bytes();
        // p/q with no whitespace is a single rational literal
        if bytes.get(self.pos) == Some(&b'/') && bytes.get(self.pos + 1).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
            let den = self.digits();
            let d = BigInt::from_str_radix(den, 10).expect("digits");
            if d.is_zero() {
                return Err(KlscError::Syntax { offset: start, message: "zero denominator".into() });
            }
            let n = BigInt::from_str_radix(&int_part, 10).expect("digits");
            return Ok(Tok::Num(BigRational::new(n, d)));
        }
        let mut frac = String::new();
        if bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac = self.digits().to_string();
        }
        let mut exp: i64 = 0;
        if matches!(bytes.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            let mut sign = 1;
            match bytes.get(self.pos) {
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    sign = -1;
                    self.pos += 1
                }
                _ => {}
            }
            let d = self.digits();
            if d.is_empty() {
                self.pos = save;
            } else {
                exp = sign
                    * d.parse::<i64>()
                        .map_err(|_| KlscError::Syntax { offset: start, message: "exponent too large".into() })?;
            }
        }
        let mantissa = format!("{int_part}{frac}");
        let m = BigInt::from_str_radix(if mantissa.is_empty() { "0" } else { &mantissa }, 10).expect("digits");
        let e = exp - frac.len() as i64;
        if e.abs() > 4000 {
            return Err(KlscError::Syntax { offset: start, message: "exponent too large".into() });
        }
        let ten = BigInt::from(10);
        let scale = num_traits::pow(ten, e.unsigned_abs() as usize);
        Ok(Tok::Num(if e >= 0 { BigRational::from_integer(m * scale) } else { BigRational::new(m, scale) }))
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
}

/// Parse the textual expression grammar into a raw tree.
pub fn parse(src: &str) -> Result<Expr> {
    let mut lex = Lexer { src, pos: 0 };
    let (tok, at) = lex.next()?;
    let mut p = Parser { lex, tok, at };
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(KlscError::Syntax { offset: p.at, message: "unexpected trailing input".into() });
    }
    Ok(e)
}

impl Parser<'_> {
    fn bump(&mut self) -> Result<()> {
        let (t, a) = self.lex.next()?;
        self.tok = t;
        self.at = a;
        Ok(())
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.tok == Tok::Sym(c) {
            self.bump()
        } else {
            Err(KlscError::Syntax { offset: self.at, message: format!("expected `{c}`") })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Sym('+') => {
                    self.bump()?;
                    lhs = Expr::from_node(Node::Add(lhs, self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump()?;
                    lhs = Expr::from_node(Node::Sub(lhs, self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.tok {
                Tok::Sym('*') => {
                    self.bump()?;
                    lhs = Expr::from_node(Node::Mul(lhs, self.factor()?));
                }
                Tok::Sym('/') => {
                    self.bump()?;
                    lhs = Expr::from_node(Node::Div(lhs, self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.tok == Tok::Sym('^') {
            self.bump()?;
            let at = self.at;
            let exponent = self.factor()?;
            let folded = exponent.simplify();
            let Some(n) = folded.as_number() else {
                return Err(KlscError::Syntax { offset: at, message: "exponent must be a rational constant".into() });
            };
            return Ok(Expr::from_node(Node::Pow(base, n.clone())));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.at;
        match self.tok.clone() {
            Tok::Num(r) => {
                self.bump()?;
                Ok(Expr::num(Number::new(r)))
            }
            Tok::Sym('(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym('-') => {
                self.bump()?;
                let inner = self.atom()?;
                Ok(match inner.node() {
                    Node::Num(n) => Expr::num(Number::new(-n.exact().clone())),
                    _ => Expr::from_node(Node::Neg(inner)),
                })
            }
            Tok::Ident(name) => {
                self.bump()?;
                match name.as_str() {
                    "z" => Ok(Expr::z()),
                    "pi" => Ok(Expr::pi()),
                    "log" | "exp" | "atan" | "abs" => {
                        self.expect('(')?;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::from_node(match name.as_str() {
                            "log" => Node::Log(arg),
                            "exp" => Node::Exp(arg),
                            "atan" => Node::Atan(arg),
                            _ => Node::Abs(arg),
                        }))
                    }
                    _ => Err(KlscError::UnknownIdentifier { name, offset: at }),
                }
            }
            Tok::End => Err(KlscError::Syntax { offset: at, message: "unexpected end of input".into() }),
            Tok::Sym(c) => Err(KlscError::Syntax { offset: at, message: format!("unexpected `{c}`") }),
        }
    }
}
