//! Gamble expressions: `X^2`, `(X - 0.75)^2`, `abs(X - Y) / 2`,
//! `ind(X >= 1.5)`.
//!
//! Precedence from tightest: `^` (right-associative), unary minus, `* /`,
//! `+ -`. Binary operators other than `^` associate to the left.

use impbounds::{Gamble, Partition};

use crate::document::AssessmentDocument;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Lt,
    Gt,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Ind(Cmp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    Cmp(Cmp),
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, CliError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset, message: String| CliError::Expression { offset, message };
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                    i += 1;
                }
                if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].1.is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].1.is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                let v = s.parse::<f64>().map_err(|_| err(pos, format!("bad number \"{s}\"")))?;
                out.push((pos, Tok::Num(v)));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                out.push((pos, Tok::Ident(chars[start..i].iter().map(|&(_, c)| c).collect())));
            }
            '+' | '-' | '*' | '/' | '^' => {
                out.push((pos, Tok::Op(c)));
                i += 1;
            }
            '(' => {
                out.push((pos, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((pos, Tok::RParen));
                i += 1;
            }
            '<' | '>' => {
                let eq = i + 1 < chars.len() && chars[i + 1].1 == '=';
                let cmp = match (c, eq) {
                    ('<', true) => Cmp::Le,
                    ('<', false) => Cmp::Lt,
                    ('>', true) => Cmp::Ge,
                    _ => Cmp::Gt,
                };
                out.push((pos, Tok::Cmp(cmp)));
                i += if eq { 2 } else { 1 };
            }
            '≤' => {
                out.push((pos, Tok::Cmp(Cmp::Le)));
                i += 1;
            }
            '≥' => {
                out.push((pos, Tok::Cmp(Cmp::Ge)));
                i += 1;
            }
            _ => return Err(err(pos, format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    doc: &'a AssessmentDocument,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, CliError> {
        Err(CliError::Expression {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), CliError> {
        if self.peek() == Some(&t) {
            self.at += 1;
            Ok(())
        } else {
            self.fail(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr, CliError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.at += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, CliError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.at += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, CliError> {
        if self.peek() == Some(&Tok::Op('-')) {
            self.at += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, CliError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Op('^')) {
            self.at += 1;
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, CliError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(Expr::Num(v))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                match name.as_str() {
                    "abs" if self.peek() == Some(&Tok::LParen) => {
                        self.at += 1;
                        let e = self.expr()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(Expr::Abs(Box::new(e)))
                    }
                    "ind" if self.peek() == Some(&Tok::LParen) => {
                        self.at += 1;
                        let l = self.expr()?;
                        let cmp = match self.peek() {
                            Some(Tok::Cmp(c)) => *c,
                            _ => return self.fail("expected a comparison inside ind(...)"),
                        };
                        self.at += 1;
                        let r = self.expr()?;
                        self.expect(Tok::RParen, "')'")?;
                        Ok(Expr::Ind(cmp, Box::new(l), Box::new(r)))
                    }
                    _ if self.doc.gambles.contains_key(&name) => Ok(Expr::Var(name)),
                    _ => Err(CliError::UnknownIdentifier(name)),
                }
            }
            Some(_) => self.fail("unexpected token"),
            None => self.fail("unexpected end of expression"),
        }
    }
}

pub fn parse_expression(text: &str, doc: &AssessmentDocument) -> Result<Expr, CliError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
        doc,
    };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.fail("trailing input");
    }
    Ok(e)
}

fn pointwise(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

fn values(e: &Expr, doc: &AssessmentDocument, n: usize) -> Result<Vec<f64>, CliError> {
    Ok(match e {
        Expr::Num(v) => vec![*v; n],
        Expr::Var(name) => doc
            .gambles
            .get(name)
            .cloned()
            .ok_or_else(|| CliError::UnknownIdentifier(name.clone()))?,
        Expr::Neg(a) => values(a, doc, n)?.into_iter().map(|v| -v).collect(),
        Expr::Abs(a) => values(a, doc, n)?.into_iter().map(f64::abs).collect(),
        Expr::Bin(op, a, b) => {
            let (a, b) = (values(a, doc, n)?, values(b, doc, n)?);
            match op {
                BinOp::Add => pointwise(&a, &b, |x, y| x + y),
                BinOp::Sub => pointwise(&a, &b, |x, y| x - y),
                BinOp::Mul => pointwise(&a, &b, |x, y| x * y),
                BinOp::Div => {
                    if b.contains(&0.0) {
                        return Err(CliError::Eval("division by a gamble that takes the value 0".into()));
                    }
                    pointwise(&a, &b, |x, y| x / y)
                }
            }
        }
        Expr::Pow(a, b) => {
            let (a, b) = (values(a, doc, n)?, values(b, doc, n)?);
            let mut out = Vec::with_capacity(n);
            for (&x, &k) in a.iter().zip(&b) {
                if k.fract() == 0.0 && k.abs() <= i32::MAX as f64 {
                    if x == 0.0 && k < 0.0 {
                        return Err(CliError::Eval("negative power of 0".into()));
                    }
                    out.push(x.powi(k as i32));
                } else if x < 0.0 {
                    return Err(CliError::Eval(format!(
                        "non-integer exponent {k} needs a nonnegative base (use abs)"
                    )));
                } else {
                    out.push(x.powf(k));
                }
            }
            out
        }
        Expr::Ind(cmp, a, b) => {
            let (a, b) = (values(a, doc, n)?, values(b, doc, n)?);
            pointwise(&a, &b, |x, y| {
                let hit = match cmp {
                    Cmp::Le => x <= y,
                    Cmp::Ge => x >= y,
                    Cmp::Lt => x < y,
                    Cmp::Gt => x > y,
                };
                if hit {
                    1.0
                } else {
                    0.0
                }
            })
        }
    })
}

pub fn evaluate(e: &Expr, doc: &AssessmentDocument) -> Result<Gamble, CliError> {
    let p: Partition = doc.partition();
    let v = values(e, doc, p.len())?;
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(CliError::Eval(format!("expression produced {bad}")));
    }
    Ok(Gamble::new(&p, v)?)
}

/// Parses and evaluates in one step.
pub fn gamble_of(text: &str, doc: &AssessmentDocument) -> Result<Gamble, CliError> {
    evaluate(&parse_expression(text, doc)?, doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::parse_document;

    fn doc() -> AssessmentDocument {
        parse_document(
            br#"{"atoms": ["w1","w2","w3"], "gambles": {"X": [-1,1,2], "Y": [0,2,4]}, "lower": {"X": 0.75}}"#,
        )
        .unwrap()
    }

    fn eval(s: &str) -> Vec<f64> {
        gamble_of(s, &doc()).unwrap().values().to_vec()
    }

    #[test]
    fn examples() {
        assert_eq!(eval("X^2"), [1.0, 1.0, 4.0]);
        assert_eq!(eval("(X - 0.75)^2"), [3.0625, 0.0625, 1.5625]);
        assert_eq!(eval("ind(X >= 1.5)"), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("-X^2"), [-1.0, -1.0, -4.0]);
        assert_eq!(eval("1 + 2 * X"), [-1.0, 3.0, 5.0]);
        assert_eq!(eval("10 - 4 - 3"), [3.0; 3]);
        assert_eq!(eval("12 / 3 / 2"), [2.0; 3]);
        assert_eq!(eval("2^3^2"), [512.0; 3]);
        assert_eq!(eval("abs(X) * ind(Y > 1)"), [0.0, 1.0, 2.0]);
        assert_eq!(eval("Y^0.5 * Y^0.5"), [0.0, 2.0000000000000004, 4.0]);
        assert_eq!(eval("ind(X < Y) + ind(X ≤ 1)"), [2.0, 2.0, 1.0]);
        assert_eq!(eval("1.5e1 - X"), [16.0, 14.0, 13.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            gamble_of("Z + 1", &doc()),
            Err(CliError::UnknownIdentifier(_))
        ));
        assert!(matches!(
            gamble_of("X +", &doc()),
            Err(CliError::Expression { offset: 3, .. })
        ));
        assert!(matches!(gamble_of("(X", &doc()), Err(CliError::Expression { .. })));
        assert!(matches!(
            gamble_of("X X", &doc()),
            Err(CliError::Expression { offset: 2, .. })
        ));
        assert!(matches!(
            gamble_of("X # 2", &doc()),
            Err(CliError::Expression { offset: 2, .. })
        ));
        assert!(matches!(gamble_of("1 / Y", &doc()), Err(CliError::Eval(_))));
        assert!(matches!(gamble_of("X^0.5", &doc()), Err(CliError::Eval(_))));
        assert!(matches!(gamble_of("ind(X)", &doc()), Err(CliError::Expression { .. })));
    }
}
