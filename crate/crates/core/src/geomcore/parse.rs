//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := number | ident | func '(' expr ')' | '(' expr ')'
//! ```

use thiserror::Error;

use super::expr::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at {pos}")]
    BadChar { ch: char, pos: usize },
    #[error("unexpected end of input")]
    Eof,
    #[error("unexpected token {tok:?} at {pos}")]
    Unexpected { tok: String, pos: usize },
    #[error("unknown identifier {0:?}")]
    UnknownIdent(String),
    #[error("bad number literal {0:?}")]
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| ParseError::BadNumber(text.clone()))?;
            if !v.is_finite() {
                return Err(ParseError::BadNumber(text));
            }
            out.push((Tok::Num(v), start));
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else if c == '(' {
            out.push((Tok::LParen, i));
            i += 1;
        } else if c == ')' {
            out.push((Tok::RParen, i));
            i += 1;
        } else {
            return Err(ParseError::BadChar { ch: c, pos: i });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    names: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn unexpected(&self) -> ParseError {
        match self.toks.get(self.pos) {
            Some((t, p)) => ParseError::Unexpected { tok: format!("{:?}", t), pos: *p },
            None => ParseError::Eof,
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::neg(self.unary()?));
        }
        self.primary()
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected()),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::c(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let is_call = matches!(self.peek(), Some(Tok::LParen));
                if let (true, Some(f)) = (is_call, Func::from_name(&name)) {
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::call(f, arg));
                }
                match self.names.iter().position(|n| *n == name) {
                    Some(i) => Ok(Expr::var(i)),
                    None => Err(ParseError::UnknownIdent(name)),
                }
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parse `src`, resolving identifiers against `names` (index = position).
pub fn parse_expr(src: &str, names: &[String]) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, names };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names() -> Vec<String> {
        ["x", "y", "a1.c"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn precedence_and_unary() {
        let n = names();
        let e = parse_expr("-x * y + 2 * a1.c", &n).unwrap();
        assert_eq!(e.eval(&[3.0, 2.0, 5.0]).unwrap(), 4.0);
        let e = parse_expr("x - -y - 1e-3", &n).unwrap();
        assert!((e.eval(&[1.0, 2.0, 0.0]).unwrap() - 2.999).abs() < 1e-15);
        let e = parse_expr("bump(x) + sqrt(y)/exp(0)", &n).unwrap();
        assert_eq!(e.eval(&[0.0, 4.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn errors() {
        let n = names();
        assert_eq!(parse_expr("z", &n), Err(ParseError::UnknownIdent("z".into())));
        assert_eq!(parse_expr("x +", &n), Err(ParseError::Eof));
        assert!(matches!(parse_expr("x $ y", &n), Err(ParseError::BadChar { .. })));
        assert!(matches!(parse_expr("(x", &n), Err(ParseError::Eof)));
        assert!(matches!(parse_expr("x y", &n), Err(ParseError::Unexpected { .. })));
        assert!(matches!(parse_expr("1e999", &n), Err(ParseError::BadNumber(_))));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-50.0f64..50.0).prop_map(Expr::c),
            (0usize..3).prop_map(Expr::var),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Expr::neg),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
                (0usize..5, inner).prop_map(|(k, a)| {
                    let f = [Func::Sin, Func::Cos, Func::Sqrt, Func::Exp, Func::Bump][k];
                    Expr::call(f, a)
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(e in arb_expr()) {
            let n = names();
            let text = e.display(&n).to_string();
            let back = parse_expr(&text, &n).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
