//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' ['-'] integer)?
//! atom   := number | name '(' args ')' | variable | '(' expr ')'
//! ```
//!
//! Variables are `x1`, `x2`, ... (strictly: `x` followed by a positive
//! integer). Function names are the elementary set plus `pow(e, n)` as the
//! call-style spelling of `e^n`. Errors carry 1-based line/column.

use super::{add, call, cnst, div, mul, neg, powi, sub, var, Expr, Func};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

/// Parse a standalone expression (positions reported on line 1).
pub fn parse_expr(src: &str) -> Result<Expr> {
    parse_expr_at(src, 1, 1)
}

/// Parse an expression embedded in a larger document: `line` and `col0`
/// locate its first character for error reporting.
pub fn parse_expr_at(src: &str, line: usize, col0: usize) -> Result<Expr> {
    let toks = lex(src, line, col0)?;
    let end_col = col0 + src.chars().count();
    let mut p = Parser { toks, pos: 0, line, end_col };
    let e = p.expr()?;
    if let Some((tok, col)) = p.peek_with_col() {
        return Err(p.err_at(col, format!("unexpected token `{}`", tok_name(&tok))));
    }
    Ok(e)
}

fn tok_name(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("{v}"),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Slash => "/".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::Comma => ",".into(),
    }
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push((Tok::Plus, col));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, col));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1;
            }
            '/' => {
                out.push((Tok::Slash, col));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, col));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, col));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, col));
                i += 1;
            }
            ',' => {
                out.push((Tok::Comma, col));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
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
                let v = text.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    col,
                    msg: format!("malformed number `{text}`"),
                })?;
                out.push((Tok::Num(v), col));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push((Tok::Ident(text), col));
            }
            other => {
                return Err(Error::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

impl Parser {
    fn err_at(&self, col: usize, msg: String) -> Error {
        Error::Parse { line: self.line, col, msg }
    }

    fn err_here(&self, msg: &str) -> Error {
        let col = self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col);
        Error::Parse { line: self.line, col, msg: msg.to_string() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_with_col(&self) -> Option<(Tok, usize)> {
        self.toks.get(self.pos).cloned()
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, want: &Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err_here(&format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    e = add(e, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    e = sub(e, self.term()?);
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    e = mul(e, self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    e = div(e, self.factor()?);
                }
                _ => return Ok(e),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            return Ok(neg(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let n = self.signed_int("exponent")?;
            return Ok(powi(base, n));
        }
        Ok(base)
    }

    fn signed_int(&mut self, what: &str) -> Result<i32> {
        let negative = if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.bump() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                let n = v as i32;
                Ok(if negative { -n } else { n })
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err_here(&format!("expected integer {what}")))
            }
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek_with_col() {
            Some((Tok::Num(v), _)) => {
                self.pos += 1;
                Ok(cnst(v))
            }
            Some((Tok::LParen, _)) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(&Tok::RParen, "closing `)`")?;
                Ok(e)
            }
            Some((Tok::Ident(name), col)) => {
                self.pos += 1;
                if matches!(self.peek(), Some(Tok::LParen)) {
                    self.pos += 1;
                    if name == "pow" {
                        let base = self.expr()?;
                        self.eat(&Tok::Comma, "`,` between pow arguments")?;
                        let n = self.signed_int("power argument")?;
                        self.eat(&Tok::RParen, "closing `)`")?;
                        return Ok(powi(base, n));
                    }
                    let func = Func::from_name(&name).ok_or_else(|| {
                        self.err_at(col, format!("unknown function `{name}`"))
                    })?;
                    let arg = self.expr()?;
                    if matches!(self.peek(), Some(Tok::Comma)) {
                        return Err(self.err_here(&format!("{name} takes one argument")));
                    }
                    self.eat(&Tok::RParen, "closing `)`")?;
                    return Ok(call(func, arg));
                }
                self.variable(&name, col)
            }
            Some((tok, col)) => Err(self.err_at(col, format!("unexpected token `{}`", tok_name(&tok)))),
            None => Err(self.err_here("unexpected end of expression")),
        }
    }

    fn variable(&self, name: &str, col: usize) -> Result<Expr> {
        let digits = name.strip_prefix('x').filter(|d| {
            !d.is_empty() && d.chars().all(|c| c.is_ascii_digit())
        });
        match digits {
            Some(d) => {
                let idx: usize = d.parse().map_err(|_| {
                    self.err_at(col, format!("variable index out of range in `{name}`"))
                })?;
                if idx == 0 {
                    return Err(self.err_at(col, "variables are numbered from x1".into()));
                }
                Ok(var(idx - 1))
            }
            None => Err(self.err_at(col, format!("unknown identifier `{name}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse_expr("x1 + x2*x3").unwrap(),
            add(var(0), mul(var(1), var(2)))
        );
        assert_eq!(
            parse_expr("x1 - x2 - x3").unwrap(),
            sub(sub(var(0), var(1)), var(2))
        );
        assert_eq!(parse_expr("x1^2*x2").unwrap(), mul(powi(var(0), 2), var(1)));
        assert_eq!(parse_expr("-x1^2").unwrap(), neg(powi(var(0), 2)));
    }

    #[test]
    fn pow_call_form_equals_caret_form() {
        assert_eq!(parse_expr("pow(x1 + 1, 3)").unwrap(), parse_expr("(x1 + 1)^3").unwrap());
        assert_eq!(parse_expr("pow(x1, -2)").unwrap(), parse_expr("x1^-2").unwrap());
    }

    #[test]
    fn error_positions_are_reported() {
        // A bare operator where an atom is required.
        let err = parse_expr("+").unwrap_err();
        match err {
            Error::Parse { line: 1, col, msg } => {
                assert_eq!(col, 1);
                assert!(msg.contains("unexpected token"), "{msg}");
            }
            other => panic!("wrong error {other:?}"),
        }
        let err = parse_expr("x1 + ").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, col: 6, .. }), "{err:?}");
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(parse_expr("y1"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("x0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("tan(x1)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_expr("sin(x1, x2)"), Err(Error::Parse { .. })));
    }

    #[test]
    fn scientific_notation_round_trips() {
        let e = parse_expr("1e-9*x1").unwrap();
        assert_eq!(e, mul(cnst(1e-9), var(0)));
    }
}
