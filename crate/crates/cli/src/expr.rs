//! Tokenizer and recursive-descent parser for the literal grammar:
//! polynomials and rational functions in t over F_q (extension-field
//! coefficients as powers of the fixed generator g), multivariate
//! polynomials in X1..Xg, twisted polynomials in tau, and place literals.
//!
//! Multiplication may be written explicitly (*) or by juxtaposition:
//! `(t+1) X1 X2` and `(t+1)*X1*X2` parse the same way. Division requires a
//! divisor free of the X variables.

use std::fmt;
use std::sync::Arc;

use dlang_core::algebra::{FqField, FqPoly, RatFunc};
use dlang_core::mordell::MultiPoly;
use dlang_core::places::Place;
use dlang_core::twisted::TwistedPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    Int(u64),
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

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokKind,
    pub col: usize,
}

pub fn tokenize(text: &str, line: usize) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = i + 1;
        match c {
            ' ' | '\t' => {
                i += 1;
            }
            '+' => {
                out.push(Token { kind: TokKind::Plus, col });
                i += 1;
            }
            '-' => {
                out.push(Token { kind: TokKind::Minus, col });
                i += 1;
            }
            '*' => {
                out.push(Token { kind: TokKind::Star, col });
                i += 1;
            }
            '/' => {
                out.push(Token { kind: TokKind::Slash, col });
                i += 1;
            }
            '^' => {
                out.push(Token { kind: TokKind::Caret, col });
                i += 1;
            }
            '(' => {
                out.push(Token { kind: TokKind::LParen, col });
                i += 1;
            }
            ')' => {
                out.push(Token { kind: TokKind::RParen, col });
                i += 1;
            }
            ',' => {
                out.push(Token { kind: TokKind::Comma, col });
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n: u64 = text[start..i].parse().map_err(|_| {
                    ParseError::new(line, col, "integer literal out of range")
                })?;
                out.push(Token { kind: TokKind::Int(n), col });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Token {
                    kind: TokKind::Ident(text[start..i].to_string()),
                    col,
                });
            }
            other => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("unexpected character '{other}'"),
                ));
            }
        }
    }
    Ok(out)
}

/// Parser over a token slice, producing sparse multivariate polynomials.
/// With `g = 0` the X variables are rejected, which restricts the grammar
/// to rational functions of t.
pub struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    field: Arc<FqField>,
    g: usize,
}

impl<'a> ExprParser<'a> {
    pub fn new(toks: &'a [Token], line: usize, field: &Arc<FqField>, g: usize) -> ExprParser<'a> {
        ExprParser {
            toks,
            pos: 0,
            line,
            field: Arc::clone(field),
            g,
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    fn col(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.col)
            .unwrap_or_else(|| self.toks.last().map(|t| t.col + 1).unwrap_or(1))
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), msg)
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        let rest = name.strip_prefix('X')?;
        let rest = rest.strip_prefix('_').unwrap_or(rest);
        let idx: usize = rest.parse().ok()?;
        if idx >= 1 {
            Some(idx - 1)
        } else {
            None
        }
    }

    fn starts_factor(&self) -> bool {
        match self.peek() {
            Some(TokKind::Int(_)) | Some(TokKind::LParen) => true,
            Some(TokKind::Ident(name)) => {
                name == "t" || name == "g" || self.var_index(name).is_some()
            }
            _ => false,
        }
    }

    /// expr := term (('+'|'-') term)*
    pub fn parse_expr(&mut self) -> Result<MultiPoly, ParseError> {
        let mut acc = self.parse_term()?;
        loop {
            match self.peek() {
                Some(TokKind::Plus) => {
                    self.bump();
                    acc = acc.add(&self.parse_term()?);
                }
                Some(TokKind::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.parse_term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    /// term := factor (('*' | '/' | juxtaposition) factor)*
    fn parse_term(&mut self) -> Result<MultiPoly, ParseError> {
        let negate = matches!(self.peek(), Some(TokKind::Minus));
        if negate {
            self.bump();
        }
        let mut acc = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(TokKind::Star) => {
                    self.bump();
                    acc = acc.mul(&self.parse_factor()?);
                }
                Some(TokKind::Slash) => {
                    let col = self.col();
                    self.bump();
                    let rhs = self.parse_factor()?;
                    acc = acc.div_constant(&rhs).map_err(|e| {
                        ParseError::new(self.line, col, e.to_string())
                    })?;
                }
                _ if self.starts_factor() => {
                    acc = acc.mul(&self.parse_factor()?);
                }
                _ => return Ok(if negate { acc.neg() } else { acc }),
            }
        }
    }

    /// factor := atom ('^' uint)?
    fn parse_factor(&mut self) -> Result<MultiPoly, ParseError> {
        let atom = self.parse_atom()?;
        if matches!(self.peek(), Some(TokKind::Caret)) {
            self.bump();
            let e = match self.peek() {
                Some(&TokKind::Int(n)) => {
                    self.bump();
                    n
                }
                _ => return Err(self.err("expected an integer exponent after '^'")),
            };
            if e > 4096 {
                return Err(self.err("exponent too large"));
            }
            return Ok(atom.pow(e as u32));
        }
        Ok(atom)
    }

    fn parse_atom(&mut self) -> Result<MultiPoly, ParseError> {
        match self.peek().cloned() {
            Some(TokKind::Int(n)) => {
                self.bump();
                let c = RatFunc::from_elem(&self.field.from_int(n as i64));
                Ok(MultiPoly::constant(&self.field, self.g, c))
            }
            Some(TokKind::LParen) => {
                self.bump();
                let inner = self.parse_expr()?;
                match self.peek() {
                    Some(TokKind::RParen) => {
                        self.bump();
                        Ok(inner)
                    }
                    _ => Err(self.err("expected ')'")),
                }
            }
            Some(TokKind::Ident(name)) => {
                if name == "t" {
                    self.bump();
                    let c = RatFunc::var(&self.field);
                    return Ok(MultiPoly::constant(&self.field, self.g, c));
                }
                if name == "g" {
                    self.bump();
                    let c = RatFunc::from_elem(&self.field.generator());
                    return Ok(MultiPoly::constant(&self.field, self.g, c));
                }
                if let Some(idx) = self.var_index(&name) {
                    if idx >= self.g {
                        return Err(self.err(format!(
                            "variable X{} exceeds the ambient dimension {}",
                            idx + 1,
                            self.g
                        )));
                    }
                    self.bump();
                    return Ok(MultiPoly::var(&self.field, self.g, idx));
                }
                Err(self.err(format!("unknown identifier '{name}'")))
            }
            _ => Err(self.err("expected a value")),
        }
    }

    /// A rational-function literal: an expression without X variables.
    pub fn parse_ratfunc(&mut self) -> Result<RatFunc, ParseError> {
        let col = self.col();
        let p = self.parse_expr()?;
        multipoly_to_ratfunc(&p, &self.field)
            .ok_or_else(|| ParseError::new(self.line, col, "expected a coefficient expression"))
    }

    /// A product-level rational literal; stops at a top-level '+' or '-'.
    /// Sums must be parenthesized, which keeps tau terms unambiguous.
    pub fn parse_ratfunc_term(&mut self) -> Result<RatFunc, ParseError> {
        let col = self.col();
        let p = self.parse_term()?;
        multipoly_to_ratfunc(&p, &self.field)
            .ok_or_else(|| ParseError::new(self.line, col, "expected a coefficient expression"))
    }
}

fn multipoly_to_ratfunc(p: &MultiPoly, field: &Arc<FqField>) -> Option<RatFunc> {
    if p.is_zero() {
        return Some(RatFunc::zero(field));
    }
    if p.total_degree() != Some(0) {
        return None;
    }
    p.terms().next().map(|(_, c)| c.clone())
}

/// Parse a full line as a rational function (no X variables).
pub fn parse_ratfunc_line(
    text: &str,
    line: usize,
    field: &Arc<FqField>,
) -> Result<RatFunc, ParseError> {
    let toks = tokenize(text, line)?;
    let mut p = ExprParser::new(&toks, line, field, 0);
    let r = p.parse_ratfunc()?;
    p.expect_end()?;
    Ok(r)
}

/// Parse comma-separated rational functions.
pub fn parse_ratfunc_list(
    text: &str,
    line: usize,
    field: &Arc<FqField>,
) -> Result<Vec<RatFunc>, ParseError> {
    let toks = tokenize(text, line)?;
    let mut p = ExprParser::new(&toks, line, field, 0);
    let mut out = vec![p.parse_ratfunc()?];
    while matches!(p.peek(), Some(TokKind::Comma)) {
        p.bump();
        out.push(p.parse_ratfunc()?);
    }
    p.expect_end()?;
    Ok(out)
}

/// Parse a multivariate polynomial in X1..Xg.
pub fn parse_multipoly_line(
    text: &str,
    line: usize,
    field: &Arc<FqField>,
    g: usize,
) -> Result<MultiPoly, ParseError> {
    let toks = tokenize(text, line)?;
    let mut p = ExprParser::new(&toks, line, field, g);
    let poly = p.parse_expr()?;
    p.expect_end()?;
    Ok(poly)
}

/// Parse `phi_t = c_0 + (c_1) tau + ... + (c_r) tau^r`-style literals.
pub fn parse_twisted_line(
    text: &str,
    line: usize,
    field: &Arc<FqField>,
) -> Result<TwistedPoly, ParseError> {
    let toks = tokenize(text, line)?;
    let mut p = ExprParser::new(&toks, line, field, 0);
    let mut coeffs: Vec<RatFunc> = Vec::new();
    let add_term = |coeff: RatFunc, pow: usize, coeffs: &mut Vec<RatFunc>| {
        if coeffs.len() <= pow {
            coeffs.resize(pow + 1, RatFunc::zero(field));
        }
        coeffs[pow] = &coeffs[pow] + &coeff;
    };
    let mut first = true;
    loop {
        if p.at_end() {
            if first {
                return Err(ParseError::new(line, 1, "empty twisted polynomial"));
            }
            break;
        }
        let mut negate = false;
        if !first {
            match p.peek() {
                Some(TokKind::Plus) => {
                    p.bump();
                }
                Some(TokKind::Minus) => {
                    p.bump();
                    negate = true;
                }
                _ => return Err(p.err("expected '+' between tau terms")),
            }
        } else if matches!(p.peek(), Some(TokKind::Minus)) {
            p.bump();
            negate = true;
        }
        first = false;

        // Optional coefficient expression, then optional tau power.
        let coeff = if p.starts_factor() {
            p.parse_ratfunc_term()?
        } else {
            RatFunc::one(field)
        };
        let coeff = if negate { -&coeff } else { coeff };
        let pow = match p.peek() {
            Some(TokKind::Ident(name)) if name == "tau" => {
                p.bump();
                if matches!(p.peek(), Some(TokKind::Caret)) {
                    p.bump();
                    match p.peek() {
                        Some(&TokKind::Int(n)) => {
                            p.bump();
                            n as usize
                        }
                        _ => return Err(p.err("expected an integer after 'tau^'")),
                    }
                } else {
                    1
                }
            }
            _ => 0,
        };
        add_term(coeff, pow, &mut coeffs);
    }
    p.expect_end()?;
    Ok(TwistedPoly::from_coeffs(field, coeffs))
}

/// Place literal: `inf` or a monic irreducible polynomial in t.
pub fn parse_place_line(
    text: &str,
    line: usize,
    field: &Arc<FqField>,
) -> Result<Place, ParseError> {
    if text.trim() == "inf" {
        return Ok(Place::infinite(field));
    }
    let r = parse_ratfunc_line(text, line, field)?;
    let poly: &FqPoly = r
        .as_poly()
        .ok_or_else(|| ParseError::new(line, 1, "a place literal must be a polynomial"))?;
    Place::finite(poly.clone()).map_err(|e| ParseError::new(line, 1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Arc<FqField> {
        FqField::prime(2).unwrap()
    }

    #[test]
    fn rational_literals() {
        let f = f2();
        assert_eq!(parse_ratfunc_line("t^2+t", 1, &f).unwrap().to_string(), "t^2+t");
        assert_eq!(
            parse_ratfunc_line("(t^2+1)/(t+1)", 1, &f).unwrap().to_string(),
            "t+1" // (t+1)^2/(t+1) reduces
        );
        assert_eq!(parse_ratfunc_line("0", 1, &f).unwrap().to_string(), "0");
        assert_eq!(parse_ratfunc_line("1/(1+t)", 1, &f).unwrap().to_string(), "(1)/(t+1)");
    }

    #[test]
    fn extension_generator_literals() {
        let f4 = FqField::with_order(4).unwrap();
        let x = parse_ratfunc_line("g^2*t + g", 1, &f4).unwrap();
        assert_eq!(x.to_string(), "g^2*t+g");
    }

    #[test]
    fn twisted_literals() {
        let f = f2();
        let phi = parse_twisted_line("t + tau", 1, &f).unwrap();
        assert_eq!(phi.to_string(), "t + tau");
        let phi2 = parse_twisted_line("t + (t^2/(t+1)) tau + (1) tau^2", 1, &f).unwrap();
        assert_eq!(phi2.tau_degree(), Some(2));
        assert_eq!(phi2.coeff(0).to_string(), "t");
        assert_eq!(phi2.coeff(1).to_string(), "(t^2)/(t+1)");
        assert!(phi2.coeff(2).is_one());
        // bare tau with implicit coefficient 1 and power 1
        let phi3 = parse_twisted_line("t + t tau^2", 1, &f).unwrap();
        assert_eq!(phi3.coeff(2).to_string(), "t");
        assert!(phi3.coeff(1).is_zero());
    }

    #[test]
    fn multivariate_with_juxtaposition() {
        let f = f2();
        let p = parse_multipoly_line("(t+1) X1 X2 + X2^2 + t", 1, &f, 2).unwrap();
        assert_eq!(p.num_terms(), 3);
        let q = parse_multipoly_line("(t+1)*X1*X2 + X2^2 + t", 1, &f, 2).unwrap();
        assert_eq!(p, q);
        // X_1 synonym
        let r = parse_multipoly_line("X_1 - X_2", 1, &f, 2).unwrap();
        let s = parse_multipoly_line("X1 + X2", 1, &f, 2).unwrap();
        assert_eq!(r, s);
    }

    #[test]
    fn errors_carry_positions() {
        let f = f2();
        let err = parse_ratfunc_line("t + $", 1, &f).unwrap_err();
        assert_eq!((err.line, err.col), (1, 5));
        let err = parse_multipoly_line("X3 + 1", 7, &f, 2).unwrap_err();
        assert_eq!(err.line, 7);
        assert!(err.msg.contains("X3"));
        let err = parse_ratfunc_line("t/(X1+1)", 1, &f).unwrap_err();
        assert!(err.msg.contains("X1"), "{}", err.msg);
    }

    #[test]
    fn place_literals() {
        let f = f2();
        assert!(parse_place_line("inf", 1, &f).unwrap().is_infinite());
        let p = parse_place_line("t^2+t+1", 1, &f).unwrap();
        assert_eq!(p.degree(), 2);
        assert!(parse_place_line("t^2+1", 1, &f).is_err()); // (t+1)^2
        assert!(parse_place_line("t+t", 1, &f).is_err()); // zero
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let f = f2();
        assert!(parse_ratfunc_line("1/(t+t)", 1, &f).is_err());
    }
}
