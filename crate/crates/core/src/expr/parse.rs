use num_rational::Rational64;

use super::{BinaryOp, Cmp, Constant, Expr, Statement, UnaryOp};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at token {position}: {message}")]
pub struct ParseError {
    /// Index of the offending token in the whitespace-split input.
    pub position: usize,
    pub message: String,
}

/// Cursor over a whitespace-separated prefix token stream.
///
/// Prefix expressions are self-delimiting, so several expressions can be
/// read back to back from one stream (tactic bindings rely on this).
pub struct ExprParser<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
}

impl<'a> ExprParser<'a> {
    pub fn new(text: &'a str) -> Self {
        ExprParser { tokens: text.split_whitespace().collect(), pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn is_done(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).copied()
    }

    pub fn next_token(&mut self) -> Result<&'a str, ParseError> {
        let tok = self.peek().ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        Ok(tok)
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { position: self.pos, message: message.into() }
    }

    pub fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(tok) => Err(self.error(format!("trailing token `{tok}`"))),
        }
    }

    pub fn parse_statement(&mut self) -> Result<Statement, ParseError> {
        let at = self.pos;
        let tok = self.next_token()?;
        let cmp = Cmp::from_token(tok).ok_or_else(|| ParseError {
            position: at,
            message: format!("expected comparison operator, found `{tok}`"),
        })?;
        let lhs = self.parse_expr()?;
        let rhs = self.parse_expr()?;
        Ok(Statement { cmp, lhs, rhs })
    }

    pub fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let at = self.pos;
        let tok = self.next_token()?;
        let fail = |message: String| ParseError { position: at, message };
        if let Some(op) = BinaryOp::from_token(tok) {
            let a = self.parse_expr()?;
            let b = self.parse_expr()?;
            return Ok(Expr::binary(op, a, b));
        }
        if let Some(op) = UnaryOp::from_token(tok) {
            let a = self.parse_expr()?;
            return Ok(Expr::unary(op, a));
        }
        if let Some(c) = Constant::from_token(tok) {
            return Ok(Expr::Const(c));
        }
        if Cmp::from_token(tok).is_some() {
            return Err(fail(format!("comparison `{tok}` inside an expression")));
        }
        if let Some(lit) = parse_number(tok) {
            return lit.map_err(fail);
        }
        if is_identifier(tok) {
            let mut chars = tok.chars();
            let first = chars.next().unwrap_or('_');
            return Ok(if first.is_ascii_uppercase() && chars.next().is_none() {
                Expr::meta(tok)
            } else {
                Expr::var(tok)
            });
        }
        Err(fail(format!("unrecognized token `{tok}`")))
    }
}

fn is_identifier(tok: &str) -> bool {
    let mut chars = tok.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `None` when the token is not numeric at all.
fn parse_number(tok: &str) -> Option<Result<Expr, String>> {
    let digits = tok.strip_prefix('-').unwrap_or(tok);
    if !digits.starts_with(|c: char| c.is_ascii_digit()) {
        return None;
    }
    let parse_int = |s: &str| {
        let body = s.strip_prefix('-').unwrap_or(s);
        if !body.is_empty() && body.chars().all(|c| c.is_ascii_digit()) {
            s.parse::<i64>().map_err(|_| format!("integer literal `{s}` out of range"))
        } else {
            Err(format!("malformed number `{s}`"))
        }
    };
    Some(match tok.split_once('/') {
        None => parse_int(tok).map(Expr::Int),
        Some((n, d)) => parse_int(n).and_then(|n| {
            let d = parse_int(d)?;
            if d <= 0 {
                return Err(format!("bad denominator in `{tok}`"));
            }
            Ok(Expr::rational(Rational64::new(n, d)))
        }),
    })
}

pub fn parse_statement(text: &str) -> Result<Statement, ParseError> {
    let mut p = ExprParser::new(text);
    let s = p.parse_statement()?;
    p.expect_end()?;
    Ok(s)
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = ExprParser::new(text);
    let e = p.parse_expr()?;
    p.expect_end()?;
    Ok(e)
}
