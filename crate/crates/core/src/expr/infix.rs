//! Infix rendering and a convenience infix parser.
//!
//! The prefix format is authoritative; infix exists for humans. Rational
//! literals are written without spaces (`3/4`) while division always has
//! spaces around the slash (`3 / 4`), which keeps the two distinguishable.

use super::{BinaryOp, Cmp, Constant, Expr, ParseError, Statement, UnaryOp};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_ADD,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PREC_MUL,
        Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Expr::Binary(BinaryOp::Pow, ..) => PREC_POW,
        _ => PREC_ATOM,
    }
}

fn is_negative_literal(e: &Expr) -> bool {
    match e {
        Expr::Int(n) => *n < 0,
        Expr::Rat(r) => *r.numer() < 0,
        _ => false,
    }
}

pub(crate) fn render_expr(e: &Expr) -> String {
    match e {
        Expr::Var(v) | Expr::Meta(v) => v.to_string(),
        Expr::Int(_) | Expr::Rat(_) => {
            let lit = e.head_token();
            if is_negative_literal(e) {
                format!("({lit})")
            } else {
                lit
            }
        }
        Expr::Const(c) => c.token().to_string(),
        Expr::Unary(UnaryOp::Neg, a) => {
            let inner = render_expr(a);
            if precedence(a) < PREC_NEG || matches!(**a, Expr::Int(_) | Expr::Rat(_)) {
                format!("-({inner})")
            } else {
                format!("-{inner}")
            }
        }
        Expr::Unary(op, a) => format!("{}({})", op.token(), render_expr(a)),
        Expr::Binary(op @ (BinaryOp::Min | BinaryOp::Max), a, b) => {
            format!("{}({}, {})", op.token(), render_expr(a), render_expr(b))
        }
        Expr::Binary(op, a, b) => {
            let p = precedence(e);
            let (wrap_left, wrap_right) = if *op == BinaryOp::Pow {
                (precedence(a) <= p, precedence(b) < p)
            } else {
                (precedence(a) < p, precedence(b) <= p)
            };
            let l = render_expr(a);
            let r = render_expr(b);
            let l = if wrap_left { format!("({l})") } else { l };
            let r = if wrap_right { format!("({r})") } else { r };
            format!("{l} {} {r}", op.token())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(&'static str),
}

fn lex(text: &str) -> Result<Vec<Tok>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            out.push(Tok::Num(chars[start..i].iter().collect()));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym = match two.as_str() {
            "<=" => Some("<="),
            ">=" => Some(">="),
            "!=" => Some("!="),
            _ => None,
        };
        if let Some(s) = sym {
            out.push(Tok::Sym(s));
            i += 2;
            continue;
        }
        let s = match c {
            '+' => "+",
            '-' => "-",
            '*' => "*",
            '/' => "/",
            '^' => "^",
            '(' => "(",
            ')' => ")",
            ',' => ",",
            '=' => "=",
            '<' => "<",
            '>' => ">",
            _ => {
                return Err(ParseError { position: out.len(), message: format!("unexpected character `{c}`") })
            }
        };
        out.push(Tok::Sym(s));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_sym(&self) -> Option<&'static str> {
        match self.peek() {
            Some(Tok::Sym(s)) => Some(s),
            _ => None,
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError { position: self.pos, message: message.into() }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.peek_sym() == Some(sym) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{sym}`")))
        }
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        while let Some(s @ ("+" | "-")) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.multiplicative()?;
            let op = if s == "+" { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(s @ ("*" | "/")) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if s == "*" { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek_sym() == Some("-") {
            self.pos += 1;
            // `-3` directly followed by anything but `^` is a negative literal.
            if let Some(Tok::Num(n)) = self.peek().cloned() {
                if !matches!(self.toks.get(self.pos + 1), Some(Tok::Sym("^"))) {
                    self.pos += 1;
                    return self.number(&format!("-{n}"));
                }
            }
            let inner = self.unary()?;
            return Ok(Expr::unary(UnaryOp::Neg, inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek_sym() == Some("^") {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn number(&self, text: &str) -> Result<Expr, ParseError> {
        super::parse_expr(text).map_err(|e| self.error(e.message))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().cloned().ok_or_else(|| self.error("unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Tok::Num(n) => self.number(&n),
            Tok::Sym("(") => {
                let e = self.additive()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(op) = UnaryOp::from_token(&name).filter(|op| *op != UnaryOp::Neg) {
                    self.expect("(")?;
                    let a = self.additive()?;
                    self.expect(")")?;
                    return Ok(Expr::unary(op, a));
                }
                if let Some(op @ (BinaryOp::Min | BinaryOp::Max)) = BinaryOp::from_token(&name) {
                    self.expect("(")?;
                    let a = self.additive()?;
                    self.expect(",")?;
                    let b = self.additive()?;
                    self.expect(")")?;
                    return Ok(Expr::binary(op, a, b));
                }
                if let Some(c) = Constant::from_token(&name) {
                    return Ok(Expr::Const(c));
                }
                self.number(&name)
            }
            Tok::Sym(s) => {
                self.pos -= 1;
                Err(self.error(format!("unexpected `{s}`")))
            }
        }
    }
}

/// Parses `lhs <cmp> rhs` written in infix notation.
pub fn parse_infix(text: &str) -> Result<Statement, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let lhs = p.additive()?;
    let cmp = p
        .peek_sym()
        .and_then(Cmp::from_token)
        .ok_or_else(|| p.error("expected comparison operator"))?;
    p.pos += 1;
    let rhs = p.additive()?;
    if p.pos != p.toks.len() {
        return Err(p.error("trailing input"));
    }
    Ok(Statement { cmp, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_forms() {
        let s = parse_infix("(x - y) - (x + y) + 2 * y = 0").unwrap();
        assert_eq!(s.to_string(), "= + - - x y + x y * 2 y 0");
        let s = parse_infix("(-1)/2 < 6").unwrap();
        assert_eq!(s.to_string(), "< / -1 2 6");
        let s = parse_infix("cosh(-x) = cosh(x)").unwrap();
        assert_eq!(s.to_string(), "= cosh neg x cosh x");
        let s = parse_infix("sqrt(exp(x)^2) = exp(x)").unwrap();
        assert_eq!(s.to_string(), "= sqrt ^ exp x 2 exp x");
        let s = parse_infix("-x^2 <= max(x, 1/2)").unwrap();
        assert_eq!(s.to_string(), "<= neg ^ x 2 max x 1/2");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_infix("x + = y").is_err());
        assert!(parse_infix("x + y").is_err());
        assert!(parse_infix("x = y)").is_err());
        assert!(parse_infix("x # y").is_err());
    }
}
