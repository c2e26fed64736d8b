//! Expression trees, comparison statements and prefix-position addressing.
//!
//! Expressions are immutable and reference counted, so cloning a subtree is
//! cheap and goals can be shared freely between search workers. Equality is
//! purely structural: `x + y` and `y + x` are different expressions.

mod eval;
mod infix;
mod parse;

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

pub use eval::{eval_rational, eval_rational_expr, Verdict};
pub use infix::parse_infix;
pub use parse::{parse_expr, parse_statement, ExprParser, ParseError};

/// Unary operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
}

/// Binary operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

/// Named constants. These are never approximated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Constant {
    Pi,
    E,
}

/// Comparison operator at the root of a statement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cmp {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
    Ne,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 11] = [
        UnaryOp::Neg,
        UnaryOp::Exp,
        UnaryOp::Ln,
        UnaryOp::Sqrt,
        UnaryOp::Abs,
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Tan,
        UnaryOp::Sinh,
        UnaryOp::Cosh,
        UnaryOp::Tanh,
    ];

    pub fn token(self) -> &'static str {
        match self {
            UnaryOp::Neg => "neg",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
        }
    }

    pub fn from_token(tok: &str) -> Option<Self> {
        UnaryOp::ALL.into_iter().find(|op| op.token() == tok)
    }
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 7] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Pow,
        BinaryOp::Min,
        BinaryOp::Max,
    ];

    pub fn token(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Min => "min",
            BinaryOp::Max => "max",
        }
    }

    pub fn from_token(tok: &str) -> Option<Self> {
        BinaryOp::ALL.into_iter().find(|op| op.token() == tok)
    }
}

impl Constant {
    pub fn token(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }

    pub fn from_token(tok: &str) -> Option<Self> {
        match tok {
            "pi" => Some(Constant::Pi),
            "e" => Some(Constant::E),
            _ => None,
        }
    }
}

impl Cmp {
    pub const ALL: [Cmp; 6] = [Cmp::Eq, Cmp::Le, Cmp::Lt, Cmp::Ge, Cmp::Gt, Cmp::Ne];

    pub fn token(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Ne => "!=",
        }
    }

    pub fn from_token(tok: &str) -> Option<Self> {
        Cmp::ALL.into_iter().find(|c| c.token() == tok)
    }
}

/// An expression tree.
///
/// `Meta` leaves are capture variables and only appear in rule patterns;
/// in the textual formats they are written as single uppercase letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(Arc<str>),
    Meta(Arc<str>),
    Int(i64),
    /// A non-integral rational literal; the denominator is always > 1.
    Rat(Rational64),
    Const(Constant),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Arc::from(name))
    }

    pub fn meta(name: &str) -> Expr {
        Expr::Meta(Arc::from(name))
    }

    /// Builds a rational leaf, collapsing integral values to `Int`.
    pub fn rational(r: Rational64) -> Expr {
        if r.is_integer() {
            Expr::Int(r.to_integer())
        } else {
            Expr::Rat(r)
        }
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Arc::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Arc::new(a), Arc::new(b))
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Expr::Unary(..) | Expr::Binary(..))
    }

    pub fn arity(&self) -> usize {
        match self {
            Expr::Unary(..) => 1,
            Expr::Binary(..) => 2,
            _ => 0,
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Unary(_, a) => vec![a],
            Expr::Binary(_, a, b) => vec![a, b],
            _ => Vec::new(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    /// Height of the tree; a leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
            _ => 0,
        }
    }

    /// The token written for this node in prefix notation.
    pub fn head_token(&self) -> String {
        match self {
            Expr::Var(v) | Expr::Meta(v) => v.to_string(),
            Expr::Int(n) => n.to_string(),
            Expr::Rat(r) => format!("{}/{}", r.numer(), r.denom()),
            Expr::Const(c) => c.token().to_string(),
            Expr::Unary(op, _) => op.token().to_string(),
            Expr::Binary(op, _, _) => op.token().to_string(),
        }
    }

    /// Visits every node in prefix order.
    pub fn visit_prefix<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Unary(_, a) => a.visit_prefix(f),
            Expr::Binary(_, a, b) => {
                a.visit_prefix(f);
                b.visit_prefix(f);
            }
            _ => {}
        }
    }

    /// Subtree at prefix index `pos` (0 is `self`).
    pub fn subexpr_at(&self, pos: usize) -> Option<&Expr> {
        if pos == 0 {
            return Some(self);
        }
        match self {
            Expr::Unary(_, a) => a.subexpr_at(pos - 1),
            Expr::Binary(_, a, b) => {
                let left = a.size();
                if pos <= left {
                    a.subexpr_at(pos - 1)
                } else {
                    b.subexpr_at(pos - 1 - left)
                }
            }
            _ => None,
        }
    }

    /// Returns a copy with the subtree at prefix index `pos` replaced.
    pub fn replace_at(&self, pos: usize, new: Expr) -> Option<Expr> {
        if pos == 0 {
            return Some(new);
        }
        match self {
            Expr::Unary(op, a) => Some(Expr::unary(*op, a.replace_at(pos - 1, new)?)),
            Expr::Binary(op, a, b) => {
                let left = a.size();
                if pos <= left {
                    Some(Expr::Binary(*op, Arc::new(a.replace_at(pos - 1, new)?), b.clone()))
                } else {
                    Some(Expr::Binary(*op, a.clone(), Arc::new(b.replace_at(pos - 1 - left, new)?)))
                }
            }
            _ => None,
        }
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Expr::Var(_) | Expr::Meta(_) => true,
            Expr::Unary(_, a) => a.has_vars(),
            Expr::Binary(_, a, b) => a.has_vars() || b.has_vars(),
            _ => false,
        }
    }

    /// Capture variables in first-occurrence prefix order.
    pub fn metas(&self, out: &mut Vec<Arc<str>>) {
        self.visit_prefix(&mut |e| {
            if let Expr::Meta(m) = e {
                if !out.contains(m) {
                    out.push(m.clone());
                }
            }
        });
    }

    /// Human-readable infix rendering.
    pub fn to_infix(&self) -> String {
        infix::render_expr(self)
    }
}

impl fmt::Display for Expr {
    /// Prefix machine format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut result = Ok(());
        self.visit_prefix(&mut |e| {
            if result.is_err() {
                return;
            }
            if !first {
                result = f.write_str(" ");
            }
            first = false;
            if result.is_ok() {
                result = f.write_str(&e.head_token());
            }
        });
        result
    }
}

/// A comparison between two expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Statement {
    pub cmp: Cmp,
    pub lhs: Expr,
    pub rhs: Expr,
}

/// Node addressed by a prefix position inside a statement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Subterm<'a> {
    Root(&'a Statement),
    Expr(&'a Expr),
}

impl Statement {
    pub fn new(cmp: Cmp, lhs: Expr, rhs: Expr) -> Self {
        Statement { cmp, lhs, rhs }
    }

    /// Total node count, the comparison included.
    pub fn size(&self) -> usize {
        1 + self.lhs.size() + self.rhs.size()
    }

    pub fn subexpr_at(&self, pos: usize) -> Result<Subterm<'_>, PositionError> {
        if pos == 0 {
            return Ok(Subterm::Root(self));
        }
        let left = self.lhs.size();
        let found = if pos <= left {
            self.lhs.subexpr_at(pos - 1)
        } else {
            self.rhs.subexpr_at(pos - 1 - left)
        };
        found.map(Subterm::Expr).ok_or(PositionError { pos, size: self.size() })
    }

    /// Replaces the expression at `pos`; position 0 (the comparison) cannot be replaced.
    pub fn replace_at(&self, pos: usize, new: Expr) -> Result<Statement, PositionError> {
        let err = PositionError { pos, size: self.size() };
        if pos == 0 {
            return Err(err);
        }
        let left = self.lhs.size();
        if pos <= left {
            let lhs = self.lhs.replace_at(pos - 1, new).ok_or(err)?;
            Ok(Statement { cmp: self.cmp, lhs, rhs: self.rhs.clone() })
        } else {
            let rhs = self.rhs.replace_at(pos - 1 - left, new).ok_or(err)?;
            Ok(Statement { cmp: self.cmp, lhs: self.lhs.clone(), rhs })
        }
    }

    /// Expression subterms with their statement positions, in prefix order.
    pub fn positions(&self) -> Vec<(usize, &Expr)> {
        let mut out = Vec::with_capacity(self.size());
        let mut i = 1;
        for side in [&self.lhs, &self.rhs] {
            side.visit_prefix(&mut |e| {
                out.push((i, e));
                i += 1;
            });
        }
        out
    }

    pub fn has_vars(&self) -> bool {
        self.lhs.has_vars() || self.rhs.has_vars()
    }

    pub fn metas(&self, out: &mut Vec<Arc<str>>) {
        self.lhs.metas(out);
        self.rhs.metas(out);
    }

    pub fn to_infix(&self) -> String {
        format!("{} {} {}", self.lhs.to_infix(), self.cmp.token(), self.rhs.to_infix())
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.cmp.token(), self.lhs, self.rhs)
    }
}

impl std::str::FromStr for Statement {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_statement(s)
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("position {pos} out of range for statement of size {size}")]
pub struct PositionError {
    pub pos: usize,
    pub size: usize,
}
