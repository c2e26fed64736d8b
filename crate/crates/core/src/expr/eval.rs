//! Exact evaluation of variable-free statements over the rationals.
//!
//! Only operators closed over the rationals are evaluated. Anything else
//! (transcendental functions, square roots, named constants, non-integer
//! exponents, division by zero) makes the statement undecidable here; there
//! is deliberately no floating-point fallback.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{BinaryOp, Cmp, Expr, Statement, UnaryOp};

/// Largest exponent magnitude evaluated exactly.
const MAX_EXPONENT: u32 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    True,
    False,
    NotRationallyDecidable,
}

/// Exact rational value of a variable-free expression, if it has one we can certify.
pub fn eval_rational_expr(e: &Expr) -> Option<BigRational> {
    match e {
        Expr::Int(n) => Some(BigRational::from_integer(BigInt::from(*n))),
        Expr::Rat(r) => Some(BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))),
        Expr::Var(_) | Expr::Meta(_) | Expr::Const(_) => None,
        Expr::Unary(op, a) => {
            let a = eval_rational_expr(a)?;
            match op {
                UnaryOp::Neg => Some(-a),
                UnaryOp::Abs => Some(a.abs()),
                _ => None,
            }
        }
        Expr::Binary(op, a, b) => {
            let a = eval_rational_expr(a)?;
            let b = eval_rational_expr(b)?;
            match op {
                BinaryOp::Add => Some(a + b),
                BinaryOp::Sub => Some(a - b),
                BinaryOp::Mul => Some(a * b),
                BinaryOp::Div => (!b.is_zero()).then(|| a / b),
                BinaryOp::Min => Some(if a <= b { a } else { b }),
                BinaryOp::Max => Some(if a >= b { a } else { b }),
                BinaryOp::Pow => int_pow(a, &b),
            }
        }
    }
}

fn int_pow(base: BigRational, exp: &BigRational) -> Option<BigRational> {
    if !exp.is_integer() {
        return None;
    }
    let n = exp.to_integer().to_i64()?;
    let mag = u32::try_from(n.unsigned_abs()).ok().filter(|m| *m <= MAX_EXPONENT)?;
    if n < 0 && base.is_zero() {
        return None;
    }
    let acc = num_traits::pow(base, mag as usize);
    Some(if n < 0 { acc.recip() } else { acc })
}

/// Decides a statement by exact rational evaluation, or reports that it cannot.
pub fn eval_rational(s: &Statement) -> Verdict {
    let (Some(l), Some(r)) = (eval_rational_expr(&s.lhs), eval_rational_expr(&s.rhs)) else {
        return Verdict::NotRationallyDecidable;
    };
    let holds = match s.cmp {
        Cmp::Eq => l == r,
        Cmp::Ne => l != r,
        Cmp::Lt => l < r,
        Cmp::Le => l <= r,
        Cmp::Gt => l > r,
        Cmp::Ge => l >= r,
    };
    if holds {
        Verdict::True
    } else {
        Verdict::False
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_statement;

    fn verdict(s: &str) -> Verdict {
        eval_rational(&parse_statement(s).unwrap())
    }

    #[test]
    fn decides_rational_comparisons() {
        assert_eq!(verdict("= - 1 / 7 4 / -6 8"), Verdict::True);
        assert_eq!(verdict("< / -1 2 6"), Verdict::True);
        assert_eq!(verdict("< 5 ^ -3 2"), Verdict::True);
        assert_eq!(verdict("> 1/2 1/4"), Verdict::True);
        assert_eq!(verdict("= 2 3"), Verdict::False);
        assert_eq!(verdict("= ^ 2 -2 1/4"), Verdict::True);
        assert_eq!(verdict("= min 2 abs -5 max -1 2"), Verdict::True);
    }

    #[test]
    fn refuses_what_it_cannot_certify() {
        assert_eq!(verdict("< exp 1 exp 2"), Verdict::NotRationallyDecidable);
        assert_eq!(verdict("!= cos / pi 2 0"), Verdict::NotRationallyDecidable);
        assert_eq!(verdict("!= cos 3 0"), Verdict::NotRationallyDecidable);
        assert_eq!(verdict("= sqrt 4 2"), Verdict::NotRationallyDecidable);
        assert_eq!(verdict("= ^ 4 1/2 2"), Verdict::NotRationallyDecidable);
        assert_eq!(verdict("= / 1 0 / 1 0"), Verdict::NotRationallyDecidable);
        assert_eq!(verdict("= ^ 0 -1 1"), Verdict::NotRationallyDecidable);
        assert_eq!(verdict("= x x"), Verdict::NotRationallyDecidable);
        assert_eq!(verdict("= e e"), Verdict::NotRationallyDecidable);
        assert_eq!(
            verdict("= exp neg exp exp 2 exp neg exp exp 3"),
            Verdict::NotRationallyDecidable
        );
        assert_eq!(verdict("= ^ 2 100000 0"), Verdict::NotRationallyDecidable);
    }
}
