//! Floating-point plausibility checks used only to rank candidates.
//!
//! Nothing here decides provability; the environment verifies with exact
//! arithmetic.

use std::collections::BTreeMap;

use crate::expr::{BinaryOp, Cmp, Constant, Expr, Statement, UnaryOp};

const SAMPLES: [f64; 11] = [0.73, 1.31, 2.87, -0.61, -1.72, 0.37, 3.29, -2.41, 1.87, 0.19, -0.93];
const POINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plausibility {
    /// Fails at every sampled point where it is defined.
    Refuted,
    /// Holds at some sampled point.
    Plausible,
    /// Undefined at every sampled point.
    Unknown,
}

pub fn eval_f64(e: &Expr, vars: &BTreeMap<&str, f64>) -> f64 {
    match e {
        Expr::Var(v) | Expr::Meta(v) => vars.get(&**v).copied().unwrap_or(f64::NAN),
        Expr::Int(n) => *n as f64,
        Expr::Rat(r) => *r.numer() as f64 / *r.denom() as f64,
        Expr::Const(Constant::Pi) => std::f64::consts::PI,
        Expr::Const(Constant::E) => std::f64::consts::E,
        Expr::Unary(op, a) => {
            let a = eval_f64(a, vars);
            match op {
                UnaryOp::Neg => -a,
                UnaryOp::Exp => a.exp(),
                UnaryOp::Ln if a > 0.0 => a.ln(),
                UnaryOp::Ln => f64::NAN,
                UnaryOp::Sqrt if a >= 0.0 => a.sqrt(),
                UnaryOp::Sqrt => f64::NAN,
                UnaryOp::Abs => a.abs(),
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Tan => a.tan(),
                UnaryOp::Sinh => a.sinh(),
                UnaryOp::Cosh => a.cosh(),
                UnaryOp::Tanh => a.tanh(),
            }
        }
        Expr::Binary(op, a, b) => {
            let (a, b) = (eval_f64(a, vars), eval_f64(b, vars));
            match op {
                BinaryOp::Add => a + b,
                BinaryOp::Sub => a - b,
                BinaryOp::Mul => a * b,
                BinaryOp::Div if b != 0.0 => a / b,
                BinaryOp::Div => f64::NAN,
                BinaryOp::Pow => a.powf(b),
                BinaryOp::Min => a.min(b),
                BinaryOp::Max => a.max(b),
            }
        }
    }
}

/// `Some(true)` holds, `Some(false)` clearly fails, `None` undefined or too close to call.
fn holds(s: &Statement, vars: &BTreeMap<&str, f64>) -> Option<bool> {
    let (a, b) = (eval_f64(&s.lhs, vars), eval_f64(&s.rhs, vars));
    if !a.is_finite() || !b.is_finite() {
        return None;
    }
    let tol = 1e-7 * a.abs().max(b.abs()).max(1.0);
    let near = (a - b).abs() <= tol;
    Some(match s.cmp {
        Cmp::Eq => near,
        Cmp::Ne => !near,
        Cmp::Le => a <= b + tol,
        Cmp::Ge => a + tol >= b,
        Cmp::Lt => a < b - tol,
        Cmp::Gt => a > b + tol,
    })
}

fn collect_vars<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
    e.visit_prefix(&mut |x| {
        if let Expr::Var(v) | Expr::Meta(v) = x {
            if !out.contains(&&**v) {
                out.push(v);
            }
        }
    });
}

/// Samples a few assignments satisfying `hyps` and checks `stmt` on them.
pub fn plausibility(stmt: &Statement, hyps: &[Statement]) -> Plausibility {
    let mut names = Vec::new();
    for s in hyps.iter().chain(std::iter::once(stmt)) {
        collect_vars(&s.lhs, &mut names);
        collect_vars(&s.rhs, &mut names);
    }
    names.sort_unstable();
    let mut defined = false;
    for i in 0..POINTS {
        let vars: BTreeMap<&str, f64> =
            names.iter().enumerate().map(|(j, v)| (*v, SAMPLES[(i * 7 + j * 3) % SAMPLES.len()])).collect();
        if hyps.iter().any(|h| holds(h, &vars) != Some(true)) {
            continue;
        }
        match holds(stmt, &vars) {
            Some(true) => return Plausibility::Plausible,
            Some(false) => defined = true,
            None => {}
        }
    }
    if defined {
        Plausibility::Refuted
    } else {
        Plausibility::Unknown
    }
}
