use std::sync::Arc;

use super::{Binding, RuleError};
use crate::expr::{Expr, Statement};

/// Syntactic first-order matching of `pattern` against `target`.
///
/// Repeated capture variables must bind structurally equal subtrees.
pub fn match_pattern(pattern: &Expr, target: &Expr) -> Option<Binding> {
    let mut sigma = Binding::new();
    match_into(pattern, target, &mut sigma).then_some(sigma)
}

/// Extends `sigma` so that `sigma(pattern) == target`. On failure `sigma`
/// may hold partial bindings and should be discarded.
pub fn match_into(pattern: &Expr, target: &Expr, sigma: &mut Binding) -> bool {
    match (pattern, target) {
        (Expr::Meta(m), _) => match sigma.get(m) {
            Some(bound) => bound == target,
            None => {
                sigma.insert(m.clone(), target.clone());
                true
            }
        },
        (Expr::Unary(op, a), Expr::Unary(op2, a2)) => op == op2 && match_into(a, a2, sigma),
        (Expr::Binary(op, a, b), Expr::Binary(op2, a2, b2)) => {
            op == op2 && match_into(a, a2, sigma) && match_into(b, b2, sigma)
        }
        (Expr::Unary(..) | Expr::Binary(..), _) => false,
        (leaf, t) => leaf == t,
    }
}

pub fn match_statement(pattern: &Statement, target: &Statement, sigma: &mut Binding) -> bool {
    pattern.cmp == target.cmp
        && match_into(&pattern.lhs, &target.lhs, sigma)
        && match_into(&pattern.rhs, &target.rhs, sigma)
}

pub fn substitute(pattern: &Expr, sigma: &Binding) -> Result<Expr, RuleError> {
    Ok(match pattern {
        Expr::Meta(m) => sigma.get(m).cloned().ok_or_else(|| RuleError::Unbound(m.to_string()))?,
        Expr::Unary(op, a) => Expr::Unary(*op, Arc::new(substitute(a, sigma)?)),
        Expr::Binary(op, a, b) => {
            Expr::Binary(*op, Arc::new(substitute(a, sigma)?), Arc::new(substitute(b, sigma)?))
        }
        leaf => leaf.clone(),
    })
}

pub fn substitute_statement(pattern: &Statement, sigma: &Binding) -> Result<Statement, RuleError> {
    Ok(Statement {
        cmp: pattern.cmp,
        lhs: substitute(&pattern.lhs, sigma)?,
        rhs: substitute(&pattern.rhs, sigma)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use proptest::prelude::*;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn binds_capture_variables() {
        let sigma = match_pattern(&e("+ A B"), &e("+ x y")).unwrap();
        assert_eq!(sigma.get("A"), Some(&e("x")));
        assert_eq!(sigma.get("B"), Some(&e("y")));
        assert_eq!(sigma.len(), 2);

        let sigma = match_pattern(&e("sqrt ^ A 2"), &e("sqrt ^ exp x 2")).unwrap();
        assert_eq!(sigma.get("A"), Some(&e("exp x")));
        assert_eq!(sigma.len(), 1);
    }

    #[test]
    fn repeated_variables_need_equal_subtrees() {
        assert!(match_pattern(&e("+ A A"), &e("+ x y")).is_none());
        assert!(match_pattern(&e("+ A A"), &e("+ * x 2 * x 2")).is_some());
        assert!(match_pattern(&e("+ A 0"), &e("+ x 1")).is_none());
        assert!(match_pattern(&e("neg A"), &e("- x y")).is_none());
    }

    #[test]
    fn substitution() {
        let sigma: Binding = [(Arc::from("A"), e("x")), (Arc::from("B"), e("y"))].into_iter().collect();
        assert_eq!(substitute(&e("+ B A"), &sigma).unwrap(), e("+ y x"));
        let sigma: Binding = [(Arc::from("A"), e("x")), (Arc::from("B"), e("2"))].into_iter().collect();
        assert_eq!(substitute(&e("- + A B B"), &sigma).unwrap(), e("- + x 2 2"));
        assert_eq!(substitute(&e("A"), &Binding::new()), Err(RuleError::Unbound("A".into())));
    }

    fn arb_pattern() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["A", "B", "C"]).prop_map(Expr::meta),
            prop::sample::select(vec!["x", "y"]).prop_map(Expr::var),
            (0i64..3).prop_map(Expr::Int),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::unary(crate::expr::UnaryOp::Neg, a)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(crate::expr::BinaryOp::Add, a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::binary(crate::expr::BinaryOp::Mul, a, b)),
            ]
        })
    }

    fn ground(p: &Expr) -> Expr {
        match p {
            Expr::Meta(_) => Expr::var("x"),
            Expr::Unary(op, a) => Expr::unary(*op, ground(a)),
            Expr::Binary(op, a, b) => Expr::binary(*op, ground(a), ground(b)),
            leaf => leaf.clone(),
        }
    }

    proptest! {
        // A match is always sound: substituting the binding reproduces the target.
        #[test]
        fn match_then_substitute_is_identity(p in arb_pattern(), t in arb_pattern()) {
            let target = ground(&t);
            if let Some(sigma) = match_pattern(&p, &target) {
                prop_assert_eq!(substitute(&p, &sigma).unwrap(), target);
            }
        }

        #[test]
        fn instantiated_patterns_always_match(p in arb_pattern(), fill in arb_pattern()) {
            let mut metas = Vec::new();
            p.metas(&mut metas);
            let sigma: Binding = metas.into_iter().map(|m| (m, ground(&fill))).collect();
            let target = substitute(&p, &sigma).unwrap();
            let found = match_pattern(&p, &target).unwrap();
            prop_assert_eq!(substitute(&p, &found).unwrap(), target);
        }
    }
}
