//! The proving environment: goals, tactic application and trivial closing.

mod proof;
mod tactic;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::expr::{eval_rational, parse_statement, BinaryOp, Expr, ParseError, PositionError, Statement, Subterm, Verdict};
use crate::rules::{
    match_into, match_pattern, match_statement, substitute, substitute_statement, ARule, Binding, IntArith, Inventory,
    Rule, RuleError, TRule,
};

pub use proof::{Proof, ProofRecord, ProofStep, ReplayError, StepRecord};
pub use tactic::Tactic;

/// Free-binding combinations tried per (rule, direction, position).
pub const MAX_BINDING_COMBOS: usize = 256;

/// Small integers offered as free-binding candidates.
pub const POOL_INTEGERS: std::ops::RangeInclusive<i64> = -3..=3;

/// A statement to prove under local hypotheses.
///
/// Identity is structural over both parts, so equal goals reached along
/// different paths are the same search node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Goal {
    pub stmt: Statement,
    pub hyps: Arc<[Statement]>,
}

impl Goal {
    pub fn new(stmt: Statement) -> Self {
        Goal { stmt, hyps: Arc::from(Vec::new()) }
    }

    pub fn with_hyps(stmt: Statement, hyps: Vec<Statement>) -> Self {
        Goal { stmt, hyps: Arc::from(hyps) }
    }

    /// Same hypotheses, different statement.
    pub fn derive(&self, stmt: Statement) -> Self {
        Goal { stmt, hyps: self.hyps.clone() }
    }

    pub fn size(&self) -> usize {
        self.stmt.size()
    }

    pub fn to_infix(&self) -> String {
        let hyps: Vec<String> = self.hyps.iter().map(Statement::to_infix).collect();
        if hyps.is_empty() {
            self.stmt.to_infix()
        } else {
            format!("{} |- {}", hyps.join(" ; "), self.stmt.to_infix())
        }
    }
}

/// `hyp ; hyp |- stmt`, or just `stmt` without hypotheses.
impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, h) in self.hyps.iter().enumerate() {
            write!(f, "{}{h}", if i == 0 { "" } else { " ; " })?;
        }
        if !self.hyps.is_empty() {
            f.write_str(" |- ")?;
        }
        write!(f, "{}", self.stmt)
    }
}

impl FromStr for Goal {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once("|-") {
            None => Ok(Goal::new(parse_statement(s)?)),
            Some((hyps, stmt)) => {
                let hyps = hyps
                    .split(';')
                    .map(str::trim)
                    .filter(|h| !h.is_empty())
                    .map(parse_statement)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Goal::with_hyps(parse_statement(stmt)?, hyps))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TacticError {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error(transparent)]
    Position(#[from] PositionError),
    #[error("rule does not match at position {0}")]
    NoMatch(usize),
    #[error("rule kind does not fit the tactic kind")]
    WrongKind,
    #[error("rule cannot be applied in this direction")]
    DirectionNotAllowed,
    #[error("missing binding for {0}")]
    MissingBinding(String),
    #[error("unexpected binding for {0}")]
    UnexpectedBinding(String),
    #[error("bindings must not contain capture variables")]
    NonGroundBinding,
    #[error("integer arithmetic is undefined or overflows")]
    Arithmetic,
    #[error("tactic reproduces its own goal")]
    SelfLoop,
}

impl From<RuleError> for TacticError {
    fn from(e: RuleError) -> Self {
        match e {
            RuleError::Unbound(v) => TacticError::MissingBinding(v),
            other => TacticError::UnknownRule(other.to_string()),
        }
    }
}

/// Result of a successful tactic application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Application {
    /// Subgoals still to prove, rewritten goal first then rule hypotheses.
    pub children: Vec<Goal>,
    /// Subgoals produced but discharged immediately by [`Env::close_trivial`].
    pub closed: Vec<Goal>,
}

impl Application {
    pub fn solves(&self) -> bool {
        self.children.is_empty()
    }
}

/// A stateless environment over a fixed rule inventory.
#[derive(Clone, Debug)]
pub struct Env {
    inventory: Arc<Inventory>,
    closers: Arc<[ARule]>,
}

impl Env {
    pub fn new(inventory: Inventory) -> Self {
        Env::from_shared(Arc::new(inventory))
    }

    pub fn from_shared(inventory: Arc<Inventory>) -> Self {
        let closers = inventory.asserts().filter(|a| a.hyps.is_empty()).cloned().collect::<Vec<_>>();
        Env { inventory, closers: Arc::from(closers) }
    }

    pub fn inventory(&self) -> &Inventory {
        &self.inventory
    }

    /// True iff the goal holds by exact evaluation, is one of its own
    /// hypotheses, or is an instance of a hypothesis-free assertion rule.
    pub fn close_trivial(&self, g: &Goal) -> bool {
        if g.hyps.contains(&g.stmt) || self.closers.iter().any(|a| match_statement(&a.conclusion, &g.stmt, &mut Binding::new())) {
            return true;
        }
        !g.stmt.has_vars() && eval_rational(&g.stmt) == Verdict::True
    }

    pub fn apply(&self, g: &Goal, t: &Tactic) -> Result<Application, TacticError> {
        let rule = self.inventory.get(t.rule()).ok_or_else(|| TacticError::UnknownRule(t.rule().to_string()))?;
        if t.bindings().iter().any(|(_, v)| {
            let mut m = Vec::new();
            v.metas(&mut m);
            !m.is_empty()
        }) {
            return Err(TacticError::NonGroundBinding);
        }
        let produced = match (rule, t) {
            (Rule::Transform(r), Tactic::Rewrite { forward, pos, bindings, .. }) => {
                apply_transform(r, g, *forward, *pos, bindings)?
            }
            (Rule::Int(op), Tactic::Rewrite { forward, pos, bindings, .. }) => {
                let sub = expr_at(&g.stmt, *pos)?;
                let new = int_arith(*op, *forward, sub, bindings).ok_or(TacticError::NoMatch(*pos))??;
                vec![g.stmt.replace_at(*pos, new)?]
            }
            (Rule::Assert(r), Tactic::Assert { bindings, .. }) => apply_assert(r, g, bindings)?,
            _ => return Err(TacticError::WrongKind),
        };
        let mut seen = HashSet::new();
        let mut app = Application { children: Vec::new(), closed: Vec::new() };
        for stmt in produced {
            let child = g.derive(stmt);
            if child == *g {
                return Err(TacticError::SelfLoop);
            }
            if !seen.insert(child.clone()) {
                continue;
            }
            if self.close_trivial(&child) {
                app.closed.push(child);
            } else {
                app.children.push(child);
            }
        }
        Ok(app)
    }

    /// All tactics whose pattern matches `g`, truncated to `budget`.
    ///
    /// Tactics that need no free bindings come first (rule order, then
    /// forward before backward, then position), followed by those
    /// instantiated from the candidate pool in the same order. Symmetric
    /// rules are only offered forward.
    pub fn enumerate_tactics(&self, g: &Goal, budget: usize) -> Vec<Tactic> {
        let mut direct = Vec::new();
        let mut pooled = Vec::new();
        let pool = candidate_pool(g);
        for rule in self.inventory.rules() {
            if direct.len() >= budget {
                break;
            }
            match rule {
                Rule::Transform(r) => {
                    for forward in [true, false] {
                        if !r.allows(forward) || (!forward && r.is_symmetric()) {
                            continue;
                        }
                        let (src, _) = r.oriented(forward);
                        let free = r.free_vars(forward);
                        for (pos, sub) in g.stmt.positions() {
                            if match_pattern(src, sub).is_none() {
                                continue;
                            }
                            let base = Tactic::Rewrite { rule: r.id.clone(), forward, pos, bindings: Binding::new() };
                            if free.is_empty() {
                                direct.push(base);
                            } else {
                                pooled.extend(instantiate(&base, &free, &pool, budget.saturating_sub(pooled.len())));
                            }
                        }
                    }
                }
                Rule::Int(op) => {
                    for (pos, sub) in g.stmt.positions() {
                        let base = Tactic::Rewrite { rule: Arc::from(op.id()), forward: false, pos, bindings: Binding::new() };
                        if matches!(int_arith(*op, false, sub, &Binding::new()), Some(Ok(_))) {
                            direct.push(base);
                        }
                        if let Expr::Int(n) = sub {
                            for a in pool.iter().filter_map(|e| if let Expr::Int(a) = e { Some(*a) } else { None }) {
                                if useful_split(*op, *n, a) && pooled.len() < budget {
                                    pooled.push(Tactic::rewrite(op.id(), true, pos).with_binding("A", Expr::Int(a)));
                                }
                            }
                        }
                    }
                }
                Rule::Assert(r) => {
                    if !match_statement(&r.conclusion, &g.stmt, &mut Binding::new()) {
                        continue;
                    }
                    let base = Tactic::Assert { rule: r.id.clone(), bindings: Binding::new() };
                    let free = r.free_vars();
                    if free.is_empty() {
                        direct.push(base);
                    } else {
                        pooled.extend(instantiate(&base, &free, &pool, budget.saturating_sub(pooled.len())));
                    }
                }
            }
        }
        direct.extend(pooled);
        direct.truncate(budget);
        direct
    }
}

fn expr_at(stmt: &Statement, pos: usize) -> Result<&Expr, TacticError> {
    match stmt.subexpr_at(pos)? {
        Subterm::Expr(e) => Ok(e),
        Subterm::Root(_) => Err(TacticError::NoMatch(pos)),
    }
}

/// Adds user bindings for exactly the free variables of a rule.
fn bind_free(sigma: &mut Binding, free: &[Arc<str>], given: &Binding) -> Result<(), TacticError> {
    for (k, v) in given.iter() {
        if !free.contains(k) {
            return Err(TacticError::UnexpectedBinding(k.to_string()));
        }
        sigma.insert(k.clone(), v.clone());
    }
    match free.iter().find(|v| !given.contains(v)) {
        Some(v) => Err(TacticError::MissingBinding(v.to_string())),
        None => Ok(()),
    }
}

fn apply_transform(
    r: &TRule,
    g: &Goal,
    forward: bool,
    pos: usize,
    given: &Binding,
) -> Result<Vec<Statement>, TacticError> {
    if !r.allows(forward) {
        return Err(TacticError::DirectionNotAllowed);
    }
    let sub = expr_at(&g.stmt, pos)?;
    let (src, dst) = r.oriented(forward);
    let mut sigma = Binding::new();
    if !match_into(src, sub, &mut sigma) {
        return Err(TacticError::NoMatch(pos));
    }
    bind_free(&mut sigma, &r.free_vars(forward), given)?;
    let mut out = vec![g.stmt.replace_at(pos, substitute(dst, &sigma)?)?];
    for h in &r.hyps {
        out.push(substitute_statement(h, &sigma)?);
    }
    Ok(out)
}

fn apply_assert(r: &ARule, g: &Goal, given: &Binding) -> Result<Vec<Statement>, TacticError> {
    let mut sigma = Binding::new();
    if !match_statement(&r.conclusion, &g.stmt, &mut sigma) {
        return Err(TacticError::NoMatch(0));
    }
    bind_free(&mut sigma, &r.free_vars(), given)?;
    r.hyps.iter().map(|h| substitute_statement(h, &sigma).map_err(TacticError::from)).collect()
}

/// `None` when the subterm has the wrong shape for this direction.
fn int_arith(op: IntArith, forward: bool, sub: &Expr, given: &Binding) -> Option<Result<Expr, TacticError>> {
    let bin = match op {
        IntArith::Add => BinaryOp::Add,
        IntArith::Mul => BinaryOp::Mul,
    };
    if forward {
        let Expr::Int(n) = sub else { return None };
        let a = match given.get("A") {
            Some(Expr::Int(a)) if given.len() == 1 => *a,
            Some(_) => return Some(Err(TacticError::Arithmetic)),
            None if given.is_empty() => return Some(Err(TacticError::MissingBinding("A".into()))),
            None => return Some(Err(TacticError::UnexpectedBinding("A".into()))),
        };
        let b = match op {
            IntArith::Add => n.checked_sub(a),
            IntArith::Mul => (a != 0 && n % a == 0).then(|| n / a),
        };
        Some(b.map(|b| Expr::binary(bin, Expr::Int(a), Expr::Int(b))).ok_or(TacticError::Arithmetic))
    } else {
        let Expr::Binary(o, x, y) = sub else { return None };
        let (Expr::Int(a), Expr::Int(b)) = (&**x, &**y) else { return None };
        if *o != bin {
            return None;
        }
        if let Some((k, _)) = given.iter().next() {
            return Some(Err(TacticError::UnexpectedBinding(k.to_string())));
        }
        let v = match op {
            IntArith::Add => a.checked_add(*b),
            IntArith::Mul => a.checked_mul(*b),
        };
        Some(v.map(Expr::Int).ok_or(TacticError::Arithmetic))
    }
}

fn useful_split(op: IntArith, n: i64, a: i64) -> bool {
    match op {
        IntArith::Add => a != 0 && a != n,
        IntArith::Mul => a != 0 && a != 1 && a != n && n % a == 0,
    }
}

/// Goal subterms, then small integers, then hypothesis subterms; deduplicated.
fn candidate_pool(g: &Goal) -> Vec<Expr> {
    let mut seen = HashSet::new();
    let mut pool = Vec::new();
    let mut push = |e: &Expr| {
        if seen.insert(e.clone()) {
            pool.push(e.clone());
        }
    };
    for (_, e) in g.stmt.positions() {
        push(e);
    }
    for n in POOL_INTEGERS {
        push(&Expr::Int(n));
    }
    for h in g.hyps.iter() {
        for (_, e) in h.positions() {
            push(e);
        }
    }
    pool
}

fn instantiate(base: &Tactic, free: &[Arc<str>], pool: &[Expr], cap: usize) -> Vec<Tactic> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; free.len()];
    if pool.is_empty() {
        return out;
    }
    while out.len() < MAX_BINDING_COMBOS.min(cap) {
        let mut t = base.clone();
        for (v, &i) in free.iter().zip(&idx) {
            t = t.with_binding(v, pool[i].clone());
        }
        out.push(t);
        // Odometer increment, last variable fastest.
        let mut k = free.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < pool.len() {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}
