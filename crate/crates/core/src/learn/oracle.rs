use std::sync::Arc;

use crate::env::{Env, Goal, Tactic};
use crate::expr::{BinaryOp, Expr, Statement, UnaryOp};

use super::probe::{plausibility, Plausibility};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("oracle failed: {0}")]
    Failed(String),
    #[error("oracle I/O error: {0}")]
    Io(String),
    #[error("oracle protocol error: {0}")]
    Protocol(String),
}

/// Candidate tactics with prior weights, plus a provability estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub tactics: Vec<(Tactic, f64)>,
    /// Estimated probability that the goal is provable, in `[0, 1]`.
    pub critic: f64,
}

/// Policy and critic consulted when a goal is expanded.
pub trait PolicyOracle: Send + Sync {
    /// Up to `k` tactics with non-negative weights (normalized by the caller).
    fn suggest(&self, goal: &Goal, k: usize) -> Result<Vec<(Tactic, f64)>, OracleError>;

    fn critic(&self, goal: &Goal) -> Result<f64, OracleError>;

    fn evaluate(&self, goal: &Goal, k: usize) -> Result<Evaluation, OracleError> {
        Ok(Evaluation { tactics: self.suggest(goal, k)?, critic: self.critic(goal)? })
    }

    fn name(&self) -> &str;
}

impl<T: PolicyOracle + ?Sized> PolicyOracle for Arc<T> {
    fn suggest(&self, goal: &Goal, k: usize) -> Result<Vec<(Tactic, f64)>, OracleError> {
        (**self).suggest(goal, k)
    }

    fn critic(&self, goal: &Goal) -> Result<f64, OracleError> {
        (**self).critic(goal)
    }

    fn evaluate(&self, goal: &Goal, k: usize) -> Result<Evaluation, OracleError> {
        (**self).evaluate(goal, k)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

/// Every applicable tactic (enumeration order) with equal weight; critic 0.5.
#[derive(Clone, Debug)]
pub struct UniformOracle {
    env: Env,
}

impl UniformOracle {
    pub fn new(env: Env) -> Self {
        UniformOracle { env }
    }
}

impl PolicyOracle for UniformOracle {
    fn suggest(&self, goal: &Goal, k: usize) -> Result<Vec<(Tactic, f64)>, OracleError> {
        Ok(self.env.enumerate_tactics(goal, k).into_iter().map(|t| (t, 1.0)).collect())
    }

    fn critic(&self, _: &Goal) -> Result<f64, OracleError> {
        Ok(0.5)
    }

    fn name(&self) -> &str {
        "uniform"
    }
}

/// Suggests nothing: every expanded goal without a trivial closer is a dead end.
#[derive(Clone, Copy, Debug, Default)]
pub struct EmptyOracle;

impl PolicyOracle for EmptyOracle {
    fn suggest(&self, _: &Goal, _: usize) -> Result<Vec<(Tactic, f64)>, OracleError> {
        Ok(Vec::new())
    }

    fn critic(&self, _: &Goal) -> Result<f64, OracleError> {
        Ok(0.5)
    }

    fn name(&self) -> &str {
        "empty"
    }
}

/// Hand-written scoring: favours tactics that close goals or shrink them and
/// penalizes subgoals that numerically look false.
#[derive(Clone, Debug)]
pub struct HeuristicOracle {
    env: Env,
    /// Candidates enumerated before scoring.
    pub pool: usize,
    /// Softmax weight per node of size change.
    pub size_weight: f64,
    /// Critic factor per node of goal size.
    pub critic_decay: f64,
}

const SOLVE_SCORE: f64 = 8.0;
const REFUTED_PENALTY: f64 = 12.0;
const EXTRA_CHILD_PENALTY: f64 = 0.5;
/// Backward rewrites mostly introduce structure (`x -> x + 0`).
const BACKWARD_PENALTY: f64 = 2.0;

/// Size in which each operator costs roughly what its definition costs, so
/// unfolding a hyperbolic function is not penalized as growth.
pub fn weighted_size(e: &Expr) -> f64 {
    let mut total = 0.0;
    e.visit_prefix(&mut |x| {
        total += match x {
            Expr::Unary(UnaryOp::Sinh | UnaryOp::Cosh | UnaryOp::Tanh, _) => 10.0,
            Expr::Unary(UnaryOp::Tan, _) => 8.0,
            Expr::Unary(UnaryOp::Sin | UnaryOp::Cos, _) => 4.0,
            Expr::Unary(UnaryOp::Exp | UnaryOp::Ln | UnaryOp::Sqrt | UnaryOp::Abs, _) => 2.0,
            Expr::Binary(BinaryOp::Div | BinaryOp::Pow | BinaryOp::Min | BinaryOp::Max, _, _) => 2.0,
            _ => 1.0,
        }
    });
    total
}

pub fn statement_weight(s: &Statement) -> f64 {
    1.0 + weighted_size(&s.lhs) + weighted_size(&s.rhs)
}

/// Signed summands of `e` with their tree paths, looking through `+`, `-` and `neg`.
fn summands<'a>(e: &'a Expr, positive: bool, path: &mut Vec<u8>, out: &mut Vec<(bool, &'a Expr, Vec<u8>)>) {
    match e {
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, a, b) => {
            let sub = matches!(e, Expr::Binary(BinaryOp::Sub, _, _));
            path.push(0);
            summands(a, positive, path, out);
            path.pop();
            path.push(1);
            summands(b, positive != sub, path, out);
            path.pop();
        }
        Expr::Unary(UnaryOp::Neg, a) => {
            path.push(0);
            summands(a, !positive, path, out);
            path.pop();
        }
        _ => out.push((positive, e, path.clone())),
    }
}

/// How far apart cancelling summand pairs (`t` and `-t`) sit in the tree,
/// beyond the minimum of two, summed over every additive cluster; pairs
/// are matched greedily by distance.
pub fn cancellation_distance(e: &Expr) -> f64 {
    let mut terms = Vec::new();
    summands(e, true, &mut Vec::new(), &mut terms);
    let nested: f64 = terms.iter().flat_map(|t| t.1.children()).map(cancellation_distance).sum();
    let mut pairs = Vec::new();
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            if terms[i].0 != terms[j].0 && terms[i].1 == terms[j].1 {
                let (a, b) = (&terms[i].2, &terms[j].2);
                let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
                pairs.push((a.len() + b.len() - 2 * common, i, j));
            }
        }
    }
    pairs.sort_unstable();
    let mut used = vec![false; terms.len()];
    let mut total = nested;
    for (d, i, j) in pairs {
        if !used[i] && !used[j] {
            used[i] = true;
            used[j] = true;
            total += d.saturating_sub(2) as f64;
        }
    }
    total
}

/// Weighted size plus half the cancellation distance of both sides.
pub fn heuristic_cost(s: &Statement) -> f64 {
    statement_weight(s) + 0.5 * (cancellation_distance(&s.lhs) + cancellation_distance(&s.rhs))
}

impl HeuristicOracle {
    pub fn new(env: Env) -> Self {
        HeuristicOracle { env, pool: 4096, size_weight: 1.0, critic_decay: DEFAULT_CRITIC_DECAY }
    }

    /// Score of each applicable tactic, best first (ties by tactic string).
    pub fn scored(&self, goal: &Goal) -> Vec<(Tactic, f64)> {
        let mut out: Vec<(Tactic, f64, String)> = Vec::new();
        for t in self.env.enumerate_tactics(goal, self.pool) {
            let Ok(app) = self.env.apply(goal, &t) else { continue };
            let score = if app.solves() {
                SOLVE_SCORE
            } else {
                let after: f64 = app.children.iter().map(|c| heuristic_cost(&c.stmt)).sum();
                let mut s = -(after - heuristic_cost(&goal.stmt)) * self.size_weight;
                match t {
                    Tactic::Rewrite { forward: false, .. } => s -= BACKWARD_PENALTY,
                    // Restating the goal (e.g. by symmetry) makes no progress.
                    Tactic::Assert { .. } if app.children.len() == 1 && after == heuristic_cost(&goal.stmt) => {
                        s -= BACKWARD_PENALTY
                    }
                    _ => {}
                }
                s -= EXTRA_CHILD_PENALTY * (app.children.len() as f64 - 1.0);
                if app.children.iter().any(|c| plausibility(&c.stmt, &c.hyps) == Plausibility::Refuted) {
                    s -= REFUTED_PENALTY;
                }
                s
            };
            let key = t.to_string();
            out.push((t, score, key));
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.2.cmp(&b.2)));
        out.into_iter().map(|(t, s, _)| (t, s)).collect()
    }
}

pub const DEFAULT_CRITIC_DECAY: f64 = 0.97;

/// Estimate used by the heuristic critic: small, plausible goals are likely provable.
pub fn size_critic(goal: &Goal, decay: f64) -> f64 {
    if plausibility(&goal.stmt, &goal.hyps) == Plausibility::Refuted {
        return 0.0;
    }
    decay.powf((heuristic_cost(&goal.stmt) - 3.0).max(0.0)).clamp(1e-6, 0.99)
}

impl PolicyOracle for HeuristicOracle {
    fn suggest(&self, goal: &Goal, k: usize) -> Result<Vec<(Tactic, f64)>, OracleError> {
        let mut scored = self.scored(goal);
        scored.truncate(k);
        let top = scored.first().map_or(0.0, |s| s.1);
        Ok(scored.into_iter().map(|(t, s)| (t, (s - top).exp())).collect())
    }

    fn critic(&self, goal: &Goal) -> Result<f64, OracleError> {
        Ok(size_critic(goal, self.critic_decay))
    }

    fn name(&self) -> &str {
        "heuristic"
    }
}
