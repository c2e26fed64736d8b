//! Synthetic theorem generation.
//!
//! Two generators share one configuration: random walks rewrite a random
//! expression step by step and emit `A0 = AN`; random graphs grow a set of
//! statements derived from random hypotheses and emit every derived node.
//! Both return proofs in the environment's own format, so every generated
//! theorem can be checked by replay.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Env, Goal, Proof, ProofRecord, Tactic};
use crate::expr::{BinaryOp, Cmp, Expr, Statement, UnaryOp};
use crate::rules::{match_into, match_statement, substitute, substitute_statement, ARule, Binding, Rule};

/// Placeholder right-hand side while walking; never part of an output.
const WALK_VAR: &str = "_walk";

/// Candidate tactics considered per node when growing a graph.
const GRAPH_POOL: usize = 512;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("no theorem generated after {0} attempts")]
    Exhausted(usize),
}

/// Generator settings. Ranges are inclusive `[min, max]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    /// Rewrite steps per walk.
    pub walk_len: [usize; 2],
    /// Operator count of the random expressions.
    pub expr_ops: [usize; 2],
    /// Hypotheses per theorem (walks) or per graph.
    pub hyps: [usize; 2],
    pub vars: Vec<String>,
    /// Integer leaves are drawn uniformly from this range.
    pub ints: [i64; 2],
    /// Probability that a leaf is a variable rather than an integer.
    pub var_prob: f64,
    pub unary_ops: Vec<String>,
    pub binary_ops: Vec<String>,
    /// Rules are drawn with weight `(1 + uses)^(-1/T)`; `None` samples
    /// uniformly among applicable tactics.
    pub rule_bias_temperature: Option<f64>,
    /// Probability of stating a walk as `AN = A0`, proved by undoing the walk.
    pub flip_prob: f64,
    pub max_expr_size: usize,
    /// Derivation attempts per random graph.
    pub graph_steps: usize,
    /// Graph theorems whose proof exceeds this many steps are dropped.
    pub max_proof_steps: usize,
    pub max_retries: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            walk_len: [1, 10],
            expr_ops: [2, 8],
            hyps: [0, 2],
            vars: vec!["x".into(), "y".into(), "z".into()],
            ints: [1, 3],
            var_prob: 0.7,
            unary_ops: vec!["neg".into()],
            binary_ops: vec!["+".into(), "-".into(), "*".into()],
            rule_bias_temperature: Some(1.0),
            flip_prob: 0.0,
            max_expr_size: 40,
            graph_steps: 40,
            max_proof_steps: 200,
            max_retries: 1000,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::Config(m));
        for (name, [lo, hi]) in [("walk_len", self.walk_len), ("expr_ops", self.expr_ops), ("hyps", self.hyps)] {
            if lo > hi {
                return bad(format!("{name}: empty range [{lo}, {hi}]"));
            }
        }
        if self.walk_len[0] == 0 {
            return bad("walk_len: walks need at least one step".into());
        }
        if self.ints[0] > self.ints[1] {
            return bad(format!("ints: empty range [{}, {}]", self.ints[0], self.ints[1]));
        }
        if self.vars.is_empty() {
            return bad("vars: at least one variable is required".into());
        }
        for v in &self.vars {
            match Expr::var(v).to_string().parse::<Expr>() {
                Ok(Expr::Var(_)) if v != WALK_VAR => {}
                _ => return bad(format!("vars: `{v}` is not a variable name")),
            }
        }
        if !(0.0..=1.0).contains(&self.var_prob) || !(0.0..=1.0).contains(&self.flip_prob) {
            return bad("probabilities must lie in [0, 1]".into());
        }
        if matches!(self.rule_bias_temperature, Some(t) if !(t > 0.0)) {
            return bad("rule_bias_temperature must be positive".into());
        }
        self.ops()?;
        Ok(())
    }

    fn ops(&self) -> Result<(Vec<UnaryOp>, Vec<BinaryOp>), GenError> {
        let unary = self
            .unary_ops
            .iter()
            .map(|t| UnaryOp::from_token(t).ok_or_else(|| GenError::Config(format!("unknown unary operator `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let binary = self
            .binary_ops
            .iter()
            .map(|t| BinaryOp::from_token(t).ok_or_else(|| GenError::Config(format!("unknown binary operator `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if binary.is_empty() && self.expr_ops[1] > 0 && unary.is_empty() {
            return Err(GenError::Config("no operators to build expressions from".into()));
        }
        Ok((unary, binary))
    }
}

/// Counts of unary-binary tree shapes by operator count.
#[derive(Clone, Debug)]
struct Shapes {
    unary: bool,
    binary: bool,
    counts: Vec<u128>,
}

impl Shapes {
    fn new(unary: bool, binary: bool, max_ops: usize) -> Self {
        let mut counts = vec![1u128];
        for n in 1..=max_ops {
            let mut c = if unary { counts[n - 1] } else { 0 };
            if binary {
                for k in 0..n {
                    c = c.saturating_add(counts[k].saturating_mul(counts[n - 1 - k]));
                }
            }
            counts.push(c);
        }
        Shapes { unary, binary, counts }
    }

    /// A uniformly random shape with `n` operators, as arities in prefix order.
    fn sample(&self, n: usize, rng: &mut impl Rng, out: &mut Vec<u8>) {
        if n == 0 {
            out.push(0);
            return;
        }
        let mut r = rng.gen_range(0..self.counts[n]);
        if self.unary {
            if r < self.counts[n - 1] {
                out.push(1);
                return self.sample(n - 1, rng, out);
            }
            r -= self.counts[n - 1];
        }
        debug_assert!(self.binary);
        for k in 0..n {
            let c = self.counts[k] * self.counts[n - 1 - k];
            if r < c || k == n - 1 {
                out.push(2);
                self.sample(k, rng, out);
                return self.sample(n - 1 - k, rng, out);
            }
            r -= c;
        }
    }

    fn possible(&self, n: usize) -> bool {
        self.counts.get(n).is_some_and(|&c| c > 0)
    }
}

/// Seeded generator; rule-usage counts persist across calls so that the
/// bias spreads over the whole stream.
pub struct Generator {
    env: Env,
    cfg: GenConfig,
    rng: ChaCha8Rng,
    unary: Vec<UnaryOp>,
    binary: Vec<BinaryOp>,
    shapes: Shapes,
    usage: HashMap<Arc<str>, u64>,
}

impl Generator {
    pub fn new(env: Env, cfg: GenConfig) -> Result<Self, GenError> {
        cfg.validate()?;
        let (unary, binary) = cfg.ops()?;
        let shapes = Shapes::new(!unary.is_empty(), !binary.is_empty(), cfg.expr_ops[1]);
        Ok(Generator { rng: ChaCha8Rng::seed_from_u64(cfg.seed), env, cfg, unary, binary, shapes, usage: HashMap::new() })
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    /// How often each rule has been used by accepted theorems.
    pub fn rule_usage(&self) -> BTreeMap<String, u64> {
        self.usage.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    pub fn random_expr(&mut self) -> Expr {
        let feasible: Vec<usize> =
            (self.cfg.expr_ops[0]..=self.cfg.expr_ops[1]).filter(|&n| self.shapes.possible(n)).collect();
        let n = feasible.choose(&mut self.rng).copied().unwrap_or(0);
        let mut shape = Vec::new();
        self.shapes.sample(n, &mut self.rng, &mut shape);
        let mut it = shape.into_iter();
        self.fill(&mut it)
    }

    fn fill(&mut self, shape: &mut impl Iterator<Item = u8>) -> Expr {
        match shape.next().unwrap_or(0) {
            0 => self.leaf(),
            1 => {
                let op = *self.unary.choose(&mut self.rng).expect("unary shapes need unary operators");
                Expr::unary(op, self.fill(shape))
            }
            _ => {
                let op = *self.binary.choose(&mut self.rng).expect("binary shapes need binary operators");
                let a = self.fill(shape);
                Expr::binary(op, a, self.fill(shape))
            }
        }
    }

    fn leaf(&mut self) -> Expr {
        if self.rng.gen_bool(self.cfg.var_prob) {
            Expr::var(self.cfg.vars.choose(&mut self.rng).expect("validated"))
        } else {
            Expr::Int(self.rng.gen_range(self.cfg.ints[0]..=self.cfg.ints[1]))
        }
    }

    /// Side conditions on single variables, e.g. `x > 0` or `y != 0`.
    fn random_side_conditions(&mut self) -> Vec<Statement> {
        let n = self.rng.gen_range(self.cfg.hyps[0]..=self.cfg.hyps[1]);
        let mut out: Vec<Statement> = Vec::new();
        for _ in 0..n {
            let v = Expr::var(self.cfg.vars.choose(&mut self.rng).expect("validated"));
            let cmp = *[Cmp::Gt, Cmp::Ge, Cmp::Ne].choose(&mut self.rng).unwrap();
            let h = Statement::new(cmp, v, Expr::Int(0));
            if !out.contains(&h) {
                out.push(h);
            }
        }
        out
    }

    fn random_statement(&mut self) -> Statement {
        let cmp = *[Cmp::Eq, Cmp::Eq, Cmp::Le, Cmp::Lt, Cmp::Ne, Cmp::Gt].choose(&mut self.rng).unwrap();
        let lhs = self.random_expr();
        let rhs = self.random_expr();
        Statement::new(cmp, lhs, rhs)
    }

    /// Index of one candidate, balancing rule usage when bias is enabled.
    fn choose<T>(&mut self, candidates: &[(Arc<str>, T)]) -> Option<usize> {
        if candidates.is_empty() {
            return None;
        }
        match self.cfg.rule_bias_temperature {
            None => Some(self.rng.gen_range(0..candidates.len())),
            Some(t) => {
                let mut per_rule: HashMap<&str, usize> = HashMap::new();
                for (r, _) in candidates {
                    *per_rule.entry(r).or_default() += 1;
                }
                // Each rule gets mass (1 + uses)^(-1/t), split among its candidates.
                let weights: Vec<f64> = candidates
                    .iter()
                    .map(|(r, _)| {
                        let uses = self.usage.get(r).copied().unwrap_or(0) as f64;
                        (1.0 + uses).powf(-1.0 / t) / per_rule[&**r] as f64
                    })
                    .collect();
                Some(WeightedIndex::new(&weights).ok()?.sample(&mut self.rng))
            }
        }
    }

    /// Draws candidates until `accept` takes one; rejected ones are dropped,
    /// so the result follows the sampling weights restricted to acceptable
    /// candidates.
    fn pick<T, U>(&mut self, mut candidates: Vec<(Arc<str>, T)>, mut accept: impl FnMut(T) -> Option<U>) -> Option<U> {
        while let Some(i) = self.choose(&candidates) {
            if let Some(u) = accept(candidates.swap_remove(i).1) {
                return Some(u);
            }
        }
        None
    }

    fn record_usage<'a>(&mut self, tactics: impl IntoIterator<Item = &'a Tactic>) {
        for t in tactics {
            *self.usage.entry(Arc::from(t.rule())).or_default() += 1;
        }
    }

    /// A theorem `A0 = AN` obtained by rewriting a random `A0` N times.
    pub fn random_walk(&mut self) -> Result<(Goal, Proof), GenError> {
        for _ in 0..self.cfg.max_retries {
            if let Some(found) = self.try_walk() {
                self.record_usage(found.1.tactics());
                return Ok(found);
            }
        }
        Err(GenError::Exhausted(self.cfg.max_retries))
    }

    fn try_walk(&mut self) -> Option<(Goal, Proof)> {
        let steps = self.rng.gen_range(self.cfg.walk_len[0]..=self.cfg.walk_len[1]);
        let a0 = self.random_expr();
        if !a0.has_vars() {
            return None;
        }
        let hyps = self.random_side_conditions();
        let placeholder = Expr::var(WALK_VAR);
        let mut seen = HashSet::from([a0.clone()]);
        let mut current = a0.clone();
        let mut tactics = Vec::with_capacity(steps);
        let mut reverses = Vec::with_capacity(steps);
        for _ in 0..steps {
            let goal = Goal::with_hyps(Statement::new(Cmp::Eq, current.clone(), placeholder.clone()), hyps.clone());
            let lhs_size = current.size();
            let candidates: Vec<(Arc<str>, Tactic)> = self
                .env
                .enumerate_tactics(&goal, usize::MAX)
                .into_iter()
                .filter(|t| {
                    t.position().is_some_and(|p| p <= lhs_size)
                        && !t.bindings().iter().any(|(_, v)| mentions(v, WALK_VAR))
                })
                .map(|t| (Arc::from(t.rule()), t))
                .collect();
            let env = self.env.clone();
            let max_size = self.cfg.max_expr_size;
            let (t, next) = self.pick(candidates, |t| {
                let app = env.apply(&goal, &t).ok()?;
                // Rule side conditions must be discharged by the hypotheses.
                let [child] = app.children.as_slice() else { return None };
                if child.stmt.rhs != placeholder || child.stmt.cmp != Cmp::Eq {
                    return None;
                }
                let next = child.stmt.lhs.clone();
                (next.size() <= max_size && !seen.contains(&next)).then_some((t, next))
            })?;
            seen.insert(next.clone());
            let before = Statement::new(Cmp::Eq, current.clone(), placeholder.clone());
            reverses.push(reverse_rewrite(&self.env, &before, &t));
            tactics.push(t);
            current = next;
        }
        let flip = self.cfg.flip_prob > 0.0 && self.rng.gen_bool(self.cfg.flip_prob);
        let (root, tactics) = match reverses.into_iter().rev().collect::<Option<Vec<_>>>() {
            Some(rev) if flip => (Goal::with_hyps(Statement::new(Cmp::Eq, current, a0), hyps), rev),
            _ => (Goal::with_hyps(Statement::new(Cmp::Eq, a0, current), hyps), tactics),
        };
        if self.env.close_trivial(&root) {
            return None;
        }
        // A shorter prefix may already close the goal (e.g. ground intermediates).
        let mut goal = root.clone();
        let mut used = 0;
        for t in &tactics {
            let app = self.env.apply(&goal, t).ok()?;
            used += 1;
            match app.children.as_slice() {
                [] => break,
                [next] => goal = next.clone(),
                _ => return None,
            }
        }
        let proof = Proof::from_tactics(&self.env, root.clone(), &tactics[..used]).ok()?;
        Some((root, proof))
    }

    /// Theorems derived from a random hypothesis set by forward application
    /// of rewrite and assertion rules. Each theorem keeps the full set as its
    /// hypotheses and its proof bottoms out in them.
    pub fn random_graph(&mut self) -> Result<Vec<(Goal, Proof)>, GenError> {
        let n = self.rng.gen_range(self.cfg.hyps[0]..=self.cfg.hyps[1]);
        let mut hyps = Vec::new();
        for _ in 0..n {
            let h = self.random_statement();
            if !hyps.contains(&h) && !self.env.close_trivial(&Goal::new(h.clone())) {
                hyps.push(h);
            }
        }
        let mut graph = GraphBuilder::new(self.env.clone(), hyps);
        for _ in 0..self.cfg.graph_steps {
            let rewrite = self.rng.gen_bool(0.5);
            let derived = if rewrite { self.graph_rewrite(&mut graph) } else { self.graph_assert(&mut graph) };
            if derived.is_none() {
                let _ = if rewrite { self.graph_assert(&mut graph) } else { self.graph_rewrite(&mut graph) };
            }
        }
        let out = graph.theorems(self.cfg.max_proof_steps);
        for (_, p) in &out {
            self.record_usage(p.steps.first().map(|s| &s.tactic));
        }
        Ok(out)
    }

    fn graph_rewrite(&mut self, graph: &mut GraphBuilder) -> Option<Statement> {
        let node = graph.nodes.choose(&mut self.rng)?.clone();
        let goal = graph.goal(node);
        let candidates: Vec<(Arc<str>, Tactic)> =
            self.env.enumerate_tactics(&goal, GRAPH_POOL).into_iter().map(|t| (Arc::from(t.rule()), t)).collect();
        let max_size = self.cfg.max_expr_size;
        let (stmt, rev) = self.pick(candidates, |t| {
            graph.rewrite(&goal, &t).filter(|(s, _)| s.lhs.size().max(s.rhs.size()) <= max_size)
        })?;
        graph.insert(stmt.clone(), rev);
        Some(stmt)
    }

    fn graph_assert(&mut self, graph: &mut GraphBuilder) -> Option<Statement> {
        let rules: Vec<ARule> =
            self.env.inventory().asserts().filter(|a| !a.hyps.is_empty()).cloned().collect();
        let mut candidates = Vec::new();
        for r in &rules {
            let pool = graph.binding_pool(&mut self.rng);
            if let Some(found) = graph.assert(r, &pool, &mut self.rng) {
                candidates.push((r.id.clone(), found));
            }
        }
        let max_size = self.cfg.max_expr_size;
        let (stmt, tactic) = self.pick(candidates, |(s, t)| (s.lhs.size().max(s.rhs.size()) <= max_size).then_some((s, t)))?;
        graph.insert(stmt.clone(), tactic);
        Some(stmt)
    }
}

/// A tactic undoing rewrite `t` on `stmt`: same rule and position, opposite
/// direction, with any capture variable the reverse cannot match bound to
/// what the forward step matched.
pub fn reverse_rewrite(env: &Env, stmt: &Statement, t: &Tactic) -> Option<Tactic> {
    let Tactic::Rewrite { rule, forward, pos, bindings } = t else { return None };
    let crate::expr::Subterm::Expr(sub) = stmt.subexpr_at(*pos).ok()? else { return None };
    match env.inventory().get(rule)? {
        // Applying a symmetric rule again at the same place undoes it.
        Rule::Transform(r) if r.is_symmetric() && r.allows(*forward) => Some(t.clone()),
        Rule::Transform(r) => {
            if !r.allows(!forward) {
                return None;
            }
            let mut sigma = Binding::new();
            if !match_into(r.oriented(*forward).0, sub, &mut sigma) {
                return None;
            }
            for (k, v) in bindings.iter() {
                sigma.insert(k.clone(), v.clone());
            }
            let mut rev = Tactic::rewrite(rule, !forward, *pos);
            for v in r.free_vars(!forward) {
                rev = rev.with_binding(&v, sigma.get(&v)?.clone());
            }
            Some(rev)
        }
        Rule::Int(_) if *forward => Some(Tactic::rewrite(rule, false, *pos)),
        Rule::Int(_) => match sub {
            Expr::Binary(_, a, _) => Some(Tactic::rewrite(rule, true, *pos).with_binding("A", (**a).clone())),
            _ => None,
        },
        Rule::Assert(_) => None,
    }
}

fn mentions(e: &Expr, var: &str) -> bool {
    let mut found = false;
    e.visit_prefix(&mut |s| found |= matches!(s, Expr::Var(v) if &**v == var));
    found
}

/// An acyclic graph of statements under fixed hypotheses. Every derived
/// statement stores the backward tactic that reduces it to earlier nodes.
#[derive(Clone, Debug)]
pub struct GraphBuilder {
    env: Env,
    hyps: Arc<[Statement]>,
    nodes: Vec<Statement>,
    derivations: HashMap<Statement, Tactic>,
}

impl GraphBuilder {
    pub fn new(env: Env, hyps: Vec<Statement>) -> Self {
        GraphBuilder { env, nodes: hyps.clone(), hyps: Arc::from(hyps), derivations: HashMap::new() }
    }

    pub fn nodes(&self) -> &[Statement] {
        &self.nodes
    }

    fn goal(&self, stmt: Statement) -> Goal {
        Goal { stmt, hyps: self.hyps.clone() }
    }

    /// Whether `stmt` needs no further proof in this graph.
    fn available(&self, stmt: &Statement) -> bool {
        self.derivations.contains_key(stmt) || self.env.close_trivial(&self.goal(stmt.clone()))
    }

    fn is_new(&self, stmt: &Statement) -> bool {
        !self.derivations.contains_key(stmt) && !self.env.close_trivial(&self.goal(stmt.clone()))
    }

    fn insert(&mut self, stmt: Statement, tactic: Tactic) {
        self.nodes.push(stmt.clone());
        self.derivations.insert(stmt, tactic);
    }

    /// Rewrites node `goal` forward with `t`; returns the new statement and
    /// the reverse tactic that recovers `goal` from it.
    fn rewrite(&self, goal: &Goal, t: &Tactic) -> Option<(Statement, Tactic)> {
        let Tactic::Rewrite { rule, forward, pos, bindings } = t else { return None };
        let Some(Rule::Transform(r)) = self.env.inventory().get(rule) else { return None };
        let crate::expr::Subterm::Expr(sub) = goal.stmt.subexpr_at(*pos).ok()? else { return None };
        let (src, dst) = r.oriented(*forward);
        let mut sigma = Binding::new();
        if !match_into(src, sub, &mut sigma) {
            return None;
        }
        for (k, v) in bindings.iter() {
            sigma.insert(k.clone(), v.clone());
        }
        let stmt = goal.stmt.replace_at(*pos, substitute(dst, &sigma).ok()?).ok()?;
        for h in &r.hyps {
            if !self.available(&substitute_statement(h, &sigma).ok()?) {
                return None;
            }
        }
        if !self.is_new(&stmt) {
            return None;
        }
        Some((stmt, reverse_rewrite(&self.env, &goal.stmt, t)?))
    }

    /// Small expressions to instantiate conclusion-only capture variables.
    fn binding_pool(&self, rng: &mut impl Rng) -> Vec<Expr> {
        let mut pool: Vec<Expr> = (0..=2).map(Expr::Int).collect();
        if let Some(s) = self.nodes.choose(rng) {
            pool.extend(s.positions().into_iter().map(|(_, e)| e.clone()).filter(|e| e.size() <= 5));
        }
        pool
    }

    /// Instantiates an assertion rule whose hypotheses are all available.
    fn assert(&self, r: &ARule, pool: &[Expr], rng: &mut impl Rng) -> Option<(Statement, Tactic)> {
        let mut order: Vec<usize> = (0..r.hyps.len()).collect();
        order.shuffle(rng);
        let mut nodes = self.nodes.clone();
        nodes.shuffle(rng);
        let sigma = self.match_hyps(r, &order, Binding::new(), &nodes, 0)?;
        let mut sigma = sigma;
        let mut conclusion_vars = Vec::new();
        r.conclusion.metas(&mut conclusion_vars);
        for v in conclusion_vars {
            if !sigma.contains(&v) {
                sigma.insert(v, pool.choose(rng)?.clone());
            }
        }
        let stmt = substitute_statement(&r.conclusion, &sigma).ok()?;
        if !self.is_new(&stmt) {
            return None;
        }
        let mut tactic = Tactic::assert(&r.id);
        for v in r.free_vars() {
            tactic = tactic.with_binding(&v, sigma.get(&v)?.clone());
        }
        Some((stmt, tactic))
    }

    /// Backtracking match of the rule hypotheses (in `order`) against nodes.
    /// A hypothesis still containing capture variables after earlier matches
    /// must match a node; the first one must match a node in any case.
    fn match_hyps(&self, r: &ARule, order: &[usize], sigma: Binding, nodes: &[Statement], depth: usize) -> Option<Binding> {
        let Some(&i) = order.get(depth) else { return Some(sigma) };
        let h = &r.hyps[i];
        if depth > 0 {
            if let Ok(ground) = substitute_statement(h, &sigma) {
                let mut m = Vec::new();
                ground.metas(&mut m);
                if m.is_empty() {
                    return self.available(&ground).then_some(()).and_then(|_| self.match_hyps(r, order, sigma, nodes, depth + 1));
                }
            }
        }
        for n in nodes {
            let mut s = sigma.clone();
            if match_statement(h, n, &mut s) {
                if let Some(done) = self.match_hyps(r, order, s, nodes, depth + 1) {
                    return Some(done);
                }
            }
        }
        None
    }

    /// Backward tactics for `goal` in preorder, or `None` past `limit` steps.
    fn proof_tactics(&self, goal: &Goal, limit: usize, out: &mut Vec<Tactic>) -> Option<()> {
        let t = self.derivations.get(&goal.stmt)?;
        if out.len() >= limit {
            return None;
        }
        out.push(t.clone());
        let app = self.env.apply(goal, t).ok()?;
        for c in &app.children {
            self.proof_tactics(c, limit, out)?;
        }
        Some(())
    }

    /// Every derived statement with its proof, in derivation order.
    pub fn theorems(&self, max_steps: usize) -> Vec<(Goal, Proof)> {
        let mut out = Vec::new();
        for stmt in self.nodes.iter().filter(|s| self.derivations.contains_key(*s)) {
            let goal = self.goal(stmt.clone());
            let mut tactics = Vec::new();
            if self.proof_tactics(&goal, max_steps, &mut tactics).is_none() {
                continue;
            }
            if let Ok(p) = Proof::from_tactics(&self.env, goal.clone(), &tactics) {
                out.push((goal, p));
            }
        }
        out
    }

    /// Derives the conclusion of `rule` if its hypotheses can be matched
    /// against nodes; deterministic in node order.
    pub fn derive_with(&mut self, rule: &str) -> Option<Statement> {
        let Some(Rule::Assert(r)) = self.env.inventory().get(rule).cloned() else { return None };
        let order: Vec<usize> = (0..r.hyps.len()).collect();
        let sigma = self.match_hyps(&r, &order, Binding::new(), &self.nodes, 0)?;
        let stmt = substitute_statement(&r.conclusion, &sigma).ok()?;
        if !self.is_new(&stmt) {
            return None;
        }
        let mut tactic = Tactic::assert(&r.id);
        for v in r.free_vars() {
            tactic = tactic.with_binding(&v, sigma.get(&v)?.clone());
        }
        self.insert(stmt.clone(), tactic);
        Some(stmt)
    }
}

/// Which generator a dataset draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GenKind {
    #[default]
    Walk,
    Graph,
}

impl std::str::FromStr for GenKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "walk" => Ok(GenKind::Walk),
            "graph" => Ok(GenKind::Graph),
            _ => Err(format!("unknown generator `{s}` (expected walk or graph)")),
        }
    }
}

/// `n` theorems with proofs; identical for identical inputs. Goals are
/// deduplicated by their text.
pub fn generate(env: &Env, cfg: &GenConfig, kind: GenKind, n: usize) -> Result<Vec<ProofRecord>, GenError> {
    let mut g = Generator::new(env.clone(), cfg.clone())?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut idle = 0;
    while out.len() < n {
        let batch = match kind {
            GenKind::Walk => vec![g.random_walk()?],
            GenKind::Graph => g.random_graph()?,
        };
        let before = out.len();
        for (goal, proof) in batch {
            if out.len() < n && seen.insert(goal.to_string()) {
                out.push(proof.to_record());
            }
        }
        idle = if out.len() == before { idle + 1 } else { 0 };
        if idle >= cfg.max_retries {
            return Err(GenError::Exhausted(idle));
        }
    }
    Ok(out)
}

/// Convenience: one walk from a fresh generator seeded by `cfg.seed`.
pub fn random_walk(env: &Env, cfg: &GenConfig) -> Result<(Goal, Proof), GenError> {
    Generator::new(env.clone(), cfg.clone())?.random_walk()
}

/// Convenience: one graph from a fresh generator seeded by `cfg.seed`.
pub fn random_graph(env: &Env, cfg: &GenConfig) -> Result<Vec<(Goal, Proof)>, GenError> {
    Generator::new(env.clone(), cfg.clone())?.random_graph()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{Inventory, RuleGroup};

    fn env() -> Env {
        Env::new(Inventory::load(&[RuleGroup::Basic]).unwrap())
    }

    #[test]
    fn shape_counts() {
        // Large Schroeder numbers for unary-binary trees by operator count,
        // Catalan numbers for binary only.
        assert_eq!(Shapes::new(true, true, 6).counts, vec![1, 2, 6, 22, 90, 394, 1806]);
        assert_eq!(Shapes::new(false, true, 5).counts, vec![1, 1, 2, 5, 14, 42]);
        assert_eq!(Shapes::new(true, false, 3).counts, vec![1, 1, 1, 1]);
    }

    #[test]
    fn shapes_are_uniform() {
        let shapes = Shapes::new(true, true, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hist: HashMap<Vec<u8>, usize> = HashMap::new();
        for _ in 0..6000 {
            let mut s = Vec::new();
            shapes.sample(2, &mut rng, &mut s);
            *hist.entry(s).or_default() += 1;
        }
        assert_eq!(hist.len(), 6);
        assert!(hist.values().all(|&c| (800..1200).contains(&c)), "{hist:?}");
    }

    #[test]
    fn single_step_walk() {
        let cfg = GenConfig {
            walk_len: [1, 1],
            expr_ops: [1, 1],
            hyps: [0, 0],
            var_prob: 1.0,
            vars: vec!["x".into(), "y".into()],
            binary_ops: vec!["+".into()],
            unary_ops: vec![],
            ..GenConfig::default()
        };
        let env = env();
        let mut g = Generator::new(env.clone(), cfg).unwrap();
        for _ in 0..1000 {
            let (goal, proof) = g.random_walk().unwrap();
            assert_eq!(proof.steps.len(), 1, "{goal}");
            proof.replay(&env).unwrap();
            if goal.to_string() == "= + x y + y x" {
                assert_eq!(proof.steps[0].tactic.to_string(), "T add_comm fwd 1");
                return;
            }
        }
        panic!("x + y = y + x never generated");
    }

    #[test]
    fn zero_length_walks_rejected() {
        let cfg = GenConfig { walk_len: [0, 3], ..GenConfig::default() };
        assert!(matches!(Generator::new(env(), cfg), Err(GenError::Config(_))));
    }

    #[test]
    fn walks_replay_and_are_seeded() {
        let env = env();
        let cfg = GenConfig { seed: 11, hyps: [0, 2], binary_ops: vec!["+".into(), "*".into(), "/".into()], ..GenConfig::default() };
        let a = generate(&env, &cfg, GenKind::Walk, 30).unwrap();
        assert_eq!(a, generate(&env, &cfg, GenKind::Walk, 30).unwrap());
        for r in &a {
            r.to_proof().unwrap().replay(&env).unwrap();
        }
    }

    #[test]
    fn flipped_walks_replay() {
        let env = env();
        let cfg = GenConfig { seed: 5, flip_prob: 1.0, walk_len: [3, 6], ..GenConfig::default() };
        let mut g = Generator::new(env.clone(), cfg).unwrap();
        for _ in 0..100 {
            g.random_walk().unwrap().1.replay(&env).unwrap();
        }
    }

    #[test]
    fn reverse_of_int_steps() {
        let env = env();
        let s: Statement = "= + x 5 y".parse().unwrap();
        let split = Tactic::rewrite("int_add", true, 3).with_binding("A", Expr::Int(2));
        assert_eq!(reverse_rewrite(&env, &s, &split).unwrap().to_string(), "T int_add bwd 3");
        let s: Statement = "= + x + 2 3 y".parse().unwrap();
        let fold = Tactic::rewrite("int_add", false, 3);
        assert_eq!(reverse_rewrite(&env, &s, &fold).unwrap().to_string(), "T int_add fwd 3 A: 2");
    }

    #[test]
    fn graph_transitivity() {
        let hyps = vec!["<= x y".parse().unwrap(), "<= y z".parse().unwrap()];
        let mut g = GraphBuilder::new(env(), hyps);
        assert_eq!(g.derive_with("le_trans").unwrap().to_string(), "<= x z");
        let thms = g.theorems(10);
        assert_eq!(thms.len(), 1);
        thms[0].1.replay(&env()).unwrap();
    }

    #[test]
    fn graph_division() {
        let hyps = vec!["= x * y - z 1".parse().unwrap(), "!= y 0".parse().unwrap()];
        let mut g = GraphBuilder::new(env(), hyps);
        assert_eq!(g.derive_with("div_eq").unwrap().to_string(), "= / x y - z 1");
        let (goal, proof) = &g.theorems(10)[0];
        assert_eq!(proof.steps.len(), 1);
        assert!(proof.steps[0].children.is_empty(), "{goal}");
    }

    #[test]
    fn empty_graph() {
        let cfg = GenConfig { hyps: [0, 0], graph_steps: 0, ..GenConfig::default() };
        assert!(random_graph(&env(), &cfg).unwrap().is_empty());
    }

    #[test]
    fn graphs_replay() {
        let env = env();
        let cfg = GenConfig { seed: 3, hyps: [1, 3], expr_ops: [1, 3], ..GenConfig::default() };
        let recs = generate(&env, &cfg, GenKind::Graph, 40).unwrap();
        assert_eq!(recs.len(), 40);
        for r in &recs {
            r.to_proof().unwrap().replay(&env).unwrap();
        }
    }
}
