//! HyperTree proof search: a hypergraph of goals explored by repeated
//! selection of partial proof trees, batched expansion and value backup.

mod export;
mod graph;
mod policy;
mod proof;
mod simulate;

use std::collections::{BTreeMap, HashSet};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{Application, Env, Goal, Proof, Tactic};
use crate::learn::{Evaluation, OracleError, PolicyOracle};

pub use export::{EdgeDump, GraphDump, NodeDump};
pub use graph::{Edge, HyperGraph, Node, NodeId, Status};
pub use policy::{
    argmax_restricted, puct_scores, q_value, rp_distribution, rp_lambda, rp_scores, select_puct, select_rp, EdgeStats,
    Policy, RpChoice, RP_MAX_STEPS, RP_TOLERANCE,
};
pub use proof::{extract_min_proof, min_proof_costs, ExtractError, ProofMetric, NO_TACTIC};
pub use simulate::{backup, find_expandable_subtree, leaf_value, SelectParams, SelectStats, SimNode, SimulationTree};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchParams {
    pub policy: Policy,
    /// Exploration constant `c`.
    pub exploration: f64,
    /// Per-level value decay in `(0, 1]`.
    pub depth_penalty: f64,
    /// Maximum number of goal expansions.
    pub budget: usize,
    pub tactics_per_expansion: usize,
    /// Priors are raised to `1 / temperature` and renormalized.
    pub temperature: f64,
    pub simulations_per_batch: usize,
    /// When false, leaves are valued 0.5 instead of by the critic.
    pub use_critic: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            policy: Policy::Puct,
            exploration: 1.0,
            depth_penalty: 1.0,
            budget: 1000,
            tactics_per_expansion: 32,
            temperature: 1.0,
            simulations_per_batch: 8,
            use_critic: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParamError {
    #[error("budget must be at least 1")]
    Budget,
    #[error("exploration constant must be positive")]
    Exploration,
    #[error("depth penalty must lie in (0, 1]")]
    DepthPenalty,
    #[error("temperature must be positive")]
    Temperature,
    #[error("tactics per expansion and simulations per batch must be at least 1")]
    Width,
}

impl SearchParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.budget == 0 {
            return Err(ParamError::Budget);
        }
        if !(self.exploration > 0.0) {
            return Err(ParamError::Exploration);
        }
        if !(self.depth_penalty > 0.0 && self.depth_penalty <= 1.0) {
            return Err(ParamError::DepthPenalty);
        }
        if !(self.temperature > 0.0) {
            return Err(ParamError::Temperature);
        }
        if self.tactics_per_expansion == 0 || self.simulations_per_batch == 0 {
            return Err(ParamError::Width);
        }
        Ok(())
    }

    pub fn select(&self) -> SelectParams {
        SelectParams { policy: self.policy, exploration: self.exploration }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expansions: u64,
    pub simulations: u64,
    pub oracle_errors: u64,
    /// Suggested tactics the environment rejected.
    pub rejected_tactics: u64,
    /// Suggested tactics merged into an edge with the same children.
    pub duplicate_tactics: u64,
    pub select: SelectStats,
    pub nodes: usize,
    pub edges: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub proof: Option<Proof>,
    pub graph: HyperGraph,
    pub stats: SearchStats,
    pub params: SearchParams,
}

impl SearchResult {
    pub fn root_status(&self) -> Status {
        self.graph.status(self.graph.root())
    }

    pub fn solved(&self) -> bool {
        self.proof.is_some()
    }
}

/// Raises normalized priors to `1 / temperature` and renormalizes.
/// Non-finite or non-positive weights count as zero; all-zero input becomes uniform.
pub fn temper_priors(weights: &[f64], temperature: f64) -> Vec<f64> {
    if weights.is_empty() {
        return Vec::new();
    }
    let clean: Vec<f64> = weights.iter().map(|w| if w.is_finite() && *w > 0.0 { *w } else { 0.0 }).collect();
    let total: f64 = clean.iter().sum();
    if total <= 0.0 {
        return vec![1.0 / weights.len() as f64; weights.len()];
    }
    let tempered: Vec<f64> = clean.iter().map(|w| (w / total).powf(1.0 / temperature)).collect();
    let total: f64 = tempered.iter().sum();
    if total > 0.0 && total.is_finite() {
        tempered.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / weights.len() as f64; weights.len()]
    }
}

type Applied = Result<(Vec<(Tactic, f64, Application)>, usize, f64), OracleError>;

fn evaluate_leaf(env: &Env, goal: &Goal, oracle: &dyn PolicyOracle, k: usize) -> Applied {
    let Evaluation { tactics, critic } = oracle.evaluate(goal, k)?;
    let mut rejected = 0;
    let mut ok = Vec::with_capacity(tactics.len());
    for (t, p) in tactics.into_iter().take(k) {
        match env.apply(goal, &t) {
            Ok(app) => ok.push((t, p, app)),
            Err(_) => rejected += 1,
        }
    }
    Ok((ok, rejected, critic))
}

/// Expands unexpanded `leaves`: oracle calls and tactic applications run in
/// parallel, graph updates are applied serially in leaf order.
///
/// Tactics with identical child sets are merged into one edge labelled by
/// the smallest tactic string, with their prior weights summed. Edges into
/// already invalid goals are dropped. A failing oracle marks its leaf invalid.
pub fn expand(
    h: &mut HyperGraph,
    env: &Env,
    leaves: &[NodeId],
    oracle: &dyn PolicyOracle,
    params: &SearchParams,
    stats: &mut SearchStats,
) {
    let mut seen = HashSet::new();
    let leaves: Vec<NodeId> = leaves.iter().copied().filter(|&l| !h.node(l).expanded && seen.insert(l)).collect();
    let goals: Vec<Goal> = leaves.iter().map(|&l| h.node(l).goal.clone()).collect();
    let k = params.tactics_per_expansion;
    let results: Vec<Applied> = goals.par_iter().map(|g| evaluate_leaf(env, g, oracle, k)).collect();
    for (leaf, result) in leaves.into_iter().zip(results) {
        stats.expansions += 1;
        let (applied, rejected, critic) = match result {
            Ok(r) => r,
            Err(e) => {
                log::debug!("oracle failed on node {leaf}: {e}");
                stats.oracle_errors += 1;
                h.mark_oracle_error(leaf);
                continue;
            }
        };
        stats.rejected_tactics += rejected as u64;
        // Children (as a set) -> (tactic string, tactic, application, summed weight).
        let mut merged: BTreeMap<Vec<Goal>, (String, Tactic, Application, f64)> = BTreeMap::new();
        for (t, p, app) in applied {
            let mut key = app.children.clone();
            key.sort();
            let s = t.to_string();
            let w = if p.is_finite() && p > 0.0 { p } else { 0.0 };
            match merged.get_mut(&key) {
                Some(slot) => {
                    stats.duplicate_tactics += 1;
                    slot.3 += w;
                    if s < slot.0 {
                        slot.0 = s;
                        slot.1 = t;
                        slot.2 = app;
                    }
                }
                None => {
                    merged.insert(key, (s, t, app, w));
                }
            }
        }
        let mut candidates: Vec<(String, Tactic, Application, f64)> = merged.into_values().collect();
        candidates.sort_by(|a, b| a.0.cmp(&b.0));
        let priors = temper_priors(&candidates.iter().map(|c| c.3).collect::<Vec<_>>(), params.temperature);
        let mut edges = Vec::with_capacity(candidates.len());
        for ((_, t, app, _), prior) in candidates.into_iter().zip(priors) {
            let children: Vec<NodeId> = app.children.into_iter().map(|c| h.intern(c)).collect();
            if children.iter().any(|&c| h.node(c).invalid) {
                continue;
            }
            edges.push(Edge::new(t, children, app.closed, prior));
        }
        let critic = if !params.use_critic {
            0.5
        } else if critic.is_finite() {
            critic.clamp(0.0, 1.0)
        } else {
            0.5
        };
        h.add_expansion(leaf, edges, critic);
    }
}

/// Runs proof search from `root` until it is solved, shown invalid, no
/// expandable goal remains, or the expansion budget is spent.
pub fn search(env: &Env, root: Goal, oracle: &dyn PolicyOracle, params: &SearchParams) -> SearchResult {
    let start = Instant::now();
    let mut h = HyperGraph::new(root.clone());
    let mut stats = SearchStats::default();
    if env.close_trivial(&root) {
        h.mark_trivially_closed(h.root());
        stats.nodes = 1;
        stats.elapsed = start.elapsed();
        return SearchResult { proof: Some(Proof { root, steps: vec![] }), graph: h, stats, params: params.clone() };
    }
    let select = params.select();
    let root_id = h.root();
    while (stats.expansions as usize) < params.budget {
        let r = h.node(root_id);
        if r.solved || r.invalid {
            break;
        }
        let mut sims = Vec::with_capacity(params.simulations_per_batch);
        let mut leaves = Vec::new();
        let mut pending = HashSet::new();
        let remaining = params.budget - stats.expansions as usize;
        for _ in 0..params.simulations_per_batch {
            let Some(tree) = find_expandable_subtree(&mut h, select, &mut stats.select) else { break };
            stats.simulations += 1;
            for l in tree.unexpanded_leaves(&h) {
                if leaves.len() < remaining && pending.insert(l) {
                    leaves.push(l);
                }
            }
            sims.push(tree);
            if leaves.len() >= remaining {
                break;
            }
        }
        if sims.is_empty() {
            break;
        }
        expand(&mut h, env, &leaves, oracle, params, &mut stats);
        for tree in &sims {
            backup(&mut h, tree, params.depth_penalty);
        }
    }
    let proof = if h.node(root_id).solved {
        Some(
            extract_min_proof(&h, root_id, ProofMetric::Size)
                .expect("a solved root always has a minimal proof"),
        )
    } else {
        None
    };
    stats.nodes = h.len();
    stats.edges = h.edge_count();
    stats.elapsed = start.elapsed();
    SearchResult { proof, graph: h, stats, params: params.clone() }
}
