//! Training data extracted from finished searches, and the finite FIFO
//! queues that hold it.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Goal, Proof, Tactic};
use crate::htps::{min_proof_costs, NO_TACTIC, puct_scores, rp_scores, EdgeStats, HyperGraph, NodeId, Policy, ProofMetric, SearchResult};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TacticSample {
    pub goal: Goal,
    pub tactic: Tactic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticSample {
    pub goal: Goal,
    pub target: f64,
}

/// Which (goal, tactic) pairs of a search become policy targets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TacticMode {
    /// Steps of the root's minimal proof.
    RootMin,
    /// The minimal-proof tactic of every solved goal.
    AllSolvedMin,
    /// Every solving tactic of goals reachable from the root through solving tactics.
    RootAll,
    /// Every solving tactic of every solved goal.
    AllSolvedAll,
    /// Tactics holding at least `min_share` of their goal's visits, for
    /// goals visited at least `min_visits` times.
    NodesWithCounts { min_visits: u64, min_share: f64 },
}

impl Default for TacticMode {
    fn default() -> Self {
        TacticMode::AllSolvedMin
    }
}

impl TacticMode {
    pub const DEFAULT_MIN_SHARE: f64 = 0.01;
}

/// Every step of a known proof, e.g. a generated one, as supervised data.
pub fn proof_samples(proof: &Proof) -> Vec<TacticSample> {
    proof.steps.iter().map(|s| TacticSample { goal: s.goal.clone(), tactic: s.tactic.clone() }).collect()
}

fn sample(h: &HyperGraph, g: NodeId, e: usize) -> TacticSample {
    TacticSample { goal: h.node(g).goal.clone(), tactic: h.edge(g, e).tactic.clone() }
}

fn solving_edges(h: &HyperGraph, g: NodeId) -> Vec<usize> {
    (0..h.node(g).edges.len()).filter(|&e| h.edge_solving(g, e)).collect()
}

pub fn extract_tactic_samples(result: &SearchResult, mode: TacticMode) -> Vec<TacticSample> {
    let h = &result.graph;
    let root = h.root();
    match mode {
        TacticMode::RootMin | TacticMode::AllSolvedMin => {
            if mode == TacticMode::RootMin && !h.node(root).solved {
                return Vec::new();
            }
            let best = min_proof_costs(h, ProofMetric::Size);
            match mode {
                TacticMode::RootMin => {
                    // Goals of the root's minimal proof, each once.
                    let mut out = Vec::new();
                    let mut seen = vec![false; h.len()];
                    let mut stack = vec![root];
                    while let Some(g) = stack.pop() {
                        if std::mem::replace(&mut seen[g], true) {
                            continue;
                        }
                        let Some((_, e)) = best[g].filter(|b| b.1 != NO_TACTIC) else { continue };
                        out.push(sample(h, g, e));
                        stack.extend(h.edge(g, e).children.iter().rev());
                    }
                    out
                }
                _ => (0..h.len())
                    .filter_map(|g| best[g].filter(|b| b.1 != NO_TACTIC).map(|(_, e)| sample(h, g, e)))
                    .collect(),
            }
        }
        TacticMode::RootAll => {
            if !h.node(root).solved {
                return Vec::new();
            }
            let mut out = Vec::new();
            let mut seen = vec![false; h.len()];
            let mut stack = vec![root];
            while let Some(g) = stack.pop() {
                if std::mem::replace(&mut seen[g], true) {
                    continue;
                }
                for e in solving_edges(h, g) {
                    out.push(sample(h, g, e));
                    stack.extend(h.edge(g, e).children.iter().copied());
                }
            }
            out
        }
        TacticMode::AllSolvedAll => (0..h.len())
            .filter(|&g| h.node(g).solved)
            .flat_map(|g| solving_edges(h, g).into_iter().map(move |e| (g, e)))
            .map(|(g, e)| sample(h, g, e))
            .collect(),
        TacticMode::NodesWithCounts { min_visits, min_share } => {
            let mut out = Vec::new();
            for (g, node) in h.nodes().iter().enumerate() {
                let total: u64 = node.edges.iter().map(|e| e.n).sum();
                if total == 0 || total < min_visits {
                    continue;
                }
                for (e, edge) in node.edges.iter().enumerate() {
                    if !edge.killed && edge.n as f64 / total as f64 >= min_share {
                        out.push(sample(h, g, e));
                    }
                }
            }
            out
        }
    }
}

/// Critic targets: solved goals 1, invalid goals 0, and other goals visited
/// at least `visit_threshold` times the value estimate of the tactic the
/// search policy prefers (or 0 with the hard critic).
pub fn extract_critic_samples(result: &SearchResult, visit_threshold: u64, hard: bool) -> Vec<CriticSample> {
    let h = &result.graph;
    let mut out = Vec::new();
    for (g, node) in h.nodes().iter().enumerate() {
        let target = if node.solved {
            1.0
        } else if node.invalid {
            0.0
        } else {
            let total: u64 = node.edges.iter().map(|e| e.n).sum();
            if !node.expanded || total == 0 || total < visit_threshold {
                continue;
            }
            if hard {
                0.0
            } else {
                match preferred_edge(h, g, &result.params.select()) {
                    Some(e) => {
                        let edge = h.edge(g, e);
                        (edge.w / edge.n as f64).clamp(0.0, 1.0)
                    }
                    None => continue,
                }
            }
        };
        out.push(CriticSample { goal: node.goal.clone(), target });
    }
    out
}

/// The search-policy argmax among visited, non-killed tactics of `g`.
fn preferred_edge(h: &HyperGraph, g: NodeId, select: &crate::htps::SelectParams) -> Option<usize> {
    let edges = &h.node(g).edges;
    let stats: Vec<EdgeStats> = edges
        .iter()
        .enumerate()
        .map(|(e, edge)| EdgeStats { n: edge.n, w: edge.w, vc: edge.vc, prior: edge.prior, solving: h.edge_solving(g, e) })
        .collect();
    let allowed: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].n > 0 && !edges[e].killed).collect();
    let scores = match select.policy {
        Policy::Puct => puct_scores(&stats, select.exploration),
        Policy::Rp => rp_scores(&stats, select.exploration).unwrap_or_else(|| puct_scores(&stats, select.exploration)),
    };
    crate::htps::argmax_restricted(&scores, &stats, &allowed)
}

/// Bounded FIFO buffer: pushing into a full queue evicts the oldest sample.
#[derive(Clone, Debug)]
pub struct SampleQueue<T> {
    capacity: usize,
    items: VecDeque<T>,
    pushed: u64,
    evicted: u64,
    drawn: u64,
}

pub const DEFAULT_QUEUE_CAPACITY: usize = 100_000;

impl<T: Clone> SampleQueue<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "queue capacity must be positive");
        SampleQueue { capacity, items: VecDeque::new(), pushed: 0, evicted: 0, drawn: 0 }
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
            self.evicted += 1;
        }
        self.items.push_back(item);
        self.pushed += 1;
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = T>) {
        for item in items {
            self.push(item);
        }
    }

    /// `n` samples drawn uniformly with replacement.
    pub fn sample_batch(&mut self, rng: &mut impl Rng, n: usize) -> Vec<T> {
        if self.items.is_empty() {
            return Vec::new();
        }
        self.drawn += n as u64;
        (0..n).map(|_| self.items[rng.gen_range(0..self.items.len())].clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    /// Total samples ever pushed; always `len() + evicted()`.
    pub fn pushed(&self) -> u64 {
        self.pushed
    }

    pub fn evicted(&self) -> u64 {
        self.evicted
    }

    /// Samples handed to the trainer (with replacement).
    pub fn drawn(&self) -> u64 {
        self.drawn
    }
}
