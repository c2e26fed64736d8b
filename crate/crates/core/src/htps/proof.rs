//! Minimal proof extraction.
//!
//! Costs are computed with Knuth's generalization of Dijkstra's algorithm
//! to AND/OR graphs: a goal's cost is final once popped from the queue, and
//! a tactic becomes available when all its children are final. Both
//! metrics are monotone (`1 + sum` and `1 + max`), so the first cost popped
//! for a goal is minimal. Ties go to the smallest tactic string.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::env::{Proof, ProofStep};

use super::graph::{HyperGraph, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProofMetric {
    /// Number of tactic applications, shared subgoals counted per occurrence.
    Size,
    /// Longest root-to-leaf chain of tactic applications.
    Depth,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("goal {0} is not solved")]
    NotSolved(NodeId),
}

/// Edge index standing for "closed without a tactic" (cost 0).
pub const NO_TACTIC: usize = usize::MAX;

/// For every node, the minimal cost and the edge achieving it, if provable
/// with non-killed edges.
pub fn min_proof_costs(h: &HyperGraph, metric: ProofMetric) -> Vec<Option<(u64, usize)>> {
    let mut best: Vec<Option<(u64, usize)>> = vec![None; h.len()];
    let mut pending: Vec<Vec<usize>> =
        h.nodes().iter().map(|n| n.edges.iter().map(|e| e.children.len()).collect()).collect();
    let mut heap: BinaryHeap<Reverse<(u64, &str, NodeId, usize)>> = BinaryHeap::new();
    for (id, node) in h.nodes().iter().enumerate() {
        if node.solved && node.edges.is_empty() {
            heap.push(Reverse((0, "", id, NO_TACTIC)));
        }
        for (e, edge) in node.edges.iter().enumerate() {
            if !edge.killed && edge.children.is_empty() {
                heap.push(Reverse((1, &edge.tactic_str, id, e)));
            }
        }
    }
    while let Some(Reverse((cost, _, id, e))) = heap.pop() {
        if best[id].is_some() {
            continue;
        }
        best[id] = Some((cost, e));
        for &(p, pe) in &h.node(id).parents {
            let edge = h.edge(p, pe);
            if edge.killed || best[p].is_some() {
                continue;
            }
            pending[p][pe] -= 1;
            if pending[p][pe] == 0 {
                let child_costs = edge.children.iter().map(|&c| best[c].expect("final").0);
                let cost = match metric {
                    ProofMetric::Size => child_costs.fold(1u64, |a, b| a.saturating_add(b)),
                    ProofMetric::Depth => 1 + child_costs.max().unwrap_or(0),
                };
                heap.push(Reverse((cost, &edge.tactic_str, p, pe)));
            }
        }
    }
    best
}

/// The proof of `id` minimizing `metric`, flattened in preorder.
pub fn extract_min_proof(h: &HyperGraph, id: NodeId, metric: ProofMetric) -> Result<Proof, ExtractError> {
    let root = &h.node(id).goal;
    let best = min_proof_costs(h, metric);
    if best[id].is_none() {
        return Err(ExtractError::NotSolved(id));
    }
    let mut steps = Vec::new();
    let mut stack = vec![id];
    while let Some(g) = stack.pop() {
        let (_, e) = best[g].expect("children of a proved goal are proved");
        if e == NO_TACTIC {
            continue;
        }
        let edge = h.edge(g, e);
        steps.push(ProofStep {
            goal: h.node(g).goal.clone(),
            tactic: edge.tactic.clone(),
            children: edge.children.iter().map(|&c| h.node(c).goal.clone()).collect(),
            closed: edge.closed.clone(),
        });
        stack.extend(edge.children.iter().rev());
    }
    Ok(Proof { root: root.clone(), steps })
}
