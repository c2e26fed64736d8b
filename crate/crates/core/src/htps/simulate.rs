//! Selection of a simulation hypertree and value backup.

use std::collections::{HashMap, HashSet};

use super::graph::{HyperGraph, NodeId};
use super::policy::{argmax_restricted, puct_scores, rp_scores, EdgeStats, Policy};

/// One node of a simulation hypertree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimNode {
    pub node: NodeId,
    /// The tactic chosen at this node; `None` for leaves.
    pub edge: Option<usize>,
}

/// A hypertree chosen by one simulation, in post-order (children before
/// parents, the root last). Each goal appears once even when reached along
/// several paths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimulationTree {
    pub nodes: Vec<SimNode>,
}

impl SimulationTree {
    /// Leaves that still need an expansion.
    pub fn unexpanded_leaves(&self, h: &HyperGraph) -> Vec<NodeId> {
        self.nodes.iter().filter(|s| s.edge.is_none() && !h.node(s.node).expanded).map(|s| s.node).collect()
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|s| s.edge.is_none()).map(|s| s.node)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SelectParams {
    pub policy: Policy,
    pub exploration: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SelectStats {
    pub cycle_kills: u64,
    pub restarts: u64,
    pub expandable_recomputes: u64,
    pub rp_fallbacks: u64,
}

enum Abort {
    Cycle(NodeId, usize),
    Stuck,
}

struct Walk<'a> {
    h: &'a mut HyperGraph,
    params: SelectParams,
    stats: &'a mut SelectStats,
    on_path: HashSet<NodeId>,
    done: HashSet<NodeId>,
    touched: Vec<(NodeId, usize)>,
    out: Vec<SimNode>,
}

fn edge_stats(h: &HyperGraph, g: NodeId) -> Vec<EdgeStats> {
    h.node(g)
        .edges
        .iter()
        .enumerate()
        .map(|(e, edge)| EdgeStats {
            n: edge.n,
            w: edge.w,
            vc: edge.vc,
            prior: edge.prior,
            solving: h.edge_solving(g, e),
        })
        .collect()
}

impl Walk<'_> {
    fn choose(&mut self, g: NodeId, allowed: &[usize]) -> usize {
        let stats = edge_stats(self.h, g);
        let scores = match self.params.policy {
            Policy::Puct => puct_scores(&stats, self.params.exploration),
            Policy::Rp => rp_scores(&stats, self.params.exploration).unwrap_or_else(|| {
                log::debug!("regularized policy did not converge at node {g}; using PUCT");
                self.stats.rp_fallbacks += 1;
                puct_scores(&stats, self.params.exploration)
            }),
        };
        argmax_restricted(&scores, &stats, allowed).expect("allowed is non-empty")
    }

    fn visit(&mut self, g: NodeId) -> Result<(), Abort> {
        if self.done.contains(&g) {
            return Ok(());
        }
        let node = self.h.node(g);
        if node.solved || !node.expanded {
            self.done.insert(g);
            self.out.push(SimNode { node: g, edge: None });
            return Ok(());
        }
        let allowed = self.h.expandable_edges(g);
        if allowed.is_empty() {
            return Err(Abort::Stuck);
        }
        let e = self.choose(g, &allowed);
        let children = self.h.edge(g, e).children.clone();
        if children.iter().any(|c| *c == g || self.on_path.contains(c)) {
            return Err(Abort::Cycle(g, e));
        }
        self.h.edge_mut(g, e).vc += 1;
        self.touched.push((g, e));
        self.on_path.insert(g);
        for c in children {
            self.visit(c)?;
        }
        self.on_path.remove(&g);
        self.done.insert(g);
        self.out.push(SimNode { node: g, edge: Some(e) });
        Ok(())
    }
}

/// Descends from the root adding virtual counts, returning the selected
/// hypertree, or `None` when no unexpanded goal is reachable.
///
/// Only expandable tactics are candidates. A tactic leading back to a goal
/// on the current path is killed and the descent restarts; stale expandable
/// flags trigger a full recomputation and a restart. Virtual counts of an
/// abandoned descent are rolled back.
pub fn find_expandable_subtree(
    h: &mut HyperGraph,
    params: SelectParams,
    stats: &mut SelectStats,
) -> Option<SimulationTree> {
    let root = h.root();
    let mut fresh_flags = false;
    loop {
        let r = h.node(root);
        if r.solved || r.invalid || !r.expandable {
            if fresh_flags || r.solved || r.invalid {
                return None;
            }
            h.recompute_expandable();
            stats.expandable_recomputes += 1;
            fresh_flags = true;
            continue;
        }
        let mut walk = Walk {
            h: &mut *h,
            params,
            stats: &mut *stats,
            on_path: HashSet::new(),
            done: HashSet::new(),
            touched: Vec::new(),
            out: Vec::new(),
        };
        let result = walk.visit(root);
        let touched = std::mem::take(&mut walk.touched);
        let out = std::mem::take(&mut walk.out);
        match result {
            Ok(()) => return Some(SimulationTree { nodes: out }),
            Err(abort) => {
                for (g, e) in touched {
                    h.edge_mut(g, e).vc -= 1;
                }
                stats.restarts += 1;
                match abort {
                    Abort::Cycle(g, e) => {
                        h.kill_edge(g, e);
                        stats.cycle_kills += 1;
                        fresh_flags = false;
                    }
                    Abort::Stuck => {
                        if fresh_flags {
                            // Flags are exact after a recomputation; cannot happen.
                            log::warn!("selection stuck with fresh expandable flags");
                            return None;
                        }
                        h.recompute_expandable();
                        stats.expandable_recomputes += 1;
                        fresh_flags = true;
                    }
                }
            }
        }
    }
}

/// Value of a leaf after expansion.
pub fn leaf_value(h: &HyperGraph, g: NodeId) -> f64 {
    let n = h.node(g);
    if n.solved {
        1.0
    } else if n.invalid {
        0.0
    } else {
        n.critic
    }
}

/// Propagates leaf values to the root of `tree`.
///
/// An internal node's value is `gamma` times the product of its chosen
/// tactic's children values; each chosen tactic gains one visit, the
/// value as return, and loses its virtual count. Returns the node values.
pub fn backup(h: &mut HyperGraph, tree: &SimulationTree, gamma: f64) -> HashMap<NodeId, f64> {
    let mut values: HashMap<NodeId, f64> = HashMap::with_capacity(tree.nodes.len());
    for s in &tree.nodes {
        let v = match s.edge {
            None => leaf_value(h, s.node),
            Some(e) => {
                let v = gamma * h.edge(s.node, e).children.iter().map(|c| values[c]).product::<f64>();
                let edge = h.edge_mut(s.node, e);
                edge.n += 1;
                edge.w += v;
                edge.vc -= 1;
                v
            }
        };
        values.insert(s.node, v);
    }
    values
}
