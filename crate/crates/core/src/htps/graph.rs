use std::collections::HashMap;

use crate::env::{Goal, Tactic};

pub type NodeId = usize;

/// A hyperedge: applying `tactic` to its goal yields `children`.
#[derive(Clone, Debug)]
pub struct Edge {
    pub tactic: Tactic,
    pub tactic_str: String,
    pub children: Vec<NodeId>,
    /// Subgoals the environment discharged when the tactic was applied.
    pub closed: Vec<Goal>,
    pub prior: f64,
    pub n: u64,
    pub w: f64,
    pub vc: u64,
    /// Removed because it closed a cycle during selection.
    pub killed: bool,
}

impl Edge {
    pub fn new(tactic: Tactic, children: Vec<NodeId>, closed: Vec<Goal>, prior: f64) -> Self {
        Edge { tactic_str: tactic.to_string(), tactic, children, closed, prior, n: 0, w: 0.0, vc: 0, killed: false }
    }

    pub fn total_count(&self) -> u64 {
        self.n + self.vc
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub goal: Goal,
    pub expanded: bool,
    pub solved: bool,
    pub invalid: bool,
    /// The oracle failed on this goal; it is also marked invalid.
    pub oracle_error: bool,
    pub critic: f64,
    pub edges: Vec<Edge>,
    /// `(parent, edge index)` for every edge listing this node as a child.
    pub parents: Vec<(NodeId, usize)>,
    /// Optimistic: may be stale-true until [`HyperGraph::recompute_expandable`].
    pub expandable: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Unexpanded,
    Unsolved,
    Solved,
    Invalid,
}

/// Goals (hash-consed) and the tactics connecting them.
#[derive(Clone, Debug)]
pub struct HyperGraph {
    nodes: Vec<Node>,
    index: HashMap<Goal, NodeId>,
}

impl HyperGraph {
    pub const ROOT: NodeId = 0;

    pub fn new(root: Goal) -> Self {
        let mut g = HyperGraph { nodes: Vec::new(), index: HashMap::new() };
        g.intern(root);
        g
    }

    pub fn root(&self) -> NodeId {
        Self::ROOT
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edge(&self, id: NodeId, e: usize) -> &Edge {
        &self.nodes[id].edges[e]
    }

    pub(crate) fn edge_mut(&mut self, id: NodeId, e: usize) -> &mut Edge {
        &mut self.nodes[id].edges[e]
    }

    pub fn find(&self, goal: &Goal) -> Option<NodeId> {
        self.index.get(goal).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).sum()
    }

    /// Returns the node for `goal`, creating an unexpanded one if needed.
    pub fn intern(&mut self, goal: Goal) -> NodeId {
        if let Some(&id) = self.index.get(&goal) {
            return id;
        }
        let id = self.nodes.len();
        self.index.insert(goal.clone(), id);
        self.nodes.push(Node {
            goal,
            expanded: false,
            solved: false,
            invalid: false,
            oracle_error: false,
            critic: 0.5,
            edges: Vec::new(),
            parents: Vec::new(),
            expandable: true,
        });
        id
    }

    pub fn status(&self, id: NodeId) -> Status {
        let n = &self.nodes[id];
        if n.solved {
            Status::Solved
        } else if n.invalid {
            Status::Invalid
        } else if !n.expanded {
            Status::Unexpanded
        } else {
            Status::Unsolved
        }
    }

    /// An edge can still contribute to a proof.
    pub fn edge_live(&self, id: NodeId, e: usize) -> bool {
        let edge = &self.nodes[id].edges[e];
        !edge.killed && edge.children.iter().all(|&c| !self.nodes[c].invalid)
    }

    pub fn edge_solving(&self, id: NodeId, e: usize) -> bool {
        let edge = &self.nodes[id].edges[e];
        !edge.killed && edge.children.iter().all(|&c| self.nodes[c].solved)
    }

    /// Marks `id` expanded with the given edges and propagates statuses.
    ///
    /// Edges are stored in the given order. Expanding an already expanded
    /// node is a no-op.
    pub fn add_expansion(&mut self, id: NodeId, edges: Vec<Edge>, critic: f64) {
        if self.nodes[id].expanded {
            return;
        }
        for (e, edge) in edges.iter().enumerate() {
            for &c in &edge.children {
                self.nodes[c].parents.push((id, e));
            }
        }
        let node = &mut self.nodes[id];
        node.expanded = true;
        node.critic = critic;
        node.edges = edges;
        self.refresh(id);
        self.refresh_expandable_local(id);
    }

    /// Marks a goal closed without any tactic (trivially true).
    pub fn mark_trivially_closed(&mut self, id: NodeId) {
        let node = &mut self.nodes[id];
        node.expanded = true;
        node.solved = true;
        node.critic = 1.0;
        node.expandable = false;
        self.propagate_from(id);
    }

    /// Marks an expanded-or-not node invalid because its oracle failed.
    pub fn mark_oracle_error(&mut self, id: NodeId) {
        let node = &mut self.nodes[id];
        node.expanded = true;
        node.oracle_error = true;
        node.critic = 0.0;
        if !node.solved && !node.invalid {
            node.invalid = true;
            node.expandable = false;
            self.propagate_from(id);
        }
    }

    /// Removes an edge that closes a cycle.
    pub fn kill_edge(&mut self, id: NodeId, e: usize) {
        if self.nodes[id].edges[e].killed {
            return;
        }
        self.nodes[id].edges[e].killed = true;
        self.refresh(id);
    }

    /// Re-derives the status of `id` from its edges and propagates changes upward.
    fn refresh(&mut self, id: NodeId) {
        let mut work = vec![id];
        while let Some(g) = work.pop() {
            let node = &self.nodes[g];
            if !node.expanded || node.solved || node.invalid {
                continue;
            }
            let solved = (0..node.edges.len()).any(|e| self.edge_solving(g, e));
            let invalid = !solved && (0..node.edges.len()).all(|e| !self.edge_live(g, e));
            if solved || invalid {
                let node = &mut self.nodes[g];
                node.solved = solved;
                node.invalid = invalid;
                node.expandable = false;
                work.extend(node.parents.iter().map(|&(p, _)| p));
            }
        }
    }

    fn propagate_from(&mut self, id: NodeId) {
        let parents: Vec<NodeId> = self.nodes[id].parents.iter().map(|&(p, _)| p).collect();
        for p in parents {
            self.refresh(p);
        }
    }

    /// Expandable iff some live edge has an unsolved child and all its
    /// unsolved children are expandable (using current flags).
    fn edge_expandable(&self, id: NodeId, e: usize) -> bool {
        let edge = &self.nodes[id].edges[e];
        if edge.killed {
            return false;
        }
        let mut any_open = false;
        for &c in &edge.children {
            let child = &self.nodes[c];
            if child.solved {
                continue;
            }
            if child.invalid || !child.expandable {
                return false;
            }
            any_open = true;
        }
        any_open
    }

    pub fn expandable_edges(&self, id: NodeId) -> Vec<usize> {
        (0..self.nodes[id].edges.len()).filter(|&e| self.edge_expandable(id, e)).collect()
    }

    fn refresh_expandable_local(&mut self, id: NodeId) {
        let node = &self.nodes[id];
        let flag = !node.solved && !node.invalid && (0..node.edges.len()).any(|e| self.edge_expandable(id, e));
        self.nodes[id].expandable = flag;
    }

    /// Recomputes every expandable flag as a least fixed point.
    ///
    /// A node is expandable when it is neither solved nor invalid and either
    /// unexpanded, or has an expandable edge. Cycles without an unexpanded
    /// node at their frontier are therefore never expandable.
    pub fn recompute_expandable(&mut self) {
        for node in &mut self.nodes {
            node.expandable = !node.expanded && !node.solved && !node.invalid;
        }
        // Per edge: how many unsolved children are not yet known expandable.
        let mut pending: Vec<Vec<usize>> = Vec::with_capacity(self.nodes.len());
        let mut work: Vec<NodeId> = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            let mut per_edge = Vec::with_capacity(node.edges.len());
            for (e, edge) in node.edges.iter().enumerate() {
                let blocked = edge.killed || edge.children.iter().any(|&c| self.nodes[c].invalid);
                let open: Vec<NodeId> = edge.children.iter().copied().filter(|&c| !self.nodes[c].solved).collect();
                if blocked || open.is_empty() {
                    per_edge.push(usize::MAX);
                } else {
                    per_edge.push(open.iter().filter(|&&c| !self.nodes[c].expandable).count());
                    if per_edge[e] == 0 {
                        work.push(id);
                    }
                }
            }
            pending.push(per_edge);
        }
        // Seed from unexpanded nodes: they unlock parents.
        let mut unlocked: Vec<NodeId> = Vec::new();
        for id in work.drain(..) {
            let node = &self.nodes[id];
            if !node.solved && !node.invalid && !node.expandable {
                self.nodes[id].expandable = true;
                unlocked.push(id);
            }
        }
        let mut frontier = unlocked;
        while let Some(c) = frontier.pop() {
            let parents = self.nodes[c].parents.clone();
            for (p, e) in parents {
                let slot = &mut pending[p][e];
                if *slot == usize::MAX || *slot == 0 {
                    continue;
                }
                // A child may appear once per edge (subgoals are deduplicated).
                *slot -= 1;
                if *slot == 0 {
                    let node = &self.nodes[p];
                    if !node.solved && !node.invalid && !node.expandable {
                        self.nodes[p].expandable = true;
                        frontier.push(p);
                    }
                }
            }
        }
    }
}
