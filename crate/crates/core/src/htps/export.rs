use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::graph::{HyperGraph, Status};
use super::policy::{q_value, EdgeStats};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDump {
    pub id: usize,
    pub goal: String,
    pub status: Status,
    pub critic: f64,
    #[serde(default)]
    pub oracle_error: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDump {
    pub from: usize,
    pub tactic: String,
    pub children: Vec<usize>,
    #[serde(default)]
    pub closed: Vec<String>,
    pub prior: f64,
    pub n: u64,
    pub w: f64,
    pub vc: u64,
    #[serde(default)]
    pub killed: bool,
    pub q: f64,
}

/// Serializable snapshot of a search hypergraph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub root: usize,
    pub nodes: Vec<NodeDump>,
    pub edges: Vec<EdgeDump>,
}

impl HyperGraph {
    pub fn dump(&self) -> GraphDump {
        let nodes = self
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, n)| NodeDump {
                id,
                goal: n.goal.to_string(),
                status: self.status(id),
                critic: n.critic,
                oracle_error: n.oracle_error,
            })
            .collect();
        let mut edges = Vec::new();
        for (id, n) in self.nodes().iter().enumerate() {
            for (e, edge) in n.edges.iter().enumerate() {
                let stats =
                    EdgeStats { n: edge.n, w: edge.w, vc: edge.vc, prior: edge.prior, solving: self.edge_solving(id, e) };
                edges.push(EdgeDump {
                    from: id,
                    tactic: edge.tactic_str.clone(),
                    children: edge.children.clone(),
                    closed: edge.closed.iter().map(ToString::to_string).collect(),
                    prior: edge.prior,
                    n: edge.n,
                    w: edge.w,
                    vc: edge.vc,
                    killed: edge.killed,
                    q: q_value(&stats),
                });
            }
        }
        GraphDump { root: self.root(), nodes, edges }
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl GraphDump {
    /// Graphviz rendering: goals are boxes coloured by status, each tactic
    /// is a point joined to its children.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph htps {\n  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n");
        for n in &self.nodes {
            let color = match n.status {
                Status::Solved => "green",
                Status::Invalid => "red",
                Status::Unexpanded => "gray",
                Status::Unsolved => "black",
            };
            let peripheries = if n.id == self.root { 2 } else { 1 };
            let _ = writeln!(
                out,
                "  n{} [label=\"{}: {}\", color={color}, peripheries={peripheries}];",
                n.id,
                n.id,
                escape(&n.goal)
            );
        }
        for (i, e) in self.edges.iter().enumerate() {
            let style = if e.killed { ", style=dashed" } else { "" };
            let _ = writeln!(out, "  t{i} [shape=point];");
            let _ = writeln!(
                out,
                "  n{} -> t{i} [label=\"{}\\nN={} Q={:.3}\"{style}];",
                e.from,
                escape(&e.tactic),
                e.n,
                e.q
            );
            for c in &e.children {
                let _ = writeln!(out, "  t{i} -> n{c}{};", if e.killed { " [style=dashed]" } else { "" });
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph dumps always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}
