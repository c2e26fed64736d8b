//! The search graph against independent reference implementations:
//! status propagation, value backup and minimal proofs.

use std::collections::{HashMap, HashSet};

use htps::env::{Goal, Tactic};
use htps::htps::{
    backup, extract_min_proof, find_expandable_subtree, Edge, HyperGraph, NodeId, Policy, ProofMetric, SelectParams,
    SelectStats, SimulationTree, Status,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn goal(i: usize) -> Goal {
    format!("= x {i}").parse().unwrap()
}

fn edge(rule: &str, children: Vec<NodeId>, prior: f64) -> Edge {
    Edge::new(Tactic::assert(rule), children, vec![], prior)
}

fn random_edges(rng: &mut impl Rng, pool: usize, max_edges: usize, max_children: usize) -> Vec<Edge> {
    let k = rng.gen_range(0..=max_edges);
    (0..k)
        .map(|j| {
            let mut children: Vec<NodeId> = (0..rng.gen_range(0..=max_children)).map(|_| rng.gen_range(0..pool)).collect();
            children.sort_unstable();
            children.dedup();
            edge(&format!("t{j}"), children, rng.gen_range(0.01..1.0))
        })
        .collect()
}

// ---------------------------------------------------------------- statuses

/// Solved and invalid as least fixed points of their recursive definitions.
fn brute_statuses(h: &HyperGraph, trivially: &HashSet<NodeId>) -> Vec<Status> {
    let n = h.len();
    let mut solved = vec![false; n];
    loop {
        let mut changed = false;
        for g in 0..n {
            let node = h.node(g);
            let s = trivially.contains(&g)
                || (node.expanded
                    && !node.oracle_error
                    && node.edges.iter().any(|e| !e.killed && e.children.iter().all(|&c| solved[c])));
            if s && !solved[g] {
                solved[g] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut invalid = vec![false; n];
    loop {
        let mut changed = false;
        for g in 0..n {
            let node = h.node(g);
            let i = !solved[g]
                && (node.oracle_error
                    || (node.expanded && node.edges.iter().all(|e| e.killed || e.children.iter().any(|&c| invalid[c]))));
            if i && !invalid[g] {
                invalid[g] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n)
        .map(|g| match (solved[g], invalid[g], h.node(g).expanded) {
            (true, _, _) => Status::Solved,
            (_, true, _) => Status::Invalid,
            (_, _, false) => Status::Unexpanded,
            _ => Status::Unsolved,
        })
        .collect()
}

pub fn status_oracle(graphs: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ops = 0;
    for _ in 0..graphs {
        let n = rng.gen_range(1..=30);
        let mut h = HyperGraph::new(goal(0));
        for i in 1..n {
            h.intern(goal(i));
        }
        let mut trivially = HashSet::new();
        let mut order: Vec<NodeId> = (0..n).collect();
        order.shuffle(&mut rng);
        for g in order {
            match rng.gen_range(0..20) {
                0 => h.mark_oracle_error(g),
                1 => {
                    h.mark_trivially_closed(g);
                    trivially.insert(g);
                }
                _ => h.add_expansion(g, random_edges(&mut rng, n, 4, 3), rng.gen_range(0.0..1.0)),
            }
            // Selection only kills edges of open, expanded goals.
            if rng.gen_bool(0.2) {
                let open: Vec<(NodeId, usize)> = (0..n)
                    .filter(|&v| h.status(v) == Status::Unsolved)
                    .flat_map(|v| (0..h.node(v).edges.len()).map(move |e| (v, e)))
                    .collect();
                if let Some(&(v, e)) = open.choose(&mut rng) {
                    h.kill_edge(v, e);
                }
            }
            let statuses: Vec<Status> = (0..n).map(|v| h.status(v)).collect();
            assert_eq!(statuses, brute_statuses(&h, &trivially));
            ops += 1;
        }
    }
    assert!(ops > 10 * graphs);
    format!("{graphs} graphs, {ops} operations, 0 mismatches")
}

// ------------------------------------------------------------------ backup

/// Straight-line reference: values by recursion from the root of the tree,
/// then one visit, the value and minus one virtual count per chosen tactic.
fn reference_backup(h: &HyperGraph, tree: &SimulationTree, gamma: f64) -> HashMap<(NodeId, usize), (u64, f64, i64)> {
    let choice: HashMap<NodeId, Option<usize>> = tree.nodes.iter().map(|s| (s.node, s.edge)).collect();
    fn value(h: &HyperGraph, choice: &HashMap<NodeId, Option<usize>>, g: NodeId, gamma: f64) -> f64 {
        match choice[&g] {
            None => {
                let n = h.node(g);
                if n.solved {
                    1.0
                } else if n.invalid {
                    0.0
                } else {
                    n.critic
                }
            }
            Some(e) => {
                let mut v = gamma;
                for &c in &h.edge(g, e).children {
                    v *= value(h, choice, c, gamma);
                }
                v
            }
        }
    }
    choice
        .iter()
        .filter_map(|(&g, &e)| e.map(|e| ((g, e), (1, value(h, &choice, g, gamma), -1))))
        .collect()
}

/// Product of leaf values, each counted once per root-to-leaf path.
fn leaf_product(h: &HyperGraph, tree: &SimulationTree) -> f64 {
    let choice: HashMap<NodeId, Option<usize>> = tree.nodes.iter().map(|s| (s.node, s.edge)).collect();
    let mut stack = vec![h.root()];
    let mut product = 1.0;
    while let Some(g) = stack.pop() {
        match choice[&g] {
            Some(e) => stack.extend(&h.edge(g, e).children),
            None => {
                let n = h.node(g);
                product *= if n.solved { 1.0 } else if n.invalid { 0.0 } else { n.critic };
            }
        }
    }
    product
}

fn edge_stats(h: &HyperGraph) -> HashMap<(NodeId, usize), (u64, f64, u64)> {
    let mut out = HashMap::new();
    for (g, node) in h.nodes().iter().enumerate() {
        for (e, edge) in node.edges.iter().enumerate() {
            out.insert((g, e), (edge.n, edge.w, edge.vc));
        }
    }
    out
}

pub fn backup_reference(rounds: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for round in 0..rounds {
        let gamma = match round % 3 {
            0 => 1.0,
            1 => 0.9,
            _ => rng.gen_range(0.5..1.0),
        };
        let params = SelectParams {
            policy: if rng.gen_bool(0.5) { Policy::Puct } else { Policy::Rp },
            exploration: rng.gen_range(0.05..3.0),
        };
        let pool = rng.gen_range(5..40);
        let mut h = HyperGraph::new(goal(0));
        let mut stats = SelectStats::default();
        for _ in 0..30 {
            let batch = rng.gen_range(1..=4);
            let trees: Vec<SimulationTree> =
                (0..batch).filter_map(|_| find_expandable_subtree(&mut h, params, &mut stats)).collect();
            if trees.is_empty() {
                break;
            }
            for tree in &trees {
                let before = edge_stats(&h);
                let expected = reference_backup(&h, tree, gamma);
                let values = backup(&mut h, tree, gamma);
                let after = edge_stats(&h);
                for (k, (n0, w0, vc0)) in &before {
                    let (n1, w1, vc1) = after[k];
                    let (dn, dw, dvc) = expected.get(k).copied().unwrap_or((0, 0.0, 0));
                    assert_eq!(n1 - n0, dn);
                    assert!((w1 - w0 - dw).abs() < 1e-12, "{w0} -> {w1}, expected +{dw}");
                    assert_eq!(vc1 as i64 - *vc0 as i64, dvc);
                }
                if gamma == 1.0 {
                    assert!((values[&h.root()] - leaf_product(&h, tree)).abs() < 1e-12);
                }
                checked += 1;
            }
            let mut leaves: Vec<NodeId> = trees.iter().flat_map(|t| t.unexpanded_leaves(&h)).collect();
            leaves.sort_unstable();
            leaves.dedup();
            for g in leaves {
                let edges = random_edges(&mut rng, pool, 4, 3)
                    .into_iter()
                    .map(|e| {
                        let children = e.children.iter().map(|&c| h.intern(goal(c))).collect();
                        edge(&e.tactic_str, children, e.prior)
                    })
                    .collect();
                h.add_expansion(g, edges, rng.gen_range(0.0..1.0));
            }
        }
        // Every virtual count was returned.
        assert!(h.nodes().iter().flat_map(|n| &n.edges).all(|e| e.vc == 0));
    }
    assert!(checked > 3 * rounds, "{checked}");
    format!("{checked} backups on {rounds} growing graphs, 0 mismatches")
}

// ------------------------------------------------------------ minimal proof

/// Minimal cost over all proof trees, by exhaustive search over the goals
/// on the current path (a proof tree never repeats a goal along a branch).
fn exhaustive(h: &HyperGraph, g: NodeId, path: u32, metric: ProofMetric, memo: &mut HashMap<(NodeId, u32), Option<u64>>) -> Option<u64> {
    if let Some(&c) = memo.get(&(g, path)) {
        return c;
    }
    let inner = path | (1 << g);
    let mut best: Option<u64> = None;
    for e in &h.node(g).edges {
        if e.killed || e.children.iter().any(|&c| inner & (1 << c) != 0) {
            continue;
        }
        let mut cost = Some(1u64);
        for &c in &e.children {
            cost = match (cost, exhaustive(h, c, inner, metric, memo)) {
                (Some(a), Some(b)) => Some(match metric {
                    ProofMetric::Size => a + b,
                    ProofMetric::Depth => a.max(1 + b),
                }),
                _ => None,
            };
        }
        if let Some(c) = cost {
            best = Some(best.map_or(c, |b| b.min(c)));
        }
    }
    memo.insert((g, path), best);
    best
}

pub fn min_proof_oracle(target: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut graphs = 0;
    let mut nontrivial = 0;
    while graphs < target {
        let n = rng.gen_range(2..=12);
        let mut h = HyperGraph::new(goal(0));
        for i in 1..n {
            h.intern(goal(i));
        }
        for g in 0..n {
            let mut edges = random_edges(&mut rng, n, 3, 3);
            // Keep closing tactics rare so proofs have some depth.
            for e in edges.iter_mut() {
                if e.children.is_empty() && rng.gen_bool(0.6) {
                    e.children.push(rng.gen_range(0..n));
                }
            }
            h.add_expansion(g, edges, 0.5);
        }
        if h.status(0) != Status::Solved {
            continue;
        }
        graphs += 1;
        for metric in [ProofMetric::Size, ProofMetric::Depth] {
            let expected = exhaustive(&h, 0, 0, metric, &mut HashMap::new()).expect("solved root has a proof");
            let proof = extract_min_proof(&h, 0, metric).unwrap();
            let got = match metric {
                ProofMetric::Size => proof.size(),
                ProofMetric::Depth => proof.depth(),
            } as u64;
            assert_eq!(got, expected, "{metric:?} on graph {graphs}");
            if expected > 2 {
                nontrivial += 1;
            }
            // The steps form a proof tree of solving tactics present in the graph.
            for step in &proof.steps {
                let g = h.find(&step.goal).unwrap();
                let e = h.node(g).edges.iter().position(|e| e.tactic == step.tactic).unwrap();
                assert!(h.edge_solving(g, e));
            }
        }
    }
    assert!(nontrivial > target / 5, "{nontrivial}");
    format!("{graphs} solved graphs, size and depth, 0 mismatches")
}
