//! Generator soundness and pass@k monotonicity.

use htps::env::Env;
use htps::gen::{generate, GenConfig, GenKind};
use htps::learn::HeuristicOracle;
use htps::orchestrator::{evaluate_pass_at_k, EvalConfig, Theorem};
use htps::rules::{Inventory, RuleGroup};

fn env(groups: &[RuleGroup]) -> Env {
    Env::new(Inventory::load(groups).unwrap())
}

/// Generates `scale` times a fixed mix of walks and graph theorems and
/// replays every proof.
pub fn replay_generated(scale: usize) -> String {
    let basic = env(&[RuleGroup::Basic]);
    let all = env(&RuleGroup::ALL);
    let jobs: Vec<(&Env, GenConfig, GenKind, usize)> = vec![
        (&basic, GenConfig { seed: 1, ..GenConfig::default() }, GenKind::Walk, 3 * scale),
        (&basic, GenConfig { seed: 2, walk_len: [4, 8], flip_prob: 0.5, hyps: [1, 3], ..GenConfig::default() }, GenKind::Walk, 2 * scale),
        (&all, GenConfig { seed: 3, unary_ops: vec!["neg".into(), "exp".into(), "cos".into(), "sqrt".into()], ..GenConfig::default() }, GenKind::Walk, 2 * scale),
        (&basic, GenConfig { seed: 4, ..GenConfig::default() }, GenKind::Graph, 2 * scale),
        (&all, GenConfig { seed: 5, hyps: [1, 3], ..GenConfig::default() }, GenKind::Graph, scale),
    ];
    let mut total = 0;
    for (env, cfg, kind, n) in jobs {
        let records = generate(env, &cfg, kind, n).unwrap();
        assert_eq!(records.len(), n);
        for r in &records {
            let proof = r.to_proof().unwrap();
            assert_eq!(proof.root.to_string(), r.theorem);
            assert!(!proof.steps.is_empty(), "{}", r.theorem);
            proof.replay(env).unwrap_or_else(|e| panic!("{}: {e}", r.theorem));
            // The replay check above uses the generating inventory; the
            // full inventory must accept it too.
            proof.replay(&all).unwrap();
        }
        total += records.len();
    }
    assert_eq!(total, 10 * scale);
    format!("{total} theorems (walks and graphs, basic and full inventories), 100% replay")
}

pub fn pass_at_k_dominance() -> String {
    let env = env(&[RuleGroup::Basic]);
    let cfg = GenConfig { seed: 11, walk_len: [2, 5], expr_ops: [2, 5], ..GenConfig::default() };
    let theorems: Vec<Theorem> = generate(&env, &cfg, GenKind::Walk, 24)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, r)| Theorem { id: i.to_string(), split: "walk".into(), goal: r.theorem.parse().unwrap() })
        .collect();
    let oracle = HeuristicOracle::new(env.clone());
    let eval = EvalConfig { seed: 3, expansions: Some(15), ..EvalConfig::default() };
    let one = evaluate_pass_at_k(&env, &theorems, &oracle, 1, &eval);
    let eight = evaluate_pass_at_k(&env, &theorems, &oracle, 8, &eval);
    assert_eq!(eight.truncate(1), one);
    for (a, b) in one.solved().iter().zip(eight.solved()) {
        assert!(!a || b);
    }
    assert!(eight.rate() >= one.rate());
    assert!(one.rate() > 0.0 && one.rate() < 1.0, "{}", one.rate());
    format!("pass@1 {:.3} <= pass@8 {:.3}, attempt 1 identical in both", one.rate(), eight.rate())
}
