use std::collections::BTreeMap;

use htps::env::Env;
use htps::gen::{GenConfig, Generator};
use htps::rules::{Inventory, RuleGroup};
use proptest::prelude::*;

mod support;

fn env(groups: &[RuleGroup]) -> Env {
    Env::new(Inventory::load(groups).unwrap())
}

#[test]
fn generated_theorems_replay() {
    support::gen::replay_generated(200);
}

#[test]
fn pass_at_8_dominates_pass_at_1() {
    support::gen::pass_at_k_dominance();
}

fn entropy(counts: &BTreeMap<String, u64>) -> f64 {
    let total: u64 = counts.values().sum();
    counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

#[test]
fn rule_bias_spreads_rule_usage() {
    let env = env(&[RuleGroup::Basic]);
    let usage = |temperature: Option<f64>| {
        let cfg = GenConfig { seed: 8, rule_bias_temperature: temperature, ..GenConfig::default() };
        let mut g = Generator::new(env.clone(), cfg).unwrap();
        for _ in 0..400 {
            g.random_walk().unwrap();
        }
        g.rule_usage()
    };
    let (biased, plain) = (usage(Some(1.0)), usage(None));
    assert!(entropy(&biased) > entropy(&plain) + 0.3, "{} vs {}", entropy(&biased), entropy(&plain));
    assert!(biased.len() >= plain.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn any_seed_yields_replayable_walks(seed in any::<u64>(), lo in 1usize..5, extra in 0usize..5, flip in 0.0f64..1.0) {
        let env = env(&[RuleGroup::Basic]);
        let cfg = GenConfig { seed, walk_len: [lo, lo + extra], flip_prob: flip, ..GenConfig::default() };
        let mut g = Generator::new(env.clone(), cfg).unwrap();
        let (goal, proof) = g.random_walk().unwrap();
        prop_assert_eq!(&proof.root, &goal);
        prop_assert!(proof.steps.len() <= lo + extra);
        prop_assert!(proof.replay(&env).is_ok());
    }
}
