//! A count-based oracle that improves from search samples.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::env::{Env, Goal, Tactic};
use crate::expr::{Expr, Statement};

use super::oracle::{OracleError, PolicyOracle};
use super::samples::{CriticSample, TacticSample};

/// Cheap goal signature: comparison, sorted operator/leaf kinds of the top
/// two levels of both sides, and hypothesis count.
pub fn feature_key(goal: &Goal) -> String {
    fn kind(e: &Expr) -> String {
        match e {
            Expr::Var(_) | Expr::Meta(_) => "v".into(),
            Expr::Int(_) => "n".into(),
            Expr::Rat(_) => "q".into(),
            _ => e.head_token(),
        }
    }
    fn top(s: &Statement) -> Vec<String> {
        let mut out = Vec::new();
        for side in [&s.lhs, &s.rhs] {
            out.push(kind(side));
            out.extend(side.children().into_iter().map(kind));
        }
        out.sort();
        out
    }
    format!("{}|{}|{}", goal.stmt.cmp.token(), top(&goal.stmt).join(","), goal.hyps.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnableConfig {
    /// Pseudo-count of the Laplace smoothing.
    pub smoothing: f64,
    /// Usage rate assumed for templates never offered.
    pub prior_rate: f64,
    /// Weight of the previous critic estimate in each update.
    pub critic_decay: f64,
    /// Candidates enumerated before ranking.
    pub pool: usize,
}

impl Default for LearnableConfig {
    fn default() -> Self {
        LearnableConfig { smoothing: 1.0, prior_rate: 0.05, critic_decay: 0.5, pool: 256 }
    }
}

/// How often a template was applicable at a training goal, and how often
/// it was the target.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub used: f64,
    pub offered: f64,
}

impl Counts {
    fn rate(self, smoothing: f64, prior: f64) -> f64 {
        (self.used + smoothing * prior) / (self.offered + smoothing)
    }
}

/// Immutable parameters of one oracle version.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub version: u64,
    pub config: LearnableConfig,
    /// Feature key -> template -> counts.
    pub policy: BTreeMap<String, BTreeMap<String, Counts>>,
    pub global: BTreeMap<String, Counts>,
    /// Goal text -> samples seen and tactic -> times chosen.
    #[serde(default)]
    pub exact: BTreeMap<String, (f64, BTreeMap<String, f64>)>,
    pub critic: BTreeMap<String, f64>,
    #[serde(default)]
    pub exact_critic: BTreeMap<String, f64>,
}

/// Ranks enumerated tactics by the smoothed rate at which their template
/// was chosen when applicable: per feature key, shrunk towards the
/// key-independent rate. Goals seen verbatim in training further shrink
/// towards the tactics chosen there, so retries benefit from solved
/// subgoals of earlier attempts. The critic is an exponential moving
/// average of targets per exact goal, falling back to the feature key.
///
/// Cloning is cheap and yields a snapshot: training replaces the model.
#[derive(Clone, Debug)]
pub struct LearnableOracle {
    env: Env,
    model: Arc<Model>,
}

impl LearnableOracle {
    pub fn new(env: Env) -> Self {
        Self::with_config(env, LearnableConfig::default())
    }

    pub fn with_config(env: Env, config: LearnableConfig) -> Self {
        LearnableOracle { env, model: Arc::new(Model { config, ..Model::default() }) }
    }

    pub fn from_model(env: Env, model: Model) -> Self {
        LearnableOracle { env, model: Arc::new(model) }
    }

    pub fn version(&self) -> u64 {
        self.model.version
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// One update from a batch of samples; returns the new version.
    pub fn train_step(&mut self, tactics: &[TacticSample], critics: &[CriticSample]) -> u64 {
        let offered: Vec<BTreeSet<String>> = tactics
            .iter()
            .map(|s| {
                let mut t: BTreeSet<String> =
                    self.env.enumerate_tactics(&s.goal, self.model.config.pool).iter().map(Tactic::template).collect();
                t.insert(s.tactic.template());
                t
            })
            .collect();
        let m = Arc::make_mut(&mut self.model);
        for (s, offered) in tactics.iter().zip(offered) {
            let local = m.policy.entry(feature_key(&s.goal)).or_default();
            for t in &offered {
                local.entry(t.clone()).or_default().offered += 1.0;
                m.global.entry(t.clone()).or_default().offered += 1.0;
            }
            let used = s.tactic.template();
            local.entry(used.clone()).or_default().used += 1.0;
            m.global.entry(used).or_default().used += 1.0;
            let (n, chosen) = m.exact.entry(s.goal.to_string()).or_default();
            *n += 1.0;
            *chosen.entry(s.tactic.to_string()).or_default() += 1.0;
        }
        let decay = m.config.critic_decay;
        for s in critics {
            let target = s.target.clamp(0.0, 1.0);
            for (map, key) in [(&mut m.critic, feature_key(&s.goal)), (&mut m.exact_critic, s.goal.to_string())] {
                map.entry(key).and_modify(|v| *v = decay * *v + (1.0 - decay) * target).or_insert(target);
            }
        }
        m.version += 1;
        m.version
    }

    fn score(&self, key: Option<&BTreeMap<String, Counts>>, template: &str) -> f64 {
        let c = &self.model.config;
        let global = self.model.global.get(template).copied().unwrap_or_default().rate(c.smoothing, c.prior_rate);
        key.and_then(|k| k.get(template)).copied().unwrap_or_default().rate(c.smoothing, global)
    }
}

impl PolicyOracle for LearnableOracle {
    fn suggest(&self, goal: &Goal, k: usize) -> Result<Vec<(Tactic, f64)>, OracleError> {
        let key = self.model.policy.get(&feature_key(goal));
        let exact = self.model.exact.get(&goal.to_string());
        let alpha = self.model.config.smoothing;
        let mut scored: Vec<(Tactic, f64)> = self
            .env
            .enumerate_tactics(goal, self.model.config.pool)
            .into_iter()
            .map(|t| {
                let mut s = self.score(key, &t.template());
                if let Some((n, chosen)) = exact {
                    s = (chosen.get(&t.to_string()).copied().unwrap_or(0.0) + alpha * s) / (n + alpha);
                }
                (t, s)
            })
            .collect();
        // Stable: equal scores keep enumeration order.
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
        scored.truncate(k);
        let total: f64 = scored.iter().map(|s| s.1).sum();
        Ok(scored.into_iter().map(|(t, s)| (t, s / total)).collect())
    }

    fn critic(&self, goal: &Goal) -> Result<f64, OracleError> {
        let m = &self.model;
        Ok(m.exact_critic.get(&goal.to_string()).or_else(|| m.critic.get(&feature_key(goal))).copied().unwrap_or(0.5))
    }

    fn name(&self) -> &str {
        "learnable"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{Inventory, RuleGroup};

    fn oracle() -> LearnableOracle {
        LearnableOracle::new(Env::new(Inventory::load(&[RuleGroup::Basic]).unwrap()))
    }

    #[test]
    fn counts_dominate_after_one_sample() {
        let mut o = oracle();
        let g: Goal = "= + x 0 * y 1".parse().unwrap();
        let t: Tactic = "T mul_one fwd 4".parse().unwrap();
        assert_ne!(o.suggest(&g, 1).unwrap()[0].0, t);
        assert_eq!(o.train_step(&[TacticSample { goal: g.clone(), tactic: t.clone() }], &[]), 1);
        assert_eq!(o.suggest(&g, 1).unwrap()[0].0, t);
    }

    #[test]
    fn critic_ema() {
        let mut o = oracle();
        let g: Goal = "= x y".parse().unwrap();
        assert_eq!(o.critic(&g).unwrap(), 0.5);
        let s = CriticSample { goal: g.clone(), target: 1.0 };
        o.train_step(&[], &[s.clone()]);
        o.train_step(&[], &[s]);
        assert!(o.critic(&g).unwrap() > 0.9);
        o.train_step(&[], &[CriticSample { goal: g.clone(), target: 0.0 }]);
        assert_eq!(o.critic(&g).unwrap(), 0.5);
    }

    #[test]
    fn snapshots_are_isolated() {
        let mut o = oracle();
        let frozen = o.clone();
        let g: Goal = "= x y".parse().unwrap();
        o.train_step(&[], &[CriticSample { goal: g.clone(), target: 1.0 }]);
        assert_eq!(frozen.critic(&g).unwrap(), 0.5);
        assert_eq!(frozen.version(), 0);
    }

    #[test]
    fn feature_keys() {
        let g: Goal = "> x 0 |- = + x * y 2 0".parse().unwrap();
        assert_eq!(feature_key(&g), "=|*,+,n,v|1");
    }
}
