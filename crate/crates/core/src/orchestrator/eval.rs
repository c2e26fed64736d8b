use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ParamRanges, Theorem};
use crate::env::Env;
use crate::htps::search;
use crate::learn::PolicyOracle;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub seed: u64,
    pub params: ParamRanges,
    /// Overrides the drawn expansion budget.
    pub expansions: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { seed: 0, params: ParamRanges::default(), expansions: Some(1000) }
    }
}

impl EvalConfig {
    /// Parameters of attempt `j` on statement `i`; independent of `k`, so
    /// the attempts of pass@k are a prefix of those of pass@(k+1).
    pub fn attempt_params(&self, i: usize, j: usize) -> crate::htps::SearchParams {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((i as u64) << 32) | j as u64);
        let mut p = self.params.draw(&mut rng);
        if let Some(b) = self.expansions {
            p.budget = b;
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassAtK {
    pub k: usize,
    pub ids: Vec<String>,
    /// `attempts[i][j]`: proof size if attempt `j` on statement `i` succeeded.
    pub attempts: Vec<Vec<Option<usize>>>,
}

impl PassAtK {
    pub fn solved(&self) -> Vec<bool> {
        self.attempts.iter().map(|a| a.iter().any(Option::is_some)).collect()
    }

    pub fn rate(&self) -> f64 {
        if self.attempts.is_empty() {
            return 0.0;
        }
        self.solved().iter().filter(|&&s| s).count() as f64 / self.attempts.len() as f64
    }

    /// Result restricted to the first `k` attempts.
    pub fn truncate(&self, k: usize) -> PassAtK {
        PassAtK { k, ids: self.ids.clone(), attempts: self.attempts.iter().map(|a| a[..k.min(a.len())].to_vec()).collect() }
    }
}

/// Runs `k` searches per statement with per-attempt parameter draws.
pub fn evaluate_pass_at_k(env: &Env, theorems: &[Theorem], oracle: &dyn PolicyOracle, k: usize, cfg: &EvalConfig) -> PassAtK {
    assert!(k >= 1, "pass@k needs k >= 1");
    let jobs: Vec<(usize, usize)> = (0..theorems.len()).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    let results: Vec<Option<usize>> = jobs
        .par_iter()
        .map(|&(i, j)| search(env, theorems[i].goal.clone(), oracle, &cfg.attempt_params(i, j)).proof.map(|p| p.size()))
        .collect();
    PassAtK {
        k,
        ids: theorems.iter().map(|t| t.id.clone()).collect(),
        attempts: results.chunks(k).map(<[_]>::to_vec).collect(),
    }
}
