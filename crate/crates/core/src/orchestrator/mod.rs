//! Online proving: a controller schedules statements and search
//! hyper-parameters, provers run searches against oracle snapshots, and a
//! trainer turns finished searches into oracle updates.

mod eval;
mod metrics;
mod online;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{Env, Goal, ProofRecord};
use crate::gen::{generate, GenConfig, GenKind};
use crate::htps::{Policy, SearchParams};
use crate::learn::{proof_samples, CriticSample, LearnableOracle, PolicyOracle, TacticMode, TacticSample, DEFAULT_QUEUE_CAPACITY};
use crate::rules::Inventory;

pub use eval::{evaluate_pass_at_k, EvalConfig, PassAtK};
pub use metrics::{CurvePoint, Event, RunMetrics, SampleFlow, StatementMetrics};
pub use online::run_online;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Rules(#[from] crate::rules::RuleError),
    #[error(transparent)]
    Gen(#[from] crate::gen::GenError),
}

/// A statement to prove, tagged with its split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theorem {
    pub id: String,
    pub split: String,
    pub goal: Goal,
}

/// Per-attempt search hyper-parameter distributions. Single-element lists
/// and equal bounds pin a value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamRanges {
    pub policy: Vec<Policy>,
    pub tactics_per_expansion: Vec<usize>,
    /// Uniform.
    pub temperature: [f64; 2],
    /// Log-uniform expansion budget.
    pub expansions: [usize; 2],
    pub depth_penalty: Vec<f64>,
    /// Log-uniform.
    pub exploration: [f64; 2],
    pub simulations_per_batch: usize,
    pub use_critic: bool,
}

impl Default for ParamRanges {
    fn default() -> Self {
        ParamRanges {
            policy: vec![Policy::Puct],
            tactics_per_expansion: vec![8, 16, 32, 48],
            temperature: [0.8, 2.0],
            expansions: [1000, 10000],
            depth_penalty: vec![0.8, 0.9, 0.95, 1.0],
            exploration: [0.01, 100.0],
            simulations_per_batch: 8,
            use_critic: true,
        }
    }
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return lo;
    }
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

impl ParamRanges {
    /// Ranges that always produce `p`.
    pub fn fixed(p: &SearchParams) -> Self {
        ParamRanges {
            policy: vec![p.policy],
            tactics_per_expansion: vec![p.tactics_per_expansion],
            temperature: [p.temperature; 2],
            expansions: [p.budget; 2],
            depth_penalty: vec![p.depth_penalty],
            exploration: [p.exploration; 2],
            simulations_per_batch: p.simulations_per_batch,
            use_critic: p.use_critic,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(format!("params: {m}")));
        if self.policy.is_empty() || self.tactics_per_expansion.is_empty() || self.depth_penalty.is_empty() {
            return bad("choice lists must be non-empty");
        }
        if self.temperature[0] > self.temperature[1]
            || self.expansions[0] > self.expansions[1]
            || self.exploration[0] > self.exploration[1]
        {
            return bad("empty range");
        }
        // Every extreme must itself be a valid parameter set.
        for &k in &self.tactics_per_expansion {
            for &g in &self.depth_penalty {
                for t in self.temperature {
                    for b in self.expansions {
                        for c in self.exploration {
                            let p = SearchParams {
                                policy: self.policy[0],
                                exploration: c,
                                depth_penalty: g,
                                budget: b,
                                tactics_per_expansion: k,
                                temperature: t,
                                simulations_per_batch: self.simulations_per_batch,
                                use_critic: self.use_critic,
                            };
                            if let Err(e) = p.validate() {
                                return Err(ConfigError::Invalid(format!("params: {e}")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn draw(&self, rng: &mut impl Rng) -> SearchParams {
        SearchParams {
            policy: *self.policy.choose(rng).expect("validated"),
            tactics_per_expansion: *self.tactics_per_expansion.choose(rng).expect("validated"),
            temperature: if self.temperature[0] < self.temperature[1] {
                rng.gen_range(self.temperature[0]..=self.temperature[1])
            } else {
                self.temperature[0]
            },
            budget: log_uniform(rng, self.expansions[0] as f64, self.expansions[1] as f64).round() as usize,
            depth_penalty: *self.depth_penalty.choose(rng).expect("validated"),
            exploration: log_uniform(rng, self.exploration[0], self.exploration[1]),
            simulations_per_batch: self.simulations_per_batch,
            use_critic: self.use_critic,
        }
    }
}

/// One scheduled search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttemptConfig {
    /// Global attempt index, in dispatch order.
    pub index: u64,
    /// Index into the statement list.
    pub statement: usize,
    pub params: SearchParams,
}

/// How often provers pick up the trainer's latest oracle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Refresh {
    /// Provers keep the initial oracle for the whole run.
    Never,
    EverySecs(f64),
    /// Counted per prover.
    EveryAttempts(u64),
    #[default]
    Always,
}

/// Where a split's statements come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub name: String,
    /// One statement per line: a proof record or a goal in prefix form.
    pub file: Option<PathBuf>,
    pub statements: Vec<String>,
    pub generate: Option<GenerateSplit>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { name: "default".into(), file: None, statements: Vec::new(), generate: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSplit {
    #[serde(default)]
    pub kind: GenKind,
    pub n: usize,
    #[serde(default)]
    pub config: GenConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunBudget {
    /// Total searches dispatched.
    pub attempts: Option<u64>,
    pub secs: Option<f64>,
}

/// Online-run configuration, usually read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub rules: Vec<String>,
    pub splits: Vec<SplitConfig>,
    /// Prover threads; 1 runs everything on the calling thread, deterministically.
    pub workers: usize,
    pub budget: RunBudget,
    pub refresh: Refresh,
    pub queue_capacity: usize,
    /// Finished searches buffered between provers and trainer.
    pub result_queue: usize,
    pub train_batch: usize,
    pub train_steps_per_result: usize,
    pub tactic_mode: TacticMode,
    pub critic_visit_threshold: u64,
    pub hard_critic: bool,
    pub params: ParamRanges,
    pub event_log: Option<PathBuf>,
    /// Supervised warm start of trainable oracles on generated proofs.
    pub pretrain: Option<GenerateSplit>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            rules: vec!["basic".into()],
            splits: Vec::new(),
            workers: 4,
            budget: RunBudget::default(),
            refresh: Refresh::EverySecs(30.0),
            queue_capacity: DEFAULT_QUEUE_CAPACITY,
            result_queue: 64,
            train_batch: 64,
            train_steps_per_result: 1,
            tactic_mode: TacticMode::default(),
            critic_visit_threshold: 1,
            hard_critic: false,
            params: ParamRanges::default(),
            event_log: None,
            pretrain: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        if self.queue_capacity == 0 || self.result_queue == 0 {
            return Err(ConfigError::Invalid("queue sizes must be positive".into()));
        }
        if self.budget.attempts.is_none() && self.budget.secs.is_none() {
            return Err(ConfigError::Invalid("budget: set attempts and/or secs".into()));
        }
        if let Refresh::EverySecs(s) = self.refresh {
            if !(s >= 0.0) {
                return Err(ConfigError::Invalid("refresh period must be non-negative".into()));
            }
        }
        self.params.validate()
    }

    pub fn env(&self) -> Result<Env, ConfigError> {
        Ok(Env::new(Inventory::load_named(&self.rules)?))
    }

    /// Statements of every split; relative files resolve against `base`.
    pub fn load_statements(&self, env: &Env, base: &Path) -> Result<Vec<Theorem>, ConfigError> {
        let mut out = Vec::new();
        for split in &self.splits {
            let mut texts: Vec<String> = split.statements.clone();
            if let Some(file) = &split.file {
                let path = base.join(file);
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path, source })?;
                texts.extend(read_statement_lines(&text).map_err(ConfigError::Invalid)?);
            }
            if let Some(g) = &split.generate {
                texts.extend(generate(env, &g.config, g.kind, g.n)?.into_iter().map(|r| r.theorem));
            }
            for (i, t) in texts.iter().enumerate() {
                let goal = t.parse().map_err(|e| ConfigError::Invalid(format!("split {}: `{t}`: {e}", split.name)))?;
                out.push(Theorem { id: format!("{}/{i}", split.name), split: split.name.clone(), goal });
            }
        }
        if out.is_empty() {
            return Err(ConfigError::Invalid("no statements in any split".into()));
        }
        Ok(out)
    }
}

/// Goal texts from a statement file: proof records (JSON lines) or bare
/// prefix goals; blank lines and `#` comments are skipped.
pub fn read_statement_lines(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('{') {
            let rec = ProofRecord::from_json_line(line).map_err(|e| format!("line {}: {e}", n + 1))?;
            out.push(rec.theorem);
        } else {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

/// An oracle the online loop can train and snapshot.
pub trait OnlineOracle: Send {
    fn snapshot(&self) -> Arc<dyn PolicyOracle>;
    fn version(&self) -> u64;
    fn train_step(&mut self, tactics: &[TacticSample], critics: &[CriticSample]) -> u64;
}

impl OnlineOracle for LearnableOracle {
    fn snapshot(&self) -> Arc<dyn PolicyOracle> {
        Arc::new(self.clone())
    }

    fn version(&self) -> u64 {
        LearnableOracle::version(self)
    }

    fn train_step(&mut self, tactics: &[TacticSample], critics: &[CriticSample]) -> u64 {
        LearnableOracle::train_step(self, tactics, critics)
    }
}

/// Wraps any oracle; training is a no-op.
pub struct Frozen(pub Arc<dyn PolicyOracle>);

impl OnlineOracle for Frozen {
    fn snapshot(&self) -> Arc<dyn PolicyOracle> {
        self.0.clone()
    }

    fn version(&self) -> u64 {
        0
    }

    fn train_step(&mut self, _: &[TacticSample], _: &[CriticSample]) -> u64 {
        0
    }
}

/// Supervised warm start: one training step on every step of the
/// generated proofs. Returns the number of samples.
pub fn pretrain(oracle: &mut LearnableOracle, env: &Env, data: &GenerateSplit) -> Result<usize, ConfigError> {
    let records = generate(env, &data.config, data.kind, data.n)?;
    let mut samples = Vec::new();
    for r in &records {
        let proof = r.to_proof().map_err(|e| ConfigError::Invalid(format!("generated proof: {e}")))?;
        samples.extend(proof_samples(&proof));
    }
    oracle.train_step(&samples, &[]);
    Ok(samples.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_respect_ranges() {
        let r = ParamRanges::default();
        r.validate().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let p = r.draw(&mut rng);
            assert!([8, 16, 32, 48].contains(&p.tactics_per_expansion));
            assert!((0.8..=2.0).contains(&p.temperature));
            assert!((1000..=10000).contains(&p.budget));
            assert!([0.8, 0.9, 0.95, 1.0].contains(&p.depth_penalty));
            assert!((0.01..=100.0 + 1e-9).contains(&p.exploration));
        }
    }

    #[test]
    fn fixed_ranges_reproduce_params() {
        let p = SearchParams { budget: 77, exploration: 0.3, ..SearchParams::default() };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        assert_eq!(ParamRanges::fixed(&p).draw(&mut rng), p);
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            seed = 5
            rules = ["basic", "hyperbolic"]
            workers = 2
            refresh = { every_attempts = 10 }
            tactic_mode = "root_min"
            budget = { attempts = 100 }
            [params]
            expansions = [50, 200]
            [[splits]]
            name = "hand"
            statements = ["= + x y + y x"]
            [[splits]]
            name = "walks"
            generate = { n = 3, config = { seed = 2, walk_len = [2, 3] } }
        "#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.refresh, Refresh::EveryAttempts(10));
        assert_eq!(cfg.tactic_mode, TacticMode::RootMin);
        let env = cfg.env().unwrap();
        let thms = cfg.load_statements(&env, Path::new(".")).unwrap();
        assert_eq!(thms.len(), 4);
        assert_eq!(thms[0].id, "hand/0");
        assert_eq!(thms[3].split, "walks");
        assert!(RunConfig::from_toml("workers = 0\nbudget = { attempts = 1 }").is_err());
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }
}
