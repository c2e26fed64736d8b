use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::Theorem;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatementMetrics {
    pub id: String,
    pub split: String,
    pub attempts: u64,
    pub solved_attempts: u64,
    pub crashes: u64,
    /// Global attempt index of the first success.
    pub first_solved_at: Option<u64>,
    /// (size, depth) of the first proof found.
    pub first_proof: Option<(usize, usize)>,
    /// Smallest proof found so far, by size then depth.
    pub best_proof: Option<(usize, usize)>,
}

impl StatementMetrics {
    pub fn solved(&self) -> bool {
        self.first_solved_at.is_some()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Attempts finished so far.
    pub attempts: u64,
    pub pass_rate: f64,
    pub secs: f64,
}

/// Sample accounting across the run. Every emitted sample reaches the
/// trainer; every received sample is either still queued or was evicted.
/// Drawing samples for training does not remove them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFlow {
    pub emitted: u64,
    pub received: u64,
    pub queued: u64,
    pub evicted: u64,
    pub drawn: u64,
}

impl SampleFlow {
    pub fn reconciled(&self) -> bool {
        self.emitted == self.received && self.received == self.queued + self.evicted
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub statements: Vec<StatementMetrics>,
    pub attempts: u64,
    pub crashes: u64,
    /// One point per finished attempt.
    pub curve: Vec<CurvePoint>,
    pub train_steps: u64,
    pub final_version: u64,
    /// Snapshot swaps performed by provers.
    pub refreshes: u64,
    /// Provers observing an older version than one they held (must stay 0).
    pub version_regressions: u64,
    pub tactic_samples: SampleFlow,
    pub critic_samples: SampleFlow,
    pub secs: f64,
}

impl RunMetrics {
    pub fn new(theorems: &[Theorem]) -> Self {
        RunMetrics {
            statements: theorems
                .iter()
                .map(|t| StatementMetrics { id: t.id.clone(), split: t.split.clone(), ..Default::default() })
                .collect(),
            ..Default::default()
        }
    }

    /// Share of statements solved at least once.
    pub fn cumulative_pass_rate(&self) -> f64 {
        if self.statements.is_empty() {
            return 0.0;
        }
        self.statements.iter().filter(|s| s.solved()).count() as f64 / self.statements.len() as f64
    }

    pub fn solved(&self) -> usize {
        self.statements.iter().filter(|s| s.solved()).count()
    }

    pub(crate) fn record(&mut self, statement: usize, index: u64, proof: Option<(usize, usize)>, secs: f64) {
        self.attempts += 1;
        let s = &mut self.statements[statement];
        s.attempts += 1;
        if let Some(p) = proof {
            s.solved_attempts += 1;
            if s.first_solved_at.is_none() {
                s.first_solved_at = Some(index);
                s.first_proof = Some(p);
            }
            if s.best_proof.is_none_or(|b| p < b) {
                s.best_proof = Some(p);
            }
        }
        let pass_rate = self.cumulative_pass_rate();
        self.curve.push(CurvePoint { attempts: self.attempts, pass_rate, secs });
    }

    /// Zeroes wall-clock fields so that runs can be compared exactly.
    pub fn strip_timing(&mut self) {
        self.secs = 0.0;
        for p in &mut self.curve {
            p.secs = 0.0;
        }
    }

    /// Per-split pass rates and proof-size summaries as an aligned table.
    pub fn summary_table(&self) -> String {
        let mut splits: Vec<&str> = Vec::new();
        for s in &self.statements {
            if !splits.contains(&s.split.as_str()) {
                splits.push(&s.split);
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:>6} {:>6} {:>8} {:>9} {:>10} {:>10}", "split", "total", "solved", "rate", "attempts", "first size", "best size");
        let mut row = |name: &str, rows: Vec<&StatementMetrics>| {
            let solved: Vec<_> = rows.iter().filter(|s| s.solved()).collect();
            let mean = |f: &dyn Fn(&StatementMetrics) -> Option<usize>| {
                let v: Vec<usize> = solved.iter().filter_map(|s| f(s)).collect();
                if v.is_empty() {
                    "-".to_string()
                } else {
                    format!("{:.1}", v.iter().sum::<usize>() as f64 / v.len() as f64)
                }
            };
            let _ = writeln!(
                out,
                "{:<16} {:>6} {:>6} {:>7.1}% {:>9} {:>10} {:>10}",
                name,
                rows.len(),
                solved.len(),
                100.0 * solved.len() as f64 / rows.len().max(1) as f64,
                rows.iter().map(|s| s.attempts).sum::<u64>(),
                mean(&|s| s.first_proof.map(|p| p.0)),
                mean(&|s| s.best_proof.map(|p| p.0)),
            );
        };
        for split in &splits {
            row(split, self.statements.iter().filter(|s| s.split == *split).collect());
        }
        if splits.len() > 1 {
            row("all", self.statements.iter().collect());
        }
        out
    }
}

/// One line of the append-only event log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Attempt {
        index: u64,
        statement: String,
        worker: usize,
        version: u64,
        solved: bool,
        crashed: bool,
        size: Option<usize>,
        expansions: u64,
        budget: usize,
        secs: f64,
    },
    Train { step: u64, version: u64, tactic_queue: usize, critic_queue: usize },
    Refresh { worker: usize, from: u64, to: u64, attempts_since: u64 },
    Summary { attempts: u64, solved: usize, total: usize, pass_rate: f64, secs: f64 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Goal;

    #[test]
    fn pass_rate_is_monotone() {
        let goal: Goal = "= x x".parse().unwrap();
        let thms: Vec<Theorem> =
            (0..3).map(|i| Theorem { id: i.to_string(), split: "s".into(), goal: goal.clone() }).collect();
        let mut m = RunMetrics::new(&thms);
        m.record(0, 0, Some((3, 2)), 0.0);
        m.record(0, 1, None, 0.0);
        m.record(0, 2, Some((2, 2)), 0.0);
        m.record(1, 3, None, 0.0);
        m.record(2, 4, Some((1, 1)), 0.0);
        assert!(m.curve.windows(2).all(|w| w[0].pass_rate <= w[1].pass_rate));
        assert_eq!(m.statements[0].first_proof, Some((3, 2)));
        assert_eq!(m.statements[0].best_proof, Some((2, 2)));
        assert!((m.cumulative_pass_rate() - 2.0 / 3.0).abs() < 1e-12);
        assert!(m.summary_table().contains("66.7%"));
    }
}
