use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Env, Goal, Tactic, TacticError};

/// One tactic application inside a proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofStep {
    pub goal: Goal,
    pub tactic: Tactic,
    pub children: Vec<Goal>,
    /// Subgoals discharged on the spot by trivial closing.
    pub closed: Vec<Goal>,
}

/// A proof tree flattened in depth-first preorder.
///
/// Every open child of a step is proved by the steps that immediately
/// follow it, in child order. Subgoals shared between branches are proved
/// once per occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    pub root: Goal,
    pub steps: Vec<ProofStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("at step {}: tactic `{tactic}` failed: {source}", step + 1)]
    Tactic { step: usize, tactic: String, source: TacticError },
    #[error("at step {}: expected goal `{expected}`, proof has `{found}`", step + 1)]
    WrongGoal { step: usize, expected: String, found: String },
    #[error("at step {}: recorded subgoals differ from the environment's", step + 1)]
    ChildrenMismatch { step: usize },
    #[error("proof ends with {0} open goal(s)")]
    Open(usize),
    #[error("at step {}: no open goals remain", .0 + 1)]
    Extra(usize),
    #[error("malformed record: {0}")]
    Malformed(String),
}

impl ReplayError {
    /// Zero-based index of the first failing step, when the failure is tied
    /// to one. Messages number steps from 1.
    pub fn step(&self) -> Option<usize> {
        match self {
            ReplayError::Tactic { step, .. }
            | ReplayError::WrongGoal { step, .. }
            | ReplayError::ChildrenMismatch { step }
            | ReplayError::Extra(step) => Some(*step),
            _ => None,
        }
    }
}

impl Proof {
    /// Builds a proof by applying `tactics` in preorder, filling in children.
    pub fn from_tactics(env: &Env, root: Goal, tactics: &[Tactic]) -> Result<Proof, ReplayError> {
        let mut open = if env.close_trivial(&root) { vec![] } else { vec![root.clone()] };
        let mut steps = Vec::with_capacity(tactics.len());
        for (i, t) in tactics.iter().enumerate() {
            let goal = open.pop().ok_or(ReplayError::Extra(i))?;
            let app = env.apply(&goal, t).map_err(|source| ReplayError::Tactic {
                step: i,
                tactic: t.to_string(),
                source,
            })?;
            open.extend(app.children.iter().rev().cloned());
            steps.push(ProofStep { goal, tactic: t.clone(), children: app.children, closed: app.closed });
        }
        if !open.is_empty() {
            return Err(ReplayError::Open(open.len()));
        }
        Ok(Proof { root, steps })
    }

    /// Re-applies every step and checks it against the record.
    pub fn replay(&self, env: &Env) -> Result<(), ReplayError> {
        let mut open = if env.close_trivial(&self.root) { vec![] } else { vec![self.root.clone()] };
        for (i, step) in self.steps.iter().enumerate() {
            let goal = open.pop().ok_or(ReplayError::Extra(i))?;
            if goal != step.goal {
                return Err(ReplayError::WrongGoal { step: i, expected: goal.to_string(), found: step.goal.to_string() });
            }
            let app = env.apply(&goal, &step.tactic).map_err(|source| ReplayError::Tactic {
                step: i,
                tactic: step.tactic.to_string(),
                source,
            })?;
            if app.children != step.children || app.closed != step.closed {
                return Err(ReplayError::ChildrenMismatch { step: i });
            }
            open.extend(app.children.into_iter().rev());
        }
        match open.len() {
            0 => Ok(()),
            n => Err(ReplayError::Open(n)),
        }
    }

    /// Number of tactic applications.
    pub fn size(&self) -> usize {
        self.steps.len()
    }

    /// Longest chain of steps from the root to a leaf step.
    pub fn depth(&self) -> usize {
        fn go(steps: &[ProofStep], i: &mut usize) -> usize {
            let step = &steps[*i];
            *i += 1;
            let mut deepest = 0;
            for _ in &step.children {
                if *i >= steps.len() {
                    break;
                }
                deepest = deepest.max(go(steps, i));
            }
            1 + deepest
        }
        if self.steps.is_empty() {
            return 0;
        }
        go(&self.steps, &mut 0)
    }

    /// Number of distinct goals a tactic is applied to.
    pub fn distinct_goals(&self) -> usize {
        self.steps.iter().map(|s| &s.goal).collect::<HashSet<_>>().len()
    }

    pub fn tactics(&self) -> impl Iterator<Item = &Tactic> {
        self.steps.iter().map(|s| &s.tactic)
    }

    pub fn to_record(&self) -> ProofRecord {
        ProofRecord {
            theorem: self.root.to_string(),
            steps: self
                .steps
                .iter()
                .map(|s| StepRecord {
                    goal: s.goal.to_string(),
                    tactic: s.tactic.to_string(),
                    children: s.children.iter().map(Goal::to_string).collect(),
                    closed: s.closed.iter().map(Goal::to_string).collect(),
                })
                .collect(),
            size: self.size(),
            depth: self.depth(),
            distinct_goals: self.distinct_goals(),
        }
    }
}

/// Text form of a proof: one JSON object per line in dataset and proof files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofRecord {
    pub theorem: String,
    pub steps: Vec<StepRecord>,
    #[serde(default)]
    pub size: usize,
    #[serde(default)]
    pub depth: usize,
    #[serde(default)]
    pub distinct_goals: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub goal: String,
    pub tactic: String,
    pub children: Vec<String>,
    #[serde(default)]
    pub closed: Vec<String>,
}

impl ProofRecord {
    pub fn to_proof(&self) -> Result<Proof, ReplayError> {
        let goal = |s: &str| s.parse::<Goal>().map_err(|e| ReplayError::Malformed(format!("goal `{s}`: {e}")));
        let goals = |v: &[String]| v.iter().map(|s| goal(s)).collect::<Result<Vec<_>, _>>();
        let steps = self
            .steps
            .iter()
            .map(|s| {
                Ok(ProofStep {
                    goal: goal(&s.goal)?,
                    tactic: s
                        .tactic
                        .parse()
                        .map_err(|e| ReplayError::Malformed(format!("tactic `{}`: {e}", s.tactic)))?,
                    children: goals(&s.children)?,
                    closed: goals(&s.closed)?,
                })
            })
            .collect::<Result<Vec<_>, ReplayError>>()?;
        Ok(Proof { root: goal(&self.theorem)?, steps })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("proof records always serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self, ReplayError> {
        serde_json::from_str(line).map_err(|e| ReplayError::Malformed(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{Inventory, RuleGroup};

    fn env() -> Env {
        Env::new(Inventory::load(&[RuleGroup::Basic, RuleGroup::Hyperbolic]).unwrap())
    }

    fn cosh_proof(env: &Env) -> Proof {
        let root: Goal = "= cosh neg x cosh x".parse().unwrap();
        // lhs: cosh(-x) -> (exp(-x) + exp(--x)) / 2 -> ... -> cosh x
        let tactics: Vec<Tactic> =
            ["T cosh_def fwd 1", "T neg_neg fwd 7", "T add_comm fwd 2", "T cosh_def bwd 1"]
                .iter()
                .map(|t| t.parse().unwrap())
                .collect();
        Proof::from_tactics(env, root, &tactics).unwrap()
    }

    #[test]
    fn four_step_hyperbolic_proof_replays() {
        let env = env();
        let p = cosh_proof(&env);
        assert_eq!(p.size(), 4);
        assert_eq!(p.depth(), 4);
        assert_eq!(p.distinct_goals(), 4);
        p.replay(&env).unwrap();
        let back = ProofRecord::from_json_line(&p.to_record().to_json_line()).unwrap().to_proof().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn corrupted_steps_are_located() {
        let env = env();
        let mut p = cosh_proof(&env);
        p.steps[2].tactic = "T add_comm fwd 3".parse().unwrap();
        let err = p.replay(&env).unwrap_err();
        assert_eq!(err.step(), Some(2));

        let mut p = cosh_proof(&env);
        p.steps.pop();
        assert_eq!(p.replay(&env), Err(ReplayError::Open(1)));

        let empty = Proof { root: "= x y".parse().unwrap(), steps: vec![] };
        assert_eq!(empty.replay(&env), Err(ReplayError::Open(1)));
        let trivial = Proof { root: "= x x".parse().unwrap(), steps: vec![] };
        assert_eq!(trivial.replay(&env), Ok(()));
    }

    #[test]
    fn branching_depth() {
        let env = env();
        // x > 0, y > 0 |- x * y > 0 via mul_pos: both children are hypotheses.
        let g: Goal = "> x 0 ; > y 0 |- > * x y 0".parse().unwrap();
        let p = Proof::from_tactics(&env, g, &["A mul_pos".parse().unwrap()]).unwrap();
        assert_eq!((p.size(), p.depth()), (1, 1));
        assert_eq!(p.steps[0].closed.len(), 2);
    }
}
