//! Rules, first-order pattern matching and the bundled rule inventory.

mod inventory;
mod pattern;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::expr::{Expr, Statement};

pub use inventory::{parse_rule_file, Inventory, RuleGroup};
pub use pattern::{match_into, match_pattern, match_statement, substitute, substitute_statement};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("capture variable {0} is unbound")]
    Unbound(String),
    #[error("unknown rule group `{0}`")]
    UnknownGroup(String),
    #[error("duplicate rule id `{0}`")]
    DuplicateId(String),
    #[error("rule file line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule `{id}` is malformed: {message}")]
    Invalid { id: String, message: String },
}

/// Assignment of capture variables to expressions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binding(BTreeMap<Arc<str>, Expr>);

impl Binding {
    pub fn new() -> Self {
        Binding(BTreeMap::new())
    }

    pub fn get(&self, var: &str) -> Option<&Expr> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: Arc<str>, value: Expr) -> Option<Expr> {
        self.0.insert(var, value)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries sorted by variable name.
    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, &Expr)> {
        self.0.iter()
    }
}

impl FromIterator<(Arc<str>, Expr)> for Binding {
    fn from_iter<I: IntoIterator<Item = (Arc<str>, Expr)>>(iter: I) -> Self {
        Binding(iter.into_iter().collect())
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}: {v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Which directions a transformation rule may be applied in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DirRestriction {
    Both,
    ForwardOnly,
    BackwardOnly,
}

/// `left` may be rewritten to `right` (and back) provided `hyps` hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TRule {
    pub id: Arc<str>,
    pub left: Expr,
    pub right: Expr,
    pub hyps: Vec<Statement>,
    pub restriction: DirRestriction,
}

/// `conclusion` holds provided `hyps` hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ARule {
    pub id: Arc<str>,
    pub conclusion: Statement,
    pub hyps: Vec<Statement>,
}

/// Built-in integer literal arithmetic, one rule per operator.
///
/// The forward direction splits a literal `n` into `a + (n - a)` (or
/// `a * (n / a)`), with `a` supplied as the binding for `A`; the backward
/// direction folds two literals into one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntArith {
    Add,
    Mul,
}

impl IntArith {
    pub fn id(self) -> &'static str {
        match self {
            IntArith::Add => "int_add",
            IntArith::Mul => "int_mul",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    Transform(TRule),
    Assert(ARule),
    Int(IntArith),
}

impl Rule {
    pub fn id(&self) -> &str {
        match self {
            Rule::Transform(r) => &r.id,
            Rule::Assert(r) => &r.id,
            Rule::Int(r) => r.id(),
        }
    }

    pub fn is_transform(&self) -> bool {
        !matches!(self, Rule::Assert(_))
    }
}

impl TRule {
    pub fn new(id: &str, left: Expr, right: Expr, hyps: Vec<Statement>) -> Result<Self, RuleError> {
        let rule = TRule { id: Arc::from(id), left, right, hyps, restriction: DirRestriction::Both };
        rule.validate()?;
        Ok(rule)
    }

    pub(crate) fn validate(&self) -> Result<(), RuleError> {
        let invalid = |message: &str| RuleError::Invalid { id: self.id.to_string(), message: message.into() };
        if self.left == self.right {
            return Err(invalid("left and right patterns are identical"));
        }
        let mut sides = Vec::new();
        self.left.metas(&mut sides);
        self.right.metas(&mut sides);
        let mut in_hyps = Vec::new();
        for h in &self.hyps {
            h.metas(&mut in_hyps);
        }
        if in_hyps.iter().any(|m| !sides.contains(m)) {
            return Err(invalid("hypothesis uses a capture variable absent from both patterns"));
        }
        Ok(())
    }

    /// Source and target patterns for a direction (`true` = forward).
    pub fn oriented(&self, forward: bool) -> (&Expr, &Expr) {
        if forward {
            (&self.left, &self.right)
        } else {
            (&self.right, &self.left)
        }
    }

    pub fn allows(&self, forward: bool) -> bool {
        match self.restriction {
            DirRestriction::Both => true,
            DirRestriction::ForwardOnly => forward,
            DirRestriction::BackwardOnly => !forward,
        }
    }

    /// Both directions rewrite identically up to renaming (e.g. commutativity).
    pub fn is_symmetric(&self) -> bool {
        self.hyps.is_empty()
            && pattern::match_pattern(&self.left, &self.right).is_some()
            && pattern::match_pattern(&self.right, &self.left).is_some()
    }

    /// Capture variables that matching the source pattern does not bind.
    pub fn free_vars(&self, forward: bool) -> Vec<Arc<str>> {
        let (src, dst) = self.oriented(forward);
        let mut bound = Vec::new();
        src.metas(&mut bound);
        let mut all = Vec::new();
        dst.metas(&mut all);
        for h in &self.hyps {
            h.metas(&mut all);
        }
        all.retain(|m| !bound.contains(m));
        all
    }
}

impl ARule {
    pub fn new(id: &str, conclusion: Statement, hyps: Vec<Statement>) -> Self {
        ARule { id: Arc::from(id), conclusion, hyps }
    }

    pub fn free_vars(&self) -> Vec<Arc<str>> {
        let mut bound = Vec::new();
        self.conclusion.metas(&mut bound);
        let mut all = Vec::new();
        for h in &self.hyps {
            h.metas(&mut all);
        }
        all.retain(|m| !bound.contains(m));
        all
    }
}
