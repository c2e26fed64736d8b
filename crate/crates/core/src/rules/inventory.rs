use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{ARule, DirRestriction, IntArith, Rule, RuleError, TRule};
use crate::expr::{parse_expr, parse_statement, Statement};

const BASIC: &str = include_str!("../../rules/basic.rules");
const EXPONENTIAL: &str = include_str!("../../rules/exponential.rules");
const TRIGONOMETRY: &str = include_str!("../../rules/trigonometry.rules");
const HYPERBOLIC: &str = include_str!("../../rules/hyperbolic.rules");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleGroup {
    Basic,
    Exponential,
    Trigonometry,
    Hyperbolic,
}

impl RuleGroup {
    pub const ALL: [RuleGroup; 4] =
        [RuleGroup::Basic, RuleGroup::Exponential, RuleGroup::Trigonometry, RuleGroup::Hyperbolic];

    pub fn name(self) -> &'static str {
        match self {
            RuleGroup::Basic => "basic",
            RuleGroup::Exponential => "exponential",
            RuleGroup::Trigonometry => "trigonometry",
            RuleGroup::Hyperbolic => "hyperbolic",
        }
    }

    fn source(self) -> &'static str {
        match self {
            RuleGroup::Basic => BASIC,
            RuleGroup::Exponential => EXPONENTIAL,
            RuleGroup::Trigonometry => TRIGONOMETRY,
            RuleGroup::Hyperbolic => HYPERBOLIC,
        }
    }

    /// Parsed rules of this group, built-ins included.
    pub fn rules(self) -> Vec<Rule> {
        let mut rules = parse_rule_file(self.source()).expect("bundled rule files are well formed");
        if self == RuleGroup::Basic {
            rules.push(Rule::Int(IntArith::Add));
            rules.push(Rule::Int(IntArith::Mul));
        }
        rules
    }
}

impl fmt::Display for RuleGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleGroup {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleGroup::ALL
            .into_iter()
            .find(|g| g.name() == s.trim())
            .ok_or_else(|| RuleError::UnknownGroup(s.trim().to_string()))
    }
}

/// An immutable, id-indexed rule set.
#[derive(Clone, Debug, Default)]
pub struct Inventory {
    rules: Vec<Rule>,
    index: HashMap<Arc<str>, usize>,
}

impl Inventory {
    pub fn load(groups: &[RuleGroup]) -> Result<Self, RuleError> {
        let mut seen = Vec::new();
        let mut rules = Vec::new();
        for g in groups {
            if !seen.contains(g) {
                seen.push(*g);
                rules.extend(g.rules());
            }
        }
        Inventory::from_rules(rules)
    }

    /// Loads groups given by name, e.g. `["basic", "hyperbolic"]`.
    pub fn load_named<S: AsRef<str>>(names: &[S]) -> Result<Self, RuleError> {
        let groups = names.iter().map(|n| n.as_ref().parse()).collect::<Result<Vec<RuleGroup>, _>>()?;
        Inventory::load(&groups)
    }

    /// Parses a comma-separated group list such as `basic,hyperbolic`.
    pub fn load_spec(spec: &str) -> Result<Self, RuleError> {
        let names: Vec<&str> = spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        Inventory::load_named(&names)
    }

    pub fn from_rules(rules: Vec<Rule>) -> Result<Self, RuleError> {
        let mut index = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            if let Rule::Transform(t) = r {
                t.validate()?;
            }
            if index.insert(Arc::from(r.id()), i).is_some() {
                return Err(RuleError::DuplicateId(r.id().to_string()));
            }
        }
        Ok(Inventory { rules, index })
    }

    pub fn get(&self, id: &str) -> Option<&Rule> {
        self.index.get(id).map(|&i| &self.rules[i])
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn transforms(&self) -> impl Iterator<Item = &TRule> {
        self.rules.iter().filter_map(|r| match r {
            Rule::Transform(t) => Some(t),
            _ => None,
        })
    }

    pub fn asserts(&self) -> impl Iterator<Item = &ARule> {
        self.rules.iter().filter_map(|r| match r {
            Rule::Assert(a) => Some(a),
            _ => None,
        })
    }

    pub fn has_int_arith(&self) -> bool {
        self.rules.iter().any(|r| matches!(r, Rule::Int(_)))
    }
}

/// Parses the rule file format.
///
/// One rule per line; `#` starts a comment:
///
/// ```text
/// T add_comm : + A B => + B A
/// T sqrt_sq : sqrt ^ A 2 => A | >= A 0
/// T some_id bwd : ... => ...
/// A le_trans : <= A C | <= A B ; <= B C
/// ```
pub fn parse_rule_file(text: &str) -> Result<Vec<Rule>, RuleError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_rule_line(line).map_err(|message| RuleError::Syntax { line: i + 1, message })?);
    }
    Ok(out)
}

fn parse_rule_line(line: &str) -> Result<Rule, String> {
    let (head, body) = line.split_once(" : ").ok_or("missing ` : ` separator")?;
    let head: Vec<&str> = head.split_whitespace().collect();
    let (body, hyps) = match body.split_once(" | ") {
        Some((b, h)) => (b, h),
        None => (body, ""),
    };
    let hyps = hyps
        .split(';')
        .map(str::trim)
        .filter(|h| !h.is_empty())
        .map(|h| parse_statement(h).map_err(|e| format!("hypothesis `{h}`: {e}")))
        .collect::<Result<Vec<Statement>, String>>()?;
    match head.as_slice() {
        ["T", id, rest @ ..] => {
            let restriction = match rest {
                [] => DirRestriction::Both,
                ["fwd"] => DirRestriction::ForwardOnly,
                ["bwd"] => DirRestriction::BackwardOnly,
                _ => return Err(format!("bad direction restriction {rest:?}")),
            };
            let (l, r) = body.split_once(" => ").ok_or("transformation rule needs ` => `")?;
            let left = parse_expr(l.trim()).map_err(|e| format!("left pattern: {e}"))?;
            let right = parse_expr(r.trim()).map_err(|e| format!("right pattern: {e}"))?;
            let rule = TRule { id: Arc::from(*id), left, right, hyps, restriction };
            rule.validate().map_err(|e| e.to_string())?;
            Ok(Rule::Transform(rule))
        }
        ["A", id] => {
            let conclusion = parse_statement(body.trim()).map_err(|e| format!("conclusion: {e}"))?;
            Ok(Rule::Assert(ARule::new(id, conclusion, hyps)))
        }
        _ => Err("expected `T <id> [fwd|bwd]` or `A <id>`".into()),
    }
}
