use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::expr::{ExprParser, ParseError};
use crate::rules::Binding;

/// One rule application.
///
/// Canonical text forms (bindings sorted by variable name):
///
/// ```text
/// T <rule> <fwd|bwd> <pos> [<VAR>: <prefix expr>]...
/// A <rule> [<VAR>: <prefix expr>]...
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tactic {
    Rewrite { rule: Arc<str>, forward: bool, pos: usize, bindings: Binding },
    Assert { rule: Arc<str>, bindings: Binding },
}

impl Tactic {
    pub fn rewrite(rule: &str, forward: bool, pos: usize) -> Self {
        Tactic::Rewrite { rule: Arc::from(rule), forward, pos, bindings: Binding::new() }
    }

    pub fn assert(rule: &str) -> Self {
        Tactic::Assert { rule: Arc::from(rule), bindings: Binding::new() }
    }

    pub fn with_binding(mut self, var: &str, value: crate::expr::Expr) -> Self {
        match &mut self {
            Tactic::Rewrite { bindings, .. } | Tactic::Assert { bindings, .. } => {
                bindings.insert(Arc::from(var), value);
            }
        }
        self
    }

    pub fn rule(&self) -> &str {
        match self {
            Tactic::Rewrite { rule, .. } | Tactic::Assert { rule, .. } => rule,
        }
    }

    pub fn bindings(&self) -> &Binding {
        match self {
            Tactic::Rewrite { bindings, .. } | Tactic::Assert { bindings, .. } => bindings,
        }
    }

    pub fn position(&self) -> Option<usize> {
        match self {
            Tactic::Rewrite { pos, .. } => Some(*pos),
            Tactic::Assert { .. } => None,
        }
    }

    /// The tactic with its position abstracted away.
    pub fn template(&self) -> String {
        match self {
            Tactic::Rewrite { rule, forward, bindings, .. } => {
                format!("T {rule} {} _{}", dir_token(*forward), bindings_suffix(bindings))
            }
            Tactic::Assert { .. } => self.to_string(),
        }
    }
}

fn dir_token(forward: bool) -> &'static str {
    if forward {
        "fwd"
    } else {
        "bwd"
    }
}

fn bindings_suffix(b: &Binding) -> String {
    b.iter().map(|(k, v)| format!(" {k}: {v}")).collect()
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tactic::Rewrite { rule, forward, pos, bindings } => {
                write!(f, "T {rule} {} {pos}{}", dir_token(*forward), bindings_suffix(bindings))
            }
            Tactic::Assert { rule, bindings } => write!(f, "A {rule}{}", bindings_suffix(bindings)),
        }
    }
}

impl FromStr for Tactic {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = ExprParser::new(s);
        let kind = p.next_token()?;
        let rule: Arc<str> = Arc::from(p.next_token()?);
        let mut tactic = match kind {
            "T" => {
                let forward = match p.next_token()? {
                    "fwd" => true,
                    "bwd" => false,
                    _ => return Err(ParseError { position: p.position() - 1, message: "expected fwd or bwd".into() }),
                };
                let at = p.position();
                let pos = p.next_token()?.parse().map_err(|_| ParseError {
                    position: at,
                    message: "expected a position".into(),
                })?;
                Tactic::Rewrite { rule, forward, pos, bindings: Binding::new() }
            }
            "A" => Tactic::Assert { rule, bindings: Binding::new() },
            _ => return Err(ParseError { position: 0, message: "tactic must start with T or A".into() }),
        };
        while !p.is_done() {
            let at = p.position();
            let var = p
                .next_token()?
                .strip_suffix(':')
                .filter(|v| v.len() == 1 && v.starts_with(|c: char| c.is_ascii_uppercase()))
                .ok_or_else(|| ParseError { position: at, message: "expected `<VAR>:`".into() })?;
            let value = p.parse_expr()?;
            let bindings = match &mut tactic {
                Tactic::Rewrite { bindings, .. } | Tactic::Assert { bindings, .. } => bindings,
            };
            if bindings.insert(Arc::from(var), value).is_some() {
                return Err(ParseError { position: at, message: format!("`{var}` bound twice") });
            }
        }
        Ok(tactic)
    }
}
