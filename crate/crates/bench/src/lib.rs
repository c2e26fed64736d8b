//! Shared fixtures for the criterion benches.

use htps::env::{Env, Goal};
use htps::rules::{Inventory, RuleGroup};

pub fn basic_env() -> Env {
    Env::new(Inventory::load(&[RuleGroup::Basic]).unwrap())
}

/// Small identities of increasing difficulty.
pub const IDENTITIES: &[&str] = &["= + x y + y x", "= * x 1 x", "= - + x y y x", "= * + x 1 2 + * 2 x 2"];

pub fn goals() -> Vec<Goal> {
    IDENTITIES.iter().map(|s| s.parse().unwrap()).collect()
}
