pub mod env;
pub mod expr;
pub mod gen;
pub mod htps;
pub mod learn;
pub mod orchestrator;
pub mod rules;
