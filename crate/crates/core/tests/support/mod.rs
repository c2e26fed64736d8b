//! Reference checks shared by the integration tests and the acceptance
//! report. Each panics on the first discrepancy and otherwise returns a
//! one-line summary.
#![allow(dead_code)]

pub mod arith;
pub mod gen;
pub mod graphs;
