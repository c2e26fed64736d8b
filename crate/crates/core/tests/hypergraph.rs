mod support;

use support::graphs;

#[test]
fn incremental_statuses_match_fixed_point() {
    graphs::status_oracle(1000);
}

#[test]
fn backup_matches_reference() {
    graphs::backup_reference(300);
}

#[test]
fn min_proof_matches_exhaustive_enumeration() {
    graphs::min_proof_oracle(500);
}
