mod support;

use support::arith;

#[test]
fn eval_rational_agrees_with_fraction_oracle() {
    arith::eval_rational_oracle(10_000);
}

#[test]
fn transcendental_values_are_never_approximated() {
    arith::transcendentals_undecided();
}

#[test]
fn two_equals_three_by_exponentials_stays_open() {
    arith::exp_chain_stays_open();
}

#[test]
fn zero_ne_zero_by_square_roots_stays_open() {
    arith::sqrt_chain_stays_open();
}

#[test]
fn search_cannot_prove_the_false_statements() {
    arith::search_rejects_false_statements();
}
