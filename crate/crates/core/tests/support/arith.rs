//! Exact evaluation against an independent fraction oracle, and the two
//! known false-proof chains that approximate evaluation used to admit.

use htps::env::{Env, Goal, Tactic};
use htps::expr::{eval_rational, parse_statement, Expr, Verdict};
use htps::htps::{search, SearchParams};
use htps::learn::HeuristicOracle;
use htps::rules::{Inventory, RuleGroup};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

// ------------------------------------------------------------------ oracle

/// Reduced fraction with a positive denominator; `None` on overflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Frac(i128, i128);

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Frac {
    fn new(n: i128, d: i128) -> Option<Frac> {
        if d == 0 {
            return None;
        }
        let g = gcd(n, d).max(1);
        let (n, d) = (n / g, d / g);
        Some(if d < 0 { Frac(n.checked_neg()?, d.checked_neg()?) } else { Frac(n, d) })
    }
    fn add(self, o: Frac) -> Option<Frac> {
        Frac::new(self.0.checked_mul(o.1)?.checked_add(o.0.checked_mul(self.1)?)?, self.1.checked_mul(o.1)?)
    }
    fn neg(self) -> Option<Frac> {
        Some(Frac(self.0.checked_neg()?, self.1))
    }
    fn mul(self, o: Frac) -> Option<Frac> {
        Frac::new(self.0.checked_mul(o.0)?, self.1.checked_mul(o.1)?)
    }
    fn recip(self) -> Option<Frac> {
        Frac::new(self.1, self.0)
    }
    fn cmp(self, o: Frac) -> Option<std::cmp::Ordering> {
        Some(self.0.checked_mul(o.1)?.cmp(&o.0.checked_mul(self.1)?))
    }
}

/// Outcome of evaluating a generated term in the oracle.
enum Val {
    Exact(Frac),
    /// Division by zero, a transcendental, or a constant: not decidable.
    Undecidable,
    /// The oracle's fixed-width arithmetic overflowed; sample discarded.
    Overflow,
}

fn lift(f: Option<Frac>) -> Val {
    f.map_or(Val::Overflow, Val::Exact)
}

/// A random variable-free term as prefix text together with its value.
fn term(rng: &mut impl Rng, depth: u32, transcendental: bool) -> (String, Val) {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..10) {
            0 if transcendental => {
                let t = ["pi", "e", "exp 1", "sqrt 4", "cos 0", "ln 1"].choose(rng).unwrap();
                (t.to_string(), Val::Undecidable)
            }
            0..=2 => {
                let (n, d) = (rng.gen_range(-9i128..=9), rng.gen_range(2i128..=9));
                (format!("{n}/{d}"), lift(Frac::new(n, d)))
            }
            _ => {
                let n = rng.gen_range(-12i128..=12);
                (n.to_string(), Val::Exact(Frac(n, 1)))
            }
        };
    }
    let op = rng.gen_range(0..9);
    if op == 8 {
        let (a, va) = term(rng, depth - 1, transcendental);
        return (format!("neg {a}"), if let Val::Exact(x) = va { lift(x.neg()) } else { va });
    }
    if op == 7 {
        let (a, va) = term(rng, depth - 1, transcendental);
        let k: i32 = rng.gen_range(-3..=4);
        let v = match va {
            Val::Exact(x) => {
                if k < 0 && x.0 == 0 {
                    Val::Undecidable
                } else {
                    let mut acc = Some(Frac(1, 1));
                    for _ in 0..k.unsigned_abs() {
                        acc = acc.and_then(|a| a.mul(x));
                    }
                    lift(if k < 0 { acc.and_then(Frac::recip) } else { acc })
                }
            }
            other => other,
        };
        return (format!("^ {a} {k}"), v);
    }
    let (a, va) = term(rng, depth - 1, transcendental);
    let (b, vb) = term(rng, depth - 1, transcendental);
    let (tok, v) = match (va, vb) {
        (Val::Overflow, _) | (_, Val::Overflow) => ("+", Val::Overflow),
        (Val::Exact(x), Val::Exact(y)) => match op {
            0 | 1 => ("+", lift(x.add(y))),
            2 | 3 => ("-", lift(y.neg().and_then(|ny| x.add(ny)))),
            4 | 5 => ("*", lift(x.mul(y))),
            _ if y.0 == 0 => ("/", Val::Undecidable),
            _ => ("/", lift(y.recip().and_then(|r| x.mul(r)))),
        },
        _ => (["+", "-", "*", "/"][(op / 2).min(3) as usize], Val::Undecidable),
    };
    (format!("{tok} {a} {b}"), v)
}

pub fn eval_rational_oracle(target: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cmps = ["=", "!=", "<", "<=", ">", ">="];
    let (mut checked, mut decided, mut equal) = (0, 0, 0);
    while checked < target {
        let transcendental = rng.gen_bool(0.1);
        let depth = rng.gen_range(1..=5);
        let (l, vl) = term(&mut rng, depth, transcendental);
        // Equal sides are rare at random; reuse the left side sometimes.
        let (r, vr) = if rng.gen_bool(0.15) {
            let (r, vr) = term(&mut rng, 0, false);
            match (&vl, vr) {
                (Val::Exact(x), Val::Exact(_)) if rng.gen_bool(0.5) => (format!("+ {l} 0"), Val::Exact(*x)),
                (_, vr) => (r, vr),
            }
        } else {
            term(&mut rng, depth, transcendental)
        };
        let cmp = *cmps.choose(&mut rng).unwrap();
        let expected = match (vl, vr) {
            (Val::Overflow, _) | (_, Val::Overflow) => continue,
            (Val::Exact(x), Val::Exact(y)) => {
                let Some(o) = x.cmp(y) else { continue };
                let holds = match cmp {
                    "=" => o.is_eq(),
                    "!=" => o.is_ne(),
                    "<" => o.is_lt(),
                    "<=" => o.is_le(),
                    ">" => o.is_gt(),
                    _ => o.is_ge(),
                };
                decided += 1;
                equal += o.is_eq() as usize;
                if holds {
                    Verdict::True
                } else {
                    Verdict::False
                }
            }
            _ => Verdict::NotRationallyDecidable,
        };
        let text = format!("{cmp} {l} {r}");
        let s = parse_statement(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(eval_rational(&s), expected, "{text}");
        checked += 1;
    }
    assert!(decided > target / 2 && equal > target / 50, "{decided} decided, {equal} equal");
    format!("{checked} statements ({decided} decidable, {equal} with equal sides), 0 disagreements")
}

pub fn transcendentals_undecided() {
    for s in [
        "= exp neg exp exp 2 exp neg exp exp 3",
        "!= sqrt sqrt sqrt cos / pi 2 0",
        "!= cos / pi 2 0",
        "< exp 1 exp 2",
        "= sqrt 4 2",
        "= - pi pi 0",
    ] {
        assert_eq!(eval_rational(&parse_statement(s).unwrap()), Verdict::NotRationallyDecidable, "{s}");
    }
    assert_eq!(eval_rational(&parse_statement("!= 0 0").unwrap()), Verdict::False);
}

// ---------------------------------------------------------------- exploits

fn env() -> Env {
    Env::new(Inventory::load(&RuleGroup::ALL).unwrap())
}

fn g(s: &str) -> Goal {
    s.parse().unwrap()
}

/// Applies `steps` along the first child; every application must leave
/// its subgoals open, and the final goal must not be closable.
fn chain_stays_open(env: &Env, start: &str, steps: &[Tactic]) -> Goal {
    let mut goal = g(start);
    assert!(!env.close_trivial(&goal));
    for t in steps {
        let app = env.apply(&goal, t).unwrap_or_else(|e| panic!("{t} on {goal}: {e}"));
        assert!(!app.solves(), "{t} closed {goal}");
        assert!(app.closed.is_empty(), "{t} on {goal} discharged {:?}", app.closed);
        goal = app.children[0].clone();
    }
    assert!(!env.close_trivial(&goal), "{goal}");
    goal
}

pub fn exp_chain_stays_open() {
    let env = env();
    let inj = Tactic::assert("exp_inj");
    let last = chain_stays_open(&env, "= 2 3", &[inj.clone(), inj.clone(), Tactic::assert("neg_eq"), inj]);
    assert_eq!(last, g("= exp neg exp exp 2 exp neg exp exp 3"));
}

pub fn sqrt_chain_stays_open() {
    let env = env();
    let cos0 = Tactic::rewrite("cos_half_pi", false, 1);
    let sqrt_ne = Tactic::assert("sqrt_ne");
    let last = chain_stays_open(&env, "!= 0 0", &[cos0, sqrt_ne.clone(), sqrt_ne.clone(), sqrt_ne]);
    assert_eq!(last, g("!= sqrt sqrt sqrt cos / pi 2 0"));
    // With 0 != 0 unavailable, cancelling a zero factor leaves a false subgoal open.
    let cancel = Tactic::assert("mul_cancel").with_binding("C", "0".parse::<Expr>().unwrap());
    let app = env.apply(&g("= x y"), &cancel).unwrap();
    assert!(app.children.contains(&g("!= 0 0")));
}

pub fn search_rejects_false_statements() {
    let env = env();
    let oracle = HeuristicOracle::new(env.clone());
    let params = SearchParams { budget: 300, ..SearchParams::default() };
    for s in ["= 2 3", "!= 0 0", "!= cos / pi 2 0", "= x + x 1"] {
        let r = search(&env, g(s), &oracle, &params);
        assert!(!r.solved(), "{s}");
    }
}
