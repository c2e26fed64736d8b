//! Tactic selection: value estimates with first play urgency, PUCT and the
//! prior-regularized greedy policy.

use serde::{Deserialize, Serialize};

/// Visit statistics of one candidate tactic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeStats {
    pub n: u64,
    pub w: f64,
    pub vc: u64,
    pub prior: f64,
    /// All children are already solved.
    pub solving: bool,
}

impl EdgeStats {
    pub fn total(&self) -> u64 {
        self.n + self.vc
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    #[default]
    Puct,
    Rp,
}

impl std::str::FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "puct" => Ok(Policy::Puct),
            "rp" => Ok(Policy::Rp),
            other => Err(format!("unknown policy `{other}` (expected puct or rp)")),
        }
    }
}

/// Value estimate with a constant first play urgency of 0.5.
pub fn q_value(s: &EdgeStats) -> f64 {
    let c = s.total().max(1) as f64;
    if s.solving {
        s.n.max(1) as f64 / c
    } else if s.n == 0 {
        0.5 / c
    } else {
        s.w / s.total() as f64
    }
}

/// Index of the best allowed candidate; ties go to the higher prior, then the lower index.
pub fn argmax_restricted(scores: &[f64], edges: &[EdgeStats], allowed: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for &i in allowed {
        let better = match best {
            None => true,
            Some(b) => scores[i] > scores[b] || (scores[i] == scores[b] && edges[i].prior > edges[b].prior),
        };
        if better {
            best = Some(i);
        }
    }
    best
}

pub fn puct_scores(edges: &[EdgeStats], c: f64) -> Vec<f64> {
    let sum_n: u64 = edges.iter().map(|e| e.n).sum();
    let sqrt_n = (sum_n as f64).sqrt();
    edges.iter().map(|e| q_value(e) + c * e.prior * sqrt_n / (1.0 + e.total() as f64)).collect()
}

pub fn select_puct(edges: &[EdgeStats], c: f64) -> Option<usize> {
    let all: Vec<usize> = (0..edges.len()).collect();
    argmax_restricted(&puct_scores(edges, c), edges, &all)
}

/// Outcome of the regularized-policy selection.
#[derive(Clone, Debug, PartialEq)]
pub enum RpChoice {
    Chosen(usize),
    /// The normalization root could not be bracketed or did not converge.
    NoConvergence,
    Empty,
}

pub const RP_TOLERANCE: f64 = 1e-9;
pub const RP_MAX_STEPS: usize = 200;

/// Regularization weight `c * sqrt(sum C) / sum (C + 1)`.
pub fn rp_lambda(edges: &[EdgeStats], c: f64) -> f64 {
    let sum_c: u64 = edges.iter().map(EdgeStats::total).sum();
    c * (sum_c as f64).sqrt() / (sum_c as f64 + edges.len() as f64)
}

/// Solves `max_y Q.y - lambda * KL(prior, y)` over the simplex.
///
/// The maximizer is `y(t) = lambda * P(t) / (alpha - Q(t))` where `alpha`
/// normalizes `y`; `alpha` is found by bisection. Priors are normalized first.
pub fn rp_distribution(q: &[f64], prior: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let total: f64 = prior.iter().sum();
    if q.is_empty() || total <= 0.0 || lambda <= 0.0 {
        return None;
    }
    let p: Vec<f64> = prior.iter().map(|x| x / total).collect();
    let y = |alpha: f64| -> f64 { q.iter().zip(&p).map(|(qi, pi)| lambda * pi / (alpha - qi)).sum() };
    // sum y(alpha) decreases in alpha; at lo it is >= 1, at hi it is <= 1.
    let lo_start = q.iter().zip(&p).map(|(qi, pi)| qi + lambda * pi).fold(f64::NEG_INFINITY, f64::max);
    let hi_start = q.iter().copied().fold(f64::NEG_INFINITY, f64::max) + lambda;
    let (mut lo, mut hi) = (lo_start, hi_start);
    if !(y(lo) >= 1.0 - RP_TOLERANCE && y(hi) <= 1.0 + RP_TOLERANCE) {
        return None;
    }
    let mut converged = false;
    for _ in 0..RP_MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        let s = y(mid);
        if (s - 1.0).abs() < RP_TOLERANCE || hi - lo < RP_TOLERANCE * 1e-3 {
            lo = mid;
            hi = mid;
            converged = true;
            break;
        }
        if s > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !converged {
        return None;
    }
    let alpha = 0.5 * (lo + hi);
    Some(q.iter().zip(&p).map(|(qi, pi)| lambda * pi / (alpha - qi)).collect())
}

/// Scores under the regularized policy: the optimal distribution `y`, or
/// plain `Q` when the regularization weight vanishes. `None` when the
/// normalization does not converge.
pub fn rp_scores(edges: &[EdgeStats], c: f64) -> Option<Vec<f64>> {
    let q: Vec<f64> = edges.iter().map(q_value).collect();
    let lambda = rp_lambda(edges, c);
    if lambda <= 1e-12 {
        return Some(q);
    }
    let prior: Vec<f64> = edges.iter().map(|e| e.prior).collect();
    rp_distribution(&q, &prior, lambda)
}

pub fn select_rp(edges: &[EdgeStats], c: f64) -> RpChoice {
    if edges.is_empty() {
        return RpChoice::Empty;
    }
    let all: Vec<usize> = (0..edges.len()).collect();
    match rp_scores(edges, c) {
        Some(y) => RpChoice::Chosen(argmax_restricted(&y, edges, &all).unwrap_or(0)),
        None => RpChoice::NoConvergence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(n: u64, w: f64, vc: u64, prior: f64) -> EdgeStats {
        EdgeStats { n, w, vc, prior, solving: false }
    }

    #[test]
    fn first_play_urgency() {
        assert_eq!(q_value(&stats(0, 0.0, 0, 1.0)), 0.5);
        assert_eq!(q_value(&stats(0, 0.0, 3, 1.0)), 0.5 / 3.0);
        assert_eq!(q_value(&stats(3, 1.5, 1, 1.0)), 0.375);
        let solving = EdgeStats { solving: true, ..stats(2, 0.0, 2, 1.0) };
        assert_eq!(q_value(&solving), 0.5);
        let fresh_solving = EdgeStats { solving: true, ..stats(0, 0.0, 0, 1.0) };
        assert_eq!(q_value(&fresh_solving), 1.0);
    }

    #[test]
    fn puct_cases() {
        let e = [stats(0, 0.0, 0, 0.3), stats(0, 0.0, 0, 0.7)];
        assert_eq!(select_puct(&e, 1.0), Some(1));
        let e = [stats(2, 0.2, 0, 0.9), stats(2, 1.8, 0, 0.1)];
        assert_eq!(select_puct(&e, 1e-9), Some(1));
        assert_eq!(select_puct(&[], 1.0), None);
    }

    #[test]
    fn rp_cases() {
        // Two tactics, uniform prior, lambda = 1 with Q = (0.8, 0.2): tactic 0.
        let y = rp_distribution(&[0.8, 0.2], &[0.5, 0.5], 1.0).unwrap();
        assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        assert!(y[0] > y[1]);
        // Huge exploration constant: the prior dominates.
        let e = [stats(5, 4.5, 0, 0.2), stats(5, 0.5, 0, 0.8)];
        assert_eq!(select_rp(&e, 1e9), RpChoice::Chosen(1));
        // Uniform prior, distinct Q: greedy.
        let e = [stats(5, 0.5, 0, 0.5), stats(5, 4.5, 0, 0.5)];
        assert_eq!(select_rp(&e, 1.0), RpChoice::Chosen(1));
        // No visits yet: lambda = 0, Q ties at 0.5, the prior breaks the tie.
        let e = [stats(0, 0.0, 0, 0.4), stats(0, 0.0, 0, 0.6)];
        assert_eq!(select_rp(&e, 1.0), RpChoice::Chosen(1));
    }
}
