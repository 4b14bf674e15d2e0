//! Closed-form bounds and the Bernstein-condition certificate.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::problem::{optimal_risk, LearningProblem};
use crate::rademacher::log_confidence_term;

/// Excess-risk slack `12 R̄_n + 3 sqrt(2 ln(2n)/n) + 2/n` of the
/// uniform-convergence variant (holds with probability `1 - 2/n`).
pub fn thm2_excess_bound(n: usize, rbar_n: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("excess bound needs n >= 1"));
    }
    if !(rbar_n >= 0.0) {
        return Err(invalid(format!("R̄_n = {rbar_n} must be nonnegative")));
    }
    Ok(12.0 * rbar_n + 3.0 * log_confidence_term(n) + 2.0 / n as f64)
}

/// Smallest `B` for which the problem satisfies the `(β, B)`-Bernstein condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernsteinCertificate {
    pub beta: f64,
    /// `+∞` when no finite `B` works.
    #[serde(with = "crate::float_repr")]
    pub minimal_b: f64,
    pub hstar_index: usize,
}

/// Excess losses closer to zero than this are treated as exact ties with `h⋆`.
const EXCESS_ZERO_TOL: f64 = 1e-15;

/// Moments `(E[X_h], E[X_h²])` of the excess loss `X_h = ℓ(h,Z) - ℓ(h⋆,Z)`.
pub fn excess_moments(problem: &LearningProblem, h: usize, hstar: usize) -> (f64, f64) {
    let loss = problem.loss();
    problem
        .probs()
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(m1, m2), (z, &p)| {
            let x = loss.get(h, z) - loss.get(hstar, z);
            (m1 + p * x, m2 + p * x * x)
        })
}

pub fn bernstein_min_b(problem: &LearningProblem, beta: f64) -> Result<BernsteinCertificate> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(invalid(format!("beta = {beta} is outside [0, 1]")));
    }
    let (_, hstar) = optimal_risk(problem);
    let mut minimal_b: f64 = 0.0;
    for h in (0..problem.class_size()).filter(|&h| h != hstar) {
        let (mean, second) = excess_moments(problem, h, hstar);
        if second == 0.0 {
            continue;
        }
        let required = if beta == 0.0 {
            second
        } else if mean <= EXCESS_ZERO_TOL {
            f64::INFINITY
        } else {
            second / mean.powf(beta)
        };
        minimal_b = minimal_b.max(required);
    }
    Ok(BernsteinCertificate { beta, minimal_b, hstar_index: hstar })
}

impl BernsteinCertificate {
    /// Re-checks `B · E[X_h]^β >= E[X_h²]` for every hypothesis.
    pub fn holds_for(&self, problem: &LearningProblem, tol: f64) -> bool {
        (0..problem.class_size()).all(|h| {
            let (mean, second) = excess_moments(problem, h, self.hstar_index);
            let rhs = if self.beta == 0.0 {
                self.minimal_b
            } else {
                self.minimal_b * mean.max(0.0).powf(self.beta)
            };
            second == 0.0 || rhs.is_infinite() || rhs + tol >= second
        })
    }
}

/// Slack of the pairwise empirical Bernstein inequality for a finite class:
/// `sqrt(2 Σ(h_i - h'_i)² ln(2|H|²/δ) / (n-1)²) + 5 ln(2|H|²/δ)/(n-1)`.
pub fn empirical_bernstein_rhs(h_losses: &[f64], hprime_losses: &[f64], class_size: usize, delta: f64) -> Result<f64> {
    if h_losses.len() != hprime_losses.len() {
        return Err(invalid("loss sequences differ in length"));
    }
    if class_size == 0 {
        return Err(invalid("class_size must be >= 1"));
    }
    let sq: f64 = h_losses
        .iter()
        .zip(hprime_losses)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    empirical_bernstein_rhs_from_squares(h_losses.len(), sq, class_size, delta)
}

pub(crate) fn empirical_bernstein_rhs_from_squares(n: usize, sum_sq: f64, class_size: usize, delta: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("empirical Bernstein slack needs n >= 2"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta = {delta} is outside (0, 1]")));
    }
    let h = class_size as f64;
    let log_term = (2.0 * h * h / delta).ln();
    let denom = n as f64 - 1.0;
    Ok((2.0 * sum_sq * log_term / (denom * denom)).sqrt() + 5.0 * log_term / denom)
}

/// Upper bound on `inf_{η ∈ (0, 1/2)} A η^{1/(1-β)} + B/η`:
/// `A (3 - 2β)/(1 - β) · ((1 - β) B / A)^{1/(2-β)} + 2B`.
pub fn minimizer_bound(a: f64, b: f64, beta: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(invalid("A and B must be positive and finite"));
    }
    if !(0.0..1.0).contains(&beta) {
        return Err(invalid(format!("beta = {beta} must lie in [0, 1)")));
    }
    let ratio = (1.0 - beta) * b / a;
    Ok(a * (3.0 - 2.0 * beta) / (1.0 - beta) * ratio.powf(1.0 / (2.0 - beta)) + 2.0 * b)
}
