//! Rademacher complexity of the loss class: the sign-weighted supremum,
//! the empirical high-probability bound, the finite-class deterministic
//! bound, and exact expectations for discrete problems.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GermError, Result};
use crate::problem::{LearningProblem, LossTable, Sample};

/// Maximum number of terms any exact enumeration may visit.
pub const ENUMERATION_BUDGET: u64 = 10_000_000;

/// How `R̄_k` is produced at step `k` of a uniform-convergence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RademacherBoundMode {
    /// Sup of a fresh Rademacher average plus `sqrt(2 ln(2k) / k)`, clamped at 0.
    EmpiricalMcDiarmid,
    /// `sqrt(2 ln|H| / k)`.
    MassartDeterministic,
    /// Caller-supplied `R̄_1, R̄_2, ...`; steps past the end reuse the last entry.
    UserConstant(Vec<f64>),
}

impl RademacherBoundMode {
    pub fn validate(&self) -> Result<()> {
        if let RademacherBoundMode::UserConstant(seq) = self {
            if seq.is_empty() {
                return Err(invalid("user constant R̄ sequence is empty"));
            }
            if let Some(v) = seq.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(invalid(format!("user constant R̄ entry {v} is not a finite nonnegative number")));
            }
        }
        Ok(())
    }

    /// True when the mode consumes no randomness.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, RademacherBoundMode::EmpiricalMcDiarmid)
    }

    pub fn label(&self) -> &'static str {
        match self {
            RademacherBoundMode::EmpiricalMcDiarmid => "empirical",
            RademacherBoundMode::MassartDeterministic => "massart",
            RademacherBoundMode::UserConstant(_) => "user",
        }
    }
}

/// `sup_h (1/k) Σ_i σ_i ℓ(h, z_i)` over the finite class.
pub fn rademacher_sup(loss: &LossTable, sample: &Sample, signs: &[i8]) -> Result<f64> {
    let k = sample.len();
    if k == 0 {
        return Err(invalid("Rademacher average of an empty sample"));
    }
    if signs.len() != k {
        return Err(invalid(format!("{} signs for a sample of length {k}", signs.len())));
    }
    if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
        return Err(invalid(format!("sign {s} is not ±1")));
    }
    if let Some(&z) = sample.outcomes().iter().find(|&&z| z >= loss.num_outcomes()) {
        return Err(invalid(format!("outcome index {z} out of range")));
    }
    let sup = (0..loss.num_hypotheses())
        .map(|h| {
            sample
                .outcomes()
                .iter()
                .zip(signs)
                .map(|(&z, &s)| f64::from(s) * loss.get(h, z))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(sup / k as f64)
}

/// `sqrt(2 ln(2k) / k)`, the confidence term shared by several bounds.
pub fn log_confidence_term(k: usize) -> f64 {
    let k = k as f64;
    (2.0 * (2.0 * k).ln() / k).sqrt()
}

/// Empirical bound: fresh i.i.d. signs drawn from `rng`, one per sample point.
pub fn rbar_empirical<R: Rng + ?Sized>(loss: &LossTable, sample: &Sample, rng: &mut R) -> Result<f64> {
    let signs = draw_signs(sample.len(), rng);
    rbar_empirical_with_signs(loss, sample, &signs)
}

/// Same as [`rbar_empirical`] with the sign vector injected.
pub fn rbar_empirical_with_signs(loss: &LossTable, sample: &Sample, signs: &[i8]) -> Result<f64> {
    let sup = rademacher_sup(loss, sample, signs)?;
    Ok((sup + log_confidence_term(sample.len())).max(0.0))
}

pub fn draw_signs<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<i8> {
    (0..k).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// Massart's finite-class bound `sqrt(2 ln|H| / k)`.
pub fn rbar_massart(class_size: usize, k: usize) -> Result<f64> {
    if class_size == 0 || k == 0 {
        return Err(invalid("Massart bound needs |H| >= 1 and k >= 1"));
    }
    Ok((2.0 * (class_size as f64).ln() / k as f64).sqrt())
}

/// Deviation radius `sqrt(2 ln(2/δ) / n)` of the empirical Rademacher average.
pub fn prop1_radius(n: usize, delta: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("radius needs n >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta = {delta} is outside (0, 1)")));
    }
    Ok((2.0 * (2.0 / delta).ln() / n as f64).sqrt())
}

fn checked_power(base: u64, exp: usize) -> Option<u64> {
    let exp = u32::try_from(exp).ok()?;
    base.checked_pow(exp)
}

/// Exact `R_k(ℓ∘H)` by enumerating every (sample, sign) pair in `(Z × {±1})^k`.
///
/// Guarded by `(2m)^k <= ENUMERATION_BUDGET`.
pub fn exact_rademacher(problem: &LearningProblem, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("Rademacher complexity needs k >= 1"));
    }
    let m = problem.num_outcomes();
    let cells = 2 * m as u64;
    match checked_power(cells, k) {
        Some(total) if total <= ENUMERATION_BUDGET => {}
        _ => {
            return Err(GermError::ResourceExceeded(format!(
                "(2m)^k = {cells}^{k} exceeds the enumeration budget {ENUMERATION_BUDGET}"
            )))
        }
    }
    let loss = problem.loss();
    let probs = problem.probs();
    let nh = loss.num_hypotheses();
    let mut total = 0.0;
    let mut partial = vec![0.0; nh];
    brute_force(loss, probs, k, 0, 1.0, &mut partial, &mut total);
    Ok(total / k as f64)
}

fn brute_force(
    loss: &LossTable,
    probs: &[f64],
    k: usize,
    depth: usize,
    weight: f64,
    partial: &mut Vec<f64>,
    total: &mut f64,
) {
    if depth == k {
        let sup = partial.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        *total += weight * sup;
        return;
    }
    for (z, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for sign in [1.0, -1.0] {
            let mut next = partial.clone();
            for (h, v) in next.iter_mut().enumerate() {
                *v += sign * loss.get(h, z);
            }
            brute_force(loss, probs, k, depth + 1, weight * p * 0.5, &mut next, total);
        }
    }
}

/// Visits every multiset of `k` signed outcomes with its multinomial
/// probability and the corresponding `sup_h (1/k) Σ σ_i ℓ(h, z_i)`.
///
/// The supremum depends on the sample only through the signed outcome
/// counts, so this covers the same expectation as the brute-force
/// enumeration with `C(k + 2m - 1, 2m - 1)` terms instead of `(2m)^k`.
pub fn for_each_signed_composition<F>(problem: &LearningProblem, k: usize, mut visit: F) -> Result<()>
where
    F: FnMut(f64, f64),
{
    if k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    let m = problem.num_outcomes();
    let cells = 2 * m;
    let count = binomial(k + cells - 1, cells - 1);
    if count > ENUMERATION_BUDGET as f64 {
        return Err(GermError::ResourceExceeded(format!(
            "{count} signed compositions exceed the enumeration budget {ENUMERATION_BUDGET}"
        )));
    }
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=k).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    // cell 2z is (z, +1), cell 2z+1 is (z, -1)
    let ln_cell_prob: Vec<f64> = problem
        .probs()
        .iter()
        .flat_map(|&p| {
            let lp = if p > 0.0 { (0.5 * p).ln() } else { f64::NEG_INFINITY };
            [lp, lp]
        })
        .collect();
    let loss = problem.loss();
    let mut counts = vec![0usize; cells];
    let mut walk = CompositionWalk {
        loss,
        k,
        ln_fact: &ln_fact,
        ln_cell_prob: &ln_cell_prob,
        visit: &mut visit,
    };
    walk.recurse(0, k, ln_fact[k], &mut counts);
    Ok(())
}

struct CompositionWalk<'a, F> {
    loss: &'a LossTable,
    k: usize,
    ln_fact: &'a [f64],
    ln_cell_prob: &'a [f64],
    visit: &'a mut F,
}

impl<F: FnMut(f64, f64)> CompositionWalk<'_, F> {
    fn recurse(&mut self, cell: usize, remaining: usize, ln_weight: f64, counts: &mut [usize]) {
        let last = counts.len() - 1;
        if cell == last {
            counts[cell] = remaining;
            let lw = ln_weight - self.ln_fact[remaining] + term(remaining, self.ln_cell_prob[cell]);
            if lw > f64::NEG_INFINITY {
                let sup = self.signed_sup(counts);
                (self.visit)(lw.exp(), sup);
            }
            counts[cell] = 0;
            return;
        }
        for c in 0..=remaining {
            let lw = ln_weight - self.ln_fact[c] + term(c, self.ln_cell_prob[cell]);
            if lw == f64::NEG_INFINITY {
                continue;
            }
            counts[cell] = c;
            self.recurse(cell + 1, remaining - c, lw, counts);
        }
        counts[cell] = 0;
    }

    fn signed_sup(&self, counts: &[usize]) -> f64 {
        let m = self.loss.num_outcomes();
        let sup = (0..self.loss.num_hypotheses())
            .map(|h| {
                (0..m)
                    .map(|z| (counts[2 * z] as f64 - counts[2 * z + 1] as f64) * self.loss.get(h, z))
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        sup / self.k as f64
    }
}

fn term(count: usize, ln_p: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * ln_p
    }
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact `R_k(ℓ∘H)` through the signed-composition enumeration.
pub fn exact_rademacher_multinomial(problem: &LearningProblem, k: usize) -> Result<f64> {
    let mut total = 0.0;
    for_each_signed_composition(problem, k, |w, sup| total += w * sup)?;
    Ok(total)
}

/// Probability, over samples and signs, that the empirical Rademacher
/// average deviates from `R_k` by more than `prop1_radius(k, delta)`.
pub fn prop1_exceedance(problem: &LearningProblem, k: usize, delta: f64) -> Result<f64> {
    let radius = prop1_radius(k, delta)?;
    let exact = exact_rademacher_multinomial(problem, k)?;
    let mut mass = 0.0;
    for_each_signed_composition(problem, k, |w, sup| {
        if (exact - sup).abs() > radius {
            mass += w;
        }
    })?;
    Ok(mass)
}

/// Probability that the empirical bound `R̄_k` is at least `R_k`.
pub fn rbar_empirical_coverage(problem: &LearningProblem, k: usize) -> Result<f64> {
    let exact = exact_rademacher_multinomial(problem, k)?;
    let slack = log_confidence_term(k);
    let mut mass = 0.0;
    for_each_signed_composition(problem, k, |w, sup| {
        if (sup + slack).max(0.0) >= exact {
            mass += w;
        }
    })?;
    Ok(mass)
}
