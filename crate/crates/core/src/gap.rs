//! Gap sequences `δ_k` for the gated update.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rademacher::{log_confidence_term, RademacherBoundMode};

/// Which rule produces `δ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapVariant {
    /// `4 R̄_k + sqrt(2 ln(2k)/k) + 2/k` with `R̄_k` from the given mode.
    UniformConvergence(RademacherBoundMode),
    /// Pairwise empirical-Bernstein gap; `δ_1 = +∞`.
    EmpiricalBernstein,
    /// A constant gap. Not a risk-monotone choice in general; used for
    /// sanity checks against plain ERM.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSpec {
    pub variant: GapVariant,
    pub class_size: usize,
}

impl GapSpec {
    pub fn new(variant: GapVariant, class_size: usize) -> Result<Self> {
        if class_size == 0 {
            return Err(invalid("gap spec needs class_size >= 1"));
        }
        match &variant {
            GapVariant::UniformConvergence(mode) => mode.validate()?,
            GapVariant::Fixed(d) if d.is_nan() => return Err(invalid("fixed gap is NaN")),
            _ => {}
        }
        Ok(Self { variant, class_size })
    }

    pub fn uniform(mode: RademacherBoundMode, class_size: usize) -> Result<Self> {
        Self::new(GapVariant::UniformConvergence(mode), class_size)
    }

    pub fn bernstein(class_size: usize) -> Result<Self> {
        Self::new(GapVariant::EmpiricalBernstein, class_size)
    }

    /// True when `δ_k` never consumes randomness.
    pub fn is_deterministic(&self) -> bool {
        match &self.variant {
            GapVariant::UniformConvergence(mode) => mode.is_deterministic(),
            _ => true,
        }
    }

    pub fn label(&self) -> String {
        match &self.variant {
            GapVariant::UniformConvergence(mode) => format!("uniform-{}", mode.label()),
            GapVariant::EmpiricalBernstein => "bernstein".to_string(),
            GapVariant::Fixed(d) => format!("fixed-{d}"),
        }
    }
}

/// Uniform-convergence gap `4 R̄_k + sqrt(2 ln(2k)/k) + 2/k`.
pub fn delta_uniform(k: usize, rbar_k: f64) -> Result<f64> {
    if k == 0 {
        return Err(invalid("gap index k must be >= 1"));
    }
    if !(rbar_k >= 0.0) {
        return Err(invalid(format!("R̄_k = {rbar_k} must be nonnegative")));
    }
    Ok(4.0 * rbar_k + log_confidence_term(k) + 2.0 / k as f64)
}

/// Empirical-Bernstein gap from the ERM and incumbent loss sequences on `z_{1:k}`.
pub fn delta_bernstein(tilde_losses: &[f64], hat_losses: &[f64], class_size: usize) -> Result<f64> {
    if tilde_losses.len() != hat_losses.len() {
        return Err(invalid(format!(
            "loss sequences differ in length ({} vs {})",
            tilde_losses.len(),
            hat_losses.len()
        )));
    }
    if tilde_losses.is_empty() {
        return Err(invalid("gap index k must be >= 1"));
    }
    if class_size == 0 {
        return Err(invalid("class_size must be >= 1"));
    }
    let sq: f64 = tilde_losses
        .iter()
        .zip(hat_losses)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(delta_bernstein_from_squares(tilde_losses.len(), sq, class_size))
}

/// Same gap from the precomputed `Σ_i (ℓ(h̃_k, z_i) - ℓ(ĥ_{k-1}, z_i))²`.
pub(crate) fn delta_bernstein_from_squares(k: usize, sum_sq: f64, class_size: usize) -> f64 {
    if k <= 1 {
        return f64::INFINITY;
    }
    let kf = k as f64;
    let h = class_size as f64;
    let log_term = (2.0 * kf * h * h).ln();
    let denom = kf - 1.0;
    (2.0 * sum_sq * log_term / (denom * denom)).sqrt() + 5.0 * log_term / denom + 2.0 / kf
}
