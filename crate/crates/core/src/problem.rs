//! Discrete learning problems.
//!
//! A problem is a triple of a finite outcome distribution, a bounded loss
//! table over a finite hypothesis class, and a label. Outcomes and
//! hypotheses are both addressed by index.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Absolute tolerance on the total mass of a distribution.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Probability mass function over outcomes `0..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validates and, when the total is within [`PROB_SUM_TOL`] of one,
    /// renormalizes the given masses.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("distribution needs at least one outcome"));
        }
        for (z, &p) in probs.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("probability of outcome {z} is {p}, outside [0, 1]")));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        let probs: Vec<f64> = if total == 1.0 {
            probs
        } else {
            probs.iter().map(|p| p / total).collect()
        };
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { probs, cumulative })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("distribution needs at least one outcome"));
        }
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_outcomes(&self) -> usize {
        self.probs.len()
    }

    /// One inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        match self.cumulative.iter().position(|&c| u < c) {
            Some(z) => z,
            // u landed in the rounding slack above the last cumulative value
            None => self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0),
        }
    }
}

/// Row-major `|H| x m` table of losses in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTable {
    num_hypotheses: usize,
    num_outcomes: usize,
    data: Vec<f64>,
}

impl LossTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let num_hypotheses = rows.len();
        if num_hypotheses == 0 {
            return Err(invalid("loss table needs at least one hypothesis"));
        }
        let num_outcomes = rows[0].len();
        if num_outcomes == 0 {
            return Err(invalid("loss table needs at least one outcome column"));
        }
        let mut data = Vec::with_capacity(num_hypotheses * num_outcomes);
        for (h, row) in rows.into_iter().enumerate() {
            if row.len() != num_outcomes {
                return Err(invalid(format!(
                    "loss row {h} has {} entries, expected {num_outcomes}",
                    row.len()
                )));
            }
            for (z, &l) in row.iter().enumerate() {
                if !l.is_finite() || !(0.0..=1.0).contains(&l) {
                    return Err(invalid(format!("loss ({h}, {z}) = {l} is outside [0, 1]")));
                }
            }
            data.extend(row);
        }
        Ok(Self { num_hypotheses, num_outcomes, data })
    }

    pub fn num_hypotheses(&self) -> usize {
        self.num_hypotheses
    }

    pub fn num_outcomes(&self) -> usize {
        self.num_outcomes
    }

    #[inline]
    pub fn get(&self, h: usize, z: usize) -> f64 {
        self.data[h * self.num_outcomes + z]
    }

    pub fn row(&self, h: usize) -> &[f64] {
        &self.data[h * self.num_outcomes..(h + 1) * self.num_outcomes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.num_outcomes)
    }

    pub(crate) fn check_hypothesis(&self, h: usize) -> Result<()> {
        if h >= self.num_hypotheses {
            return Err(invalid(format!(
                "hypothesis index {h} out of range for class of size {}",
                self.num_hypotheses
            )));
        }
        Ok(())
    }
}

/// The tuple (distribution, loss, class) plus a name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemDoc", into = "ProblemDoc")]
pub struct LearningProblem {
    name: String,
    distribution: DiscreteDistribution,
    loss: LossTable,
}

/// Wire form of a problem: `{"name", "probs", "losses"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub name: String,
    pub probs: Vec<f64>,
    pub losses: Vec<Vec<f64>>,
}

impl TryFrom<ProblemDoc> for LearningProblem {
    type Error = crate::GermError;

    fn try_from(doc: ProblemDoc) -> Result<Self> {
        LearningProblem::new(
            doc.name,
            DiscreteDistribution::new(doc.probs)?,
            LossTable::new(doc.losses)?,
        )
    }
}

impl From<LearningProblem> for ProblemDoc {
    fn from(p: LearningProblem) -> Self {
        ProblemDoc {
            losses: p.loss.rows().map(<[f64]>::to_vec).collect(),
            probs: p.distribution.probs,
            name: p.name,
        }
    }
}

impl LearningProblem {
    pub fn new(name: impl Into<String>, distribution: DiscreteDistribution, loss: LossTable) -> Result<Self> {
        if distribution.num_outcomes() != loss.num_outcomes() {
            return Err(invalid(format!(
                "distribution has {} outcomes but loss table has {} columns",
                distribution.num_outcomes(),
                loss.num_outcomes()
            )));
        }
        Ok(Self { name: name.into(), distribution, loss })
    }

    /// Convenience constructor from raw vectors.
    pub fn from_parts(name: impl Into<String>, probs: Vec<f64>, losses: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(name, DiscreteDistribution::new(probs)?, LossTable::new(losses)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn distribution(&self) -> &DiscreteDistribution {
        &self.distribution
    }

    pub fn loss(&self) -> &LossTable {
        &self.loss
    }

    pub fn probs(&self) -> &[f64] {
        self.distribution.probs()
    }

    pub fn num_outcomes(&self) -> usize {
        self.distribution.num_outcomes()
    }

    pub fn class_size(&self) -> usize {
        self.loss.num_hypotheses()
    }

    /// Population risk of every hypothesis, in index order.
    pub fn risks(&self) -> Vec<f64> {
        (0..self.class_size()).map(|h| self.risk_unchecked(h)).collect()
    }

    fn risk_unchecked(&self, h: usize) -> f64 {
        self.loss
            .row(h)
            .iter()
            .zip(self.probs())
            .map(|(l, p)| l * p)
            .sum()
    }
}

/// A sequence of outcome indices `z_1..z_n`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sample {
    outcomes: Vec<usize>,
}

impl Sample {
    /// Builds a sample, checking every index against `num_outcomes`.
    pub fn new(outcomes: Vec<usize>, num_outcomes: usize) -> Result<Self> {
        if let Some(&z) = outcomes.iter().find(|&&z| z >= num_outcomes) {
            return Err(invalid(format!("outcome index {z} out of range for {num_outcomes} outcomes")));
        }
        Ok(Self { outcomes })
    }

    pub fn for_problem(outcomes: Vec<usize>, problem: &LearningProblem) -> Result<Self> {
        Self::new(outcomes, problem.num_outcomes())
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn prefix(&self, k: usize) -> &[usize] {
        &self.outcomes[..k]
    }
}

/// Mean loss of hypothesis `h` over the sample.
pub fn empirical_risk(loss: &LossTable, h: usize, sample: &Sample) -> Result<f64> {
    loss.check_hypothesis(h)?;
    if sample.is_empty() {
        return Err(invalid("empirical risk of an empty sample"));
    }
    if let Some(&z) = sample.outcomes().iter().find(|&&z| z >= loss.num_outcomes()) {
        return Err(invalid(format!("outcome index {z} out of range")));
    }
    let total: f64 = sample.outcomes().iter().map(|&z| loss.get(h, z)).sum();
    Ok(total / sample.len() as f64)
}

pub fn population_risk(problem: &LearningProblem, h: usize) -> Result<f64> {
    problem.loss().check_hypothesis(h)?;
    Ok(problem.risk_unchecked(h))
}

/// Minimum population risk and the lowest index attaining it.
pub fn optimal_risk(problem: &LearningProblem) -> (f64, usize) {
    argmin_lowest(&problem.risks())
}

/// Minimum value and its lowest index; NaN never wins.
pub(crate) fn argmin_lowest(values: &[f64]) -> (f64, usize) {
    let mut best = (values[0], 0);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

/// `n` i.i.d. draws from the problem's distribution.
pub fn draw_sample<R: Rng + ?Sized>(problem: &LearningProblem, n: usize, rng: &mut R) -> Sample {
    let dist = problem.distribution();
    Sample {
        outcomes: (0..n).map(|_| dist.sample(rng)).collect(),
    }
}
