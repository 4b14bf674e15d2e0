//! Greedy gated empirical risk minimization.
//!
//! At every step `k` the learner proposes `h̃_k` from the prefix `z_{1:k}`.
//! The incumbent is replaced only when the proposal's empirical risk on the
//! prefix undercuts the incumbent's by at least `δ_k`:
//!
//! ```text
//! L̂_k(h̃_k) - L̂_k(ĥ_{k-1}) <= -δ_k   =>   ĥ_k = h̃_k
//! otherwise                          =>   ĥ_k = ĥ_{k-1}
//! ```
//!
//! The run is prefix-incremental: the state after `k` steps depends only on
//! `z_{1:k}`, which lets the oracle and Monte Carlo engines read every
//! sample size off a single pass.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::gap::{delta_bernstein_from_squares, delta_uniform, GapSpec, GapVariant};
use crate::problem::{argmin_lowest, LearningProblem, LossTable, Sample};
use crate::rademacher::{log_confidence_term, rbar_massart, RademacherBoundMode};

/// One step of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub erm_index: usize,
    pub chosen_index: usize,
    #[serde(serialize_with = "crate::float_repr::serialize")]
    pub delta: f64,
    pub erm_empirical_loss: f64,
    pub incumbent_empirical_loss: f64,
    pub updated: bool,
    /// `R̄_k` used by a uniform-convergence gap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rbar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub initial_index: usize,
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    /// `ĥ_n`, with `ĥ_0` the initial hypothesis.
    pub fn chosen_at(&self, n: usize) -> usize {
        if n == 0 {
            self.initial_index
        } else {
            self.steps[n - 1].chosen_index
        }
    }

    pub fn final_index(&self) -> usize {
        self.chosen_at(self.steps.len())
    }

    /// Checks the per-step consistency rules, returning the first offending step.
    pub fn check_consistency(&self) -> std::result::Result<(), usize> {
        let mut previous = self.initial_index;
        for s in &self.steps {
            let gate = s.erm_empirical_loss - s.incumbent_empirical_loss <= -s.delta;
            let expected = if s.updated { s.erm_index } else { previous };
            if gate != s.updated || s.chosen_index != expected {
                return Err(s.k);
            }
            previous = s.chosen_index;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Signature of a pluggable proposal rule: `(loss table, prefix) -> index`.
pub type LearnerFn = dyn Fn(&LossTable, &[usize]) -> usize + Send + Sync;

/// Rule producing `h̃_k`.
#[derive(Clone)]
pub enum LearnerRule {
    /// Empirical risk minimizer, lowest index on ties.
    ErmLowestIndex,
    /// A named deterministic rule.
    Custom { name: String, rule: Arc<LearnerFn> },
}

impl LearnerRule {
    pub fn custom<F>(name: impl Into<String>, rule: F) -> Self
    where
        F: Fn(&LossTable, &[usize]) -> usize + Send + Sync + 'static,
    {
        LearnerRule::Custom { name: name.into(), rule: Arc::new(rule) }
    }

    pub fn name(&self) -> &str {
        match self {
            LearnerRule::ErmLowestIndex => "erm",
            LearnerRule::Custom { name, .. } => name,
        }
    }
}

impl fmt::Debug for LearnerRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerRule::ErmLowestIndex => f.write_str("ErmLowestIndex"),
            LearnerRule::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl PartialEq for LearnerRule {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (LearnerRule::ErmLowestIndex, LearnerRule::ErmLowestIndex) => true,
            (LearnerRule::Custom { name: a, rule: ra }, LearnerRule::Custom { name: b, rule: rb }) => {
                a == b && Arc::ptr_eq(ra, rb)
            }
            _ => false,
        }
    }
}

/// Empirical risk minimizer on a nonempty prefix, lowest index on ties.
pub fn erm(loss: &LossTable, prefix: &[usize]) -> Result<usize> {
    if prefix.is_empty() {
        return Err(invalid("ERM of an empty prefix"));
    }
    if let Some(&z) = prefix.iter().find(|&&z| z >= loss.num_outcomes()) {
        return Err(invalid(format!("outcome index {z} out of range")));
    }
    let totals: Vec<f64> = (0..loss.num_hypotheses())
        .map(|h| prefix.iter().map(|&z| loss.get(h, z)).sum())
        .collect();
    Ok(argmin_lowest(&totals).1)
}

/// A learning algorithm whose output at every sample size is a hypothesis index.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Germ { gap: GapSpec, learner: LearnerRule, initial: usize },
    /// `ĥ_n = ERM(z_{1:n})`; `ĥ_0` is index 0.
    PlainErm,
}

impl Algorithm {
    pub fn germ(gap: GapSpec, initial: usize) -> Self {
        Algorithm::Germ { gap, learner: LearnerRule::ErmLowestIndex, initial }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            Algorithm::Germ { gap, .. } => gap.is_deterministic(),
            Algorithm::PlainErm => true,
        }
    }

    pub fn initial_index(&self) -> usize {
        match self {
            Algorithm::Germ { initial, .. } => *initial,
            Algorithm::PlainErm => 0,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Algorithm::Germ { gap, learner, initial } => {
                format!("germ[{};{};h0={initial}]", gap.label(), learner.name())
            }
            Algorithm::PlainErm => "erm".to_string(),
        }
    }

    pub(crate) fn validate_for(&self, problem: &LearningProblem) -> Result<()> {
        if let Algorithm::Germ { gap, initial, .. } = self {
            problem.loss().check_hypothesis(*initial)?;
            if gap.class_size != problem.class_size() {
                return Err(invalid(format!(
                    "gap spec built for |H| = {} but problem has |H| = {}",
                    gap.class_size,
                    problem.class_size()
                )));
            }
        }
        Ok(())
    }
}

/// Incremental state of one run. Cloning forks the run at the current prefix.
#[derive(Clone)]
pub(crate) struct RunState<'a> {
    loss: &'a LossTable,
    rule: Rule<'a>,
    learner: &'a LearnerRule,
    start_step: usize,
    prefix: Vec<usize>,
    counts: Vec<u32>,
    totals: Vec<f64>,
    current: usize,
}

#[derive(Clone, Copy)]
enum Rule<'a> {
    Gated(&'a GapSpec),
    FollowErm,
}

const ERM_RULE: LearnerRule = LearnerRule::ErmLowestIndex;

impl<'a> RunState<'a> {
    pub(crate) fn new(problem: &'a LearningProblem, algo: &'a Algorithm, start_step: usize) -> Self {
        let (rule, learner, initial) = match algo {
            Algorithm::Germ { gap, learner, initial } => (Rule::Gated(gap), learner, *initial),
            Algorithm::PlainErm => (Rule::FollowErm, &ERM_RULE, 0),
        };
        let loss = problem.loss();
        Self {
            loss,
            rule,
            learner,
            start_step,
            prefix: Vec::new(),
            counts: vec![0; loss.num_outcomes()],
            totals: vec![0.0; loss.num_hypotheses()],
            current: initial,
        }
    }

    pub(crate) fn current(&self) -> usize {
        self.current
    }

    /// Consumes `z_k` and applies the gate.
    pub(crate) fn step<R: Rng + ?Sized>(&mut self, z: usize, rng: &mut R) -> Result<StepRecord> {
        self.prefix.push(z);
        self.counts[z] += 1;
        for (h, t) in self.totals.iter_mut().enumerate() {
            *t += self.loss.get(h, z);
        }
        let k = self.prefix.len();
        let proposal = match self.learner {
            LearnerRule::ErmLowestIndex => argmin_lowest(&self.totals).1,
            LearnerRule::Custom { name, rule } => {
                let h = rule(self.loss, &self.prefix);
                if h >= self.loss.num_hypotheses() {
                    return Err(invalid(format!("learner '{name}' returned out-of-range index {h}")));
                }
                h
            }
        };
        let incumbent = self.current;
        let (delta, rbar) = if k < self.start_step {
            (f64::INFINITY, None)
        } else {
            match self.rule {
                Rule::FollowErm => (f64::NEG_INFINITY, None),
                Rule::Gated(gap) => self.gap_value(gap, k, proposal, incumbent, rng)?,
            }
        };
        let kf = k as f64;
        let erm_loss = self.totals[proposal] / kf;
        let incumbent_loss = self.totals[incumbent] / kf;
        let updated = erm_loss - incumbent_loss <= -delta;
        if updated {
            self.current = proposal;
        }
        Ok(StepRecord {
            k,
            erm_index: proposal,
            chosen_index: self.current,
            delta,
            erm_empirical_loss: erm_loss,
            incumbent_empirical_loss: incumbent_loss,
            updated,
            rbar,
        })
    }

    fn gap_value<R: Rng + ?Sized>(
        &self,
        gap: &GapSpec,
        k: usize,
        proposal: usize,
        incumbent: usize,
        rng: &mut R,
    ) -> Result<(f64, Option<f64>)> {
        Ok(match &gap.variant {
            GapVariant::UniformConvergence(mode) => {
                let rbar = match mode {
                    RademacherBoundMode::MassartDeterministic => rbar_massart(gap.class_size, k)?,
                    RademacherBoundMode::UserConstant(seq) => seq[(k - 1).min(seq.len() - 1)],
                    RademacherBoundMode::EmpiricalMcDiarmid => self.fresh_rbar(rng),
                };
                (delta_uniform(k, rbar)?, Some(rbar))
            }
            GapVariant::EmpiricalBernstein => {
                let sq: f64 = self
                    .counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(z, &c)| {
                        let d = self.loss.get(proposal, z) - self.loss.get(incumbent, z);
                        f64::from(c) * d * d
                    })
                    .sum();
                (delta_bernstein_from_squares(k, sq, gap.class_size), None)
            }
            GapVariant::Fixed(d) => (*d, None),
        })
    }

    /// Draws `k` signs (one per prefix position, in order) and evaluates the
    /// empirical Rademacher bound through signed outcome counts.
    fn fresh_rbar<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let k = self.prefix.len();
        let mut signed = vec![0i64; self.loss.num_outcomes()];
        for &z in &self.prefix {
            if rng.random::<bool>() {
                signed[z] += 1;
            } else {
                signed[z] -= 1;
            }
        }
        let sup = (0..self.loss.num_hypotheses())
            .map(|h| {
                signed
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(z, &c)| c as f64 * self.loss.get(h, z))
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        (sup / k as f64 + log_confidence_term(k)).max(0.0)
    }
}

/// Runs the gated loop over the whole sample.
pub fn run_germ<R: Rng + ?Sized>(
    problem: &LearningProblem,
    sample: &Sample,
    gap: &GapSpec,
    learner: &LearnerRule,
    initial: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    run_germ_from_step(problem, sample, gap, learner, initial, 1, rng)
}

/// Like [`run_germ`], but the incumbent is frozen at `initial` for all
/// `k < start_step`; those steps draw no randomness and record `δ_k = +∞`.
pub fn run_germ_from_step<R: Rng + ?Sized>(
    problem: &LearningProblem,
    sample: &Sample,
    gap: &GapSpec,
    learner: &LearnerRule,
    initial: usize,
    start_step: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    let n = sample.len();
    if n == 0 {
        return Err(invalid("GERM needs a nonempty sample"));
    }
    if start_step == 0 || start_step > n {
        return Err(invalid(format!("start step {start_step} outside [1, {n}]")));
    }
    if let Some(&z) = sample.outcomes().iter().find(|&&z| z >= problem.num_outcomes()) {
        return Err(invalid(format!("outcome index {z} out of range")));
    }
    let algo = Algorithm::Germ { gap: gap.clone(), learner: learner.clone(), initial };
    run_algorithm_from(problem, &algo, sample.outcomes(), start_step, rng)
}

/// Runs any [`Algorithm`] over `outcomes` and returns its trajectory.
pub fn run_algorithm<R: Rng + ?Sized>(
    problem: &LearningProblem,
    algo: &Algorithm,
    outcomes: &[usize],
    rng: &mut R,
) -> Result<Trajectory> {
    run_algorithm_from(problem, algo, outcomes, 1, rng)
}

fn run_algorithm_from<R: Rng + ?Sized>(
    problem: &LearningProblem,
    algo: &Algorithm,
    outcomes: &[usize],
    start_step: usize,
    rng: &mut R,
) -> Result<Trajectory> {
    algo.validate_for(problem)?;
    let mut state = RunState::new(problem, algo, start_step);
    let initial_index = state.current();
    let steps = outcomes
        .iter()
        .map(|&z| state.step(z, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { initial_index, steps })
}
