//! Seeded Monte Carlo estimation: risk curves, bound coverage and
//! excess-risk decay.
//!
//! Replication `r` draws from `stream_rng(base_seed, r)`: first the whole
//! sample of length `n_max`, then whatever the algorithm or event consumes.
//! Per-replication results are collected in index order and reduced
//! sequentially, so outputs do not depend on the thread count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{empirical_bernstein_rhs_from_squares, thm2_excess_bound};
use crate::error::{invalid, Result};
use crate::gap::GapVariant;
use crate::germ::{Algorithm, RunState};
use crate::oracle::{CurveKind, CurveMeta, RiskCurve};
use crate::problem::{draw_sample, optimal_risk, LearningProblem};
use crate::rademacher::{exact_rademacher_multinomial, prop1_radius};
use crate::rng::{stream_rng, ExperimentRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replications: usize,
    pub n_max: usize,
    pub base_seed: u64,
    /// Sorted checkpoint sample sizes in `[1, n_max]`.
    pub grid: Vec<usize>,
}

impl McConfig {
    pub fn new(replications: usize, n_max: usize, base_seed: u64, grid: Vec<usize>) -> Result<Self> {
        let cfg = Self { replications, n_max, base_seed, grid };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config whose grid is the given sizes and whose `n_max` is the largest of them.
    pub fn on_grid(replications: usize, base_seed: u64, grid: Vec<usize>) -> Result<Self> {
        let n_max = grid.last().copied().unwrap_or(0);
        Self::new(replications, n_max, base_seed, grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(invalid("replications must be >= 1"));
        }
        if self.grid.is_empty() {
            return Err(invalid("checkpoint grid is empty"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("checkpoint grid must be strictly increasing"));
        }
        if self.grid[0] == 0 || *self.grid.last().unwrap() > self.n_max {
            return Err(invalid(format!("checkpoint grid must lie in [1, {}]", self.n_max)));
        }
        Ok(())
    }
}

/// Runs `per_replication` for every replication in parallel and returns the
/// results in replication order.
fn replicate<T, F>(cfg: &McConfig, per_replication: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ExperimentRng) -> Result<T> + Sync,
{
    (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| per_replication(&mut stream_rng(cfg.base_seed, r)))
        .collect()
}

/// Visits the run state at each checkpoint of one replication.
fn walk_replication<F>(
    problem: &LearningProblem,
    algo: &Algorithm,
    cfg: &McConfig,
    rng: &mut ExperimentRng,
    mut at_checkpoint: F,
) -> Result<()>
where
    F: FnMut(usize, &RunState<'_>, Option<f64>, &mut ExperimentRng) -> Result<()>,
{
    let sample = draw_sample(problem, cfg.n_max, rng);
    let mut state = RunState::new(problem, algo, 1);
    let mut next = 0;
    for (i, &z) in sample.outcomes().iter().enumerate() {
        if next == cfg.grid.len() {
            break;
        }
        let step = state.step(z, rng)?;
        if i + 1 == cfg.grid[next] {
            at_checkpoint(next, &state, step.rbar, rng)?;
            next += 1;
        }
    }
    Ok(())
}

/// Monte Carlo estimate of `E[L(ĥ_n)]` at every grid point.
pub fn mc_risk_curve(problem: &LearningProblem, algo: &Algorithm, cfg: &McConfig) -> Result<RiskCurve> {
    cfg.validate()?;
    algo.validate_for(problem)?;
    let risks = problem.risks();
    let rows = replicate(cfg, |rng| {
        let mut row = vec![0.0; cfg.grid.len()];
        walk_replication(problem, algo, cfg, rng, |i, state, _, _| {
            row[i] = risks[state.current()];
            Ok(())
        })?;
        Ok(row)
    })?;
    let (values, stderr) = mean_and_stderr(&rows, cfg.grid.len());
    Ok(RiskCurve {
        ns: cfg.grid.clone(),
        values,
        stderr: Some(stderr),
        kind: CurveKind::MonteCarlo,
        meta: CurveMeta {
            problem: problem.name().to_string(),
            algo: algo.label(),
            seed: Some(cfg.base_seed),
        },
        degenerate_stderr: cfg.replications == 1,
    })
}

/// Column means and standard errors of the mean, summed in row order.
fn mean_and_stderr(rows: &[Vec<f64>], width: usize) -> (Vec<f64>, Vec<f64>) {
    let r = rows.len() as f64;
    let mut mean = vec![0.0; width];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= r);
    let mut se = vec![0.0; width];
    if rows.len() > 1 {
        for row in rows {
            for ((s, v), m) in se.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        se.iter_mut().for_each(|s| *s = (*s / (r - 1.0) / r).sqrt());
    }
    (mean, se)
}

/// Registered probabilistic events whose frequency is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageEvent {
    /// Excess risk of `ĥ_n` within `thm2_excess_bound(n, R̄_n)`.
    Thm2ExcessBound,
    /// `|R_n - sup_h (1/n) Σ σ_i ℓ(h, z_i)| <= sqrt(2 ln(2/δ)/n)`.
    Prop1Deviation(f64),
    /// Pairwise empirical Bernstein inequality, simultaneously over all ordered pairs.
    EmpBernsteinPairwise(f64),
}

impl CoverageEvent {
    /// Nominal coverage the event is expected to reach at sample size `n`.
    pub fn floor(&self, n: usize) -> f64 {
        match self {
            CoverageEvent::Thm2ExcessBound => (1.0 - 2.0 / n as f64).max(0.0),
            CoverageEvent::Prop1Deviation(d) | CoverageEvent::EmpBernsteinPairwise(d) => (1.0 - d).max(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CoverageEvent::Prop1Deviation(d) | CoverageEvent::EmpBernsteinPairwise(d) if !(*d > 0.0) => {
                Err(invalid(format!("event level delta = {d} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for CoverageEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageEvent::Thm2ExcessBound => f.write_str("thm2"),
            CoverageEvent::Prop1Deviation(d) => write!(f, "prop1({d})"),
            CoverageEvent::EmpBernsteinPairwise(d) => write!(f, "emp-bernstein({d})"),
        }
    }
}

impl FromStr for CoverageEvent {
    type Err = crate::GermError;

    /// Accepts `thm2`, `prop1(δ)` and `emp-bernstein(δ)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "thm2" {
            return Ok(CoverageEvent::Thm2ExcessBound);
        }
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| invalid(format!("unknown coverage event '{s}'")))?;
        let delta: f64 = rest
            .strip_suffix(')')
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| invalid(format!("bad level in coverage event '{s}'")))?;
        let event = match name.trim() {
            "prop1" => CoverageEvent::Prop1Deviation(delta),
            "emp-bernstein" => CoverageEvent::EmpBernsteinPairwise(delta),
            other => return Err(invalid(format!("unknown coverage event '{other}'"))),
        };
        event.validate()?;
        Ok(event)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub n: usize,
    pub event: String,
    pub level: f64,
    pub coverage: f64,
    pub replications: usize,
}

impl CoverageRow {
    /// Binomial standard deviation of the frequency at the nominal level.
    pub fn sigma(&self) -> f64 {
        (self.level * (1.0 - self.level) / self.replications as f64).sqrt()
    }

    /// Coverage is at least `level - k_sigma · σ`.
    pub fn passes(&self, k_sigma: f64) -> bool {
        self.coverage >= self.level - k_sigma * self.sigma()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    /// CSV with columns `n,event,level,coverage,replications`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "event", "level", "coverage", "replications"])?;
        for row in &self.rows {
            w.write_record([
                row.n.to_string(),
                row.event.clone(),
                row.level.to_string(),
                row.coverage.to_string(),
                row.replications.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fraction of replications in which `event` holds at each grid point.
///
/// `level` overrides the nominal floor reported alongside the frequency.
pub fn mc_bound_coverage(
    problem: &LearningProblem,
    algo: &Algorithm,
    event: CoverageEvent,
    cfg: &McConfig,
    level: Option<f64>,
) -> Result<CoverageReport> {
    cfg.validate()?;
    event.validate()?;
    algo.validate_for(problem)?;
    let risks = problem.risks();
    let (best, _) = optimal_risk(problem);
    let loss = problem.loss();
    let nh = problem.class_size();
    let m = problem.num_outcomes();

    if event == CoverageEvent::Thm2ExcessBound {
        match algo {
            Algorithm::Germ { gap, .. } if matches!(gap.variant, GapVariant::UniformConvergence(_)) => {}
            _ => return Err(invalid("thm2 coverage needs GERM with a uniform-convergence gap")),
        }
    }
    let exact_rad: Vec<f64> = match event {
        CoverageEvent::Prop1Deviation(_) => cfg
            .grid
            .iter()
            .map(|&n| exact_rademacher_multinomial(problem, n))
            .collect::<Result<_>>()?,
        _ => Vec::new(),
    };

    let hits = replicate(cfg, |rng| {
        let mut held = vec![false; cfg.grid.len()];
        match event {
            CoverageEvent::Thm2ExcessBound => {
                walk_replication(problem, algo, cfg, rng, |i, state, rbar, _| {
                    let n = cfg.grid[i];
                    let rbar = rbar.expect("uniform gap records R̄");
                    held[i] = risks[state.current()] - best <= thm2_excess_bound(n, rbar)?;
                    Ok(())
                })?;
            }
            CoverageEvent::Prop1Deviation(delta) => {
                let sample = draw_sample(problem, cfg.n_max, rng);
                let signs = crate::rademacher::draw_signs(cfg.n_max, rng);
                let mut signed = vec![0i64; m];
                let mut next = 0;
                for (i, (&z, &s)) in sample.outcomes().iter().zip(&signs).enumerate() {
                    signed[z] += i64::from(s);
                    if next < cfg.grid.len() && i + 1 == cfg.grid[next] {
                        let n = cfg.grid[next];
                        let sup = (0..nh)
                            .map(|h| (0..m).map(|z| signed[z] as f64 * loss.get(h, z)).sum::<f64>())
                            .fold(f64::NEG_INFINITY, f64::max)
                            / n as f64;
                        held[next] = if delta >= 1.0 {
                            true
                        } else {
                            (exact_rad[next] - sup).abs() <= prop1_radius(n, delta)?
                        };
                        next += 1;
                    }
                }
            }
            CoverageEvent::EmpBernsteinPairwise(delta) => {
                let sample = draw_sample(problem, cfg.n_max, rng);
                let mut counts = vec![0u32; m];
                let mut next = 0;
                for (i, &z) in sample.outcomes().iter().enumerate() {
                    counts[z] += 1;
                    if next < cfg.grid.len() && i + 1 == cfg.grid[next] {
                        held[next] = pairwise_bernstein_holds(problem, &risks, &counts, cfg.grid[next], delta)?;
                        next += 1;
                    }
                }
            }
        }
        Ok(held)
    })?;

    let rows = cfg
        .grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let count = hits.iter().filter(|h| h[i]).count();
            CoverageRow {
                n,
                event: event.to_string(),
                level: level.unwrap_or_else(|| event.floor(n)),
                coverage: count as f64 / cfg.replications as f64,
                replications: cfg.replications,
            }
        })
        .collect();
    Ok(CoverageReport { rows })
}

fn pairwise_bernstein_holds(
    problem: &LearningProblem,
    risks: &[f64],
    counts: &[u32],
    n: usize,
    delta: f64,
) -> Result<bool> {
    let loss = problem.loss();
    let nh = problem.class_size();
    let nf = n as f64;
    let emp: Vec<f64> = (0..nh)
        .map(|h| counts.iter().enumerate().map(|(z, &c)| f64::from(c) * loss.get(h, z)).sum::<f64>() / nf)
        .collect();
    for h in 0..nh {
        for g in (0..nh).filter(|&g| g != h) {
            let sq: f64 = counts
                .iter()
                .enumerate()
                .map(|(z, &c)| {
                    let d = loss.get(h, z) - loss.get(g, z);
                    f64::from(c) * d * d
                })
                .sum();
            let slack = empirical_bernstein_rhs_from_squares(n, sq, nh, delta.min(1.0))?;
            if risks[h] - risks[g] > emp[h] - emp[g] + slack {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Least-squares fit of `ln(mean excess risk)` against `ln n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DecayFit {
    Fit {
        slope: f64,
        intercept: f64,
        /// Root-mean-square residual of the fit in log space.
        residual: f64,
        points: usize,
    },
    /// Fewer than two grid points carry excess risk above [`EXCESS_FLOOR`].
    Degenerate,
}

impl DecayFit {
    pub fn slope(&self) -> Option<f64> {
        match self {
            DecayFit::Fit { slope, .. } => Some(*slope),
            DecayFit::Degenerate => None,
        }
    }
}

/// Default pass threshold on the fitted slope for a `β`-certified problem:
/// `-0.35` at `β = 0`, `-0.6` at `β = 1`, linear in between.
pub fn default_max_slope(beta: f64) -> f64 {
    -0.35 - 0.25 * beta.clamp(0.0, 1.0)
}

/// Excess risks at or below this are treated as zero by the decay fit.
pub const EXCESS_FLOOR: f64 = 1e-12;

/// Fits the decay of `curve.values - optimal` over grid points whose excess exceeds [`EXCESS_FLOOR`].
pub fn fit_decay(curve: &RiskCurve, optimal: f64) -> DecayFit {
    let pts: Vec<(f64, f64)> = curve
        .ns
        .iter()
        .zip(&curve.values)
        .filter(|(&n, &v)| n > 0 && v - optimal > EXCESS_FLOOR)
        .map(|(&n, &v)| ((n as f64).ln(), (v - optimal).ln()))
        .collect();
    if pts.len() < 2 {
        return DecayFit::Degenerate;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| {
            let e = p.1 - (intercept + slope * p.0);
            e * e
        })
        .sum::<f64>()
        / k)
        .sqrt();
    DecayFit::Fit { slope, intercept, residual, points: pts.len() }
}

/// Runs the Monte Carlo curve and fits its excess-risk decay.
pub fn excess_risk_decay(problem: &LearningProblem, algo: &Algorithm, cfg: &McConfig) -> Result<(RiskCurve, DecayFit)> {
    cfg.validate()?;
    let lo = cfg.grid[0] as f64;
    let hi = *cfg.grid.last().unwrap() as f64;
    if hi < 10.0 * lo {
        return Err(invalid("decay fit needs a grid spanning at least one decade"));
    }
    let curve = mc_risk_curve(problem, algo, cfg)?;
    let (best, _) = optimal_risk(problem);
    let fit = fit_decay(&curve, best);
    Ok((curve, fit))
}
