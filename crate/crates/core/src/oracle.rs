//! Exact expected-risk curves by enumerating `Z^n`.
//!
//! The enumeration walks the tree of sample prefixes depth-first, carrying
//! one incremental run per node, so every sample size up to `n_max` is read
//! off a single pass. Work is split by the first outcome; partial curves are
//! reduced in outcome order, which keeps the result bit-identical for any
//! number of worker threads.

use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GermError, Result};
use crate::germ::{Algorithm, RunState};
use crate::problem::LearningProblem;
use crate::rademacher::ENUMERATION_BUDGET;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Exact,
    MonteCarlo,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Exact => "exact",
            CurveKind::MonteCarlo => "mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub problem: String,
    pub algo: String,
    pub seed: Option<u64>,
}

/// Expected risk as a function of sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskCurve {
    pub ns: Vec<usize>,
    pub values: Vec<f64>,
    /// Present iff `kind` is `MonteCarlo`.
    pub stderr: Option<Vec<f64>>,
    pub kind: CurveKind,
    pub meta: CurveMeta,
    /// Set when the standard errors come from a single replication and are reported as 0.
    #[serde(default)]
    pub degenerate_stderr: bool,
}

impl RiskCurve {
    /// An exact curve with sample sizes `1, 2, ...`.
    pub fn from_values(values: Vec<f64>) -> Self {
        RiskCurve {
            ns: (1..=values.len()).collect(),
            values,
            stderr: None,
            kind: CurveKind::Exact,
            meta: CurveMeta { problem: String::new(), algo: String::new(), seed: None },
            degenerate_stderr: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at(&self, n: usize) -> Option<f64> {
        self.ns.iter().position(|&x| x == n).map(|i| self.values[i])
    }

    /// CSV with columns `n,value,stderr,kind,problem,algo,seed`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "value", "stderr", "kind", "problem", "algo", "seed"])?;
        let seed = self.meta.seed.map(|s| s.to_string()).unwrap_or_default();
        for (i, (n, v)) in self.ns.iter().zip(&self.values).enumerate() {
            let se = self.stderr.as_ref().map(|s| s[i].to_string()).unwrap_or_default();
            w.write_record([
                n.to_string(),
                v.to_string(),
                se,
                self.kind.as_str().to_string(),
                self.meta.problem.clone(),
                self.meta.algo.clone(),
                seed.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let expected = ["n", "value", "stderr", "kind", "problem", "algo", "seed"];
        if headers.iter().ne(expected.iter().copied()) {
            return Err(invalid(format!("unexpected CSV header: {headers:?}")));
        }
        let mut ns = Vec::new();
        let mut values = Vec::new();
        let mut stderr = Vec::new();
        let mut kind = None;
        let mut meta = CurveMeta { problem: String::new(), algo: String::new(), seed: None };
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or("");
            let parse_err = |what: &str| invalid(format!("row {}: bad {what}", line + 2));
            ns.push(field(0).parse::<usize>().map_err(|_| parse_err("n"))?);
            values.push(field(1).parse::<f64>().map_err(|_| parse_err("value"))?);
            if !field(2).is_empty() {
                stderr.push(field(2).parse::<f64>().map_err(|_| parse_err("stderr"))?);
            }
            let k = match field(3) {
                "exact" => CurveKind::Exact,
                "mc" => CurveKind::MonteCarlo,
                _ => return Err(parse_err("kind")),
            };
            if kind.replace(k).is_some_and(|prev| prev != k) {
                return Err(parse_err("kind (mixed)"));
            }
            meta.problem = field(4).to_string();
            meta.algo = field(5).to_string();
            meta.seed = if field(6).is_empty() {
                None
            } else {
                Some(field(6).parse().map_err(|_| parse_err("seed"))?)
            };
        }
        if values.is_empty() {
            return Err(invalid("curve CSV has no rows"));
        }
        let kind = kind.unwrap_or(CurveKind::Exact);
        let stderr = match kind {
            CurveKind::MonteCarlo if stderr.len() == values.len() => Some(stderr),
            CurveKind::Exact if stderr.is_empty() => None,
            _ => return Err(invalid("stderr column must be filled exactly for mc rows")),
        };
        Ok(RiskCurve { ns, values, stderr, kind, meta, degenerate_stderr: false })
    }
}

/// Threshold for flagging an adjacent increase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    /// Multiple of the pooled standard error `sqrt(se_{n-1}² + se_n²)`.
    PooledStdErr(f64),
}

/// Tolerance for exact curves.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Monotone,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub n: usize,
    pub increase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub violations: Vec<Violation>,
    /// Largest adjacent increase, 0 if the curve never goes up.
    pub max_increase: f64,
    pub verdict: Verdict,
    pub tolerance: Tolerance,
}

/// Flags every `n` whose value exceeds its predecessor by more than the tolerance.
pub fn check_monotone(curve: &RiskCurve, tolerance: Tolerance) -> Result<MonotonicityReport> {
    if curve.is_empty() {
        return Err(invalid("monotonicity check of an empty curve"));
    }
    let pooled = match (tolerance, &curve.stderr) {
        (Tolerance::PooledStdErr(_), None) => {
            return Err(invalid("pooled standard-error tolerance needs a Monte Carlo curve"))
        }
        (_, se) => se.clone(),
    };
    let mut violations = Vec::new();
    let mut max_increase: f64 = 0.0;
    for i in 1..curve.len() {
        let increase = curve.values[i] - curve.values[i - 1];
        max_increase = max_increase.max(increase);
        let allowed = match tolerance {
            Tolerance::Absolute(t) => t,
            Tolerance::PooledStdErr(c) => {
                let se = pooled.as_ref().expect("checked above");
                c * (se[i - 1] * se[i - 1] + se[i] * se[i]).sqrt()
            }
        };
        if increase > allowed {
            violations.push(Violation { n: curve.ns[i], increase });
        }
    }
    let verdict = if violations.is_empty() { Verdict::Monotone } else { Verdict::Violated };
    Ok(MonotonicityReport { violations, max_increase, verdict, tolerance })
}

/// Exact `E[L(ĥ_n)]` for `n = 0..=n_max` (entry 0 is `L(ĥ_0)`).
pub fn exact_risk_curve(problem: &LearningProblem, algo: &Algorithm, n_max: usize) -> Result<RiskCurve> {
    if !algo.is_deterministic() {
        return Err(GermError::Unsupported(
            "exact enumeration needs a deterministic gap (massart, user constant, bernstein or fixed)".into(),
        ));
    }
    algo.validate_for(problem)?;
    let m = problem.num_outcomes() as u64;
    let within_budget = u32::try_from(n_max)
        .ok()
        .and_then(|e| m.checked_pow(e))
        .is_some_and(|t| t <= ENUMERATION_BUDGET);
    if !within_budget {
        return Err(GermError::ResourceExceeded(format!(
            "m^n = {m}^{n_max} exceeds the enumeration budget {ENUMERATION_BUDGET}"
        )));
    }
    let risks = problem.risks();
    let probs = problem.probs();
    let mut values = vec![0.0; n_max + 1];
    values[0] = risks[algo.initial_index()];
    if n_max > 0 {
        let partials = (0..probs.len())
            .into_par_iter()
            .map(|z| -> Result<Vec<f64>> {
                let mut acc = vec![0.0; n_max + 1];
                if probs[z] > 0.0 {
                    let mut state = RunState::new(problem, algo, 1);
                    // deterministic gaps never draw from this generator
                    let mut rng = stream_rng(0, 0);
                    state.step(z, &mut rng)?;
                    acc[1] = probs[z] * risks[state.current()];
                    enumerate(&state, probs[z], 1, n_max, probs, &risks, &mut acc, &mut rng)?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        for part in &partials {
            for (v, p) in values.iter_mut().zip(part).skip(1) {
                *v += p;
            }
        }
    }
    Ok(RiskCurve {
        ns: (0..=n_max).collect(),
        values,
        stderr: None,
        kind: CurveKind::Exact,
        meta: CurveMeta { problem: problem.name().to_string(), algo: algo.label(), seed: None },
        degenerate_stderr: false,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate<R: Rng>(
    state: &RunState<'_>,
    weight: f64,
    depth: usize,
    n_max: usize,
    probs: &[f64],
    risks: &[f64],
    acc: &mut [f64],
    rng: &mut R,
) -> Result<()> {
    if depth == n_max {
        return Ok(());
    }
    for (z, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut child = state.clone();
        child.step(z, rng)?;
        let w = weight * p;
        acc[depth + 1] += w * risks[child.current()];
        enumerate(&child, w, depth + 1, n_max, probs, risks, acc, rng)?;
    }
    Ok(())
}

/// Grid on which the witness search quantizes probabilities and losses.
pub const WITNESS_GRID: u32 = 20;

/// Minimum adjacent increase that counts as a witness.
pub const WITNESS_MIN_INCREASE: f64 = 1e-9;

/// Searches random quantized problems for one whose exact plain-ERM curve
/// increases somewhere in `n = 2..=n_probe`.
pub fn find_erm_nonmonotone<R: Rng + ?Sized>(
    m: usize,
    class_size: usize,
    n_probe: usize,
    search_budget: usize,
    rng: &mut R,
) -> Result<Option<LearningProblem>> {
    if m == 0 || class_size == 0 {
        return Err(invalid("witness search needs m >= 1 and |H| >= 1"));
    }
    if class_size == 1 || n_probe < 2 {
        return Ok(None);
    }
    let grid = f64::from(WITNESS_GRID);
    for trial in 0..search_budget {
        let weights = random_composition(WITNESS_GRID, m, rng);
        let probs: Vec<f64> = weights.iter().map(|&w| f64::from(w) / grid).collect();
        let losses: Vec<Vec<f64>> = (0..class_size)
            .map(|_| (0..m).map(|_| f64::from(rng.random_range(0..=WITNESS_GRID)) / grid).collect())
            .collect();
        let candidate = LearningProblem::from_parts(format!("erm-witness-{trial}"), probs, losses)?;
        let curve = exact_risk_curve(&candidate, &Algorithm::PlainErm, n_probe)?;
        if has_erm_violation(&curve) {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

/// Adjacent increases above [`WITNESS_MIN_INCREASE`] among `n >= 1`.
pub fn erm_violations(curve: &RiskCurve) -> Vec<Violation> {
    curve
        .ns
        .windows(2)
        .zip(curve.values.windows(2))
        .filter(|(ns, _)| ns[0] >= 1)
        .filter_map(|(ns, v)| {
            let increase = v[1] - v[0];
            (increase > WITNESS_MIN_INCREASE).then_some(Violation { n: ns[1], increase })
        })
        .collect()
}

fn has_erm_violation(curve: &RiskCurve) -> bool {
    !erm_violations(curve).is_empty()
}

/// Uniform random composition of `total` into `parts` positive integers
/// (zeros allowed when `parts > total`).
fn random_composition<R: Rng + ?Sized>(total: u32, parts: usize, rng: &mut R) -> Vec<u32> {
    if parts as u32 > total {
        let mut w = vec![0u32; parts];
        for _ in 0..total {
            w[rng.random_range(0..parts)] += 1;
        }
        return w;
    }
    // choose parts-1 distinct cut points in 1..total
    let mut cuts: Vec<u32> = Vec::with_capacity(parts - 1);
    while cuts.len() < parts - 1 {
        let c = rng.random_range(1..total);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(parts);
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        out.push(c - prev);
        prev = c;
    }
    out
}
