//! JSON-configured experiments: build the problem and algorithm, run the
//! exact or Monte Carlo engine, evaluate the requested checks and persist
//! the curve CSV, optional trajectory JSON and a report JSON.
//!
//! The report echoes the fully resolved config and contains no timings or
//! worker counts, so a rerun with the same config is byte-identical.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{bernstein_min_b, BernsteinCertificate};
use crate::error::{invalid, Result};
use crate::gap::{GapSpec, GapVariant};
use crate::germ::{run_algorithm, Algorithm, LearnerRule};
use crate::montecarlo::{
    default_max_slope, fit_decay, mc_bound_coverage, mc_risk_curve, CoverageEvent, CoverageRow, DecayFit, McConfig,
};
use crate::oracle::{check_monotone, exact_risk_curve, MonotonicityReport, RiskCurve, Tolerance, EXACT_TOLERANCE};
use crate::problem::{draw_sample, optimal_risk, LearningProblem};
use crate::rademacher::RademacherBoundMode;
use crate::rng::stream_rng;
use crate::scenarios::find_scenario;

pub const CURVE_FILE: &str = "curve.csv";
pub const REPORT_FILE: &str = "report.json";
pub const TRAJECTORY_FILE: &str = "trajectory.json";

/// Default multiple of the pooled standard error for Monte Carlo monotonicity checks.
pub const DEFAULT_MC_SIGMAS: f64 = 3.0;

fn default_learner() -> String {
    "erm".to_string()
}

fn default_k_sigma() -> f64 {
    DEFAULT_MC_SIGMAS
}

/// Serializable description of an [`Algorithm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Germ {
        gap: GapVariant,
        #[serde(default)]
        initial: usize,
        #[serde(default = "default_learner")]
        learner: String,
    },
    Erm,
}

impl AlgorithmSpec {
    pub fn build(&self, problem: &LearningProblem) -> Result<Algorithm> {
        let algo = match self {
            AlgorithmSpec::Germ { gap, initial, learner } => {
                if learner != "erm" {
                    return Err(invalid(format!("unknown learner '{learner}' (only 'erm' is configurable)")));
                }
                let gap = GapSpec::new(gap.clone(), problem.class_size())?;
                Algorithm::Germ { gap, learner: LearnerRule::ErmLowestIndex, initial: *initial }
            }
            AlgorithmSpec::Erm => Algorithm::PlainErm,
        };
        algo.validate_for(problem)?;
        Ok(algo)
    }
}

impl FromStr for AlgorithmSpec {
    type Err = crate::GermError;

    /// `erm`, or `germ:<gap>[:<initial>]` with gap one of `massart`,
    /// `empirical`, `bernstein`, `fixed=<x>`, `user=<r1>/<r2>/...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "erm" {
            return Ok(AlgorithmSpec::Erm);
        }
        let mut parts = s.split(':');
        if parts.next() != Some("germ") {
            return Err(invalid(format!("unknown algorithm spec '{s}'")));
        }
        let gap_text = parts.next().ok_or_else(|| invalid("germ spec needs a gap, e.g. germ:massart"))?;
        let gap = match gap_text.split_once('=') {
            None => match gap_text {
                "massart" => GapVariant::UniformConvergence(RademacherBoundMode::MassartDeterministic),
                "empirical" => GapVariant::UniformConvergence(RademacherBoundMode::EmpiricalMcDiarmid),
                "bernstein" => GapVariant::EmpiricalBernstein,
                other => return Err(invalid(format!("unknown gap '{other}'"))),
            },
            Some(("fixed", v)) => GapVariant::Fixed(v.parse().map_err(|_| invalid(format!("bad fixed gap '{v}'")))?),
            Some(("user", v)) => GapVariant::UniformConvergence(RademacherBoundMode::UserConstant(
                v.split('/')
                    .map(|x| x.parse().map_err(|_| invalid(format!("bad R̄ entry '{x}'"))))
                    .collect::<Result<_>>()?,
            )),
            Some((other, _)) => return Err(invalid(format!("unknown gap '{other}'"))),
        };
        let initial = match parts.next() {
            Some(i) => i.parse().map_err(|_| invalid(format!("bad initial index '{i}'")))?,
            None => 0,
        };
        if parts.next().is_some() {
            return Err(invalid(format!("trailing fields in algorithm spec '{s}'")));
        }
        Ok(AlgorithmSpec::Germ { gap, initial, learner: default_learner() })
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmSpec::Erm => f.write_str("erm"),
            AlgorithmSpec::Germ { gap, initial, .. } => {
                let g = match gap {
                    GapVariant::UniformConvergence(RademacherBoundMode::MassartDeterministic) => "massart".to_string(),
                    GapVariant::UniformConvergence(RademacherBoundMode::EmpiricalMcDiarmid) => "empirical".to_string(),
                    GapVariant::UniformConvergence(RademacherBoundMode::UserConstant(v)) => {
                        let items: Vec<String> = v.iter().map(f64::to_string).collect();
                        format!("user={}", items.join("/"))
                    }
                    GapVariant::EmpiricalBernstein => "bernstein".to_string(),
                    GapVariant::Fixed(d) => format!("fixed={d}"),
                };
                write!(f, "germ:{g}:{initial}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EngineSpec {
    Exact {
        n_max: usize,
    },
    Mc {
        replications: usize,
        /// Required; there is no clock-based fallback.
        #[serde(default)]
        seed: Option<u64>,
        grid: Vec<usize>,
        /// Defaults to the largest grid point.
        #[serde(default)]
        n_max: Option<usize>,
    },
}

impl EngineSpec {
    fn name(&self) -> &'static str {
        match self {
            EngineSpec::Exact { .. } => "exact",
            EngineSpec::Mc { .. } => "mc",
        }
    }

    fn mc_config(&self) -> Result<Option<McConfig>> {
        match self {
            EngineSpec::Exact { .. } => Ok(None),
            EngineSpec::Mc { replications, seed, grid, n_max } => {
                let seed = seed.ok_or_else(|| invalid("mc engine needs an explicit seed"))?;
                let n_max = n_max.or_else(|| grid.last().copied()).unwrap_or(0);
                McConfig::new(*replications, n_max, seed, grid.clone()).map(Some)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Defaults to an absolute `1e-12` for exact curves and 3 pooled standard errors for Monte Carlo.
    Monotone {
        #[serde(default)]
        tolerance: Option<Tolerance>,
    },
    /// `event` is `thm2`, `prop1(δ)` or `emp-bernstein(δ)`. Without `level`
    /// the event's own floor at each `n` is used.
    Coverage {
        event: String,
        #[serde(default)]
        level: Option<f64>,
        #[serde(default = "default_k_sigma")]
        k_sigma: f64,
    },
    /// Fitted log-log slope of the mean excess risk must not exceed `max_slope`.
    Decay {
        beta: f64,
        #[serde(default)]
        max_slope: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub problem_file: Option<PathBuf>,
    pub algorithm: AlgorithmSpec,
    pub engine: EngineSpec,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    pub output_dir: PathBuf,
    /// Write the trajectory of Monte Carlo replication 0.
    #[serde(default)]
    pub dump_trajectory: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn load_problem(&self) -> Result<LearningProblem> {
        match (&self.scenario, &self.problem_file) {
            (Some(id), None) => Ok(find_scenario(id)?.problem),
            (None, Some(path)) => LearningProblem::from_json(&fs::read_to_string(path)?),
            _ => Err(invalid("config needs exactly one of 'scenario' and 'problem_file'")),
        }
    }

    /// Checks the config against the problem and fills every defaulted field.
    pub fn resolve(&self, problem: &LearningProblem) -> Result<ExperimentConfig> {
        let algo = self.algorithm.build(problem)?;
        let mut out = self.clone();
        let is_mc = matches!(self.engine, EngineSpec::Mc { .. });
        if let Some(cfg) = self.engine.mc_config()? {
            out.engine = EngineSpec::Mc {
                replications: cfg.replications,
                seed: Some(cfg.base_seed),
                grid: cfg.grid,
                n_max: Some(cfg.n_max),
            };
        } else if !algo.is_deterministic() {
            return Err(invalid("exact engine needs a deterministic gap mode"));
        }
        if self.dump_trajectory && !is_mc {
            return Err(invalid("dump_trajectory needs the mc engine"));
        }
        for check in &mut out.checks {
            match check {
                CheckSpec::Monotone { tolerance } => {
                    if tolerance.is_none() {
                        *tolerance = Some(if is_mc {
                            Tolerance::PooledStdErr(DEFAULT_MC_SIGMAS)
                        } else {
                            Tolerance::Absolute(EXACT_TOLERANCE)
                        });
                    }
                }
                CheckSpec::Coverage { event, level, .. } => {
                    if !is_mc {
                        return Err(invalid("coverage checks need the mc engine"));
                    }
                    event.parse::<CoverageEvent>()?;
                    if let Some(l) = level {
                        if !(0.0..=1.0).contains(l) {
                            return Err(invalid(format!("coverage level {l} is outside [0, 1]")));
                        }
                    }
                }
                CheckSpec::Decay { beta, max_slope } => {
                    if !is_mc {
                        return Err(invalid("decay checks need the mc engine"));
                    }
                    if !(0.0..=1.0).contains(beta) {
                        return Err(invalid(format!("beta = {beta} is outside [0, 1]")));
                    }
                    if max_slope.is_none() {
                        *max_slope = Some(default_max_slope(*beta));
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub base_seed: u64,
    pub replications: usize,
    /// How replication `r` derives its generator.
    pub derivation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckOutcome {
    Monotone {
        passed: bool,
        report: MonotonicityReport,
    },
    Coverage {
        passed: bool,
        event: String,
        k_sigma: f64,
        csv: String,
        rows: Vec<CoverageRow>,
    },
    Decay {
        passed: bool,
        beta: f64,
        max_slope: f64,
        fit: DecayFit,
        certificate: BernsteinCertificate,
    },
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        match self {
            CheckOutcome::Monotone { passed, .. }
            | CheckOutcome::Coverage { passed, .. }
            | CheckOutcome::Decay { passed, .. } => *passed,
        }
    }

    /// One-line human-readable verdict.
    pub fn summary(&self) -> String {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        match self {
            CheckOutcome::Monotone { report, .. } => format!(
                "{tag} monotone violations={} max_increase={:?}",
                report.violations.len(),
                report.max_increase
            ),
            CheckOutcome::Coverage { event, rows, .. } => {
                let worst = rows
                    .iter()
                    .map(|r| r.coverage - r.level)
                    .fold(f64::INFINITY, f64::min);
                format!("{tag} coverage event={event} min_margin={worst:?}")
            }
            CheckOutcome::Decay { fit, max_slope, .. } => match fit.slope() {
                Some(s) => format!("{tag} decay slope={s:?} max_slope={max_slope:?}"),
                None => format!("{tag} decay degenerate (zero excess risk on the grid)"),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub problem: String,
    pub algorithm: String,
    pub engine: String,
    pub seeds: Option<SeedInfo>,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub report: Report,
    pub curve: RiskCurve,
    pub curve_path: PathBuf,
    pub report_path: PathBuf,
    pub trajectory_path: Option<PathBuf>,
    pub coverage_paths: Vec<PathBuf>,
}

impl ExperimentResult {
    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            1
        }
    }
}

/// Runs the experiment on the current rayon pool and writes its artifacts.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let problem = config.load_problem()?;
    let resolved = config.resolve(&problem)?;
    let algo = resolved.algorithm.build(&problem)?;
    let mc = resolved.engine.mc_config()?;

    let curve = match (&resolved.engine, &mc) {
        (EngineSpec::Exact { n_max }, _) => exact_risk_curve(&problem, &algo, *n_max)?,
        (EngineSpec::Mc { .. }, Some(cfg)) => mc_risk_curve(&problem, &algo, cfg)?,
        (EngineSpec::Mc { .. }, None) => unreachable!("mc engine always resolves a config"),
    };

    let dir = resolved.output_dir.clone();
    fs::create_dir_all(&dir)?;
    let curve_path = dir.join(CURVE_FILE);
    curve.write_csv(fs::File::create(&curve_path)?)?;

    let trajectory_path = match (&mc, resolved.dump_trajectory) {
        (Some(cfg), true) => {
            let mut rng = stream_rng(cfg.base_seed, 0);
            let sample = draw_sample(&problem, cfg.n_max, &mut rng);
            let traj = run_algorithm(&problem, &algo, sample.outcomes(), &mut rng)?;
            let path = dir.join(TRAJECTORY_FILE);
            fs::write(&path, traj.to_json()?)?;
            Some(path)
        }
        _ => None,
    };

    let mut checks = Vec::with_capacity(resolved.checks.len());
    let mut coverage_paths = Vec::new();
    for (i, check) in resolved.checks.iter().enumerate() {
        let outcome = match check {
            CheckSpec::Monotone { tolerance } => {
                let report = check_monotone(&curve, tolerance.expect("resolved"))?;
                CheckOutcome::Monotone { passed: report.violations.is_empty(), report }
            }
            CheckSpec::Coverage { event, level, k_sigma } => {
                let cfg = mc.as_ref().expect("resolved");
                let event: CoverageEvent = event.parse()?;
                let cov = mc_bound_coverage(&problem, &algo, event, cfg, *level)?;
                let name = format!("coverage-{i}.csv");
                let path = dir.join(&name);
                cov.write_csv(fs::File::create(&path)?)?;
                coverage_paths.push(path);
                CheckOutcome::Coverage {
                    passed: cov.rows.iter().all(|r| r.passes(*k_sigma)),
                    event: event.to_string(),
                    k_sigma: *k_sigma,
                    csv: name,
                    rows: cov.rows,
                }
            }
            CheckSpec::Decay { beta, max_slope } => {
                let max_slope = max_slope.expect("resolved");
                let fit = fit_decay(&curve, optimal_risk(&problem).0);
                let passed = fit.slope().is_none_or(|s| s <= max_slope);
                let certificate = bernstein_min_b(&problem, *beta)?;
                CheckOutcome::Decay { passed, beta: *beta, max_slope, fit, certificate }
            }
        };
        checks.push(outcome);
    }

    let report = Report {
        tool: "germ".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        problem: problem.name().to_string(),
        algorithm: algo.label(),
        engine: resolved.engine.name().to_string(),
        seeds: mc.as_ref().map(|cfg| SeedInfo {
            base_seed: cfg.base_seed,
            replications: cfg.replications,
            derivation: "ChaCha8(seed_from_u64(base_seed)), stream = replication index".to_string(),
        }),
        passed: checks.iter().all(CheckOutcome::passed),
        checks,
        config: resolved,
    };
    let report_path = dir.join(REPORT_FILE);
    fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")?;

    Ok(ExperimentResult { report, curve, curve_path, report_path, trajectory_path, coverage_paths })
}

/// Like [`run_experiment`] on a dedicated pool of `workers` threads.
pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    if workers == 0 {
        return Err(invalid("workers must be >= 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str, out: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::from_json(json).unwrap();
        c.output_dir = out.to_path_buf();
        c
    }

    #[test]
    fn algorithm_spec_strings_round_trip() {
        for s in ["erm", "germ:massart:0", "germ:empirical:1", "germ:bernstein:2", "germ:fixed=0.25:0", "germ:user=0.1/0.05:0"] {
            let spec: AlgorithmSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!("germ:massart".parse::<AlgorithmSpec>().unwrap().to_string(), "germ:massart:0");
        for bad in ["", "germ", "germ:vc", "germ:massart:x", "germ:massart:0:1", "svm", "germ:fixed=a"] {
            assert!(bad.parse::<AlgorithmSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn s1_exact_monotone_run() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"scenario":"S1","algorithm":{"kind":"germ","gap":{"uniform_convergence":"massart_deterministic"}},
                "engine":{"kind":"exact","n_max":6},"checks":[{"kind":"monotone"}],"output_dir":"x"}"#,
            dir.path(),
        );
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.exit_code(), 0);
        let csv = fs::read_to_string(&r.curve_path).unwrap();
        assert_eq!(csv.lines().count(), 8);
        let values: Vec<f64> = r.curve.values.clone();
        assert!(values.iter().all(|v| (v - values[0]).abs() < 1e-12));
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&r.report_path).unwrap()).unwrap();
        assert_eq!(report["config"]["checks"][0]["tolerance"]["absolute"], 1e-12);
        assert_eq!(report["config"]["algorithm"]["learner"], "erm");
    }

    #[test]
    fn s3_plain_erm_fails_monotone_check() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"scenario":"S3","algorithm":{"kind":"erm"},"engine":{"kind":"exact","n_max":8},
                "checks":[{"kind":"monotone"}],"output_dir":"x"}"#,
            dir.path(),
        );
        let r = run_experiment(&c).unwrap();
        assert_eq!(r.exit_code(), 1);
        match &r.report.checks[0] {
            CheckOutcome::Monotone { report, .. } => assert!(report.violations.iter().any(|v| v.n == 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(ExperimentConfig::from_json("{not json").is_err());
        assert!(ExperimentConfig::from_json(r#"{"algorithm":{"kind":"erm"},"engine":{"kind":"exact","n_max":3},"output_dir":"o","extra":1}"#).is_err());
        let p = find_scenario("S2").unwrap().problem;
        let parse = |s: &str| ExperimentConfig::from_json(s).unwrap();
        let no_seed = parse(r#"{"scenario":"S2","algorithm":{"kind":"erm"},"engine":{"kind":"mc","replications":5,"grid":[1,2]},"output_dir":"o"}"#);
        assert_eq!(no_seed.resolve(&p).unwrap_err().exit_code(), 2);
        let random_exact = parse(r#"{"scenario":"S2","algorithm":{"kind":"germ","gap":{"uniform_convergence":"empirical_mc_diarmid"}},"engine":{"kind":"exact","n_max":3},"output_dir":"o"}"#);
        assert!(random_exact.resolve(&p).is_err());
        let both = parse(r#"{"scenario":"S2","problem_file":"p.json","algorithm":{"kind":"erm"},"engine":{"kind":"exact","n_max":3},"output_dir":"o"}"#);
        assert!(both.load_problem().is_err());
        let bad_event = parse(r#"{"scenario":"S2","algorithm":{"kind":"erm"},"engine":{"kind":"mc","replications":5,"seed":1,"grid":[2]},"checks":[{"kind":"coverage","event":"vc(0.1)"}],"output_dir":"o"}"#);
        assert!(bad_event.resolve(&p).is_err());
        let bad_initial = parse(r#"{"scenario":"S2","algorithm":{"kind":"germ","gap":"empirical_bernstein","initial":5},"engine":{"kind":"exact","n_max":3},"output_dir":"o"}"#);
        assert!(bad_initial.resolve(&p).is_err());
        let traj_exact = parse(r#"{"scenario":"S2","algorithm":{"kind":"erm"},"engine":{"kind":"exact","n_max":3},"output_dir":"o","dump_trajectory":true}"#);
        assert!(traj_exact.resolve(&p).is_err());
    }

    #[test]
    fn resource_guard_maps_to_exit_three() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"scenario":"S4","algorithm":{"kind":"erm"},"engine":{"kind":"exact","n_max":30},"output_dir":"x"}"#,
            dir.path(),
        );
        assert_eq!(run_experiment(&c).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn mc_run_is_byte_identical_across_workers() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"scenario":"S5","algorithm":{"kind":"germ","gap":{"uniform_convergence":"empirical_mc_diarmid"},"initial":2},
                "engine":{"kind":"mc","replications":400,"seed":7,"grid":[5,10,20,40]},
                "checks":[{"kind":"monotone"},{"kind":"coverage","event":"emp-bernstein(0.1)"},{"kind":"coverage","event":"thm2"}],
                "output_dir":"x","dump_trajectory":true}"#,
            dir.path(),
        );
        let read = |r: &ExperimentResult| {
            let mut files = vec![
                fs::read(&r.curve_path).unwrap(),
                fs::read(&r.report_path).unwrap(),
                fs::read(r.trajectory_path.as_ref().unwrap()).unwrap(),
            ];
            files.extend(r.coverage_paths.iter().map(|p| fs::read(p).unwrap()));
            files
        };
        let a = read(&run_experiment_with_workers(&c, 1).unwrap());
        let b = read(&run_experiment_with_workers(&c, 8).unwrap());
        let again = read(&run_experiment_with_workers(&c, 1).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, again);
        assert_eq!(a.len(), 5);
    }

    #[test]
    fn decay_check_on_single_hypothesis_is_degenerate() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"scenario":"S1","algorithm":{"kind":"germ","gap":"empirical_bernstein"},
                "engine":{"kind":"mc","replications":10,"seed":3,"grid":[5,50]},
                "checks":[{"kind":"decay","beta":0.0}],"output_dir":"x"}"#,
            dir.path(),
        );
        let r = run_experiment(&c).unwrap();
        match &r.report.checks[0] {
            CheckOutcome::Decay { fit, max_slope, passed, .. } => {
                assert_eq!(*fit, DecayFit::Degenerate);
                assert_eq!(*max_slope, -0.35);
                assert!(passed);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
