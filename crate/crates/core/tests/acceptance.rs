//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits nonzero if any fails.

use std::fs;
use std::time::{Duration, Instant};

use germ_core::analysis::minimizer_bound;
use germ_core::experiment::{run_experiment_with_workers, ExperimentConfig};
use germ_core::gap::GapSpec;
use germ_core::germ::Algorithm;
use germ_core::montecarlo::{excess_risk_decay, mc_bound_coverage, mc_risk_curve, CoverageEvent, McConfig};
use germ_core::oracle::{check_monotone, erm_violations, exact_risk_curve, Tolerance, EXACT_TOLERANCE};
use germ_core::problem::LearningProblem;
use germ_core::rademacher::{prop1_exceedance, RademacherBoundMode};
use germ_core::rng::stream_rng;
use germ_core::scenarios::{builtin_scenarios, find_scenario, research_witness, Scenario, Tag};
use rand::Rng;

const REPLICATIONS: usize = 20_000;
const K_SIGMA: f64 = 3.0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn small_scenarios() -> Vec<Scenario> {
    builtin_scenarios()
        .unwrap()
        .into_iter()
        .filter(|s| s.problem.num_outcomes() <= 3)
        .collect()
}

fn massart(p: &LearningProblem, initial: usize) -> Algorithm {
    Algorithm::germ(GapSpec::uniform(RademacherBoundMode::MassartDeterministic, p.class_size()).unwrap(), initial)
}

fn bernstein(p: &LearningProblem, initial: usize) -> Algorithm {
    Algorithm::germ(GapSpec::bernstein(p.class_size()).unwrap(), initial)
}

fn randomized(p: &LearningProblem, initial: usize) -> Algorithm {
    Algorithm::germ(GapSpec::uniform(RademacherBoundMode::EmpiricalMcDiarmid, p.class_size()).unwrap(), initial)
}

fn exact_monotonicity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut curves = 0;
    for s in small_scenarios() {
        let p = &s.problem;
        for h0 in 0..p.class_size() {
            for algo in [massart(p, h0), bernstein(p, h0)] {
                let c = exact_risk_curve(p, &algo, 8).unwrap();
                worst = worst.max(check_monotone(&c, Tolerance::Absolute(EXACT_TOLERANCE)).unwrap().max_increase);
                curves += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= EXACT_TOLERANCE && t < Duration::from_secs(60),
        format!("{curves} curves, max adjacent increase {worst:e}, {:.2}s", t.as_secs_f64()),
    )
}

fn erm_witness() -> Outcome {
    let start = Instant::now();
    let s3 = find_scenario("S3").unwrap();
    let record = s3.witness.clone().unwrap();
    let found = research_witness(&record).unwrap();
    let reproduced = found.is_some_and(|f| f.probs() == s3.problem.probs() && f.loss() == s3.problem.loss());
    let curve = exact_risk_curve(&s3.problem, &Algorithm::PlainErm, 8).unwrap();
    let biggest = erm_violations(&curve).iter().map(|v| v.increase).fold(0.0, f64::max);
    let t = start.elapsed();
    outcome(
        reproduced && biggest > 1e-9 && t < Duration::from_secs(60),
        format!(
            "re-search from seed {} reproduced={reproduced}, largest ERM increase {biggest:.6}, {:.2}s",
            record.seed,
            t.as_secs_f64()
        ),
    )
}

fn mc_monotonicity() -> Outcome {
    let start = Instant::now();
    let cfg = McConfig::on_grid(REPLICATIONS, 3, vec![10, 20, 50, 100, 200]).unwrap();
    let mut violations = 0;
    let mut curves = 0;
    for id in ["S2", "S5"] {
        let p = find_scenario(id).unwrap().problem;
        for h0 in 0..p.class_size() {
            let c = mc_risk_curve(&p, &randomized(&p, h0), &cfg).unwrap();
            violations += check_monotone(&c, Tolerance::PooledStdErr(K_SIGMA)).unwrap().violations.len();
            curves += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        violations == 0 && t < Duration::from_secs(300),
        format!("{curves} curves, {violations} increases beyond 3 pooled SE, {:.2}s", t.as_secs_f64()),
    )
}

fn coverage_lines(
    ids: &[&str],
    algo: impl Fn(&LearningProblem) -> Algorithm,
    event: CoverageEvent,
    seed: u64,
) -> (bool, String) {
    let cfg = McConfig::on_grid(REPLICATIONS, seed, vec![50, 200]).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for id in ids {
        let p = find_scenario(id).unwrap().problem;
        let report = mc_bound_coverage(&p, &algo(&p), event, &cfg, None).unwrap();
        for row in &report.rows {
            ok &= row.passes(K_SIGMA);
            parts.push(format!("{id}@{}={:.4}(floor {:.4})", row.n, row.coverage, row.level));
        }
    }
    (ok, parts.join(" "))
}

fn thm2_coverage() -> Outcome {
    let (ok, detail) = coverage_lines(&["S2", "S5"], |p| randomized(p, 0), CoverageEvent::Thm2ExcessBound, 4);
    outcome(ok, detail)
}

fn prop1_coverage() -> Outcome {
    let mut worst_margin = f64::INFINITY;
    let mut cases = 0;
    for s in small_scenarios() {
        for k in 1..=6 {
            for delta in [0.1, 0.25, 0.5] {
                let frac = prop1_exceedance(&s.problem, k, delta).unwrap();
                worst_margin = worst_margin.min(delta - frac);
                cases += 1;
            }
        }
    }
    outcome(worst_margin >= 0.0, format!("{cases} exact cases, min(δ - exceedance) = {worst_margin:.6}"))
}

fn bernstein_coverage() -> Outcome {
    let ids: Vec<String> = builtin_scenarios().unwrap().into_iter().map(|s| s.id).collect();
    let ids: Vec<&str> = ids.iter().map(String::as_str).collect();
    let (ok, detail) =
        coverage_lines(&ids, |_| Algorithm::PlainErm, CoverageEvent::EmpBernsteinPairwise(0.1), 6);
    outcome(ok, detail)
}

fn minimizer_lemma() -> Outcome {
    let mut rng = stream_rng(7, 0);
    let grid: Vec<f64> = (1..=100_000).map(|i| 0.5 * i as f64 / 100_000.0).collect();
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..1000 {
        let a = 10f64.powf(rng.random_range(-2.0..2.0));
        let b = 10f64.powf(rng.random_range(-2.0..2.0));
        let beta: f64 = rng.random_range(0.0..1.0);
        let p = 1.0 / (1.0 - beta);
        let grid_min = grid.iter().map(|&eta| a * eta.powf(p) + b / eta).fold(f64::INFINITY, f64::min);
        worst = worst.min(minimizer_bound(a, b, beta).unwrap() - grid_min);
    }
    outcome(worst >= -1e-9, format!("1000 triples, min slack {worst:.6e}"))
}

fn rate_decay() -> Outcome {
    let cfg = McConfig::on_grid(REPLICATIONS, 8, vec![50, 100, 200, 500, 1000, 2000]).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (tag, threshold) in [(Tag::WorstCase, -0.35), (Tag::Massart, -0.6)] {
        for s in builtin_scenarios().unwrap().into_iter().filter(|s| s.has_tag(tag)) {
            let (_, fit) = excess_risk_decay(&s.problem, &bernstein(&s.problem, 0), &cfg).unwrap();
            let slope = fit.slope();
            ok &= slope.is_some_and(|v| v <= threshold);
            parts.push(format!("{}({tag}) slope={} need<={threshold}", s.id, slope.map_or("degenerate".into(), |v| format!("{v:.3}"))));
        }
    }
    outcome(ok && parts.len() >= 2, parts.join(" "))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let configs = [
        format!(
            r#"{{"scenario":"S5","algorithm":{{"kind":"germ","gap":{{"uniform_convergence":"empirical_mc_diarmid"}},"initial":2}},
                "engine":{{"kind":"mc","replications":2000,"seed":42,"grid":[10,20,50,100,200]}},
                "checks":[{{"kind":"monotone"}},{{"kind":"coverage","event":"thm2"}},{{"kind":"coverage","event":"emp-bernstein(0.1)"}}],
                "output_dir":{out:?},"dump_trajectory":true}}"#
        ),
        format!(
            r#"{{"scenario":"S6","algorithm":{{"kind":"germ","gap":"empirical_bernstein"}},
                "engine":{{"kind":"mc","replications":1000,"seed":9,"grid":[50,100,500]}},
                "checks":[{{"kind":"decay","beta":0.0}}],"output_dir":{out:?}}}"#
        ),
        format!(
            r#"{{"scenario":"S3","algorithm":{{"kind":"erm"}},"engine":{{"kind":"exact","n_max":8}},
                "checks":[{{"kind":"monotone"}}],"output_dir":{out:?}}}"#
        ),
    ];
    let mut identical = true;
    for text in &configs {
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let snapshot = |workers| {
            let r = run_experiment_with_workers(&cfg, workers).unwrap();
            (fs::read(&r.curve_path).unwrap(), fs::read(&r.report_path).unwrap())
        };
        let runs = [snapshot(1), snapshot(8), snapshot(1), snapshot(8)];
        identical &= runs.iter().all(|r| *r == runs[0]);
    }
    outcome(identical, format!("{} configs x 4 runs at 1 and 8 workers", configs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("exact GERM monotonicity", exact_monotonicity),
        ("ERM non-monotonicity witness", erm_witness),
        ("MC monotonicity, randomized estimator", mc_monotonicity),
        ("excess-risk bound coverage", thm2_coverage),
        ("Rademacher deviation coverage (exact)", prop1_coverage),
        ("pairwise empirical Bernstein coverage", bernstein_coverage),
        ("minimizer lemma", minimizer_lemma),
        ("excess-risk rate decay", rate_decay),
        ("run determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("acceptance {} [{}] {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
