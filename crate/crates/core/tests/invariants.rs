use std::time::{Duration, Instant};

use germ_core::gap::GapSpec;
use germ_core::germ::Algorithm;
use germ_core::montecarlo::{mc_bound_coverage, mc_risk_curve, CoverageEvent, McConfig};
use germ_core::oracle::{check_monotone, Tolerance};
use germ_core::rademacher::RademacherBoundMode;
use germ_core::scenarios::{builtin_scenarios, find_scenario};

#[test]
fn mc_germ_curves_never_rise_beyond_three_pooled_se() {
    let cfg = McConfig::on_grid(20_000, 21, vec![10, 20, 50, 100, 200]).unwrap();
    for s in builtin_scenarios().unwrap() {
        let h = s.problem.class_size();
        let gaps = [
            GapSpec::uniform(RademacherBoundMode::MassartDeterministic, h).unwrap(),
            GapSpec::uniform(RademacherBoundMode::EmpiricalMcDiarmid, h).unwrap(),
            GapSpec::bernstein(h).unwrap(),
        ];
        for gap in gaps {
            let algo = Algorithm::germ(gap, 0);
            let curve = mc_risk_curve(&s.problem, &algo, &cfg).unwrap();
            let report = check_monotone(&curve, Tolerance::PooledStdErr(3.0)).unwrap();
            assert!(report.violations.is_empty(), "{} {}: {:?}", s.id, algo.label(), report.violations);
        }
    }
}

#[test]
fn pairwise_bernstein_coverage_on_three_outcome_problem() {
    let p = find_scenario("S5").unwrap().problem;
    let cfg = McConfig::on_grid(20_000, 5, vec![100]).unwrap();
    let r = mc_bound_coverage(&p, &Algorithm::PlainErm, CoverageEvent::EmpBernsteinPairwise(0.1), &cfg, None).unwrap();
    // measured: every replication satisfies all pairwise inequalities
    assert_eq!(r.rows[0].coverage, 1.0);
    assert!(r.rows[0].coverage >= 0.9 - 0.01);
}

#[test]
fn registry_reverifies_quickly() {
    let start = Instant::now();
    let all = builtin_scenarios().unwrap();
    for s in &all {
        s.verify().unwrap();
    }
    assert!(start.elapsed() < Duration::from_secs(60));
}
