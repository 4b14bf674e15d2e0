use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn germ(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_germ"))
        .args(args)
        .env_remove("GERM_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn scenarios_list_has_one_line_per_scenario() {
    let o = germ(&["scenarios", "list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() >= 5);
    assert!(lines.iter().all(|l| l.contains("tags=")));
    assert!(lines[2].starts_with("S3 ") && lines[2].contains("erm-nonmonotone-witness"));
}

#[test]
fn bernstein_s2_beta_zero() {
    let o = germ(&["bernstein", "S2", "--beta", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("minimal_B=1.0"), "{}", stdout(&o));
    assert_eq!(germ(&["bernstein", "S2", "--beta", "2"]).status.code(), Some(2));
}

#[test]
fn rademacher_modes() {
    let o = germ(&["rademacher", "S2", "--k", "1", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("value=0.5"), "{}", stdout(&o));
    let o = germ(&["rademacher", "S2", "--k", "8", "--mode", "massart"]);
    let want = (2.0 * 2f64.ln() / 8.0).sqrt();
    assert!(stdout(&o).contains(&format!("value={want:?}")));
    assert_eq!(germ(&["rademacher", "S2", "--k", "4", "--mode", "empirical"]).status.code(), Some(2));
    let a = germ(&["rademacher", "S5", "--k", "20", "--mode", "empirical", "--seed", "5"]);
    let b = germ(&["rademacher", "S5", "--k", "20", "--mode", "empirical", "--seed", "5"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(germ(&["rademacher", "S4", "--k", "60", "--mode", "exact"]).status.code(), Some(3));
}

#[test]
fn check_monotone_on_hand_written_csv() {
    let dir = tempfile::tempdir().unwrap();
    let up = dir.path().join("up.csv");
    fs::write(&up, "n,value,stderr,kind,problem,algo,seed\n1,0.3,,exact,p,a,\n2,0.4,,exact,p,a,\n").unwrap();
    let o = germ(&["check-monotone", up.to_str().unwrap(), "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict=violated"));

    let down = dir.path().join("down.csv");
    fs::write(&down, "n,value,stderr,kind,problem,algo,seed\n1,0.4,,exact,p,a,\n2,0.3,,exact,p,a,\n").unwrap();
    assert_eq!(germ(&["check-monotone", down.to_str().unwrap(), "--tol", "1e-12"]).status.code(), Some(0));
    assert_eq!(germ(&["check-monotone", "/nonexistent.csv", "--tol", "0"]).status.code(), Some(2));
}

#[test]
fn run_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let ok = format!(
        r#"{{"scenario":"S1","algorithm":{{"kind":"germ","gap":{{"uniform_convergence":"massart_deterministic"}}}},
            "engine":{{"kind":"exact","n_max":6}},"checks":[{{"kind":"monotone"}}],"output_dir":{:?}}}"#,
        out.to_str().unwrap()
    );
    let o = germ(&["run", &write_config(dir.path(), &ok)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("passed=true"));
    assert!(out.join("curve.csv").exists() && out.join("report.json").exists());

    let s3 = ok.replace("\"S1\"", "\"S3\"").replace(
        r#"{"kind":"germ","gap":{"uniform_convergence":"massart_deterministic"}}"#,
        r#"{"kind":"erm"}"#,
    );
    assert_eq!(germ(&["run", &write_config(dir.path(), &s3)]).status.code(), Some(1));

    assert_eq!(germ(&["run", &write_config(dir.path(), "{ malformed")]).status.code(), Some(2));
    assert_eq!(germ(&["run", "/does/not/exist.json"]).status.code(), Some(2));
    assert_eq!(germ(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn mc_curve_requires_seed_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc");
    let out = out.to_str().unwrap();
    let base = ["curve", "S5", "--algo", "germ:empirical:1", "--engine", "mc", "--out", out, "--replications", "300"];
    assert_eq!(germ(&base).status.code(), Some(2));

    let mut args = base.to_vec();
    args.extend(["--seed", "11", "--workers", "1"]);
    assert_eq!(germ(&args).status.code(), Some(0));
    let csv1 = fs::read(Path::new(out).join("curve.csv")).unwrap();
    let rep1 = fs::read(Path::new(out).join("report.json")).unwrap();
    args.truncate(args.len() - 1);
    args.push("8");
    assert_eq!(germ(&args).status.code(), Some(0));
    assert_eq!(csv1, fs::read(Path::new(out).join("curve.csv")).unwrap());
    assert_eq!(rep1, fs::read(Path::new(out).join("report.json")).unwrap());
}

#[test]
fn data_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("index.json"),
        r#"[{"id":"T1","file":"t1.json","tags":["realizable"],"note":"tiny"}]"#,
    )
    .unwrap();
    fs::write(dir.path().join("t1.json"), r#"{"name":"T1","probs":[1.0],"losses":[[0.0],[1.0]]}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_germ"))
        .args(["scenarios", "list"])
        .env("GERM_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "T1 m=1 H=2 tags=realizable\n");
}
