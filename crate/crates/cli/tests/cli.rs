use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonoverlap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bounds_csv_has_header_and_rows() {
    let o = run(&["bounds", "--n", "2,3", "--gamma", "0.1,1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "n,gamma,alphas,theorem1,corollary1,corollary2,corollary3,corollary4,consistency"
    );
    assert_eq!(lines.len(), 5);
    let row: Vec<&str> = lines[2].split(',').collect();
    assert_eq!((row[0], row[1]), ("2", "1"));
    let c1: f64 = row[4].parse().unwrap();
    assert!((c1 - 0.912356).abs() < 1e-6);
    // corollary 3 only applies for small gamma
    assert!(row[6].is_empty());
    assert!(!lines[1].split(',').nth(6).unwrap().is_empty());
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(run(&["bounds", "--gamma", "2.5"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--n", "1"]).status.code(), Some(1));
    assert_eq!(run(&["radius", "/nonexistent/domains.json"]).status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("selfcheck"));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for (p, workers) in [(&a, "1"), (&b, "2")] {
        let o = run(&[
            "--workers", workers, "verify", "--n", "4", "--gamma", "0.5", "--trials", "50", "--seed", "11",
            "--out", p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("violations=0"));
    }
    assert_eq!(fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
}

#[test]
fn optimize_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("trace.csv");
    let o = run(&["optimize", "--n", "3", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let trace = fs::read_to_string(&p).unwrap();
    assert!(trace.starts_with("iteration,objective,gradient_norm,step\n"));
    assert!(trace.lines().count() > 1);
}

#[test]
fn extremal_domains_round_trip_through_radius() {
    let dir = tempfile::tempdir().unwrap();
    let (json, svg, out) = (
        dir.path().join("domains.json"),
        dir.path().join("field.svg"),
        dir.path().join("radii.json"),
    );
    let o = run(&[
        "extremal", "--n", "3", "--step", "2e-3", "--json", json.to_str().unwrap(), "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let o = run(&["radius", json.to_str().unwrap(), "--samples", "4000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let est: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let est = est.as_array().unwrap();
    assert_eq!(est.len(), 4);
    for e in est {
        let v = e["value"].as_f64().unwrap();
        assert!(v > 0.0 && v.is_finite());
        assert!(e["std_error"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn selfcheck_passes() {
    let o = run(&["selfcheck"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("FAILED"));
}
