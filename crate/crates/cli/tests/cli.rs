use std::process::{Command, Output};

fn pdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

#[test]
fn rate_curve_crosses_zero_near_eighteen_percent() {
    let o = pdc(&["rates", "--mix-grid", "0:0.25:0.01"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("mix,r1,r2,r3,r\n0,2,0,0,2\n"));
    let mix: Vec<f64> = column(&text, "mix")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    let r: Vec<f64> = column(&text, "r")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    let i = r.iter().position(|&v| v <= 0.0).unwrap();
    assert!(
        mix[i - 1] >= 0.17 && mix[i] <= 0.19,
        "{} {}",
        mix[i - 1],
        mix[i]
    );
    assert!((r[5] - 1.2165).abs() < 1e-3);
}

#[test]
fn finite_table_at_a_million_uses() {
    let o = pdc(&["finite", "--n-grid", "100000,1000000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let r: Vec<f64> = column(&text, "r")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(r[0] < r[1] && (r[1] - 1.2165).abs() < 0.05);
    let r3: Vec<f64> = column(&text, "r3")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(r3[1] < r3[0]);
}

#[test]
fn json_output_and_files_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "p = 2\nn = 4\nn2 = 1\nn3 = 2\ncode = repetition:2\nmix_bob_to_alice = 0.05\nmix_alice_to_bob = 0.05\n").unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = pdc(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--trials",
            "300",
            "--dump",
            "2",
            "--seed",
            "5",
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["stats"]["trials"], 300);
    assert_eq!(v["transcripts"].as_array().unwrap().len(), 2);
    assert_eq!(v["config"]["code"], "repetition:2");
}

#[test]
fn noiseless_simulation_never_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quiet.cfg");
    std::fs::write(&cfg, "p = 3\nn = 2\nn2 = 1\nn3 = 1\n").unwrap();
    let o = pdc(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "200",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    assert_eq!(column(&stdout(&o), "count")[0], "0");
}

#[test]
fn exact_estimation_has_no_error() {
    let o = pdc(&[
        "estimate", "--p", "5", "--mix", "0.3", "--shots", "0", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["tv_to_truth"].as_f64().unwrap() < 1e-12);
}

#[test]
fn leakage_stays_below_the_bound() {
    let o = pdc(&[
        "leakage",
        "--n",
        "2",
        "--code",
        "repetition:2",
        "--eve-mix",
        "0.4",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let exact: f64 = column(&text, "exact")[0].parse().unwrap();
    let bound: f64 = column(&text, "bound")[0].parse().unwrap();
    assert!(exact <= bound);
}

#[test]
fn identities_pass_at_default_tolerance() {
    let o = pdc(&["verify-identities", "--count", "5"]);
    assert!(o.status.success());
    assert!(column(&stdout(&o), "ok").iter().all(|v| v == "true"));
}

#[test]
fn exit_codes() {
    assert_eq!(
        pdc(&["rates", "--mix-grid", "0.3:0.1:0.1"]).status.code(),
        Some(2)
    );
    assert_eq!(pdc(&["rates", "--p", "4"]).status.code(), Some(2));
    assert_eq!(pdc(&["bogus"]).status.code(), Some(2));
    assert_eq!(pdc(&["leakage", "--n", "20"]).status.code(), Some(4));
    let o = pdc(&[
        "finite", "--mix", "0.7", "--eps-c", "1e-9", "--n-grid", "50,1000",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(column(&stdout(&o), "feasible"), ["false", "false"]);
}

#[test]
fn infeasible_rows_are_flagged_not_dropped() {
    let o = pdc(&["finite", "--mix", "0.05", "--n-grid", "10,1000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(column(&text, "n"), ["10", "1000"]);
    assert!(column(&text, "r")[0].starts_with('-'));
}
