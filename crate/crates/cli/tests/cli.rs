use std::process::{Command, Output};

fn tetilla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tetilla"))
        .args(args)
        .env_remove("TETILLA_CAPACITY")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn closed_moments_table() {
    let o = tetilla(&["moments", "--source", "closed", "--max-order", "6"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.lines().last(), Some("6, 33/4, 8.25"));
    assert_eq!(s.lines().next(), Some("2, 1, 1.0"));
}

#[test]
fn all_sources_agree_to_order_twelve() {
    let tables: Vec<String> = ["closed", "algorithm", "nc", "kernel"]
        .iter()
        .map(|src| {
            let o = tetilla(&["moments", "--source", src, "--max-order", "12"]);
            assert!(o.status.success(), "{src}");
            stdout(&o)
        })
        .collect();
    assert_eq!(tables[0].lines().count(), 11);
    assert!(tables[0].contains("10, 2033/16, 127.0625\n"));
    assert!(tables[0].ends_with("12, 17485/32, 546.40625\n"));
    for t in &tables[1..] {
        assert_eq!(t, &tables[0]);
    }
}

#[test]
fn kernel_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("tetilla-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("reference.json");
    let o = tetilla(&["kernel", "--emit-reference", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let o = tetilla(&["moments", "--source", "kernel", "--kernel", path.to_str().unwrap(), "--max-order", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "2, 1, 1.0\n");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn lm1_verification_is_exact() {
    let o = tetilla(&["verify", "--suite", "lm1", "--q", "2", "--grid", "2", "--seed", "1", "--reps", "50", "--mode", "rational"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 50);
    assert!(entries.iter().all(|e| e["discrepancy"] == "0" && e["passed"] == true));
}

#[test]
fn verification_is_deterministic() {
    let args = ["verify", "--suite", "all", "--q", "3", "--grid", "2", "--seed", "5", "--reps", "2", "--mode", "float"];
    let a = tetilla(&args);
    let b = tetilla(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn density_csv() {
    let o = tetilla(&["density", "--points", "11", "--compare-stieltjes"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "t,h,h_stieltjes,delta");
    assert_eq!(lines.len(), 12);
    // interior points away from the edges
    for l in &lines[2..lines.len() - 1] {
        let delta: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
        assert!(delta < 1e-4, "{l}");
    }
}

#[test]
fn check_theorem_csv() {
    let o = tetilla(&["check-theorem", "--family", "constant-reference", "--n-max", "2", "--order-cap", "4"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.lines().count(), 3);
    assert!(s.lines().nth(1).unwrap().starts_with("1,5/2,33/4,"));
}

#[test]
fn simulate_is_seeded() {
    let args = ["simulate", "--N", "24", "--trials", "5", "--seed", "3", "--kmax", "4"];
    let a = tetilla(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, tetilla(&args).stdout);
    assert!(stdout(&a).starts_with("k,estimate,stderr,target,z_score\n"));
    let alt = tetilla(&["simulate", "--N", "24", "--trials", "5", "--seed", "3", "--kmax", "4", "--alt-representation"]);
    assert!(alt.status.success());
    assert_ne!(alt.stdout, a.stdout);
}

#[test]
fn exit_codes() {
    let usage = tetilla(&["moments", "--source", "closed", "--max-order", "5"]);
    assert_eq!(usage.status.code(), Some(1));
    let stderr = String::from_utf8(usage.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1);
    assert_eq!(tetilla(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(tetilla(&["verify", "--suite", "nope", "--q", "2", "--grid", "2"]).status.code(), Some(1));
    assert_eq!(tetilla(&["check-theorem", "--family", "semicircular-control", "--n-max", "17"]).status.code(), Some(3));
    let capped = Command::new(env!("CARGO_BIN_EXE_tetilla"))
        .args(["moments", "--source", "kernel", "--max-order", "8"])
        .env("TETILLA_CAPACITY", "10")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
    assert_eq!(tetilla(&["simulate", "--N", "4096", "--trials", "2"]).status.code(), Some(3));
}
