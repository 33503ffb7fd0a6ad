use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wynersim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wynersim"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tx_line<'a>(transcript: &'a str, header: &str, tx: usize) -> &'a str {
    let mut lines = transcript.lines().skip_while(|l| !l.contains(header));
    lines.next().unwrap_or_else(|| panic!("no slot {header}"));
    let prefix = format!("tx{tx}: ");
    lines
        .take_while(|l| !l.starts_with("slot "))
        .find_map(|l| l.trim_start().strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no tx{tx} under {header}"))
}

#[test]
fn simulate_writes_result_record() {
    let dir = tempfile::tempdir().unwrap();
    let o = wynersim(
        &["simulate", "--scheme", "cached", "--gamma", "1/5", "--k", "50", "--out", "run"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("run/result.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    for key in ["config", "metrics", "invariants", "failures"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let m = &v["metrics"];
    assert_eq!(m["slots"], 4);
    assert_eq!(m["backhaul_interior_files"], "6/5");
    assert_eq!(m["measured_pudof"], "1");
    assert!(v["failures"].as_array().unwrap().is_empty());
    assert!(v["invariants"]
        .as_object()
        .unwrap()
        .values()
        .all(|s| s == "pass"));
}

#[test]
fn simulate_without_out_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = wynersim(&["simulate", "--scheme", "nocache-B", "--x", "4", "--k", "45"], dir.path());
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["metrics"]["measured_pudof"], "8/9");
    assert_eq!(v["metrics"]["backhaul_interior_files"], "5/2");
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"scheme": "memory-share", "mt": 2, "gamma": "1/10", "k": 40}"#,
    )
    .unwrap();
    let o = wynersim(&["simulate", "--config", "c.json", "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["metrics"]["measured_pudof"], "27/28");
}

#[test]
fn unsupported_cache_fraction_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wynersim(&["simulate", "--scheme", "cached", "--gamma", "2/7"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("memory-share"));
}

#[test]
fn unknown_config_field_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"scheme": "cached", "gama": "1/3"}"#).unwrap();
    let o = wynersim(&["simulate", "--config", "c.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn default_sweep_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = wynersim(&["sweep", "--out", "figs"], dir.path());
    assert!(o.status.success());
    let fig3 = fs::read_to_string(dir.path().join("figs/fig3.csv")).unwrap();
    let fig4 = fs::read_to_string(dir.path().join("figs/fig4.csv")).unwrap();
    assert_eq!(fig3.lines().next(), Some("mt,gamma,gamma_decimal,pudof,pudof_decimal"));
    assert_eq!(fig4.lines().next(), Some("mt,gamma,pudof,equivalent_nocache_mt,saturated"));
    assert_eq!(fig3.lines().count(), 1 + 3 * 73);
    assert!(fig3.lines().any(|l| l.starts_with("2,1/8,") && l.split(',').nth(3) == Some("1")));
    assert!(fig3.lines().any(|l| l.starts_with("2,1/10,") && l.split(',').nth(3) == Some("27/28")));
    let row: Vec<&str> = fig4
        .lines()
        .find(|l| l.starts_with("3,1/20,"))
        .unwrap()
        .split(',')
        .collect();
    assert_eq!(row[2], "95/99");
    let eq: f64 = row[3].parse().unwrap();
    assert!((eq - 6.442).abs() < 1e-3, "{eq}");
    assert_eq!(row[4], "0");
    let full: Vec<&str> = fig4.lines().find(|l| l.starts_with("1,1/4,")).unwrap().split(',').collect();
    assert_eq!(full[4], "1");
}

#[test]
fn sweep_verify_grid_simulates_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = wynersim(
        &["sweep", "--out", ".", "--mt-list", "2", "--gamma-grid", "0,1/16,1/8,1/5", "--verify-grid"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stdout(&o));
    let v: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify_grid.json")).unwrap()).unwrap();
    let checks = v.as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert_eq!(checks[1]["measured"], "45/49");
}

#[test]
fn empty_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wynersim(&["sweep", "--out", ".", "--gamma-grid", ""], dir.path());
    assert_ne!(o.status.code(), Some(0));
    assert!(!dir.path().join("fig3.csv").exists());
}

#[test]
fn transcript_matches_worked_slots() {
    let dir = tempfile::tempdir().unwrap();
    let o = wynersim(&["transcript", "--scheme", "cached", "--gamma", "1/5", "--k", "20"], dir.path());
    assert!(o.status.success());
    let t = stdout(&o);
    assert_eq!(tx_line(&t, "DN_1 phase 0", 1), "∅");
    assert_eq!(tx_line(&t, "DN_2 phase 0", 2), "−h_{1,2}·(W^{r1}_3 ⊕ W^{r3}_1)");
    assert_eq!(tx_line(&t, "DN_2 phase 2", 0), "W^{r1}_4");

    let o = wynersim(&["transcript", "--scheme", "nocache-B", "--x", "4", "--k", "45"], dir.path());
    let t = stdout(&o);
    assert_eq!(tx_line(&t, "t=0", 8), "∅");
    assert_eq!(tx_line(&t, "t=0", 7), "W^{r8}_0");
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(wynersim(&["sweep", "--out", "."], d.path()).status.success());
        let o = wynersim(
            &["simulate", "--scheme", "memory-share", "--mt", "2", "--gamma", "1/10", "--out", ".", "--transcript"],
            d.path(),
        );
        assert!(o.status.success());
    }
    for f in ["fig3.csv", "fig4.csv", "result.json", "transcript.txt"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}
