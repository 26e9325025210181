use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heralink")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn csv_output_starts_with_provenance_header() {
    let out = stdout(&["--seed", "7", "budget"]);
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("# config_sha256="), "{first}");
    assert!(first.ends_with(" seed=7"), "{first}");
    let hash = first.trim_start_matches("# config_sha256=").split(' ').next().unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn pump_sweep_has_one_row_per_point() {
    let out = stdout(&["source", "--sweep", "pump"]);
    let g2: Vec<f64> = column(&out, "g2").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(g2.len(), 10);
    assert!(g2.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn empty_pump_sweep_prints_header_only() {
    let out = stdout(&["source", "--sweep", "pump", "--pair-probs"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("pair_prob,"));
}

#[test]
fn tomography_reconstructs_calibrated_fidelity() {
    let v = json(&["--format", "json", "source", "--tomography", "--node", "b"]);
    let r = &v["result"];
    let rec = r.as_array().map(|a| &a[0]).unwrap_or(r);
    let f = rec["fidelity"].as_f64().unwrap();
    let model = rec["model_fidelity"].as_f64().unwrap();
    assert!((model - 0.933).abs() < 1e-9, "{model}");
    assert!((f - model).abs() < 0.01, "{f} vs {model}");
    assert!(rec["witness"].as_f64().unwrap() < 0.0);
}

#[test]
fn swap_fidelity_rises_as_g2_grows() {
    let out = stdout(&["swap"]);
    let f: Vec<f64> = column(&out, "fidelity").iter().map(|s| s.parse().unwrap()).collect();
    let s: Vec<f64> = column(&out, "chsh").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(f.len(), 3);
    assert!(f[0] < f[1] && f[1] < f[2]);
    assert!(s.iter().all(|&x| x <= 2.0 * 2f64.sqrt() + 1e-9));
}

#[test]
fn link_summary_reports_budget_and_entangled_state() {
    let v = json(&["--format", "json", "link"]);
    let r = &v["result"];
    assert!((r["heralding_margin_ns"].as_f64().unwrap() - 11.6).abs() < 1e-9);
    assert!((r["edr_analytic_per_h"].as_f64().unwrap() - 1.27).abs() < 0.01);
    assert!(r["monte_carlo"]["witness"]["value"].as_f64().unwrap() < 0.0);
    assert_eq!(v["seed"], 1);
}

#[test]
fn reruns_are_byte_identical() {
    let a = run(&["--format", "json", "--seed", "3", "--jobs", "1", "link"]);
    let b = run(&["--format", "json", "--seed", "3", "--jobs", "4", "link"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_directory_receives_file() {
    let dir = std::env::temp_dir().join(format!("heralink-cli-{}", std::process::id()));
    let out = run(&["--out", dir.to_str().unwrap(), "budget"]);
    assert!(out.status.success());
    let files: Vec<_> = std::fs::read_dir(&dir).unwrap().collect();
    assert_eq!(files.len(), 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_config_names_offending_key() {
    let path = std::env::temp_dir().join(format!("heralink-bad-{}.json", std::process::id()));
    let mut v: serde_json::Value = serde_json::from_str(include_str!("../../../scenarios/published-defaults.json")).unwrap();
    v["bsm_detectors"]["efficiency"] = serde_json::json!(1.7);
    std::fs::write(&path, v.to_string()).unwrap();
    let out = run(&["--config", path.to_str().unwrap(), "budget"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bsm_detectors.efficiency"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn sweep_axes_produce_requested_points() {
    for axis in ["efficiency", "storage-time"] {
        let out = stdout(&["sweep", "--axis", axis, "--points", "5"]);
        assert_eq!(out.lines().count(), 2 + 5, "{axis}");
    }
    let modes = stdout(&["sweep", "--axis", "modes"]);
    assert_eq!(modes.lines().count(), 2 + 55);
}
