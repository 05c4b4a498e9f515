//! Exit-code contract and output-shape checks for the binary.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rdeq")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/binary_bsc.json")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rdeq-contract-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

fn run(args: &[String]) -> std::process::Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn gaussian_emits_one_row_per_feasible_cell() {
    let dir = scratch("gauss");
    let out = dir.join("sweep.csv");
    let status = run(&[
        "gaussian".into(),
        "--var-x=1".into(),
        "--var-n1=1".into(),
        "--var-n2=1".into(),
        "--distortion=0.5".into(),
        "--grid=50".into(),
        format!("--out={}", out.display()),
    ]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let data_rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("r1,"))
        .count();

    // Row count equals the feasible cells of the same 50x50 grid.
    let params = rdeq_core::gaussian::GaussianParams::no_side_info(1.0, 1.0, 1.0).unwrap();
    let expect = rdeq_core::gaussian::boundary_sweep(&params, 0.5, 50)
        .unwrap()
        .len();
    assert!(data_rows > 0 && data_rows < 2500);
    assert_eq!(data_rows, expect);

    // Without --var-ne the secrecy gain columns are all zero.
    let zero_cols = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("r1,"))
        .all(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            cols[11].parse::<f64>().unwrap() == 0.0 && cols[12].parse::<f64>().unwrap() == 0.0
        });
    assert!(zero_cols, "T columns must be zero without side information");

    // The header embeds version, command line, seed, and source hash slot.
    assert!(text.starts_with("# rdeq "));
    assert!(text.contains("# seed: 0"));
    assert!(text.contains("# source_sha256: -"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn infeasible_distortion_exits_2_and_reports_the_limit() {
    let dir = scratch("gauss2");
    let out = run(&[
        "gaussian".into(),
        "--var-x=1".into(),
        "--var-n1=1".into(),
        "--var-n2=1".into(),
        "--distortion=1e-9".into(),
        "--grid=10".into(),
        format!("--out={}", dir.join("x.csv").display()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("limit"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn discrete_minimal_budget_yields_single_point_files() {
    let dir = scratch("disc");
    let out_csv = dir.join("f.csv");
    let out = run(&[
        "discrete".into(),
        format!("--config={}", fixture().display()),
        "--mode=inner".into(),
        "--axes=Delta1,R2".into(),
        "--budget=1,1".into(),
        "--grid=1".into(),
        "--seed=3".into(),
        format!("--out={}", out_csv.display()),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let data_rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("R1,"))
        .collect();
    assert_eq!(data_rows.len(), 1, "single-point frontier expected");

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("f.json")).unwrap()).unwrap();
    assert_eq!(json["frontier"]["provenance"].as_array().unwrap().len(), 1);
    assert!(json["frontier"]["provenance"][0]["aux"]["u1_given_y1"].is_array());
    assert_eq!(json["meta"]["seed"], 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn discrete_outer_mode_runs() {
    let dir = scratch("disc-outer");
    let out = run(&[
        "discrete".into(),
        format!("--config={}", fixture().display()),
        "--mode=outer".into(),
        "--axes=Delta1,R2".into(),
        "--budget=2,10".into(),
        "--grid=3".into(),
        "--seed=5".into(),
        format!("--out={}", dir.join("o.csv").display()),
    ]);
    assert!(out.status.success());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn discrete_accepts_explicit_cards_and_rejects_cap_violations() {
    let dir = scratch("disc-cards");
    let base = |cards: &str, out: &Path| -> Vec<String> {
        vec![
            "discrete".into(),
            format!("--config={}", fixture().display()),
            "--mode=inner".into(),
            "--axes=Delta1,R2".into(),
            "--budget=1,5".into(),
            "--grid=2".into(),
            "--seed=2".into(),
            format!("--cards={cards}"),
            format!("--out={}", out.display()),
        ]
    };
    let out = run(&base("1,3,2,2", &dir.join("c.csv")));
    assert!(out.status.success());
    // |V1| = 12 exceeds the admissible cap for a binary observation.
    let out = run(&base("12,2,2,2", &dir.join("d.csv")));
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn simulate_dry_run_validates_and_exits_0() {
    let out = run(&[
        "simulate".into(),
        format!("--config={}", fixture().display()),
        "--n=4".into(),
        "--rates=0,0.5,0,0.5".into(),
        "--trials=0".into(),
        "--seed=1".into(),
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(json["summary"]["trials"], 0);
    assert!(json["summary"]["mean_distortion"].is_null());
}

#[test]
fn simulate_enumeration_cap_exits_3() {
    let out = run(&[
        "simulate".into(),
        format!("--config={}", fixture().display()),
        "--n=20".into(),
        "--rates=0,1,0,1".into(),
        "--trials=1".into(),
        "--seed=1".into(),
        "--equivocation".into(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("enumeration cap"), "stderr: {stderr}");
}

#[test]
fn enum_cap_env_var_is_honored() {
    // A cap of 1 blocks even tiny codebooks.
    let out = Command::new(bin())
        .env("RDEQ_ENUM_CAP", "1")
        .args([
            "simulate".to_string(),
            format!("--config={}", fixture().display()),
            "--n=2".into(),
            "--rates=0,0.5,0,0.5".into(),
            "--trials=1".into(),
            "--seed=1".into(),
        ])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_exit_codes() {
    // Unknown and empty suite names are usage errors.
    for suite in ["", "bogus"] {
        let out = run(&[
            "verify".into(),
            format!("--suite={suite}"),
            "--seed=1".into(),
        ]);
        assert_eq!(out.status.code(), Some(64), "suite `{suite}`");
    }

    // A passing suite exits 0 and reports max deviations.
    let out = run(&[
        "verify".into(),
        "--suite=gaussian-reduction".into(),
        "--seed=1".into(),
    ]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(json["report"]["pass"], true);
    assert!(json["report"]["checks"][0]["max_deviation"].is_number());
}

#[test]
fn usage_errors_exit_64() {
    // Unknown flag.
    let out = run(&["gaussian".into(), "--bogus=1".into()]);
    assert_eq!(out.status.code(), Some(64));
    // Malformed list flag.
    let out = run(&[
        "discrete".into(),
        format!("--config={}", fixture().display()),
        "--mode=inner".into(),
        "--axes=Delta1".into(),
        "--budget=1,1".into(),
        "--seed=1".into(),
        "--out=/tmp/never.csv".into(),
    ]);
    assert_eq!(out.status.code(), Some(64));
    // Bad source file data is an input error, not usage.
    let dir = scratch("badsrc");
    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        std::fs::read_to_string(fixture())
            .unwrap()
            .replace("[0.9, 0.1]", "[-0.1, 1.1]"),
    )
    .unwrap();
    let out = run(&[
        "discrete".into(),
        format!("--config={}", bad.display()),
        "--mode=inner".into(),
        "--axes=Delta1,R2".into(),
        "--budget=1,1".into(),
        "--seed=1".into(),
        format!("--out={}", dir.join("n.csv").display()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("py1_x"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}
