use std::fs;
use std::path::Path;
use std::process::Command;

use hh_cli::{run, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};
use hh_core::io::to_json_string;
use hh_core::HhReport;
use tempfile::tempdir;

fn hh(args: &[&str]) -> i32 {
    run(std::iter::once("hh").chain(args.iter().copied()))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn verify_disk_passes_with_c2_near_one() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("disk.json");
    let code = hh(&["verify", "--family", "disk", "--n", "512", "--h", "0.01", "--levels", "3", "--out", path_str(&out)]);
    assert_eq!(code, EXIT_OK);

    let text = fs::read_to_string(&out).unwrap();
    let report: HhReport = serde_json::from_str(&text).unwrap();
    assert!((report.c2 - 1.0).abs() < 1e-2, "c2 = {}", report.c2);
    assert!(report.bound_margins.iter().all(|b| b.margin > -b.error));
    // Re-serializing a parsed report reproduces the file byte for byte.
    assert_eq!(to_json_string(&report).unwrap() + "\n", text);
}

#[test]
fn nonconvex_polygon_is_an_input_error() {
    let dir = tempdir().unwrap();
    let poly = dir.path().join("nonconvex.json");
    fs::write(&poly, r#"{"vertices": [[0, 0], [2, 0], [1, 0.2], [1, 2]]}"#).unwrap();
    assert_eq!(hh(&["verify", "--polygon", path_str(&poly)]), EXIT_INPUT);
}

#[test]
fn bad_flags_are_input_errors() {
    assert_eq!(hh(&["verify", "--bogus"]), EXIT_INPUT);
    assert_eq!(hh(&["verify"]), EXIT_INPUT);
    assert_eq!(hh(&["verify", "--family", "square", "--polygon", "p.json"]), EXIT_INPUT);
    assert_eq!(hh(&["verify", "--family", "square", "--alphas", "0,3"]), EXIT_INPUT);
    assert_eq!(hh(&["verify", "--family", "square", "--levels", "1"]), EXIT_INPUT);
    assert_eq!(hh(&["verify", "--family", "square", "--h0=-1"]), EXIT_INPUT);
    assert_eq!(hh(&["solve", "--family", "simplex", "--eta", "0"]), EXIT_INPUT);
    assert_eq!(hh(&["--help"]), EXIT_OK);
}

#[test]
fn sweep_eta_csv_is_increasing_and_below_two() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("eta.csv");
    let code = hh(&["sweep-eta", "--etas", "2,4,8,16,32", "--out", path_str(&out), "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let (header, rows) = read_csv(&out);
    let col = header.iter().position(|h| h == "c2").unwrap();
    let c2: Vec<f64> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
    assert_eq!(c2.len(), 5);
    assert!(c2.windows(2).all(|w| w[1] > w[0]), "{c2:?}");
    assert!(c2.iter().all(|&c| c < 2.0));
    assert!(header.iter().any(|h| h == "margin_c2_upper"));
}

#[test]
fn sweep_rect_series_reports_slope() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("rect.json");
    let code = hh(&["sweep-rect", "--rs", "4,8,16,32,64", "--alpha", "1", "--out", path_str(&out)]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() < 0.05, "slope {slope}");

    let csv = dir.path().join("rect.csv");
    assert_eq!(hh(&["sweep-rect", "--rs", "4,8", "--out", path_str(&csv), "--format", "csv"]), EXIT_OK);
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, ["R", "c_alpha", "D_over_r"]);
    assert_eq!(rows.len(), 2);
}

#[test]
fn hh_ratio_on_square() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("ratios.csv");
    assert_eq!(hh(&["hh-ratio", "--family", "square", "--out", path_str(&out), "--format", "csv"]), EXIT_OK);
    let (header, rows) = read_csv(&out);
    assert_eq!(header[..2], ["name", "ratio"]);
    assert!(!rows.is_empty());
    for r in &rows {
        let rho: f64 = r[1].parse().unwrap();
        assert!(rho <= 2.0, "{} {rho}", r[0]);
    }
}

#[test]
fn solve_csv_has_one_row_per_level() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("levels.csv");
    let code = hh(&["solve", "--family", "rect", "--R", "2", "--h0", "0.0625", "--levels", "3", "--format", "csv", "--out", path_str(&out)]);
    assert_eq!(code, EXIT_OK);
    let (header, rows) = read_csv(&out);
    assert_eq!(header[0], "h");
    assert_eq!(rows.len(), 3);
}

#[test]
fn oracle_check_on_square() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("oracle.json");
    assert_eq!(hh(&["oracle-check", "--out", path_str(&out)]), EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["rel_err_u_max"].as_f64().unwrap() < 1e-3);
    // An impossible tolerance turns the regression into a violation.
    assert_eq!(hh(&["oracle-check", "--rel-tol", "1e-15", "--out", path_str(&out)]), EXIT_VIOLATION);
}

#[test]
fn box_limit_series_below_half() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("box.json");
    assert_eq!(hh(&["box-limit", "--eps", "0.1", "--r", "4", "--out", path_str(&out)]), EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let s = v["series"].as_f64().unwrap();
    assert!(s > 0.44 && s <= 0.45, "{s}");
    assert!(v["solver"].is_null());
}

#[test]
fn search_is_reproducible() {
    let dir = tempdir().unwrap();
    let run_once = |tag: &str| {
        let out = dir.path().join(format!("{tag}.json"));
        let hist = dir.path().join(format!("{tag}.jsonl"));
        let code = hh(&[
            "search", "--n", "5", "--iters", "15", "--seed", "7", "--h0", "0.0625", "--levels", "2",
            "--history", path_str(&hist), "--out", path_str(&out),
        ]);
        assert_eq!(code, EXIT_OK);
        (fs::read_to_string(out).unwrap(), fs::read_to_string(hist).unwrap())
    };
    let (a, ha) = run_once("a");
    let (b, hb) = run_once("b");
    assert_eq!(a, b);
    assert_eq!(ha, hb);
    let objectives: Vec<f64> = ha
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["objective"].as_f64().unwrap())
        .collect();
    assert!(objectives.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hh");
    let st = Command::new(bin).args(["solve", "--nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_INPUT));
    let st = Command::new(bin)
        .args(["solve", "--family", "square", "--h0", "0.0625", "--levels", "2"])
        .env("HH_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8(st.stdout).unwrap().contains("\"u_max\""));
    let st = Command::new(bin)
        .args(["solve", "--family", "square"])
        .env("HH_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(EXIT_INPUT));
}
