use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qnrate(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnrate"))
        .args(args)
        .current_dir(dir)
        .env_remove("QNRATE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn records(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn num(cell: &str) -> f64 {
    cell.parse().unwrap_or_else(|_| panic!("not a number: {cell:?}"))
}

#[test]
fn factors_q4_starts_at_newton_ratio_and_tends_to_fixed_point() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["factors", "--q", "4", "--k-max", "30", "--out", "f.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = records(&dir.path().join("f.csv"));
    assert_eq!(header, ["k", "r_k", "r_star", "abs_gap", "envelope"]);
    assert_eq!(rows.len(), 31);
    assert!((num(&rows[0][1]) - 0.666667).abs() < 5e-7);
    assert!((num(&rows[0][2]) - 0.754878).abs() < 5e-7);
    assert!(num(&rows[30][3]) < 1e-9);
    for row in &rows {
        assert!(num(&row[3]) <= num(&row[4]), "gap above envelope at k = {}", row[0]);
    }
}

#[test]
fn factors_with_zero_steps_writes_a_single_row() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["factors", "--q", "6", "--k-max", "0", "--out", "f.csv"]);
    assert_eq!(code(&out), 0);
    let (_, rows) = records(&dir.path().join("f.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "0");
    assert!((num(&rows[0][1]) - 0.8).abs() < 1e-15);
}

#[test]
fn factors_rejects_q_at_most_two_with_usage_code() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["factors", "--q", "2", "--out", "f.csv"]);
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("f.csv").exists());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&qnrate(dir.path(), &["factors", "--bogus", "1"])), 2);
    assert_eq!(code(&qnrate(dir.path(), &["nonsense"])), 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("missing").join("f.csv");
    let out = qnrate(dir.path(), &["factors", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_svg_input_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["svg", "--in", "absent.csv", "--x", "k", "--y", "r_k"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn impossible_condition_cap_is_an_assumption_violation() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["population", "--q", "4", "--d", "3", "--m", "6", "--max-condition", "1", "--iters", "5", "--out", "p.csv"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn manifest_records_resolved_parameters_and_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["factors", "--q", "10", "--k-max", "5", "--out", "f.csv"]);
    assert_eq!(code(&out), 0);
    let manifest = fs::read_to_string(dir.path().join("f.csv.manifest")).unwrap();
    let lines: Vec<&str> = manifest.lines().collect();
    assert_eq!(lines[0], "command=factors");
    assert!(lines[1].starts_with("tool_version=qnrate "));
    assert!(lines.contains(&"q=10"));
    assert!(lines.contains(&"k-max=5"));
    assert!(lines.contains(&"artifact=f.csv"));
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("run.conf"), "# shared\nk-max = 3\nfactors.q = 6\nradius.q = 99\n").unwrap();
    let out = qnrate(dir.path(), &["--config", "run.conf", "factors", "--out", "a.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = records(&dir.path().join("a.csv"));
    assert_eq!(rows.len(), 4);
    assert!((num(&rows[0][1]) - 0.8).abs() < 1e-15);

    let out = qnrate(dir.path(), &["--config", "run.conf", "factors", "--k-max", "1", "--out", "b.csv"]);
    assert_eq!(code(&out), 0);
    let (_, rows) = records(&dir.path().join("b.csv"));
    assert_eq!(rows.len(), 2);
    let manifest = fs::read_to_string(dir.path().join("b.csv.manifest")).unwrap();
    assert!(manifest.lines().any(|l| l == "k-max=1"));
    assert!(manifest.lines().any(|l| l == "q=6"));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.conf"), "q 4\n").unwrap();
    let out = qnrate(dir.path(), &["--config", "bad.conf", "factors"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn output_directory_variable_sets_default_location() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("results");
    fs::create_dir(&out_dir).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qnrate"))
        .args(["factors", "--q", "4", "--k-max", "2"])
        .current_dir(dir.path())
        .env("QNRATE_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(out_dir.join("factors_q4.csv").exists());
    assert!(out_dir.join("factors_q4.csv.manifest").exists());
}

#[test]
fn population_bfgs_follows_the_theory_product() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["population", "--preset", "a", "--iters", "60", "--seed", "1", "--out", "p.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = records(&dir.path().join("p.csv"));
    assert_eq!(header, ["method", "k", "error_norm", "loss", "grad_norm"]);
    let series = |method: &str| -> Vec<f64> { rows.iter().filter(|r| r[0] == method).map(|r| num(&r[2])).collect() };
    let bfgs = series("bfgs");
    let theory = series("bfgs-theory");
    for k in 0..20 {
        let rel = (bfgs[k] - theory[k]).abs() / theory[k];
        assert!(rel < 1e-6, "k = {k}: measured {} vs theory {}", bfgs[k], theory[k]);
    }
    let newton = series("newton");
    for k in 1..20 {
        assert!((newton[k] / newton[k - 1] - 2.0 / 3.0).abs() < 1e-6);
    }
    let gd = series("gd-constant");
    assert!(gd.last().unwrap() > &bfgs[40], "constant-step GD should lag BFGS");
}

#[test]
fn empirical_reports_every_method_with_early_stopping() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["empirical", "--n", "2000", "--iters", "50", "--seed", "5", "--out", "e.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = records(&dir.path().join("e.csv"));
    assert_eq!(&header[..7], ["method", "trial", "k", "error_to_theta_star", "train_loss", "val_loss", "early_stop_flag"]);
    for method in ["gd-constant", "gd-polyak", "newton", "bfgs"] {
        let flags = rows.iter().filter(|r| r[0] == method && r[6] == "1").count();
        assert_eq!(flags, 1, "{method} should mark exactly one early-stop iterate");
    }
}

#[test]
fn radius_quantiles_are_ordered_and_slope_is_reported() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["radius", "--regime", "high-snr", "--n-grid", "100,300,1000", "--trials", "6", "--iters", "50", "--out", "r.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = records(&dir.path().join("r.csv"));
    assert_eq!(header, ["n", "median_min_error", "q25", "q75", "median_iters_to_min"]);
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert!(num(&row[2]) <= num(&row[1]) && num(&row[1]) <= num(&row[3]));
    }
    let text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let footer = text.lines().last().unwrap();
    assert!(footer.starts_with("# fitted_slope="), "{footer}");
    assert!(footer.contains(",slope_stderr="));
}

#[test]
fn radius_needs_three_grid_points() {
    let dir = TempDir::new().unwrap();
    let out = qnrate(dir.path(), &["radius", "--n-grid", "100,1000", "--out", "r.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn svg_draws_one_polyline_per_series_and_cites_the_manifest() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("t.csv"), "k,a,b\n0,1,4\n1,2,3\n").unwrap();
    let out = qnrate(dir.path(), &["svg", "--in", "t.csv", "--x", "k", "--y", "a,b", "--out", "t.svg"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let svg = fs::read_to_string(dir.path().join("t.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("<!-- data manifest: t.csv.manifest -->"));
    assert!(!svg.contains("timestamp"));
}

#[test]
fn svg_log_axis_rejects_nonpositive_values_naming_the_row() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("t.csv"), "k,a\n0,1\n1,0\n").unwrap();
    let out = qnrate(dir.path(), &["svg", "--in", "t.csv", "--x", "k", "--y", "a", "--log-y", "--out", "t.svg"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
    assert!(!dir.path().join("t.svg").exists());
}

#[test]
fn svg_unknown_column_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("t.csv"), "k,a\n0,1\n").unwrap();
    let out = qnrate(dir.path(), &["svg", "--in", "t.csv", "--x", "k", "--y", "zz", "--out", "t.svg"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = qnrate(dir.path(), &["empirical", "--n", "500", "--trials", "2", "--iters", "30", "--seed", "9", "--out", name]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
}
