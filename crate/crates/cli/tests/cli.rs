use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use planar_dwell::{analyze_pair, AnalysisOptions, Matrix2};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_planar-dwell"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("planar-dwell-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, text: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn records(text: &str) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let h = r.headers().unwrap().clone();
    (h, r.records().map(|x| x.unwrap()).collect())
}

fn column(h: &csv::StringRecord, name: &str) -> usize {
    h.iter().position(|x| x == name).unwrap()
}

#[test]
fn analyze_fixtures_round_trip() {
    let path = fixture("table1.toml");
    let o = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let (h, rows) = records(&text);
    assert_eq!(rows.len(), 7);
    let names: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    assert_eq!(names, ["X1X2", "X3X4", "X5X7", "X5X3", "X8X3", "X6X8", "X8X9"]);
    // values re-parse bit for bit to the in-process results
    let x5 = Matrix2::new(0.01, -0.1, 0.231, -0.31);
    let x7 = Matrix2::new(-0.2, 0.0, 0.0, -0.42);
    let r = analyze_pair(&x5, &x7, &AnalysisOptions::default()).unwrap();
    let row = &rows[2];
    assert_eq!(&row[column(&h, "case")], "RR");
    assert_eq!(row[column(&h, "tau_12")].parse::<f64>().unwrap(), r.tau_12);
    assert_eq!(row[column(&h, "tau_21")].parse::<f64>().unwrap(), r.tau_21);
    assert_eq!(row[column(&h, "tau")].parse::<f64>().unwrap(), r.tau);
    let tau: f64 = rows[0][column(&h, "tau")].parse().unwrap();
    assert!((tau - 2.1472).abs() < 1e-3);
}

#[test]
fn empty_pair_list() {
    let cfg = write_config("empty.toml", "[options]\nseed = 1\n");
    let o = run(&["analyze", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = records(&stdout(&o));
    assert!(rows.is_empty());
    assert_eq!(&h[0], "pair");
}

#[test]
fn non_hurwitz_is_isolated() {
    let cfg = write_config(
        "unstable.toml",
        r#"
[[pairs]]
name = "ok"
a1 = [0.0, 1.0, -2.0, -1.0]
a2 = [0.0, 1.0, -9.0, -1.0]

[[pairs]]
name = "bad"
a1 = [0.1, 0.0, 0.0, -1.0]
a2 = [0.0, 1.0, -9.0, -1.0]

[[pairs]]
name = "ok2"
a1 = [-1.0, 0.0, 0.0, -2.0]
a2 = [-3.0, 1.0, 0.0, -3.0]
"#,
    );
    let o = run(&["analyze", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let (h, rows) = records(&stdout(&o));
    assert_eq!(rows.len(), 3);
    let err = column(&h, "error");
    assert!(rows[0][err].is_empty());
    assert!(rows[1][err].contains("Hurwitz"));
    assert!(rows[2][err].is_empty());
}

#[test]
fn config_errors_exit_one() {
    let cfg = write_config("broken.toml", "[[pairs]]\nname = 'p'\na1 = 'nope'\na2 = [1,2,3,4]\n");
    assert_eq!(run(&["analyze", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "/nonexistent/cfg.toml"]).status.code(), Some(1));
    let good = fixture("table1.toml");
    let o = run(&["contour", good.to_str().unwrap(), "--pair", "nope", "--fn", "cycle_norm_12", "--grid", "0,1,2,0,1,2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["contour", good.to_str().unwrap(), "--pair", "X1X2", "--fn", "cycle_norm_12", "--grid", "0,1,2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn compare_cc_columns_and_markers() {
    let cfg = write_config(
        "cc.toml",
        "[[pairs]]\nname = 'cc'\na1 = [-0.2, -5.0, 1.0, -0.3]\na2 = [-0.4, -1.0, 5.0, -0.6]\n",
    );
    let csv_out = scratch("cc.csv");
    let o = run(&["compare", cfg.to_str().unwrap(), "--out", csv_out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let table = stdout(&o);
    assert!(table.contains("τ_GC: not computed (requires semidefinite programming)"));
    assert!(table.contains("0.6073"));
    let (h, rows) = records(&std::fs::read_to_string(&csv_out).unwrap());
    assert_eq!(rows[0][column(&h, "tau_12")], rows[0][column(&h, "tau_21")]);
    assert_eq!(&rows[0][column(&h, "tau_gc")], "not computed");
}

#[test]
fn compare_reports_defective_minimizer() {
    let path = fixture("table1.toml");
    let csv_out = scratch("table1-compare.csv");
    let o = run(&["compare", path.to_str().unwrap(), "--out", csv_out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = records(&std::fs::read_to_string(&csv_out).unwrap());
    let row = rows.iter().find(|r| &r[0] == "X8X9").unwrap();
    let theta: f64 = row[column(&h, "theta_star")].parse().unwrap();
    assert!((theta - 0.833934).abs() < 1e-2);
}

#[test]
fn example6_contour_crosses_near_intersection() {
    let path = fixture("example6.toml");
    let (nt, ns) = (101usize, 121usize);
    let o = run(&[
        "contour",
        path.to_str().unwrap(),
        "--pair",
        "example6",
        "--fn",
        "rr_schur_k",
        "--grid",
        "0,1,101,0,6,121",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = records(&stdout(&o));
    assert_eq!(rows.len(), nt * ns);
    let val = |i: usize, j: usize| -> f64 { rows[j * nt + i][2].parse().unwrap() };
    // s-major ordering
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[nt][1].parse::<f64>().unwrap(), 0.05);
    let (dt, ds) = (1.0 / (nt - 1) as f64, 6.0 / (ns - 1) as f64);
    let (ci, cj) = ((0.155351 / dt) as usize, (2.4064 / ds) as usize);
    let mut crossing = false;
    for i in ci - 1..=ci + 1 {
        for j in cj - 1..=cj + 1 {
            let corners = [val(i, j), val(i + 1, j), val(i, j + 1), val(i + 1, j + 1)];
            let pos = corners.iter().any(|&v| v > 0.0);
            let neg = corners.iter().any(|&v| v < 0.0);
            crossing |= pos && neg;
        }
    }
    assert!(crossing);
}

#[test]
fn positive_function_has_no_sign_change() {
    let path = fixture("table1.toml");
    let o = run(&["contour", path.to_str().unwrap(), "--pair", "X3X4", "--fn", "cycle_norm_12", "--grid", "0,5,11,0,5,11"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = records(&stdout(&o));
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn wrong_case_selector() {
    let path = fixture("table1.toml");
    let o = run(&["contour", path.to_str().unwrap(), "--pair", "X1X2", "--fn", "rr_schur_k", "--grid", "0,1,2,0,1,2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not apply"));
}

#[test]
fn outputs_are_deterministic() {
    let path = fixture("table1.toml");
    let p = path.to_str().unwrap();
    let a = run(&["contour", p, "--pair", "X5X7", "--fn", "log_cycle_norm_21", "--grid", "0,4,17,0,4,17"]);
    let b = run(&["contour", p, "--pair", "X5X7", "--fn", "log_cycle_norm_21", "--grid", "0,4,17,0,4,17"]);
    assert_eq!(a.stdout, b.stdout);
    let serial = run(&["analyze", p, "--jobs", "1"]);
    let parallel = run(&["analyze", p, "--jobs", "4", "--timings"]);
    assert_eq!(serial.stdout, parallel.stdout);
    let s1 = run(&["simulate", p, "--trials", "3", "--seed", "9", "--jobs", "3"]);
    let s2 = run(&["simulate", p, "--trials", "3", "--seed", "9"]);
    assert_eq!(s1.status.code(), Some(0));
    assert_eq!(s1.stdout, s2.stdout);
}

#[test]
fn simulate_reports_passes() {
    let path = fixture("table1.toml");
    let o = run(&["simulate", path.to_str().unwrap(), "--trials", "4", "--seed", "3", "--margin", "1.05"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = records(&stdout(&o));
    for r in &rows {
        for c in ["grid_pass", "cycle_pass", "trajectory_pass"] {
            assert_eq!(&r[column(&h, c)], "true", "{}", &r[0]);
        }
    }
}

#[test]
fn cli_flags_change_policy() {
    let path = fixture("table1.toml");
    let out = scratch("det1.csv");
    let o = run(&["compare", path.to_str().unwrap(), "--basis-policy", "det1", "--no-optimal-basis", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = records(&std::fs::read_to_string(&out).unwrap());
    assert!(rows.iter().all(|r| &r[column(&h, "policy")] == "det1"));
    let o = run(&["compare", path.to_str().unwrap(), "--basis-policy", "frobenius"]);
    assert_eq!(o.status.code(), Some(1));
}
