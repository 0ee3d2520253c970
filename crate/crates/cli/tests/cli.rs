use std::process::{Command, Output};

const FIG3: [&str; 12] = [
    "--lambda1", "3", "--lambda2", "5", "--mu1", "1", "--mu2", "2", "--c1", "1", "--c2", "1",
];
const FIG4: [&str; 12] = [
    "--lambda1", "1.2", "--lambda2", "9.9", "--mu1", "1", "--mu2", "1", "--c1", "1", "--c2", "10",
];

fn qwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(args)
        .env_remove("QW_GRID_SIZE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(cmd: &str, base: &[&str], extra: &[&str]) -> Output {
    let mut args = vec![cmd.to_string()];
    args.extend(with(base, extra));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    qwalk(&refs)
}

fn csv_rows(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|v| match v {
                    "true" => 1.0,
                    "false" => 0.0,
                    v => v.parse().unwrap(),
                })
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn solve_emits_json_report() {
    let o = run("solve", &FIG3, &["--a", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["normalization_residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["params"]["a"], 3);
    assert_eq!(v["boundary"]["p"].as_array().unwrap().len(), 4);
    assert_eq!(v["diagnostics"]["grid_size"], 512);
    assert!(v["diagnostics"].get("oracle_delta").is_none());
}

#[test]
fn solve_with_oracle_records_delta() {
    let o = run("solve", &FIG3, &["--a", "2", "--with-oracle"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["diagnostics"]["oracle_delta"]["b1"].as_f64().unwrap().abs() < 5e-3);
    assert!(v["diagnostics"]["oracle_delta"]["b2"].as_f64().unwrap().abs() < 5e-3);
}

#[test]
fn sweep_fig4_rows_and_trend() {
    let o = run("sweep", &FIG4, &["--a-min", "0", "--a-max", "30"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, "a,B1,B2,B1_inf,B2_inf,B1_0,B2_0,p00,residual");
    assert_eq!(rows.len(), 31);
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2] && w[1][1] > w[0][1]));
    assert_eq!(rows[0][4], 0.0);
    assert!(rows.iter().all(|r| r[8] <= 1e-8));
    // At a = 0 the Theorem-1 path and the phi2 baseline coincide.
    assert!((rows[0][1] - rows[0][5]).abs() < 1e-4 && (rows[0][2] - rows[0][6]).abs() < 1e-4);
}

#[test]
fn sweep_is_deterministic() {
    let a = run("sweep", &FIG3, &["--a-min", "0", "--a-max", "12"]);
    let b = run("sweep", &FIG3, &["--a-min", "0", "--a-max", "12"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn compare_fig3_a1_passes() {
    let o = run("compare", &FIG3, &["--a", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, "a,B1,B2,B1_oracle,B2_oracle,dB1,dB2,pass");
    assert!(rows[0][5].abs() <= 5e-3 && rows[0][6].abs() <= 5e-3);
    assert_eq!(rows[0][7], 1.0);
}

#[test]
fn compare_tolerance_failure_exits_2() {
    let o = run("compare", &FIG3, &["--a", "1", "--tol", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["category"], "tolerance");
}

#[test]
fn unstable_parameters_exit_1() {
    let o = qwalk(&[
        "solve", "--lambda1", "1", "--lambda2", "5", "--mu1", "1", "--mu2", "2", "--c1", "1", "--c2", "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["category"], "validation");
}

#[test]
fn small_fixed_box_is_an_oracle_error() {
    let o = run("oracle", &FIG4, &["--n1-max", "10", "--n2-max", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["category"], "oracle");
}

#[test]
fn oracle_range_and_gauss_seidel() {
    let o = run(
        "oracle",
        &FIG3,
        &["--a-min", "0", "--a-max", "2", "--n1-max", "25", "--n2-max", "25", "--method", "gauss-seidel", "--residual-tol", "1e-13"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, "a,B1,B2,n1_max,n2_max,boundary_mass,residual");
    assert_eq!(rows.len(), 3);
    assert!((rows[2][1] - 0.642268374).abs() < 1e-8);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.json");
    std::fs::write(
        &path,
        r#"{"lambda1": 3, "lambda2": 5, "mu1": 1, "mu2": 2, "c1": 1, "c2": 1, "a": 0}"#,
    )
    .unwrap();
    let out = dir.path().join("report.csv");
    let o = qwalk(&[
        "solve",
        "--config",
        path.to_str().unwrap(),
        "--a",
        "1",
        "--format",
        "csv",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let (_, rows) = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows[0][0], 1.0);
    assert!((rows[0][1] - 0.6032313115736834).abs() < 1e-10);
}

#[test]
fn config_file_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"lambda1": 3, "lamda2": 5}"#).unwrap();
    let o = qwalk(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["category"], "input");
}

#[test]
fn grid_size_from_environment() {
    let mut args = vec!["solve"];
    args.extend(FIG3);
    let o = Command::new(env!("CARGO_BIN_EXE_qwalk"))
        .args(&args)
        .env("QW_GRID_SIZE", "128")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["diagnostics"]["grid_size"], 128);
}

#[test]
fn prelimit_rows_and_rounding_warning() {
    let o = run("prelimit", &FIG3, &["--a", "2", "--nu", "10,10.5"]);
    assert!(o.status.success());
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, "nu,C1,C2,a,B1,B2,rounded,residual");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][6], 0.0);
    assert_eq!(rows[1][6], 1.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rounded"));
}
