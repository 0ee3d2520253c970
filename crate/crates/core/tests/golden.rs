//! Regression guard for committed oracle outputs.
//!
//! Each file under `tests/golden/` holds oracle records for one figure's
//! parameters at several thresholds. Running with `QW_WRITE_GOLDEN=1`
//! regenerates them on an automatically sized box; otherwise every record is
//! recomputed on its stored box and compared.

use std::path::PathBuf;

use qwalk::model::presets;
use qwalk::oracle::{
    auto_solve, solve_limiting_walk, Method, OracleRecord, DEFAULT_TOL, TARGET_BOUNDARY_MASS,
};
use qwalk::solver::AnalyticSolver;
use qwalk::{ModelParams, QuadConfig};

const THRESHOLDS: [usize; 6] = [0, 1, 2, 3, 5, 10];

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.json"))
}

fn check(name: &str, preset: fn(usize) -> ModelParams) {
    let path = golden_path(name);
    if std::env::var_os("QW_WRITE_GOLDEN").is_some() {
        let records: Vec<OracleRecord> = THRESHOLDS
            .iter()
            .map(|&a| {
                let m = preset(a).validate().unwrap();
                OracleRecord::from_distribution(&m, &auto_solve(&m, TARGET_BOUNDARY_MASS).unwrap())
            })
            .collect();
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&records).unwrap() + "\n").unwrap();
        return;
    }
    let records: Vec<OracleRecord> =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(records.iter().map(|r| r.a).collect::<Vec<_>>(), THRESHOLDS);
    let analytic = AnalyticSolver::new(&preset(0).validate().unwrap(), &QuadConfig::default()).unwrap();
    for rec in &records {
        let m = rec.params.validate().unwrap();
        let dist = solve_limiting_walk(&m, rec.bounds, Method::Direct, DEFAULT_TOL).unwrap();
        let again = OracleRecord::from_distribution(&m, &dist);
        let drift = again.blocking().max_abs_diff(&rec.blocking());
        assert!(drift < 1e-12, "{name} a={}: oracle drifted by {drift:e}", rec.a);
        assert!(rec.boundary_mass <= TARGET_BOUNDARY_MASS);
        let (b, ..) = analytic.blocking_pair(rec.a).unwrap();
        let delta = b.max_abs_diff(&rec.blocking());
        assert!(delta < 1e-8, "{name} a={}: analytic differs by {delta:e}", rec.a);
    }
}

#[test]
fn fig3_golden() {
    check("fig3", presets::fig3);
}

#[test]
fn fig4_golden() {
    check("fig4", presets::fig4);
}

#[test]
fn fig5_golden() {
    check("fig5", presets::fig5);
}
