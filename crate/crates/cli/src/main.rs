mod args;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use qwalk::oracle::{
    auto_solve, blocking_from_distribution, solve_limiting_walk, solve_prelimit, OracleRecord,
};
use qwalk::solver::{blocking, AnalyticSolver};
use qwalk::{BlockingPair, Model, ModelParams};

use args::{Cli, Command, Format, OracleArgs, OutputArgs};

/// One point of a blocking curve.
#[derive(Debug, Serialize)]
struct SweepRow {
    a: usize,
    #[serde(rename = "B1")]
    b1: f64,
    #[serde(rename = "B2")]
    b2: f64,
    #[serde(rename = "B1_inf")]
    b1_inf: f64,
    #[serde(rename = "B2_inf")]
    b2_inf: f64,
    #[serde(rename = "B1_0")]
    b1_0: f64,
    #[serde(rename = "B2_0")]
    b2_0: f64,
    p00: f64,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct OracleRow {
    a: usize,
    #[serde(rename = "B1")]
    b1: f64,
    #[serde(rename = "B2")]
    b2: f64,
    n1_max: usize,
    n2_max: usize,
    boundary_mass: f64,
    residual: f64,
}

impl From<&OracleRecord> for OracleRow {
    fn from(r: &OracleRecord) -> Self {
        OracleRow {
            a: r.a,
            b1: r.b1,
            b2: r.b2,
            n1_max: r.bounds.n1_max,
            n2_max: r.bounds.n2_max,
            boundary_mass: r.boundary_mass,
            residual: r.residual,
        }
    }
}

#[derive(Debug, Serialize)]
struct CompareRow {
    a: usize,
    #[serde(rename = "B1")]
    b1: f64,
    #[serde(rename = "B2")]
    b2: f64,
    #[serde(rename = "B1_oracle")]
    b1_oracle: f64,
    #[serde(rename = "B2_oracle")]
    b2_oracle: f64,
    #[serde(rename = "dB1")]
    db1: f64,
    #[serde(rename = "dB2")]
    db2: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct PrelimitRow {
    nu: f64,
    #[serde(rename = "C1")]
    c1: usize,
    #[serde(rename = "C2")]
    c2: usize,
    a: usize,
    #[serde(rename = "B1")]
    b1: f64,
    #[serde(rename = "B2")]
    b2: f64,
    rounded: bool,
    residual: f64,
}

/// Failure of a `compare` run; maps to exit code 2.
#[derive(Debug)]
struct ToleranceFailure {
    failed: Vec<usize>,
    tol: f64,
}

impl std::fmt::Display for ToleranceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "oracle deltas exceed {} at a = {:?}", self.tol, self.failed)
    }
}

impl std::error::Error for ToleranceFailure {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (category, code) = if err.downcast_ref::<ToleranceFailure>().is_some() {
                ("tolerance", 2)
            } else if let Some(e) = err.downcast_ref::<qwalk::Error>() {
                (e.category(), 1)
            } else {
                ("input", 1)
            };
            let message = format!("{err:#}");
            let report = serde_json::json!({ "error": { "category": category, "message": message } });
            eprintln!("{report}");
            ExitCode::from(code)
        }
    }
}

fn validated(params: ModelParams) -> Result<Model> {
    Ok(params.validate()?)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Solve {
            model,
            quad,
            with_oracle,
            out,
        } => {
            let m = validated(model.resolve()?.into())?;
            let mut report = blocking(&m, &quad.config())?;
            if with_oracle {
                let d = auto_solve(&m, qwalk::oracle::TARGET_BOUNDARY_MASS)?;
                let o = blocking_from_distribution(&d, m.threshold());
                report.diagnostics.oracle_delta = Some(BlockingPair {
                    b1: report.blocking.b1 - o.b1,
                    b2: report.blocking.b2 - o.b2,
                });
            }
            match out.format.unwrap_or(Format::Json) {
                Format::Json => write_json(&out, &report),
                Format::Csv => write_csv(
                    &out,
                    &[SweepRow {
                        a: m.threshold(),
                        b1: report.blocking.b1,
                        b2: report.blocking.b2,
                        b1_inf: report.baseline_inf.b1,
                        b2_inf: report.baseline_inf.b2,
                        b1_0: report.baseline_a0.b1,
                        b2_0: report.baseline_a0.b2,
                        p00: report.p00,
                        residual: report.normalization_residual,
                    }],
                ),
            }
        }
        Command::Sweep {
            model,
            range,
            quad,
            out,
        } => {
            let m = validated(model.resolve()?.into())?;
            let rows = sweep(&m, &range.thresholds()?, &quad.config())?;
            emit(&out, Format::Csv, &rows)
        }
        Command::Oracle {
            model,
            range,
            oracle,
            out,
        } => {
            let m = validated(model.resolve()?.into())?;
            let records = oracle_records(&m, &range.thresholds(m.threshold())?, &oracle)?;
            let rows: Vec<OracleRow> = records.iter().map(OracleRow::from).collect();
            emit(&out, Format::Csv, &rows)
        }
        Command::Compare {
            model,
            range,
            quad,
            oracle,
            tol,
            out,
        } => {
            let m = validated(model.resolve()?.into())?;
            let thresholds = range.thresholds(m.threshold())?;
            let analytic = sweep(&m, &thresholds, &quad.config())?;
            let records = oracle_records(&m, &thresholds, &oracle)?;
            let rows: Vec<CompareRow> = analytic
                .iter()
                .zip(&records)
                .map(|(s, o)| {
                    let (db1, db2) = (s.b1 - o.b1, s.b2 - o.b2);
                    CompareRow {
                        a: s.a,
                        b1: s.b1,
                        b2: s.b2,
                        b1_oracle: o.b1,
                        b2_oracle: o.b2,
                        db1,
                        db2,
                        pass: db1.abs() <= tol && db2.abs() <= tol,
                    }
                })
                .collect();
            emit(&out, Format::Csv, &rows)?;
            let failed: Vec<usize> = rows.iter().filter(|r| !r.pass).map(|r| r.a).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(ToleranceFailure { failed, tol }.into())
            }
        }
        Command::Prelimit {
            model,
            nu,
            method,
            residual_tol,
            out,
        } => {
            let cfg = model.resolve()?;
            let rows = nu
                .iter()
                .map(|&nu| {
                    let d = solve_prelimit(&cfg, nu, method.into(), residual_tol)?;
                    if d.rounded {
                        eprintln!(
                            "warning: nu = {nu} gives non-integer server counts; rounded to C1 = {}, C2 = {}",
                            d.chain.servers1, d.chain.servers2
                        );
                    }
                    let b = d.blocking();
                    Ok(PrelimitRow {
                        nu,
                        c1: d.chain.servers1,
                        c2: d.chain.servers2,
                        a: cfg.a,
                        b1: b.b1,
                        b2: b.b2,
                        rounded: d.rounded,
                        residual: d.residual,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit(&out, Format::Csv, &rows)
        }
    }
}

fn sweep(m: &Model, thresholds: &[usize], cfg: &qwalk::QuadConfig) -> Result<Vec<SweepRow>> {
    let solver = AnalyticSolver::new(m, cfg)?;
    let base = solver.baseline_a0()?;
    let inf = m.isolated_limits();
    thresholds
        .par_iter()
        .map(|&a| {
            let (b, bvec, ..) = solver.blocking_pair(a)?;
            let residual = (m.lambda1() * b.b1 + m.lambda2() * b.b2 - m.excess_load()).abs();
            Ok(SweepRow {
                a,
                b1: b.b1,
                b2: b.b2,
                b1_inf: inf.b1,
                b2_inf: inf.b2,
                b1_0: base.b1,
                b2_0: base.b2,
                p00: bvec.p[0],
                residual,
            })
        })
        .collect()
}

fn oracle_records(m: &Model, thresholds: &[usize], args: &OracleArgs) -> Result<Vec<OracleRecord>> {
    thresholds
        .par_iter()
        .map(|&a| {
            let ma = m.with_threshold(a);
            let dist = match args.fixed_box() {
                Some(bounds) => solve_limiting_walk(&ma, bounds, args.method.into(), args.residual_tol)?,
                None => auto_solve(&ma, args.target_mass)?,
            };
            Ok(OracleRecord::from_distribution(&ma, &dist))
        })
        .collect()
}

fn emit<T: Serialize>(out: &OutputArgs, default: Format, rows: &[T]) -> Result<()> {
    match out.format.unwrap_or(default) {
        Format::Csv => write_csv(out, rows),
        Format::Json => write_json(out, &rows),
    }
}

fn sink(out: &OutputArgs) -> Result<Box<dyn Write>> {
    Ok(match &out.output {
        Some(path) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_csv<T: Serialize>(out: &OutputArgs, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize + ?Sized>(out: &OutputArgs, value: &T) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
