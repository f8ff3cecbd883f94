//! Result files: run records and profiles as CSV, a JSON summary.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::Path;

use oaccel::profile::{default_tau_grid, performance_profile, performance_ratio, quantile, ProfileCurve};
use oaccel::{ProblemId, SolverKind};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::experiment::{ExperimentConfig, Outcome, RunRecord};
use crate::BenchError;

pub const RECORDS_FILE: &str = "records.csv";
pub const PROFILE_FILE: &str = "profile.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Serialize, Deserialize)]
struct RecordRow {
    problem: String,
    n: usize,
    seed: u64,
    solver: String,
    fevals: u64,
    success: bool,
    final_f: f64,
}

#[derive(Serialize)]
struct ProfileRow<'a> {
    solver: &'a str,
    tau: f64,
    p: f64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> BenchError + '_ {
    move |source| BenchError::Csv { path: path.display().to_string(), source }
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(File::create(path).map_err(io_err(path))?);
    for r in records {
        w.serialize(RecordRow {
            problem: r.problem.to_string(),
            n: r.n,
            seed: r.seed,
            solver: r.solver.to_string(),
            fevals: r.fevals,
            success: r.success,
            final_f: r.final_f,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads records written by [`write_records`]. Traces are not stored.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, BenchError> {
    let mut rdr = csv::Reader::from_reader(File::open(path).map_err(io_err(path))?);
    let bad = |what: &str, v: &str| BenchError::Config(format!("{}: unknown {what} `{v}`", path.display()));
    let mut out = Vec::new();
    for row in rdr.deserialize::<RecordRow>() {
        let row = row.map_err(csv_err(path))?;
        out.push(RunRecord {
            problem: row.problem.parse::<ProblemId>().map_err(|_| bad("problem", &row.problem))?,
            n: row.n,
            seed: row.seed,
            solver: row.solver.parse::<SolverKind>().map_err(|_| bad("solver", &row.solver))?,
            fevals: row.fevals,
            success: row.success,
            final_f: row.final_f,
            trace: None,
        });
    }
    Ok(out)
}

/// Profiles over all `(problem, n, seed)` instances in a record set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    pub curves: Vec<ProfileCurve>,
    /// Instances that entered the profile.
    pub problems: usize,
    /// Instances no solver solved.
    pub dropped: usize,
}

/// A solver without a record for some instance counts as failing it.
pub fn profile_from_records(records: &[RunRecord], tau_grid: &[f64]) -> ProfileReport {
    let mut solvers: Vec<SolverKind> = Vec::new();
    for r in records {
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver);
        }
    }
    let mut rows: BTreeMap<(ProblemId, usize, u64), Vec<Option<u64>>> = BTreeMap::new();
    for r in records {
        let col = solvers.iter().position(|s| *s == r.solver).unwrap_or(0);
        rows.entry((r.problem, r.n, r.seed)).or_insert_with(|| vec![None; solvers.len()])[col] = r.t();
    }
    let t: Vec<Vec<Option<u64>>> = rows.into_values().collect();
    let table = performance_ratio(&t);
    let names: Vec<&str> = solvers.iter().map(|s| s.id()).collect();
    ProfileReport {
        curves: performance_profile(&table.ratios, &names, tau_grid),
        problems: table.ratios.len(),
        dropped: table.dropped.len(),
    }
}

pub fn write_profile(path: &Path, curves: &[ProfileCurve]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(File::create(path).map_err(io_err(path))?);
    for c in curves {
        for &(tau, p) in &c.samples {
            w.serialize(ProfileRow { solver: &c.solver, tau, p }).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Q0.1, Q0.5 and Q0.9 of `t` per `(problem, n, solver)`, with failures as
/// infinity. An infinite quantile is written as `null`.
fn quantile_table(records: &[RunRecord]) -> Vec<Value> {
    let mut groups: Vec<((ProblemId, usize, SolverKind), Vec<f64>)> = Vec::new();
    for r in records {
        let key = (r.problem, r.n, r.solver);
        let t = r.t().map_or(f64::INFINITY, |t| t as f64);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(t),
            None => groups.push((key, vec![t])),
        }
    }
    groups
        .into_iter()
        .map(|((problem, n, solver), t)| {
            let q = |p| quantile(&t, p).ok().filter(|v| v.is_finite());
            json!({
                "problem": problem.to_string(),
                "n": n,
                "solver": solver.id(),
                "runs": t.len(),
                "solved": t.iter().filter(|v| v.is_finite()).count(),
                "q10": q(0.1),
                "q50": q(0.5),
                "q90": q(0.9),
            })
        })
        .collect()
}

fn config_json(cfg: &ExperimentConfig) -> Value {
    let s = &cfg.settings;
    json!({
        "problems": cfg.problems.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "sizes": cfg.sizes,
        "solvers": cfg.solvers.iter().map(|s| s.id()).collect::<Vec<_>>(),
        "runs": cfg.runs,
        "seed": cfg.seed,
        "wmax": s.w_max,
        "eps0": s.eps0,
        "delta": s.delta,
        "lbfgs_memory": s.lbfgs_memory,
        "c1": s.ls.c1,
        "c2": s.ls.c2,
        "max_iters": cfg.max_iters,
        "tol": cfg.tol,
        "large": cfg.large,
        "rotation": cfg.rotation.to_string(),
    })
}

pub fn summary_json(cfg: &ExperimentConfig, outcome: &Outcome, profile: &ProfileReport) -> Value {
    json!({
        "config": config_json(cfg),
        "f_star": outcome
            .f_star
            .iter()
            .map(|f| json!({ "problem": f.problem.to_string(), "n": f.n, "f_star": f.f_star }))
            .collect::<Vec<_>>(),
        "quantiles": quantile_table(&outcome.records),
        "profile": { "problems": profile.problems, "dropped": profile.dropped },
    })
}

/// Writes records, profile and summary into `dir`, creating it if needed.
pub fn emit_results(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome) -> Result<ProfileReport, BenchError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_records(&dir.join(RECORDS_FILE), &outcome.records)?;
    let profile = profile_from_records(&outcome.records, &default_tau_grid());
    write_profile(&dir.join(PROFILE_FILE), &profile.curves)?;
    let path = dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary_json(cfg, outcome, &profile))
        .map_err(|source| BenchError::Json { path: path.display().to_string(), source })?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(profile)
}
