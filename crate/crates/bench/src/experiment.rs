//! The solver × problem × run matrix.

use oaccel::problems::initial_guess;
use oaccel::rng::{derive_seed, stream_rng, X0_STREAM};
use oaccel::solver::SolverSettings;
use oaccel::{make_problem, minimize, ProblemId, ProblemSpec, RotationKind, SolverKind, Termination};
use rayon::prelude::*;

use crate::BenchError;

/// Sizes above this need `large`.
pub const DESK_SIZE_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemId>,
    /// Sizes applied to every problem. `None` uses each problem's standard
    /// sizes.
    pub sizes: Option<Vec<usize>>,
    pub solvers: Vec<SolverKind>,
    pub runs: u64,
    pub seed: u64,
    pub settings: SolverSettings,
    pub max_iters: u64,
    pub tol: f64,
    /// Keep standard sizes above [`DESK_SIZE_CAP`].
    pub large: bool,
    pub rotation: RotationKind,
    /// Store the per-iteration objective values in each record.
    pub keep_traces: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problems: ProblemId::ALL.to_vec(),
            sizes: None,
            solvers: SolverKind::ALL.to_vec(),
            runs: 100,
            seed: 0,
            settings: SolverSettings::default(),
            max_iters: Termination::DEFAULT_MAX_ITERS,
            tol: 1e-10,
            large: false,
            rotation: RotationKind::Haar,
            keep_traces: false,
        }
    }
}

impl ExperimentConfig {
    /// `(problem, n)` pairs in run order.
    pub fn plan(&self) -> Result<Vec<(ProblemId, usize)>, BenchError> {
        let mut out = Vec::new();
        for &id in &self.problems {
            let sizes: Vec<usize> = match &self.sizes {
                Some(s) => s.clone(),
                None => id
                    .standard_sizes()
                    .iter()
                    .copied()
                    .filter(|&n| self.large || n <= DESK_SIZE_CAP)
                    .collect(),
            };
            for n in sizes {
                id.validate_dim(n)?;
                out.push((id, n));
            }
        }
        Ok(out)
    }

    fn validate(&self) -> Result<(), BenchError> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(BenchError::Config(format!("tolerance must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(BenchError::Config("max-iters must be positive".into()));
        }
        for s in &self.solvers {
            s.build(&self.settings)?;
        }
        Ok(())
    }

    fn run_seed(&self, problem: ProblemId, n: usize, run: u64) -> u64 {
        let index = ProblemId::ALL.iter().position(|p| *p == problem).unwrap_or(0) as u64;
        derive_seed(self.seed, &[index, n as u64, run])
    }
}

/// One solver on one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: ProblemId,
    pub n: usize,
    /// Derived run seed.
    pub seed: u64,
    pub solver: SolverKind,
    /// Evaluations spent. Equals `t` when `success`.
    pub fevals: u64,
    pub success: bool,
    pub final_f: f64,
    pub trace: Option<Vec<f64>>,
}

impl RunRecord {
    /// Evaluations to tolerance, `None` for a failure.
    pub fn t(&self) -> Option<u64> {
        self.success.then_some(self.fevals)
    }
}

/// Estimated minimum for a problem without a known one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FStar {
    pub problem: ProblemId,
    pub n: usize,
    pub f_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub records: Vec<RunRecord>,
    pub f_star: Vec<FStar>,
}

#[derive(Debug, Clone, Copy)]
struct Task {
    problem: ProblemId,
    n: usize,
    seed: u64,
    solver: SolverKind,
}

fn tasks(cfg: &ExperimentConfig, problem: ProblemId, n: usize) -> Vec<Task> {
    cfg.solvers
        .iter()
        .flat_map(|&solver| {
            (0..cfg.runs).map(move |run| Task { problem, n, seed: cfg.run_seed(problem, n, run), solver })
        })
        .collect()
}

fn run_task(cfg: &ExperimentConfig, task: &Task, term: &Termination) -> RunRecord {
    let failed = |fevals| RunRecord {
        problem: task.problem,
        n: task.n,
        seed: task.seed,
        solver: task.solver,
        fevals,
        success: false,
        final_f: f64::NAN,
        trace: None,
    };
    let spec = ProblemSpec { id: task.problem, n: task.n, seed: task.seed, rotation: cfg.rotation };
    let Ok(obj) = make_problem(spec) else { return failed(0) };
    let Ok(mut solver) = task.solver.build(&cfg.settings) else { return failed(0) };
    let x0 = initial_guess(task.n, &mut stream_rng(task.seed, X0_STREAM));
    match minimize(obj.as_ref(), solver.as_mut(), &x0, term) {
        Ok(r) => RunRecord {
            fevals: r.counter.fg_evals,
            success: r.success,
            final_f: r.final_f(),
            trace: cfg.keep_traces.then(|| r.trace.iter().map(|p| p.f).collect()),
            ..failed(0)
        },
        Err(_) => failed(0),
    }
}

/// Smallest value seen by any solver on any run within the budget.
fn estimate_f_star(cfg: &ExperimentConfig, tasks: &[Task]) -> f64 {
    let term = Termination::budget(cfg.max_iters);
    tasks
        .par_iter()
        .map(|task| {
            let spec = ProblemSpec { id: task.problem, n: task.n, seed: task.seed, rotation: cfg.rotation };
            let (Ok(obj), Ok(mut solver)) = (make_problem(spec), task.solver.build(&cfg.settings)) else {
                return f64::INFINITY;
            };
            let x0 = initial_guess(task.n, &mut stream_rng(task.seed, X0_STREAM));
            minimize(obj.as_ref(), solver.as_mut(), &x0, &term)
                .map(|r| r.trace.iter().map(|p| p.f).filter(|f| f.is_finite()).fold(f64::INFINITY, f64::min))
                .unwrap_or(f64::INFINITY)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Runs the whole matrix.
///
/// Problems without a known minimum are run twice: once on the full budget
/// to estimate `f*`, then to tolerance against that estimate. Records come
/// back ordered by problem, size, solver and run regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, BenchError> {
    let plan = cfg.plan()?;
    if cfg.solvers.is_empty() || cfg.runs == 0 {
        return Ok(Outcome { records: Vec::new(), f_star: Vec::new() });
    }
    cfg.validate()?;

    let mut records = Vec::new();
    let mut f_star = Vec::new();
    for (problem, n) in plan {
        let batch = tasks(cfg, problem, n);
        let known = make_problem(ProblemSpec::new(problem, n, 0))?.known_minimum();
        let target = match known {
            Some(f) => f,
            None => {
                let f = estimate_f_star(cfg, &batch);
                f_star.push(FStar { problem, n, f_star: f });
                f
            }
        };
        // no finite estimate means every run diverged; nothing can succeed
        let term = if target.is_finite() {
            Termination::objective(Some(target)).with_rel_tol(cfg.tol).with_max_iters(cfg.max_iters)
        } else {
            Termination::budget(cfg.max_iters)
        };
        let mut done: Vec<RunRecord> = batch.par_iter().map(|t| run_task(cfg, t, &term)).collect();
        records.append(&mut done);
    }
    Ok(Outcome { records, f_star })
}
