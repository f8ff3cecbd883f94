//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{fd_gradient, rel_err, DenseQuadratic};
use oaccel::accel::{assemble_system_gradient, regularized_solve, AccelConfig, AccelMode, Accelerator, History};
use oaccel::krylov::fom_solve;
use oaccel::linalg::{dot, norm_inf, sub, Matrix};
use oaccel::problems::initial_guess;
use oaccel::profile::{performance_profile, performance_ratio, quantile};
use oaccel::rng::{derive_seed, stream_rng};
use oaccel::solver::{Solver, StepStatus};
use oaccel::{make_problem, Evaluator, Preconditioner, ProblemId, ProblemSpec, SolverKind, Termination};
use oaccel_bench::{run_experiment, ExperimentConfig, RunRecord};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// 20 random SPD quadratics: O-ACCEL with the fixed-step preconditioner,
/// unit steps and no regularization reproduces the FOM iterates.
fn fom_equivalence() -> Verdict {
    let mut worst = 0.0f64;
    for case in 0..20u64 {
        let n = [5, 20, 50][case as usize % 3];
        let q = DenseQuadratic::random(n, 30.0, 500 + case);
        let x0 = vec![0.0; n];
        let kmax = n.min(10);
        let fom = fom_solve(|v| q.a.mul_vec(v), &q.b, &x0, kmax);

        let cfg = AccelConfig { eps0: 0.0, accept_unit_step: true, ..AccelConfig::oaccel() };
        let mut acc = Accelerator::new(cfg, Preconditioner::fixed()).unwrap();
        let mut ev = Evaluator::new(&q);
        let mut p = ev.point(x0.clone());
        let rule = Termination::budget(100).bind(&p).unwrap();
        acc.start(&ev, &p).unwrap();
        for k in 1..=kmax {
            let step = acc.step(&mut ev, &p, &rule);
            if step.status != StepStatus::Progress {
                return verdict(false, format!("case {case} (n={n}) stopped at k={k}: {:?}", step.status));
            }
            p = step.next;
            match fom.iterate(k + 1) {
                Some(x) => worst = worst.max(rel_err(&p.x, x)),
                None => return verdict(false, format!("case {case}: FOM broke down before k={k}")),
            }
        }
    }
    verdict(worst <= 1e-8, format!("max relative error {worst:.2e} (limit 1e-8)"))
}

/// Analytic against central-difference gradients at 20 points per problem
/// and standard size, sizes capped at 1000.
fn gradient_check() -> Verdict {
    let cfg = ExperimentConfig::default();
    let mut worst = (0.0f64, String::new());
    for (id, n) in cfg.plan().unwrap() {
        let obj = make_problem(ProblemSpec::new(id, n, derive_seed(3, &[n as u64]))).unwrap();
        let mut rng = stream_rng(derive_seed(5, &[n as u64]), 11);
        for _ in 0..20 {
            let x = initial_guess(n, &mut rng);
            let mut g = vec![0.0; n];
            obj.eval(&x, &mut g);
            let fd = fd_gradient(obj.as_ref(), &x, 1e-6);
            let err = norm_inf(&sub(&g, &fd)) / norm_inf(&g).max(f64::MIN_POSITIVE);
            if err > worst.0 {
                worst = (err, format!("{id} n={n}"));
            }
        }
    }
    verdict(worst.0 <= 1e-6, format!("max relative error {:.2e} on {} (limit 1e-6)", worst.0, worst.1))
}

fn medians(records: &[RunRecord], problem: ProblemId, n: usize, solver: SolverKind) -> f64 {
    let t: Vec<f64> = records
        .iter()
        .filter(|r| r.problem == problem && r.n == n && r.solver == solver)
        .map(|r| r.t().map_or(f64::INFINITY, |t| t as f64))
        .collect();
    quantile(&t, 0.5).unwrap_or(f64::NAN)
}

fn experiment(problem: ProblemId, n: usize, solvers: &[SolverKind]) -> Vec<RunRecord> {
    let cfg = ExperimentConfig {
        problems: vec![problem],
        sizes: Some(vec![n]),
        solvers: solvers.to_vec(),
        runs: 100,
        ..ExperimentConfig::default()
    };
    run_experiment(&cfg).unwrap().records
}

#[derive(Default)]
struct Matrices {
    a: Vec<RunRecord>,
    c: Vec<RunRecord>,
    d: Vec<RunRecord>,
}

fn within(value: f64, target: f64, frac: f64) -> bool {
    (value - target).abs() <= frac * target
}

/// Median evaluation counts on A (n = 100) and D (n = 500).
fn table_reproduction(m: &mut Matrices) -> Verdict {
    use SolverKind::{Lbfgs, NGmresB, OAccelB};
    m.a = experiment(ProblemId::A, 100, &[OAccelB, NGmresB, Lbfgs]);
    m.d = experiment(ProblemId::D, 500, &[OAccelB, NGmresB]);
    let oa = medians(&m.a, ProblemId::A, 100, SolverKind::OAccelB);
    let la = medians(&m.a, ProblemId::A, 100, SolverKind::Lbfgs);
    let od = medians(&m.d, ProblemId::D, 500, SolverKind::OAccelB);
    let pass = within(oa, 79.0, 0.25) && within(la, 79.0, 0.25) && within(od, 105.0, 0.30);
    verdict(
        pass,
        format!("A: oaccel-b {oa}, lbfgs {la} (79 ± 25%); D: oaccel-b {od} (105 ± 30%)"),
    )
}

/// O-ACCEL-B needs no more evaluations than N-GMRES-B in the median.
/// Reuses the A and D runs of the previous criterion.
fn directional(m: &mut Matrices) -> Verdict {
    m.c = experiment(ProblemId::C, 100, &[SolverKind::OAccelB, SolverKind::NGmresB]);
    let rows = [(&m.a, ProblemId::A, 100), (&m.c, ProblemId::C, 100), (&m.d, ProblemId::D, 500)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (records, id, n) in rows {
        let o = medians(records, id, n, SolverKind::OAccelB);
        let g = medians(records, id, n, SolverKind::NGmresB);
        pass &= o <= g;
        parts.push(format!("{id}{n}: {o} vs {g}"));
    }
    verdict(pass, format!("oaccel-b vs ngmres-b medians {}", parts.join(", ")))
}

/// With one stored iterate the accelerated step is the exact line search
/// between x^(1) and x^P.
fn single_slot_reduction() -> Verdict {
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let n = 10 + seed as usize;
        let q = DenseQuadratic::random(n, 50.0, 900 + seed);
        let mut rng = stream_rng(seed, 3);
        let mut ev = Evaluator::new(&q);
        let x1 = ev.point(initial_guess(n, &mut rng));
        let xp = ev.point(initial_guess(n, &mut rng));
        let h = History::new(AccelMode::Objective, 1, &x1);
        let alpha = regularized_solve(&assemble_system_gradient(&h, &xp.x, &xp.g), 0.0).alpha[0];

        let d = sub(&x1.x, &xp.x);
        let exact = -dot(&d, &xp.g) / dot(&d, &q.a.mul_vec(&d));
        worst = worst.max((alpha - exact).abs() / exact.abs().max(1.0));
    }
    verdict(worst <= 1e-10, format!("max step discrepancy {worst:.2e} (limit 1e-10)"))
}

fn max_rel(cached: &[f64], dense: &[f64]) -> f64 {
    let scale = dense.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = cached.iter().zip(dense).fold(0.0f64, |m, (c, d)| m.max((c - d).abs()));
    if scale == 0.0 { diff } else { diff / scale }
}

/// Cached small systems against a dense rebuild at every iteration of a
/// 200-iteration run on Problem B.
fn cache_oracle() -> Verdict {
    let n = 100;
    let obj = make_problem(ProblemSpec::new(ProblemId::B, n, 17)).unwrap();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for precond in [Preconditioner::fixed(), Preconditioner::line_search()] {
        let mut acc = Accelerator::new(AccelConfig::oaccel(), precond).unwrap().with_recording();
        let mut ev = Evaluator::new(obj.as_ref());
        let mut p = ev.point(initial_guess(n, &mut stream_rng(17, 1)));
        let rule = Termination::budget(200).bind(&p).unwrap();
        acc.start(&ev, &p).unwrap();
        for _ in 0..200 {
            p = acc.step(&mut ev, &p, &rule).next;
        }
        for rec in acc.records() {
            let (h, xp) = (&rec.history, &rec.xp);
            let w = h.len();
            let mut a = Matrix::zeros(w, w);
            let mut b = vec![0.0; w];
            for i in 0..w {
                let dx = sub(h.x(i), &xp.x);
                b[i] = -dot(&dx, &xp.g);
                for j in 0..w {
                    a[(i, j)] = dot(&dx, &sub(h.r(j), &xp.g));
                }
            }
            let flat = |m: &Matrix| (0..m.rows()).flat_map(|i| m.row(i).to_vec()).collect::<Vec<_>>();
            worst = worst.max(max_rel(&flat(&rec.system.a), &flat(&a))).max(max_rel(&rec.system.b, &b));
            checked += 1;
        }
    }
    verdict(
        worst <= 1e-12 && checked >= 200,
        format!("{checked} systems, max relative deviation {worst:.2e} (limit 1e-12)"),
    )
}

/// Ratio and profile examples, compared exactly.
fn profile_examples() -> Verdict {
    let inf = f64::INFINITY;
    let t = vec![vec![Some(2), Some(4)], vec![Some(5), None], vec![Some(3), Some(3)]];
    let ratios = performance_ratio(&t).ratios;
    let mut ok = ratios == vec![vec![1.0, 2.0], vec![1.0, inf], vec![1.0, 1.0]];

    let grid = [1.0, 1.5, 2.0, 10.0, 50.0];
    let single = performance_profile(&[vec![1.0], vec![1.0], vec![1.0]], &["s"], &grid);
    ok &= single[0].samples.iter().all(|&(_, p)| p == 1.0);
    let two = performance_profile(&[vec![1.0, 2.0], vec![2.0, 1.0]], &["a", "b"], &grid);
    ok &= two[0].samples[0] == (1.0, 0.5) && two[0].samples[2] == (2.0, 1.0);
    let half = performance_profile(&[vec![1.0], vec![inf], vec![1.0], vec![inf]], &["s"], &grid);
    ok &= half[0].samples.iter().all(|&(_, p)| p == 0.5);

    ok &= quantile(&[1.0, 2.0, 3.0], 0.5) == Ok(2.0);
    ok &= quantile(&[1.0, 2.0, 3.0, 4.0], 0.5) == Ok(2.5);
    ok &= quantile(&[10.0], 0.1) == Ok(10.0) && quantile(&[10.0], 0.9) == Ok(10.0);
    verdict(ok, "ratio, profile and quantile examples".to_string())
}

fn report(id: u32, name: &str, limit: Duration, run: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = v.pass && in_time;
    let time = format!("{:.1}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
    let time = if in_time { time } else { format!("{time}, too slow") };
    println!("{} [{id}] {name}: {} ({time})", if pass { "PASS" } else { "FAIL" }, v.detail);
    pass
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= report(1, "FOM equivalence", secs(10), fom_equivalence);
    all &= report(2, "gradient correctness", secs(30), gradient_check);
    let mut m = Matrices::default();
    all &= report(3, "desk-scale median evaluations", secs(300), || table_reproduction(&mut m));
    all &= report(4, "O-ACCEL-B vs N-GMRES-B", secs(600), || directional(&mut m));
    all &= report(5, "single-slot line-search reduction", secs(60), single_slot_reduction);
    all &= report(6, "cached vs dense small systems", secs(60), cache_oracle);
    all &= report(7, "profile machinery", secs(10), profile_examples);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
