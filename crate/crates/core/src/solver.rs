//! The outer minimization loop shared by every solver.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::accel::{AccelConfig, Accelerator};
use crate::baselines::{Lbfgs, Ncg};
use crate::error::Error;
use crate::linesearch::LineSearchConfig;
use crate::objective::{EvalCounter, Evaluator, Objective, Point};
use crate::precond::Preconditioner;
use crate::termination::{StopRule, Termination, ToleranceMode};

/// What happened during one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    /// Normal step.
    Progress,
    /// The accelerator discarded its history.
    Reset,
    /// Stopping rule met at an intermediate point, which is returned.
    Converged,
    /// No further progress is possible.
    Stalled,
}

/// Result of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// New current point.
    pub next: Point,
    /// Step status.
    pub status: StepStatus,
}

/// An iterative minimizer driven by [`minimize`].
pub trait Solver {
    /// Prepares per-run state at the start point.
    fn start(&mut self, ev: &Evaluator<'_>, start: &Point) -> Result<(), Error>;

    /// Performs one outer iteration from `current`.
    ///
    /// `stop` lets a solver end early at an intermediate point.
    fn step(&mut self, ev: &mut Evaluator<'_>, current: &Point, stop: &StopRule) -> StepResult;
}

/// One entry of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Evaluations spent when this value was current.
    pub fg_evals: u64,
    /// Objective value.
    pub f: f64,
}

/// Outcome of [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Final point, value and gradient.
    pub last: Point,
    /// Work counters at termination.
    pub counter: EvalCounter,
    /// Tolerance reached within the iteration budget.
    pub success: bool,
    /// Objective value at the start point and after every iteration.
    pub trace: Vec<TracePoint>,
}

impl RunSummary {
    /// Evaluations to reach tolerance, `None` on failure.
    pub fn evals_to_tolerance(&self) -> Option<u64> {
        self.success.then_some(self.counter.fg_evals)
    }

    /// Final objective value.
    pub fn final_f(&self) -> f64 {
        self.last.f
    }
}

/// Minimizes `obj` from `x0` with `solver` until `term` is satisfied or the
/// iteration budget runs out.
///
/// In objective mode a missing `f*` is taken from
/// [`Objective::known_minimum`]. Non-finite values at the start or during
/// the run end it as a failure rather than an error.
pub fn minimize(obj: &dyn Objective, solver: &mut dyn Solver, x0: &[f64], term: &Termination) -> Result<RunSummary, Error> {
    if x0.len() != obj.dim() {
        return Err(Error::DimensionMismatch { expected: obj.dim(), got: x0.len() });
    }
    let mut term = *term;
    if term.mode == ToleranceMode::Objective && term.f_star.is_none() {
        term.f_star = obj.known_minimum();
    }

    let mut ev = Evaluator::new(obj);
    let mut p = ev.point(x0.to_vec());
    let rule = term.bind(&p)?;
    let mut trace = Vec::new();
    trace.push(TracePoint { fg_evals: ev.fg_evals(), f: p.f });

    let finish = |p: Point, ev: &Evaluator<'_>, success, trace| RunSummary {
        last: p,
        counter: ev.counter(),
        success,
        trace,
    };

    if !p.is_finite() {
        return Ok(finish(p, &ev, false, trace));
    }
    if rule.reached(&p) {
        return Ok(finish(p, &ev, true, trace));
    }

    solver.start(&ev, &p)?;
    while ev.counter().iterations < rule.max_iters() {
        ev.bump_iteration();
        let StepResult { next, status } = solver.step(&mut ev, &p, &rule);
        p = next;
        trace.push(TracePoint { fg_evals: ev.fg_evals(), f: p.f });
        if !p.is_finite() {
            return Ok(finish(p, &ev, false, trace));
        }
        if rule.reached(&p) {
            return Ok(finish(p, &ev, true, trace));
        }
        if status == StepStatus::Stalled {
            break;
        }
    }
    Ok(finish(p, &ev, false, trace))
}

/// The six solvers compared by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    /// O-ACCEL with the line-search preconditioner.
    OAccelA,
    /// O-ACCEL with the fixed-step preconditioner.
    OAccelB,
    /// N-GMRES with the line-search preconditioner.
    NGmresA,
    /// N-GMRES with the fixed-step preconditioner.
    NGmresB,
    /// L-BFGS.
    Lbfgs,
    /// Nonlinear CG (Polak-Ribière).
    Ncg,
}

impl SolverKind {
    /// All solvers in reporting order.
    pub const ALL: [SolverKind; 6] = [
        SolverKind::OAccelA,
        SolverKind::OAccelB,
        SolverKind::NGmresA,
        SolverKind::NGmresB,
        SolverKind::Lbfgs,
        SolverKind::Ncg,
    ];

    /// Command-line identifier.
    pub fn id(self) -> &'static str {
        match self {
            SolverKind::OAccelA => "oaccel-a",
            SolverKind::OAccelB => "oaccel-b",
            SolverKind::NGmresA => "ngmres-a",
            SolverKind::NGmresB => "ngmres-b",
            SolverKind::Lbfgs => "lbfgs",
            SolverKind::Ncg => "ncg",
        }
    }

    /// Builds a fresh solver instance.
    pub fn build(self, s: &SolverSettings) -> Result<Box<dyn Solver>, Error> {
        let line_search = Preconditioner::LineSearch(s.ls);
        let fixed = Preconditioner::FixedStep { delta: s.delta };
        let oaccel = AccelConfig { w_max: s.w_max, eps0: s.eps0, ls: s.ls, ..AccelConfig::oaccel() };
        let ngmres = AccelConfig { w_max: s.w_max, eps0: s.eps0, ls: s.ls, ..AccelConfig::ngmres() };
        Ok(match self {
            SolverKind::OAccelA => Box::new(Accelerator::new(oaccel, line_search)?),
            SolverKind::OAccelB => Box::new(Accelerator::new(oaccel, fixed)?),
            SolverKind::NGmresA => Box::new(Accelerator::new(ngmres, line_search)?),
            SolverKind::NGmresB => Box::new(Accelerator::new(ngmres, fixed)?),
            SolverKind::Lbfgs => Box::new(Lbfgs::new(s.lbfgs_memory, s.ls)?),
            SolverKind::Ncg => Box::new(Ncg::new(s.ls)?),
        })
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.id().eq_ignore_ascii_case(s.trim()))
            .ok_or(Error::InvalidParameter { name: "solver", reason: "unknown solver id" })
    }
}

/// Shared solver parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Acceleration window.
    pub w_max: usize,
    /// Regularization scale.
    pub eps0: f64,
    /// Fixed-step preconditioner cap.
    pub delta: f64,
    /// L-BFGS memory.
    pub lbfgs_memory: usize,
    /// Line search used everywhere.
    pub ls: LineSearchConfig,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { w_max: 20, eps0: 1e-12, delta: 1e-4, lbfgs_memory: 5, ls: LineSearchConfig::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    struct ShiftedSphere;
    impl Objective for ShiftedSphere {
        fn dim(&self) -> usize {
            4
        }
        fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
            for (gi, xi) in g.iter_mut().zip(x) {
                *gi = xi - 1.0;
            }
            0.5 * dot(g, g)
        }
        fn known_minimum(&self) -> Option<f64> {
            Some(0.0)
        }
    }

    struct Unbounded;
    impl Objective for Unbounded {
        fn dim(&self) -> usize {
            3
        }
        fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
            g.iter_mut().for_each(|v| *v = -1.0);
            -x.iter().sum::<f64>()
        }
    }

    struct NanAtStart;
    impl Objective for NanAtStart {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, _: &[f64], g: &mut [f64]) -> f64 {
            g[0] = f64::NAN;
            f64::NAN
        }
    }

    #[test]
    fn start_at_optimum_costs_one_evaluation() {
        for kind in SolverKind::ALL {
            let mut s = kind.build(&SolverSettings::default()).unwrap();
            let r = minimize(&ShiftedSphere, s.as_mut(), &[1.0; 4], &Termination::objective(None)).unwrap();
            assert!(r.success, "{kind}");
            assert_eq!(r.counter.iterations, 0);
            assert_eq!(r.counter.fg_evals, 1);
            assert_eq!(r.evals_to_tolerance(), Some(1));
        }
    }

    #[test]
    fn unbounded_objective_fails_after_budget() {
        for kind in SolverKind::ALL {
            let mut s = kind.build(&SolverSettings::default()).unwrap();
            let term = Termination::gradient().with_max_iters(5);
            let r = minimize(&Unbounded, s.as_mut(), &[0.0; 3], &term).unwrap();
            assert!(!r.success, "{kind}");
            assert_eq!(r.counter.iterations, 5, "{kind}");
            assert_eq!(r.evals_to_tolerance(), None);
        }
    }

    #[test]
    fn non_finite_start_is_a_failed_run() {
        let mut s = SolverKind::Lbfgs.build(&SolverSettings::default()).unwrap();
        let r = minimize(&NanAtStart, s.as_mut(), &[0.0], &Termination::gradient()).unwrap();
        assert!(!r.success);
        assert_eq!(r.counter.iterations, 0);
    }

    #[test]
    fn configuration_errors() {
        let mut s = SolverKind::Lbfgs.build(&SolverSettings::default()).unwrap();
        assert!(matches!(
            minimize(&ShiftedSphere, s.as_mut(), &[0.0; 2], &Termination::gradient()),
            Err(Error::DimensionMismatch { expected: 4, got: 2 })
        ));
        assert!(minimize(&Unbounded, s.as_mut(), &[0.0; 3], &Termination::objective(None)).is_err());
    }

    #[test]
    fn solver_ids_round_trip() {
        for kind in SolverKind::ALL {
            assert_eq!(kind.id().parse::<SolverKind>().unwrap(), kind);
        }
        assert!("bfgs".parse::<SolverKind>().is_err());
    }

    #[test]
    fn every_solver_converges_on_a_sphere() {
        for kind in SolverKind::ALL {
            let mut s = kind.build(&SolverSettings::default()).unwrap();
            let r = minimize(&ShiftedSphere, s.as_mut(), &[0.0, 0.5, 2.0, -1.0], &Termination::objective(None))
                .unwrap();
            assert!(r.success, "{kind}");
            assert!(r.trace.windows(2).all(|w| w[1].fg_evals >= w[0].fg_evals));
        }
    }
}
