//! O-ACCEL and N-GMRES acceleration.
//!
//! Both engines keep a window of previous iterates `x_1..x_w` with their
//! gradients `r_1..r_w`. After the preconditioner proposes `x^P`, they pick
//! coefficients `α` and form
//!
//! ```text
//! x^A = x^P + Σ_j α_j (x_j − x^P)
//! ```
//!
//! O-ACCEL chooses `α` so that the linearized gradient at `x^A` is orthogonal
//! to the subspace, i.e. it approximately minimizes `f` over
//! `x^P + span{x_j − x^P}`:
//!
//! ```text
//! (X − X^P)ᵀ (g(X) − g(X^P)) α = −(X − X^P)ᵀ g(x^P)
//! ```
//!
//! N-GMRES instead minimizes the norm of the linearized gradient, which
//! leads to the normal equations
//!
//! ```text
//! (g(X) − g(X^P))ᵀ (g(X) − g(X^P)) α = −(g(X) − g(X^P))ᵀ g(x^P)
//! ```
//!
//! The `w×w` matrices are built from a cache of inner products between the
//! stored vectors, so one assembly costs `O(w·n + w²)`. The small system is
//! solved with a Tikhonov shift `ε = ε0·max_i A_ii`. If `x^A − x^P` is not a
//! descent direction the history is discarded and restarted from `x^P`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{all_finite, dot, lu_solve, sub, Matrix};
use crate::linesearch::{self, LineSearchConfig};
use crate::objective::{Evaluator, Objective, Point};
use crate::precond::Preconditioner;
use crate::solver::{Solver, StepResult, StepStatus};
use crate::termination::StopRule;

/// Acceleration target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccelMode {
    /// O-ACCEL: minimize a model of the objective over the subspace.
    Objective,
    /// N-GMRES: minimize the ℓ2 norm of the linearized gradient.
    GradientNorm,
}

/// How the Hessian action on the subspace is obtained in objective mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// `H(x^P)(x_j − x^P) ≈ g(x_j) − g(x^P)`, from cached inner products.
    GradientDifference,
    /// Exact Hessian-vector products supplied by the objective.
    HessianAction,
}

/// Acceleration parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelConfig {
    /// O-ACCEL or N-GMRES.
    pub mode: AccelMode,
    /// System assembly (objective mode only).
    pub system: SystemKind,
    /// Maximum history length.
    pub w_max: usize,
    /// Regularization scale.
    pub eps0: f64,
    /// Line search from `x^P` towards `x^A`.
    pub ls: LineSearchConfig,
    /// Take `x^A` directly instead of line searching towards it.
    pub accept_unit_step: bool,
}

impl AccelConfig {
    /// O-ACCEL with default parameters.
    pub fn oaccel() -> Self {
        Self {
            mode: AccelMode::Objective,
            system: SystemKind::GradientDifference,
            w_max: 20,
            eps0: 1e-12,
            ls: LineSearchConfig::default(),
            accept_unit_step: false,
        }
    }

    /// N-GMRES with default parameters.
    pub fn ngmres() -> Self {
        Self { mode: AccelMode::GradientNorm, ..Self::oaccel() }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<(), Error> {
        if self.w_max == 0 {
            return Err(Error::InvalidParameter { name: "w_max", reason: "must be at least 1" });
        }
        if !(self.eps0 >= 0.0) || !self.eps0.is_finite() {
            return Err(Error::InvalidParameter { name: "eps0", reason: "must be finite and nonnegative" });
        }
        if self.mode == AccelMode::GradientNorm && self.system == SystemKind::HessianAction {
            return Err(Error::InvalidParameter {
                name: "system",
                reason: "Hessian-action assembly only applies to objective mode",
            });
        }
        self.ls.validate()
    }
}

/// Circular window of iterates, gradients and cached inner products.
///
/// The cache is centred on the newest stored point `(c, d) = (x_new, r_new)`:
/// in objective mode `q[i][j] = (x_i − c)ᵀ(r_j − d)`, in gradient-norm mode
/// `q[i][j] = (r_i − d)ᵀ(r_j − d)`. Plain `x_iᵀr_j` products lose most of
/// their digits to cancellation when `x^P` is close to the stored points,
/// e.g. right after a reset. Moving the centre costs `O(w·n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    mode: AccelMode,
    w_max: usize,
    w: usize,
    accepted: usize,
    newest: usize,
    xs: Vec<Vec<f64>>,
    rs: Vec<Vec<f64>>,
    q: Matrix,
}

impl History {
    /// History holding the single point `start`.
    pub fn new(mode: AccelMode, w_max: usize, start: &Point) -> Self {
        assert!(w_max >= 1, "history needs at least one slot");
        let mut h = Self {
            mode,
            w_max,
            w: 0,
            accepted: 0,
            newest: 0,
            xs: Vec::with_capacity(w_max),
            rs: Vec::with_capacity(w_max),
            q: Matrix::zeros(w_max, w_max),
        };
        h.reset(start);
        h
    }

    /// Drops everything and restarts from `start` (`w = 1`).
    pub fn reset(&mut self, start: &Point) {
        self.xs.clear();
        self.rs.clear();
        self.xs.push(start.x.clone());
        self.rs.push(start.g.clone());
        self.w = 1;
        self.accepted = 0;
        self.newest = 0;
        self.q[(0, 0)] = 0.0;
    }

    /// Stores an accepted iterate, overwriting the slot
    /// `accepted mod w_max` once the window is full.
    pub fn push(&mut self, p: &Point) {
        self.accepted += 1;
        let w_old = self.w;
        self.w = usize::min(self.w + 1, self.w_max);
        let j = self.accepted % self.w_max;
        self.recentre(&p.x, &p.g, j, w_old);
        if j == self.xs.len() {
            self.xs.push(p.x.clone());
            self.rs.push(p.g.clone());
        } else {
            self.xs[j].copy_from_slice(&p.x);
            self.rs[j].copy_from_slice(&p.g);
        }
        self.newest = j;
        // the centre itself has a zero row and column
        for i in 0..self.w {
            self.q[(i, j)] = 0.0;
            self.q[(j, i)] = 0.0;
        }
    }

    /// Moves the cache centre to `(cx, cr)` for every live slot except
    /// `skip`, which is about to be overwritten.
    fn recentre(&mut self, cx: &[f64], cr: &[f64], skip: usize, live: usize) {
        let dc = sub(cx, &self.xs[self.newest]);
        let dd = sub(cr, &self.rs[self.newest]);
        let d_old = &self.rs[self.newest];
        let slots = (0..live).filter(|&i| i != skip);
        match self.mode {
            AccelMode::Objective => {
                let c_old = &self.xs[self.newest];
                let mut u = vec![0.0; live];
                let mut v = vec![0.0; live];
                for k in slots.clone() {
                    u[k] = dot_diff(&dc, &self.rs[k], d_old);
                    v[k] = dot_diff(&dd, &self.xs[k], c_old);
                }
                let s = dot(&dc, &dd);
                for i in slots.clone() {
                    for k in slots.clone() {
                        self.q[(i, k)] += s - u[k] - v[i];
                    }
                }
            }
            AccelMode::GradientNorm => {
                let mut v = vec![0.0; live];
                for k in slots.clone() {
                    v[k] = dot_diff(&dd, &self.rs[k], d_old);
                }
                let s = dot(&dd, &dd);
                for i in slots.clone() {
                    for k in slots.clone() {
                        self.q[(i, k)] += s - (v[i] + v[k]);
                    }
                }
            }
        }
    }

    /// Current window length `w`.
    pub fn len(&self) -> usize {
        self.w
    }

    /// Always false: a history holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.w == 0
    }

    /// Maximum window length.
    pub fn capacity(&self) -> usize {
        self.w_max
    }

    /// Cache flavour.
    pub fn mode(&self) -> AccelMode {
        self.mode
    }

    /// Stored iterate in slot `i`.
    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i]
    }

    /// Stored gradient in slot `i`.
    pub fn r(&self, i: usize) -> &[f64] {
        &self.rs[i]
    }

    /// Slot of the most recently stored point, the cache centre.
    pub fn newest(&self) -> usize {
        self.newest
    }

    /// Cached centred inner product for slots `(i, j)`.
    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.q[(i, j)]
    }

    /// Accepted steps since the last reset.
    pub fn accepted(&self) -> usize {
        self.accepted
    }

    fn centred_x(&self, i: usize) -> Vec<f64> {
        sub(&self.xs[i], &self.xs[self.newest])
    }

    fn centred_r(&self, i: usize) -> Vec<f64> {
        sub(&self.rs[i], &self.rs[self.newest])
    }
}

/// `aᵀ(x − y)` without forming `x − y`.
fn dot_diff(a: &[f64], x: &[f64], y: &[f64]) -> f64 {
    a.iter().zip(x).zip(y).map(|((ai, xi), yi)| ai * (xi - yi)).sum()
}

/// The `w×w` system `A α = b` for the acceleration coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallSystem {
    /// System matrix.
    pub a: Matrix,
    /// Right-hand side.
    pub b: Vec<f64>,
}

/// Output of [`regularized_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedSolution {
    /// Coefficients (zero when degenerate).
    pub alpha: Vec<f64>,
    /// Applied shift `ε = ε0·max_i A_ii` (0 when that maximum is ≤ 0).
    pub epsilon: f64,
    /// The system was non-finite or the factorization broke down.
    pub degenerate: bool,
}

/// O-ACCEL system with the gradient-difference Hessian approximation.
///
/// `A_ij = (x_i − x^P)ᵀ(r_j − g^P) = q_ij − ξ1_i − ξ2_j + η` and
/// `b_i = −(x_i − x^P)ᵀg^P`, where, with every vector centred on the newest
/// stored point, `η = x^Pᵀg^P`, `ξ1_i = x_iᵀg^P` and `ξ2_j = x^Pᵀr_j`.
pub fn assemble_system_gradient(h: &History, xp: &[f64], gp: &[f64]) -> SmallSystem {
    assert_eq!(h.mode, AccelMode::Objective, "cache holds gradient products only");
    let w = h.w;
    let xpc = sub(xp, &h.xs[h.newest]);
    let gpc = sub(gp, &h.rs[h.newest]);
    let eta = dot(&xpc, &gpc);
    let xc: Vec<Vec<f64>> = (0..w).map(|i| h.centred_x(i)).collect();
    let xi1: Vec<f64> = xc.iter().map(|x| dot(x, &gpc)).collect();
    let xi2: Vec<f64> = (0..w).map(|j| dot_diff(&xpc, &h.rs[j], &h.rs[h.newest])).collect();
    let mut a = Matrix::zeros(w, w);
    for i in 0..w {
        for j in 0..w {
            a[(i, j)] = h.q[(i, j)] - xi1[i] - xi2[j] + eta;
        }
    }
    let xp_g = dot(&xpc, gp);
    let b = xc.iter().map(|x| xp_g - dot(x, gp)).collect();
    SmallSystem { a, b }
}

/// O-ACCEL system with exact Hessian products:
/// `A_ij = (x_i − x^P)ᵀ H(x^P) (x_j − x^P)`, `b_i = −(x_i − x^P)ᵀg^P`.
pub fn assemble_system_hessian(h: &History, xp: &[f64], gp: &[f64], obj: &dyn Objective) -> Result<SmallSystem, Error> {
    if !obj.has_hessian_action() {
        return Err(Error::MissingHessianAction);
    }
    let w = h.w;
    let diffs: Vec<Vec<f64>> = (0..w).map(|i| sub(&h.xs[i], xp)).collect();
    let mut hd = vec![0.0; xp.len()];
    let mut a = Matrix::zeros(w, w);
    for j in 0..w {
        obj.hessian_action(xp, &diffs[j], &mut hd)?;
        for i in 0..w {
            a[(i, j)] = dot(&diffs[i], &hd);
        }
    }
    let b = diffs.iter().map(|d| -dot(d, gp)).collect();
    Ok(SmallSystem { a, b })
}

/// N-GMRES normal equations:
/// `A_ij = (r_i − g^P)ᵀ(r_j − g^P) = q_ij − ξ_i − ξ_j + η` and
/// `b_i = −(r_i − g^P)ᵀg^P`, where, with gradients centred on the newest
/// stored one, `η = g^Pᵀg^P` and `ξ_i = r_iᵀg^P`.
pub fn assemble_system_ngmres(h: &History, gp: &[f64]) -> SmallSystem {
    assert_eq!(h.mode, AccelMode::GradientNorm, "cache holds iterate-gradient products");
    let w = h.w;
    let gpc = sub(gp, &h.rs[h.newest]);
    let eta = dot(&gpc, &gpc);
    let rc: Vec<Vec<f64>> = (0..w).map(|i| h.centred_r(i)).collect();
    let xi: Vec<f64> = rc.iter().map(|r| dot(r, &gpc)).collect();
    let mut a = Matrix::zeros(w, w);
    for i in 0..w {
        for j in 0..w {
            a[(i, j)] = h.q[(i, j)] - xi[i] - xi[j] + eta;
        }
    }
    let gp_g = dot(&gpc, gp);
    let b = rc.iter().map(|r| gp_g - dot(r, gp)).collect();
    SmallSystem { a, b }
}

/// Solves `(A + εI) α = b` with `ε = eps0·max_i A_ii`.
pub fn regularized_solve(sys: &SmallSystem, eps0: f64) -> RegularizedSolution {
    let w = sys.b.len();
    let degenerate = |epsilon| RegularizedSolution { alpha: vec![0.0; w], epsilon, degenerate: true };
    if !all_finite(&sys.b) || !(0..w).all(|i| all_finite(sys.a.row(i))) {
        return degenerate(0.0);
    }
    let max_diag = (0..w).map(|i| sys.a[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let epsilon = if max_diag > 0.0 { eps0 * max_diag } else { 0.0 };
    let mut shifted = sys.a.clone();
    for i in 0..w {
        shifted[(i, i)] += epsilon;
    }
    match lu_solve(&shifted, &sys.b) {
        Some(alpha) => RegularizedSolution { alpha, epsilon, degenerate: false },
        None => degenerate(epsilon),
    }
}

/// `x^A = x^P + Σ_j α_j (x_j − x^P)`.
pub fn accelerate(h: &History, xp: &[f64], alpha: &[f64]) -> Vec<f64> {
    assert_eq!(alpha.len(), h.w, "one coefficient per stored iterate");
    let mut xa = xp.to_vec();
    for (j, &a) in alpha.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for ((o, xj), p) in xa.iter_mut().zip(&h.xs[j]).zip(xp) {
            *o += a * (xj - p);
        }
    }
    xa
}

/// Snapshot of one acceleration attempt, kept when recording is enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelRecord {
    /// History as it was when the system was assembled.
    pub history: History,
    /// Preconditioned point.
    pub xp: Point,
    /// Assembled system.
    pub system: SmallSystem,
    /// Solution of the regularized system.
    pub solution: RegularizedSolution,
}

/// O-ACCEL / N-GMRES engine on top of a preconditioner.
#[derive(Debug, Clone)]
pub struct Accelerator {
    cfg: AccelConfig,
    precond: Preconditioner,
    history: Option<History>,
    resets: u64,
    record: bool,
    records: Vec<AccelRecord>,
}

impl Accelerator {
    /// Engine with the given configuration.
    pub fn new(cfg: AccelConfig, precond: Preconditioner) -> Result<Self, Error> {
        cfg.validate()?;
        precond.validate()?;
        Ok(Self { cfg, precond, history: None, resets: 0, record: false, records: Vec::new() })
    }

    /// Keep an [`AccelRecord`] for every acceleration attempt.
    pub fn with_recording(mut self) -> Self {
        self.record = true;
        self
    }

    /// Configuration.
    pub fn config(&self) -> &AccelConfig {
        &self.cfg
    }

    /// Current history, if a run has started.
    pub fn history(&self) -> Option<&History> {
        self.history.as_ref()
    }

    /// Number of resets so far in this run.
    pub fn resets(&self) -> u64 {
        self.resets
    }

    /// Recorded attempts (empty unless recording is enabled).
    pub fn records(&self) -> &[AccelRecord] {
        &self.records
    }

    fn assemble(&self, h: &History, xp: &Point, obj: &dyn Objective) -> Result<SmallSystem, Error> {
        match (self.cfg.mode, self.cfg.system) {
            (AccelMode::GradientNorm, _) => Ok(assemble_system_ngmres(h, &xp.g)),
            (AccelMode::Objective, SystemKind::GradientDifference) => Ok(assemble_system_gradient(h, &xp.x, &xp.g)),
            (AccelMode::Objective, SystemKind::HessianAction) => assemble_system_hessian(h, &xp.x, &xp.g, obj),
        }
    }

    fn reset_to(&mut self, p: &Point) {
        self.resets += 1;
        match self.history.as_mut() {
            Some(h) => h.reset(p),
            None => self.history = Some(History::new(self.cfg.mode, self.cfg.w_max, p)),
        }
    }

    /// One acceleration step from the newest stored iterate.
    ///
    /// Applies the preconditioner, returns early if `x^P` meets the stopping
    /// rule, otherwise solves for `α`, and either line searches from `x^P`
    /// towards `x^A` (appending the result to the history) or resets the
    /// history to `x^P` when `x^A − x^P` is not a descent direction.
    pub fn accel_step(&mut self, ev: &mut Evaluator<'_>, current: &Point, stop: &StopRule) -> StepResult {
        if self.history.is_none() {
            self.history = Some(History::new(self.cfg.mode, self.cfg.w_max, current));
        }
        let xp = self.precond.apply(ev, current);
        if stop.reached(&xp) {
            return StepResult { next: xp, status: StepStatus::Converged };
        }
        if !xp.is_finite() {
            return StepResult { next: xp, status: StepStatus::Stalled };
        }

        let h = self.history.as_ref().expect("history initialized above");
        // A fresh history at an unmoved point would repeat this step exactly.
        if h.len() == 1 && xp.x == current.x && h.x(0) == current.x.as_slice() {
            return StepResult { next: xp, status: StepStatus::Stalled };
        }
        let system = match self.assemble(h, &xp, ev.objective()) {
            Ok(s) => s,
            // validated in `start`, so this only happens if the objective
            // changes its mind
            Err(_) => {
                self.reset_to(&xp);
                return StepResult { next: xp, status: StepStatus::Reset };
            }
        };
        let solution = regularized_solve(&system, self.cfg.eps0);
        let xa = accelerate(h, &xp.x, &solution.alpha);
        let d = sub(&xa, &xp.x);
        let slope = dot(&d, &xp.g);
        if self.record {
            self.records.push(AccelRecord { history: h.clone(), xp: xp.clone(), system, solution: solution.clone() });
        }

        if solution.degenerate || !(slope < 0.0) {
            self.reset_to(&xp);
            return StepResult { next: xp, status: StepStatus::Reset };
        }

        let next = if self.cfg.accept_unit_step {
            ev.point(xa)
        } else {
            linesearch::search(ev, &xp, &d, &self.cfg.ls).point
        };
        self.history.as_mut().expect("history initialized above").push(&next);
        StepResult { next, status: StepStatus::Progress }
    }
}

impl Solver for Accelerator {
    fn start(&mut self, ev: &Evaluator<'_>, start: &Point) -> Result<(), Error> {
        if self.cfg.mode == AccelMode::Objective
            && self.cfg.system == SystemKind::HessianAction
            && !ev.objective().has_hessian_action()
        {
            return Err(Error::MissingHessianAction);
        }
        self.history = Some(History::new(self.cfg.mode, self.cfg.w_max, start));
        self.resets = 0;
        self.records.clear();
        Ok(())
    }

    fn step(&mut self, ev: &mut Evaluator<'_>, current: &Point, stop: &StopRule) -> StepResult {
        self.accel_step(ev, current, stop)
    }
}
