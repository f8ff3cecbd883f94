//! Objective functions and evaluation accounting.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

/// A smooth objective `f: Rⁿ → R` with its gradient.
///
/// Value and gradient are always computed together; one call to
/// [`Objective::eval`] is one "fg evaluation". Implementations must be
/// deterministic: random problem instances fix their randomness at
/// construction.
pub trait Objective {
    /// Dimension `n`.
    fn dim(&self) -> usize;

    /// Returns `f(x)` and writes `∇f(x)` into `grad`.
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64;

    /// Writes `H(x)·v` into `out`.
    fn hessian_action(&self, _x: &[f64], _v: &[f64], _out: &mut [f64]) -> Result<(), Error> {
        Err(Error::MissingHessianAction)
    }

    /// Whether [`Objective::hessian_action`] is implemented.
    fn has_hessian_action(&self) -> bool {
        false
    }

    /// Minimum value, when known analytically.
    fn known_minimum(&self) -> Option<f64> {
        None
    }
}

impl<O: Objective + ?Sized> Objective for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).eval(x, grad)
    }
    fn hessian_action(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<(), Error> {
        (**self).hessian_action(x, v, out)
    }
    fn has_hessian_action(&self) -> bool {
        (**self).has_hessian_action()
    }
    fn known_minimum(&self) -> Option<f64> {
        (**self).known_minimum()
    }
}

/// Work counters for one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCounter {
    /// Combined f/g evaluations.
    pub fg_evals: u64,
    /// Outer iterations.
    pub iterations: u64,
}

/// A point together with its objective value and gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    /// Location.
    pub x: Vec<f64>,
    /// `f(x)`.
    pub f: f64,
    /// `∇f(x)`.
    pub g: Vec<f64>,
}

impl Point {
    /// True if value and gradient are finite.
    pub fn is_finite(&self) -> bool {
        self.f.is_finite() && crate::linalg::all_finite(&self.g)
    }
}

/// Counting front-end to an [`Objective`]. Every solver evaluates through
/// one of these, so `counter.fg_evals` is the number of `eval` calls.
pub struct Evaluator<'a> {
    obj: &'a dyn Objective,
    counter: EvalCounter,
}

impl<'a> Evaluator<'a> {
    /// Wraps `obj` with zeroed counters.
    pub fn new(obj: &'a dyn Objective) -> Self {
        Self { obj, counter: EvalCounter::default() }
    }

    /// The wrapped objective.
    pub fn objective(&self) -> &'a dyn Objective {
        self.obj
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.obj.dim()
    }

    /// Evaluates `f` and `∇f` at `x`; counts one fg evaluation.
    pub fn eval_into(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.counter.fg_evals += 1;
        self.obj.eval(x, grad)
    }

    /// Evaluates at `x` and packages the result.
    pub fn point(&mut self, x: Vec<f64>) -> Point {
        let mut g = vec![0.0; x.len()];
        let f = self.eval_into(&x, &mut g);
        Point { x, f, g }
    }

    /// Hessian-vector product; not counted as an fg evaluation.
    pub fn hessian_action(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<(), Error> {
        self.obj.hessian_action(x, v, out)
    }

    /// Current counters.
    pub fn counter(&self) -> EvalCounter {
        self.counter
    }

    /// Number of fg evaluations so far.
    pub fn fg_evals(&self) -> u64 {
        self.counter.fg_evals
    }

    pub(crate) fn bump_iteration(&mut self) {
        self.counter.iterations += 1;
    }
}

/// Central finite-difference Hessian-vector product built from gradients.
///
/// Uses `(∇f(x + h v) − ∇f(x − h v)) / 2h` with `h = √ε·(1 + ‖x‖∞)/‖v‖∞`.
pub fn fd_hessian_action(obj: &dyn Objective, x: &[f64], v: &[f64], out: &mut [f64]) {
    let vmax = crate::linalg::norm_inf(v);
    if vmax == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    let h = 1.5e-8 * (1.0 + crate::linalg::norm_inf(x)) / vmax;
    let xp = crate::linalg::along(x, h, v);
    let xm = crate::linalg::along(x, -h, v);
    let mut gp = vec![0.0; x.len()];
    let mut gm = vec![0.0; x.len()];
    obj.eval(&xp, &mut gp);
    obj.eval(&xm, &mut gm);
    for ((o, a), b) in out.iter_mut().zip(&gp).zip(&gm) {
        *o = (a - b) / (2.0 * h);
    }
}
