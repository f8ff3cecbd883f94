//! Convergence tests.

use crate::error::Error;
use crate::linalg::norm_inf;
use crate::objective::Point;

/// Relative objective decrease test: `f_k − f* < rel·(f_0 − f*)`.
///
/// The inequality is strict, except that `f_k ≤ f*` always passes. A start
/// below `f*` makes the test meaningless and counts as reached. Non-finite
/// input never passes.
pub fn check_tolerance_objective(f_k: f64, f_0: f64, f_star: f64, rel: f64) -> bool {
    if !(f_k.is_finite() && f_0.is_finite() && f_star.is_finite() && rel.is_finite()) {
        return false;
    }
    if f_0 < f_star || f_k <= f_star {
        return true;
    }
    f_k - f_star < rel * (f_0 - f_star)
}

/// Relative gradient decrease test on infinity norms: `‖g_k‖ ≤ rel·‖g_0‖`.
pub fn check_tolerance_gradient(gk_norm: f64, g0_norm: f64, rel: f64) -> bool {
    if !(gk_norm.is_finite() && g0_norm.is_finite() && rel.is_finite()) {
        return false;
    }
    gk_norm <= rel * g0_norm
}

/// Which quantity the tolerance is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceMode {
    /// Relative decrease of `f − f*`.
    Objective,
    /// Relative decrease of `‖g‖∞`.
    Gradient,
    /// Never converges; runs the full iteration budget. Used to record a
    /// trace when `f*` is not yet known.
    Budget,
}

/// Termination rule for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    /// Tolerance quantity.
    pub mode: ToleranceMode,
    /// Relative tolerance.
    pub rel_tol: f64,
    /// Outer iteration budget.
    pub max_iters: u64,
    /// Minimum value, required in objective mode.
    pub f_star: Option<f64>,
    /// Reference gradient norm; taken from the start point when unset.
    pub g0_norm: Option<f64>,
}

impl Termination {
    /// Default iteration budget for objective-decrease runs.
    pub const DEFAULT_MAX_ITERS: u64 = 1500;

    /// Objective decrease to `1e-10` with the given `f*`.
    pub fn objective(f_star: Option<f64>) -> Self {
        Self {
            mode: ToleranceMode::Objective,
            rel_tol: 1e-10,
            max_iters: Self::DEFAULT_MAX_ITERS,
            f_star,
            g0_norm: None,
        }
    }

    /// Gradient decrease to `1e-8`, 2000 iterations.
    pub fn gradient() -> Self {
        Self {
            mode: ToleranceMode::Gradient,
            rel_tol: 1e-8,
            max_iters: 2000,
            f_star: None,
            g0_norm: None,
        }
    }

    /// Run until the iteration budget is spent.
    pub fn budget(max_iters: u64) -> Self {
        Self {
            mode: ToleranceMode::Budget,
            rel_tol: 0.0,
            max_iters,
            f_star: None,
            g0_norm: None,
        }
    }

    /// Sets the relative tolerance.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    /// Sets the iteration budget.
    pub fn with_max_iters(mut self, max_iters: u64) -> Self {
        self.max_iters = max_iters;
        self
    }

    /// Fixes the reference values against the start point.
    pub fn bind(&self, start: &Point) -> Result<StopRule, Error> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter { name: "max_iters", reason: "must be positive" });
        }
        let reference = match self.mode {
            ToleranceMode::Objective => {
                let f_star = self
                    .f_star
                    .ok_or(Error::IncompleteTermination("objective mode needs f_star"))?;
                Reference::Objective { f0: start.f, f_star }
            }
            ToleranceMode::Gradient => {
                Reference::Gradient { g0: self.g0_norm.unwrap_or_else(|| norm_inf(&start.g)) }
            }
            ToleranceMode::Budget => Reference::Never,
        };
        Ok(StopRule { reference, rel: self.rel_tol, max_iters: self.max_iters })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Reference {
    Objective { f0: f64, f_star: f64 },
    Gradient { g0: f64 },
    Never,
}

/// A [`Termination`] bound to a start point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    reference: Reference,
    rel: f64,
    max_iters: u64,
}

impl StopRule {
    /// True when `p` satisfies the tolerance.
    pub fn reached(&self, p: &Point) -> bool {
        match self.reference {
            Reference::Objective { f0, f_star } => check_tolerance_objective(p.f, f0, f_star, self.rel),
            Reference::Gradient { g0 } => {
                crate::linalg::all_finite(&p.g) && check_tolerance_gradient(norm_inf(&p.g), g0, self.rel)
            }
            Reference::Never => false,
        }
    }

    /// Outer iteration budget.
    pub fn max_iters(&self) -> u64 {
        self.max_iters
    }
}
