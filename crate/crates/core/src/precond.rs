//! Steepest-descent preconditioners.
//!
//! Both variants step along the normalized negative gradient,
//! `x − λ·g/‖g‖₂`, and differ only in how `λ` is chosen.

use crate::error::Error;
use crate::linalg::{along, norm2};
use crate::linesearch::{self, LineSearchConfig};
use crate::objective::{Evaluator, Point};

/// Inner one-step solver whose output the accelerators improve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preconditioner {
    /// `λ` from a strong-Wolfe line search starting at `λ = 1`.
    LineSearch(LineSearchConfig),
    /// `λ = min(δ, ‖g‖₂)`.
    FixedStep {
        /// Step cap `δ`.
        delta: f64,
    },
}

impl Preconditioner {
    /// Line-search variant with default parameters.
    pub fn line_search() -> Self {
        Self::LineSearch(LineSearchConfig::default())
    }

    /// Fixed-step variant with `δ = 1e-4`.
    pub fn fixed() -> Self {
        Self::FixedStep { delta: 1e-4 }
    }

    /// Checks parameters.
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            Self::LineSearch(ls) => ls.validate(),
            Self::FixedStep { delta } if *delta > 0.0 && delta.is_finite() => Ok(()),
            Self::FixedStep { .. } => Err(Error::InvalidParameter { name: "delta", reason: "must be positive" }),
        }
    }

    /// Applies the preconditioner at `p`, returning `x^P` with its value
    /// and gradient. A stationary point is returned unchanged at no cost.
    pub fn apply(&self, ev: &mut Evaluator<'_>, p: &Point) -> Point {
        match *self {
            Self::LineSearch(ref ls) => sd_linesearch(ev, p, ls),
            Self::FixedStep { delta } => sd_fixed(ev, p, delta),
        }
    }
}

/// `x − λ·g/‖g‖₂` with `λ` from a strong-Wolfe search.
///
/// If the search makes no progress the best trial is used, which may be `p`
/// itself.
pub fn sd_linesearch(ev: &mut Evaluator<'_>, p: &Point, ls: &LineSearchConfig) -> Point {
    let gnorm = norm2(&p.g);
    if gnorm == 0.0 || !gnorm.is_finite() {
        return p.clone();
    }
    let dir: alloc::vec::Vec<f64> = p.g.iter().map(|v| -v / gnorm).collect();
    linesearch::search(ev, p, &dir, ls).point
}

/// `x − min(δ, ‖g‖₂)·g/‖g‖₂`. Reuses the gradient stored in `p`, so it costs
/// exactly one evaluation (at the new point).
pub fn sd_fixed(ev: &mut Evaluator<'_>, p: &Point, delta: f64) -> Point {
    let gnorm = norm2(&p.g);
    if gnorm == 0.0 || !gnorm.is_finite() {
        return p.clone();
    }
    let step = f64::min(delta, gnorm);
    ev.point(along(&p.x, -step / gnorm, &p.g))
}
