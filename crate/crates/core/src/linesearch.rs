//! More-Thuente line search for the strong Wolfe conditions.
//!
//! The search works on `φ(λ) = f(x + λd)` and its derivative, always
//! evaluated together. It follows the MINPACK-2 `dcsrch`/`dcstep` scheme:
//! a modified auxiliary function until the sufficient decrease test and a
//! nonnegative slope are seen, cubic and quadratic interpolation steps with
//! bisection safeguards, and extrapolation by factors between 1.1 and 4
//! while no bracket exists.

use crate::error::Error;
use crate::linalg::{along, dot};
use crate::objective::{Evaluator, Point};

const XTRAPL: f64 = 1.1;
const XTRAPU: f64 = 4.0;
const P5: f64 = 0.5;
const P66: f64 = 0.66;

/// Line-search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    /// Sufficient decrease parameter.
    pub c1: f64,
    /// Curvature parameter.
    pub c2: f64,
    /// First trial step.
    pub lambda0: f64,
    /// Evaluation budget per search.
    pub max_fg_evals: u32,
    /// Smallest admissible step.
    pub lambda_min: f64,
    /// Largest admissible step.
    pub lambda_max: f64,
    /// Relative width of the interval of uncertainty at which the search
    /// gives up.
    pub xtol: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            c2: 0.1,
            lambda0: 1.0,
            max_fg_evals: 20,
            lambda_min: 1e-16,
            lambda_max: 1e16,
            xtol: 1e-15,
        }
    }
}

impl LineSearchConfig {
    /// Checks `0 < c1 < c2 < 1` and the step bounds.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.c1 > 0.0 && self.c1 < self.c2 && self.c2 < 1.0) {
            return Err(Error::InvalidParameter { name: "c1/c2", reason: "need 0 < c1 < c2 < 1" });
        }
        if !(self.lambda_min > 0.0 && self.lambda_min < self.lambda_max) {
            return Err(Error::InvalidParameter {
                name: "lambda_min/lambda_max",
                reason: "need 0 < lambda_min < lambda_max",
            });
        }
        if !(self.lambda0 > 0.0) || self.max_fg_evals == 0 {
            return Err(Error::InvalidParameter {
                name: "lambda0/max_fg_evals",
                reason: "need a positive first step and budget",
            });
        }
        Ok(())
    }
}

/// How a search ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchStatus {
    /// Strong Wolfe conditions hold at the returned step.
    Converged,
    /// Evaluation budget exhausted; the best trial is returned.
    MaxEvals,
    /// Not a descent direction; nothing was evaluated.
    BracketFailure,
    /// Interval of uncertainty collapsed or a step bound was hit without
    /// satisfying the conditions; the best trial is returned.
    Stalled,
}

/// Result of a scalar search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfeResult {
    /// Returned step (0 means "stay at the start").
    pub step: f64,
    /// `φ(step)`.
    pub phi: f64,
    /// `φ'(step)`.
    pub dphi: f64,
    /// Termination status.
    pub status: LineSearchStatus,
    /// Evaluations performed.
    pub evals: u32,
}

/// Strong-Wolfe search on a scalar function.
///
/// `eval(λ)` returns `(φ(λ), φ'(λ))`. `phi0`/`dphi0` are the values at
/// `λ = 0`, which must already be known. On [`LineSearchStatus::Converged`]
/// the returned step satisfies `φ(λ) ≤ φ(0) + c1·λ·φ'(0)` and
/// `|φ'(λ)| ≤ c2·|φ'(0)|`. Otherwise the step with the lowest `φ` seen is
/// returned, which may be `λ = 0`.
pub fn wolfe_search<F>(phi0: f64, dphi0: f64, mut eval: F, cfg: &LineSearchConfig) -> WolfeResult
where
    F: FnMut(f64) -> (f64, f64),
{
    let failed = WolfeResult {
        step: 0.0,
        phi: phi0,
        dphi: dphi0,
        status: LineSearchStatus::BracketFailure,
        evals: 0,
    };
    if !(dphi0 < 0.0) || !phi0.is_finite() {
        return failed;
    }

    let ginit = dphi0;
    let gtest = cfg.c1 * ginit;
    let mut stpmax = cfg.lambda_max;
    let stpmin = cfg.lambda_min;
    let mut stp = cfg.lambda0.clamp(stpmin, stpmax);

    let mut brackt = false;
    let mut stage1 = true;
    let mut width = stpmax - stpmin;
    let mut width1 = width / P5;

    let mut sx = Endpoint { stp: 0.0, f: phi0, g: ginit };
    let mut sy = sx;
    let mut stmin = 0.0;
    let mut stmax = stp + XTRAPU * stp;

    let mut best = (0.0, phi0, dphi0);
    let mut evals = 0u32;

    let finish = |best: (f64, f64, f64), status, evals| WolfeResult {
        step: best.0,
        phi: best.1,
        dphi: best.2,
        status,
        evals,
    };

    loop {
        let (f, g) = eval(stp);
        evals += 1;

        if !(f.is_finite() && g.is_finite()) {
            // Treat as a failed trial: pull back towards the best endpoint and
            // never go beyond this step again.
            if evals >= cfg.max_fg_evals {
                return finish(best, LineSearchStatus::MaxEvals, evals);
            }
            stpmax = stp;
            stmax = f64::min(stmax, stp);
            stp = sx.stp + P5 * (stp - sx.stp);
            if stp <= stpmin || stp <= sx.stp {
                return finish(best, LineSearchStatus::Stalled, evals);
            }
            continue;
        }

        if f < best.1 {
            best = (stp, f, g);
        }

        let ftest = phi0 + stp * gtest;
        if stage1 && f <= ftest && g >= 0.0 {
            stage1 = false;
        }

        if f <= ftest && g.abs() <= cfg.c2 * (-ginit) {
            return WolfeResult { step: stp, phi: f, dphi: g, status: LineSearchStatus::Converged, evals };
        }
        if brackt && (stp <= stmin || stp >= stmax) {
            return finish(best, LineSearchStatus::Stalled, evals);
        }
        if brackt && stmax - stmin <= cfg.xtol * stmax {
            return finish(best, LineSearchStatus::Stalled, evals);
        }
        if stp == stpmax && f <= ftest && g <= gtest {
            return finish(best, LineSearchStatus::Stalled, evals);
        }
        if stp == stpmin && (f > ftest || g >= gtest) {
            return finish(best, LineSearchStatus::Stalled, evals);
        }
        if evals >= cfg.max_fg_evals {
            return finish(best, LineSearchStatus::MaxEvals, evals);
        }

        let trial = Endpoint { stp, f, g };
        if stage1 && f <= sx.f && f > ftest {
            // Work on the modified function ψ(λ) = φ(λ) − φ(0) − c1·λ·φ'(0).
            let shift = |e: Endpoint| Endpoint { stp: e.stp, f: e.f - e.stp * gtest, g: e.g - gtest };
            let unshift = |e: Endpoint| Endpoint { stp: e.stp, f: e.f + e.stp * gtest, g: e.g + gtest };
            let mut mx = shift(sx);
            let mut my = shift(sy);
            stp = cstep(&mut mx, &mut my, shift(trial), &mut brackt, stmin, stmax);
            sx = unshift(mx);
            sy = unshift(my);
        } else {
            stp = cstep(&mut sx, &mut sy, trial, &mut brackt, stmin, stmax);
        }

        if brackt {
            if (sy.stp - sx.stp).abs() >= P66 * width1 {
                stp = sx.stp + P5 * (sy.stp - sx.stp);
            }
            width1 = width;
            width = (sy.stp - sx.stp).abs();
            stmin = f64::min(sx.stp, sy.stp);
            stmax = f64::max(sx.stp, sy.stp);
        } else {
            stmin = stp + XTRAPL * (stp - sx.stp);
            stmax = stp + XTRAPU * (stp - sx.stp);
        }

        stp = stp.clamp(stpmin, stpmax);
        if brackt && (stp <= stmin || stp >= stmax || stmax - stmin <= cfg.xtol * stmax) {
            stp = sx.stp;
        }
        if stp == sx.stp && sx.stp == 0.0 {
            // Nothing left to try between 0 and the bracket.
            return finish(best, LineSearchStatus::Stalled, evals);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Endpoint {
    stp: f64,
    f: f64,
    g: f64,
}

/// One safeguarded step of the interval update (`dcstep`). Updates the
/// interval `[x, y]` with the trial `p` and returns the next trial step.
fn cstep(x: &mut Endpoint, y: &mut Endpoint, p: Endpoint, brackt: &mut bool, stpmin: f64, stpmax: f64) -> f64 {
    let sgnd = p.g * x.g.signum();
    let stpf;

    if p.f > x.f {
        // Higher function value: the minimum is bracketed.
        let theta = 3.0 * (x.f - p.f) / (p.stp - x.stp) + x.g + p.g;
        let s = theta.abs().max(x.g.abs()).max(p.g.abs());
        let mut gamma = s * libm::sqrt(((theta / s) * (theta / s) - (x.g / s) * (p.g / s)).max(0.0));
        if p.stp < x.stp {
            gamma = -gamma;
        }
        let pp = (gamma - x.g) + theta;
        let q = ((gamma - x.g) + gamma) + p.g;
        let r = pp / q;
        let stpc = x.stp + r * (p.stp - x.stp);
        let stpq = x.stp + ((x.g / ((x.f - p.f) / (p.stp - x.stp) + x.g)) / 2.0) * (p.stp - x.stp);
        stpf = if (stpc - x.stp).abs() < (stpq - x.stp).abs() {
            stpc
        } else {
            stpc + (stpq - stpc) / 2.0
        };
        *brackt = true;
    } else if sgnd < 0.0 {
        // Derivatives of opposite sign: bracketed.
        let theta = 3.0 * (x.f - p.f) / (p.stp - x.stp) + x.g + p.g;
        let s = theta.abs().max(x.g.abs()).max(p.g.abs());
        let mut gamma = s * libm::sqrt(((theta / s) * (theta / s) - (x.g / s) * (p.g / s)).max(0.0));
        if p.stp > x.stp {
            gamma = -gamma;
        }
        let pp = (gamma - p.g) + theta;
        let q = ((gamma - p.g) + gamma) + x.g;
        let r = pp / q;
        let stpc = p.stp + r * (x.stp - p.stp);
        let stpq = p.stp + (p.g / (p.g - x.g)) * (x.stp - p.stp);
        stpf = if (stpc - p.stp).abs() > (stpq - p.stp).abs() { stpc } else { stpq };
        *brackt = true;
    } else if p.g.abs() < x.g.abs() {
        // Same sign, decreasing magnitude.
        let theta = 3.0 * (x.f - p.f) / (p.stp - x.stp) + x.g + p.g;
        let s = theta.abs().max(x.g.abs()).max(p.g.abs());
        let mut gamma = s * libm::sqrt(((theta / s) * (theta / s) - (x.g / s) * (p.g / s)).max(0.0));
        if p.stp > x.stp {
            gamma = -gamma;
        }
        let pp = (gamma - p.g) + theta;
        let q = (gamma + (x.g - p.g)) + gamma;
        let r = pp / q;
        let stpc = if r < 0.0 && gamma != 0.0 {
            p.stp + r * (x.stp - p.stp)
        } else if p.stp > x.stp {
            stpmax
        } else {
            stpmin
        };
        let stpq = p.stp + (p.g / (p.g - x.g)) * (x.stp - p.stp);
        if *brackt {
            let cand = if (stpc - p.stp).abs() < (stpq - p.stp).abs() { stpc } else { stpq };
            let limit = p.stp + P66 * (y.stp - p.stp);
            stpf = if p.stp > x.stp { cand.min(limit) } else { cand.max(limit) };
        } else {
            let cand = if (stpc - p.stp).abs() > (stpq - p.stp).abs() { stpc } else { stpq };
            stpf = cand.clamp(stpmin, stpmax);
        }
    } else {
        // Same sign, non-decreasing magnitude.
        stpf = if *brackt {
            let theta = 3.0 * (p.f - y.f) / (y.stp - p.stp) + y.g + p.g;
            let s = theta.abs().max(y.g.abs()).max(p.g.abs());
            let mut gamma = s * libm::sqrt(((theta / s) * (theta / s) - (y.g / s) * (p.g / s)).max(0.0));
            if p.stp > y.stp {
                gamma = -gamma;
            }
            let pp = (gamma - p.g) + theta;
            let q = ((gamma - p.g) + gamma) + y.g;
            let r = pp / q;
            p.stp + r * (y.stp - p.stp)
        } else if p.stp > x.stp {
            stpmax
        } else {
            stpmin
        };
    }

    if p.f > x.f {
        *y = p;
    } else {
        if sgnd < 0.0 {
            *y = *x;
        }
        *x = p;
    }
    stpf
}

/// A line search along a vector direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    /// Accepted point (the start point when no trial improved on it).
    pub point: Point,
    /// Step taken.
    pub step: f64,
    /// Search status.
    pub status: LineSearchStatus,
}

/// Searches along `start.x + λ·d`, counting every trial through `ev`.
///
/// `d` must be a descent direction at `start`; otherwise the start point is
/// returned with [`LineSearchStatus::BracketFailure`].
pub fn search(ev: &mut Evaluator<'_>, start: &Point, d: &[f64], cfg: &LineSearchConfig) -> LineSearchOutcome {
    let dphi0 = dot(&start.g, d);
    let mut last: Option<(f64, Point)> = None;
    let mut best: Option<(f64, Point)> = None;
    let res = wolfe_search(
        start.f,
        dphi0,
        |t| {
            let p = ev.point(along(&start.x, t, d));
            let slope = dot(&p.g, d);
            let phi = p.f;
            let improves = phi.is_finite()
                && best.as_ref().map_or(phi < start.f, |(_, b): &(f64, Point)| phi < b.f);
            if improves {
                best = Some((t, p.clone()));
            }
            last = Some((t, p));
            (phi, slope)
        },
        cfg,
    );
    let pick = |cand: Option<(f64, Point)>| cand.filter(|(t, _)| *t == res.step).map(|(_, p)| p);
    let point = if res.step == 0.0 {
        start.clone()
    } else {
        pick(last)
            .or_else(|| pick(best))
            .unwrap_or_else(|| ev.point(along(&start.x, res.step, d)))
    };
    LineSearchOutcome { point, step: res.step, status: res.status }
}

/// Strong Wolfe check used by tests and debug assertions.
pub fn satisfies_strong_wolfe(phi0: f64, dphi0: f64, step: f64, phi: f64, dphi: f64, c1: f64, c2: f64) -> bool {
    phi <= phi0 + c1 * step * dphi0 && dphi.abs() <= c2 * dphi0.abs()
}
