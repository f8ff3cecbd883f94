//! L-BFGS and nonlinear conjugate gradients.
//!
//! Both use the same strong-Wolfe line search as the accelerators, starting
//! from a unit step.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{axpy, dot, sub};
use crate::linesearch::{self, LineSearchConfig};
use crate::objective::{Evaluator, Point};
use crate::solver::{Solver, StepResult, StepStatus};
use crate::termination::StopRule;

/// Curvature pairs for the two-loop recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsState {
    memory: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl LbfgsState {
    /// Empty state keeping at most `memory` pairs.
    pub fn new(memory: usize) -> Self {
        Self { memory, pairs: VecDeque::with_capacity(memory) }
    }

    /// Stores `(s, y)`; pairs with `yᵀs ≤ 0` are skipped. Returns whether the
    /// pair was kept.
    pub fn update(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > 0.0) || !sy.is_finite() || self.memory == 0 {
            return false;
        }
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }

    /// Drops all pairs.
    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    /// Number of stored pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// True when no pairs are stored.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `d = −H·g` by the two-loop recursion, with initial scaling
    /// `γ = sᵀy / yᵀy` from the newest pair.
    pub fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            axpy(-a, y, &mut q);
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let beta = rho * dot(y, &q);
            axpy(a - beta, s, &mut q);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

/// Limited-memory BFGS.
#[derive(Debug, Clone)]
pub struct Lbfgs {
    state: LbfgsState,
    ls: LineSearchConfig,
}

impl Lbfgs {
    /// L-BFGS keeping `memory` pairs.
    pub fn new(memory: usize, ls: LineSearchConfig) -> Result<Self, Error> {
        if memory == 0 {
            return Err(Error::InvalidParameter { name: "lbfgs_memory", reason: "must be at least 1" });
        }
        ls.validate()?;
        Ok(Self { state: LbfgsState::new(memory), ls })
    }

    /// Curvature pairs.
    pub fn state(&self) -> &LbfgsState {
        &self.state
    }
}

impl Solver for Lbfgs {
    fn start(&mut self, _: &Evaluator<'_>, _: &Point) -> Result<(), Error> {
        self.state.clear();
        Ok(())
    }

    fn step(&mut self, ev: &mut Evaluator<'_>, current: &Point, _: &StopRule) -> StepResult {
        let mut d = self.state.direction(&current.g);
        let steepest = self.state.is_empty() || !(dot(&d, &current.g) < 0.0);
        if steepest {
            self.state.clear();
            d = current.g.iter().map(|v| -v).collect();
        }
        let out = linesearch::search(ev, current, &d, &self.ls);
        if out.step == 0.0 {
            self.state.clear();
            let status = if steepest { StepStatus::Stalled } else { StepStatus::Progress };
            return StepResult { next: out.point, status };
        }
        self.state.update(sub(&out.point.x, &current.x), sub(&out.point.g, &current.g));
        StepResult { next: out.point, status: StepStatus::Progress }
    }
}

/// Previous gradient and direction for Polak-Ribière updates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NcgState {
    prev: Option<(Vec<f64>, Vec<f64>)>,
}

impl NcgState {
    /// `d = −g + β·d_prev` with `β = max(0, gᵀ(g − g_prev)/‖g_prev‖²)`,
    /// falling back to `−g` on the first call or when `d` is not a descent
    /// direction.
    pub fn direction(&self, g: &[f64]) -> Vec<f64> {
        let steepest = || g.iter().map(|v| -v).collect::<Vec<f64>>();
        let Some((prev_g, prev_d)) = &self.prev else {
            return steepest();
        };
        let denom = dot(prev_g, prev_g);
        let beta = if denom > 0.0 {
            f64::max(0.0, (dot(g, g) - dot(g, prev_g)) / denom)
        } else {
            0.0
        };
        let mut d = steepest();
        if beta > 0.0 {
            axpy(beta, prev_d, &mut d);
        }
        if dot(&d, g) < 0.0 {
            d
        } else {
            steepest()
        }
    }

    /// Remembers the direction of the step just taken and the gradient it
    /// was computed from.
    pub fn record(&mut self, g: Vec<f64>, d: Vec<f64>) {
        self.prev = Some((g, d));
    }

    /// Forgets the previous step; the next direction is `−g`.
    pub fn clear(&mut self) {
        self.prev = None;
    }
}

/// Nonlinear conjugate gradients with the Polak-Ribière+ update.
#[derive(Debug, Clone)]
pub struct Ncg {
    state: NcgState,
    ls: LineSearchConfig,
}

impl Ncg {
    /// N-CG with the given line search.
    pub fn new(ls: LineSearchConfig) -> Result<Self, Error> {
        ls.validate()?;
        Ok(Self { state: NcgState::default(), ls })
    }
}

impl Solver for Ncg {
    fn start(&mut self, _: &Evaluator<'_>, _: &Point) -> Result<(), Error> {
        self.state.clear();
        Ok(())
    }

    fn step(&mut self, ev: &mut Evaluator<'_>, current: &Point, _: &StopRule) -> StepResult {
        let d = self.state.direction(&current.g);
        let steepest = d.iter().zip(&current.g).all(|(a, b)| *a == -*b);
        let out = linesearch::search(ev, current, &d, &self.ls);
        if out.step == 0.0 {
            self.state.clear();
            let status = if steepest { StepStatus::Stalled } else { StepStatus::Progress };
            return StepResult { next: out.point, status };
        }
        self.state.record(current.g.clone(), d);
        StepResult { next: out.point, status: StepStatus::Progress }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn empty_history_is_steepest_descent() {
        let st = LbfgsState::new(5);
        assert_eq!(st.direction(&[1.0, -2.0]), vec![-1.0, 2.0]);
    }

    #[test]
    fn identity_pair_leaves_orthogonal_gradient_alone() {
        let mut st = LbfgsState::new(5);
        assert!(st.update(vec![1.0, 0.0], vec![1.0, 0.0]));
        assert_eq!(st.direction(&[0.0, 3.0]), vec![0.0, -3.0]);
    }

    #[test]
    fn two_loop_matches_inverse_on_quadratic_pairs() {
        // H-conjugate pairs from a 2-D quadratic: the recursion reproduces H⁻¹g.
        let h = [[4.0, 1.0], [1.0, 3.0]];
        let hv = |v: &[f64]| vec![h[0][0] * v[0] + h[0][1] * v[1], h[1][0] * v[0] + h[1][1] * v[1]];
        let mut st = LbfgsState::new(5);
        let s1 = vec![1.0, 0.0];
        let s2 = vec![1.0, -4.0];
        st.update(s1.clone(), hv(&s1));
        st.update(s2.clone(), hv(&s2));
        let g = [2.0, -1.0];
        let d = st.direction(&g);
        let hd = hv(&d);
        assert!((hd[0] + g[0]).abs() < 1e-12);
        assert!((hd[1] + g[1]).abs() < 1e-12);
    }

    #[test]
    fn skips_non_positive_curvature() {
        let mut st = LbfgsState::new(2);
        assert!(!st.update(vec![1.0, 0.0], vec![-1.0, 0.0]));
        assert!(!st.update(vec![1.0, 0.0], vec![0.0, 1.0]));
        assert!(st.is_empty());
        st.update(vec![1.0, 0.0], vec![1.0, 0.0]);
        st.update(vec![0.0, 1.0], vec![0.0, 2.0]);
        st.update(vec![1.0, 1.0], vec![1.0, 1.0]);
        assert_eq!(st.len(), 2);
    }

    #[test]
    fn ncg_examples() {
        let mut st = NcgState::default();
        assert_eq!(st.direction(&[1.0, 2.0]), vec![-1.0, -2.0]);
        st.record(vec![1.0, 0.0], vec![-1.0, 0.0]);
        assert_eq!(st.direction(&[1.0, 0.0]), vec![-1.0, 0.0]);
        assert_eq!(st.direction(&[0.0, 1.0]), vec![-1.0, -1.0]);
    }

    #[test]
    fn ncg_restarts_on_ascent() {
        let mut st = NcgState::default();
        // β = 1, so d = (9, −1), which points uphill
        st.record(vec![0.0, 1.0], vec![10.0, 0.0]);
        let g = [1.0, 1.0];
        let d = st.direction(&g);
        assert_eq!(d, vec![-1.0, -1.0]);
    }
}
