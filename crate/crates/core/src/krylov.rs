//! Full orthogonalization method (FOM) for `A x = b`.
//!
//! Reference solver for checking the accelerators on quadratics. Iterate
//! `x^(k+1)` lies in `x^(1) + K_k` with `K_k = span{r, Ar, …, A^{k−1}r}` and
//! its residual is orthogonal to `K_k`.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{axpy, dot, lu_solve, norm2, sub, Matrix};

/// Iterates, residuals and Arnoldi basis of a FOM run.
#[derive(Debug, Clone, PartialEq)]
pub struct FomTrace {
    /// `iterates[k]` is `x^(k+1)`; `iterates[0]` is the initial guess.
    /// `None` marks a step where the Hessenberg system was singular.
    pub iterates: Vec<Option<Vec<f64>>>,
    /// `b − A x^(k+1)`, aligned with `iterates`.
    pub residuals: Vec<Option<Vec<f64>>>,
    /// Orthonormal Arnoldi basis `v_1, v_2, …`.
    pub basis: Vec<Vec<f64>>,
    /// The Krylov space became invariant: the last iterate is exact.
    pub breakdown: bool,
}

impl FomTrace {
    /// `x^(k)` with the 1-based numbering of the Krylov literature.
    pub fn iterate(&self, k: usize) -> Option<&[f64]> {
        self.iterates.get(k.checked_sub(1)?)?.as_deref()
    }
}

/// Runs up to `kmax` FOM steps with Arnoldi and modified Gram-Schmidt.
///
/// `apply` computes `A·v`. A second orthogonalization pass is made whenever
/// the new vector keeps a component above `1e-8` along the existing basis.
pub fn fom_solve<F>(apply: F, b: &[f64], x0: &[f64], kmax: usize) -> FomTrace
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let residual = |x: &[f64]| sub(b, &apply(x));
    let r0 = residual(x0);
    let beta = norm2(&r0);
    let mut trace = FomTrace {
        iterates: vec![Some(x0.to_vec())],
        residuals: vec![Some(r0.clone())],
        basis: Vec::new(),
        breakdown: false,
    };
    if beta == 0.0 {
        trace.breakdown = true;
        return trace;
    }
    trace.basis.push(r0.iter().map(|v| v / beta).collect());
    // Hessenberg entries, (kmax + 1) × kmax
    let mut hess = Matrix::zeros(kmax + 1, kmax);

    for k in 0..kmax {
        let mut w = apply(&trace.basis[k]);
        let wnorm0 = norm2(&w);
        for i in 0..=k {
            let h = dot(&trace.basis[i], &w);
            hess[(i, k)] = h;
            axpy(-h, &trace.basis[i], &mut w);
        }
        let mut wnorm = norm2(&w);
        let leak = (0..=k).map(|i| dot(&trace.basis[i], &w).abs()).fold(0.0, f64::max);
        if wnorm > 0.0 && leak > 1e-8 * wnorm {
            for i in 0..=k {
                let h = dot(&trace.basis[i], &w);
                hess[(i, k)] += h;
                axpy(-h, &trace.basis[i], &mut w);
            }
            wnorm = norm2(&w);
        }
        hess[(k + 1, k)] = wnorm;

        let m = k + 1;
        let mut hk = Matrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                hk[(i, j)] = hess[(i, j)];
            }
        }
        let mut rhs = vec![0.0; m];
        rhs[0] = beta;
        match lu_solve(&hk, &rhs) {
            Some(y) => {
                let mut x = x0.to_vec();
                for (j, yj) in y.iter().enumerate() {
                    axpy(*yj, &trace.basis[j], &mut x);
                }
                trace.residuals.push(Some(residual(&x)));
                trace.iterates.push(Some(x));
            }
            None => {
                trace.iterates.push(None);
                trace.residuals.push(None);
            }
        }

        if wnorm <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE) {
            trace.breakdown = true;
            break;
        }
        if k + 1 < kmax {
            trace.basis.push(w.iter().map(|v| v / wnorm).collect());
        }
    }
    trace
}
