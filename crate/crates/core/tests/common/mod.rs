#![allow(dead_code)]

use oaccel::linalg::{dot, Matrix};
use oaccel::problems::{conjugated_diagonal, random_orthogonal};
use oaccel::rng::stream_rng;
use oaccel::Objective;
use rand::Rng;

/// `½ xᵀAx − bᵀx` with a dense symmetric `A`.
pub struct DenseQuadratic {
    pub a: Matrix,
    pub b: Vec<f64>,
}

impl DenseQuadratic {
    /// SPD matrix with eigenvalues drawn from `[1, kappa]` and a random
    /// right-hand side.
    pub fn random(n: usize, kappa: f64, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 7);
        let eig: Vec<f64> = (0..n).map(|_| 1.0 + (kappa - 1.0) * rng.random::<f64>()).collect();
        let q = random_orthogonal(n, seed);
        let b = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        Self { a: conjugated_diagonal(&q, &eig), b }
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let ax = self.a.mul_vec(x);
        self.b.iter().zip(&ax).map(|(b, v)| b - v).collect()
    }
}

impl Objective for DenseQuadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
        self.a.mul_vec_into(x, g);
        let f = 0.5 * dot(x, g) - dot(&self.b, x);
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        f
    }

    fn hessian_action(&self, _: &[f64], v: &[f64], out: &mut [f64]) -> Result<(), oaccel::Error> {
        self.a.mul_vec_into(v, out);
        Ok(())
    }

    fn has_hessian_action(&self) -> bool {
        true
    }
}

/// Linear conjugate gradients, returning `x^(1), x^(2), …, x^(kmax+1)`.
pub fn cg_iterates(a: &Matrix, b: &[f64], x0: &[f64], kmax: usize) -> Vec<Vec<f64>> {
    let mut x = x0.to_vec();
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, v)| b - v).collect();
    let mut p = r.clone();
    let mut out = vec![x.clone()];
    for _ in 0..kmax {
        let rr = dot(&r, &r);
        if rr == 0.0 {
            break;
        }
        let ap = a.mul_vec(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let beta = dot(&r, &r) / rr;
        for i in 0..x.len() {
            p[i] = r[i] + beta * p[i];
        }
        out.push(x.clone());
    }
    out
}

pub fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    diff / scale
}

/// Central difference gradient with step `h·max(1, |x_i|)`.
pub fn fd_gradient(obj: &dyn Objective, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let step = h * x[i].abs().max(1.0);
            xp[i] = x[i] + step;
            let fp = obj.eval(&xp, &mut g);
            xp[i] = x[i] - step;
            let fm = obj.eval(&xp, &mut g);
            xp[i] = x[i];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}
