//! Test problems A-G.
//!
//! A-C are quadratics in a (possibly curved) coordinate system with
//! minimizer `x* = 1`. D-G are nonlinear least-squares problems
//! `f = ½ Σ t_j(x)²` from the Moré-Garbow-Hillstrom collection:
//! extended Rosenbrock, extended Powell singular, trigonometric and
//! penalty I. Gradients are analytic, `g_k = Σ_j t_j ∂t_j/∂x_k`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::linalg::{householder_qr, Matrix};
use crate::objective::Objective;
use crate::rng::{stream_rng, PROBLEM_STREAM};

/// Problem label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemId {
    /// Diagonal quadratic.
    A,
    /// Diagonal quadratic after a paraboloid coordinate change.
    B,
    /// Problem B with a random rotated matrix of condition number `n`.
    C,
    /// Extended Rosenbrock.
    D,
    /// Extended Powell singular.
    E,
    /// Trigonometric.
    F,
    /// Penalty function I.
    G,
}

impl ProblemId {
    /// All problems.
    pub const ALL: [ProblemId; 7] =
        [ProblemId::A, ProblemId::B, ProblemId::C, ProblemId::D, ProblemId::E, ProblemId::F, ProblemId::G];

    /// Single-letter label.
    pub fn letter(self) -> char {
        match self {
            ProblemId::A => 'A',
            ProblemId::B => 'B',
            ProblemId::C => 'C',
            ProblemId::D => 'D',
            ProblemId::E => 'E',
            ProblemId::F => 'F',
            ProblemId::G => 'G',
        }
    }

    /// Problem sizes of the standard experiment, large ones included.
    pub fn standard_sizes(self) -> &'static [usize] {
        match self {
            ProblemId::A | ProblemId::B | ProblemId::C | ProblemId::G => &[100, 200],
            ProblemId::D => &[500, 1000, 50_000, 100_000],
            ProblemId::E => &[100, 200, 50_000, 100_000],
            ProblemId::F => &[200, 500],
        }
    }

    /// Checks the size constraints of the problem.
    pub fn validate_dim(self, n: usize) -> Result<(), Error> {
        let bad = |reason| Err(Error::InvalidDimension { problem: self.letter(), n, reason });
        if n == 0 {
            return bad("dimension must be positive");
        }
        match self {
            ProblemId::D if !n.is_multiple_of(2) => bad("must be even"),
            ProblemId::E if !n.is_multiple_of(4) => bad("must be a multiple of 4"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for ProblemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        ProblemId::ALL
            .into_iter()
            .find(|p| s.len() == 1 && s.chars().next().map(|c| c.to_ascii_uppercase()) == Some(p.letter()))
            .ok_or(Error::InvalidParameter { name: "problem", reason: "expected one of A-G" })
    }
}

/// A problem instance request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSpec {
    /// Which problem.
    pub id: ProblemId,
    /// Dimension.
    pub n: usize,
    /// Run seed; only Problem C draws from it.
    pub seed: u64,
    /// How Problem C's orthogonal matrix is drawn.
    pub rotation: RotationKind,
}

impl ProblemSpec {
    /// Spec with the default Haar rotation.
    pub fn new(id: ProblemId, n: usize, seed: u64) -> Self {
        Self { id, n, seed, rotation: RotationKind::Haar }
    }
}

/// Distribution of the random orthogonal matrix in Problem C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotationKind {
    /// Haar measure, see [`random_orthogonal`].
    #[default]
    Haar,
    /// `Q` factor of a matrix with i.i.d. `U[0, 1)` entries, no sign
    /// correction. Not Haar: the first column leans towards `(1, …, 1)`.
    UniformQr,
}

impl FromStr for RotationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "haar" => Ok(RotationKind::Haar),
            "uniform-qr" => Ok(RotationKind::UniformQr),
            _ => Err(Error::InvalidParameter { name: "rotation", reason: "expected haar or uniform-qr" }),
        }
    }
}

impl fmt::Display for RotationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RotationKind::Haar => "haar",
            RotationKind::UniformQr => "uniform-qr",
        })
    }
}

/// Objective handle shared across threads.
pub type DynObjective = Box<dyn Objective + Send + Sync>;

/// Builds the objective for `spec`.
pub fn make_problem(spec: ProblemSpec) -> Result<DynObjective, Error> {
    spec.id.validate_dim(spec.n)?;
    let n = spec.n;
    Ok(match spec.id {
        ProblemId::A => Box::new(DiagonalQuadratic::new(n)),
        ProblemId::B => Box::new(Paraboloid::new(Metric::Diagonal((1..=n).map(|i| i as f64).collect()))),
        ProblemId::C => {
            let q = match spec.rotation {
                RotationKind::Haar => random_orthogonal(n, spec.seed),
                RotationKind::UniformQr => uniform_qr_orthogonal(n, spec.seed),
            };
            let d: Vec<f64> = (1..=n).map(|i| i as f64).collect();
            Box::new(Paraboloid::new(Metric::Dense(conjugated_diagonal(&q, &d))))
        }
        ProblemId::D => Box::new(Rosenbrock { n }),
        ProblemId::E => Box::new(Powell { n }),
        ProblemId::F => Box::new(Trigonometric { n }),
        ProblemId::G => Box::new(PenaltyI { n }),
    })
}

/// Haar-distributed random orthogonal matrix: QR of a standard normal
/// matrix with the signs of `R`'s diagonal moved into `Q`.
pub fn random_orthogonal(n: usize, seed: u64) -> Matrix {
    let mut rng = stream_rng(seed, PROBLEM_STREAM);
    let data: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let (mut q, r) = householder_qr(&Matrix::from_row_major(n, n, data));
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// `Q` factor of an `n×n` matrix with i.i.d. `U[0, 1)` entries.
pub fn uniform_qr_orthogonal(n: usize, seed: u64) -> Matrix {
    let mut rng = stream_rng(seed, PROBLEM_STREAM);
    let data: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
    householder_qr(&Matrix::from_row_major(n, n, data)).0
}

/// Components i.i.d. uniform on `[0, 1)`.
pub fn initial_guess<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// `Q·diag(d)·Qᵀ`.
pub fn conjugated_diagonal(q: &Matrix, d: &[f64]) -> Matrix {
    let n = d.len();
    let mut t = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n).map(|k| q[(i, k)] * d[k] * q[(j, k)]).sum();
            t[(i, j)] = v;
            t[(j, i)] = v;
        }
    }
    t
}

/// Problem A: `½ (x − 1)ᵀ diag(1..n) (x − 1)`.
#[derive(Debug, Clone)]
pub struct DiagonalQuadratic {
    n: usize,
}

impl DiagonalQuadratic {
    /// Problem A of size `n`.
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Objective for DiagonalQuadratic {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
        let mut f = 0.0;
        for (i, (gi, xi)) in g.iter_mut().zip(x).enumerate() {
            let d = (i + 1) as f64;
            let z = xi - 1.0;
            *gi = d * z;
            f += 0.5 * d * z * z;
        }
        f
    }

    fn hessian_action(&self, _x: &[f64], v: &[f64], out: &mut [f64]) -> Result<(), Error> {
        for (i, (o, vi)) in out.iter_mut().zip(v).enumerate() {
            *o = (i + 1) as f64 * vi;
        }
        Ok(())
    }

    fn has_hessian_action(&self) -> bool {
        true
    }

    fn known_minimum(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Matrix of a paraboloid problem.
#[derive(Debug, Clone)]
pub enum Metric {
    /// Diagonal entries.
    Diagonal(Vec<f64>),
    /// Dense symmetric matrix.
    Dense(Matrix),
}

impl Metric {
    fn apply(&self, y: &[f64], out: &mut [f64]) {
        match self {
            Metric::Diagonal(d) => {
                for ((o, di), yi) in out.iter_mut().zip(d).zip(y) {
                    *o = di * yi;
                }
            }
            Metric::Dense(m) => m.mul_vec_into(y, out),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Metric::Diagonal(d) => d.len(),
            Metric::Dense(m) => m.rows(),
        }
    }
}

/// Problems B and C: `½ y(x − 1)ᵀ M y(x − 1)` with the paraboloid map
/// `y_1(z) = z_1`, `y_j(z) = z_j − 10 z_1²`.
#[derive(Debug, Clone)]
pub struct Paraboloid {
    metric: Metric,
}

impl Paraboloid {
    /// Paraboloid problem with matrix `metric`.
    pub fn new(metric: Metric) -> Self {
        Self { metric }
    }

    /// The matrix `M`.
    pub fn metric(&self) -> &Metric {
        &self.metric
    }
}

impl Objective for Paraboloid {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
        let z0 = x[0] - 1.0;
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(j, xj)| if j == 0 { z0 } else { xj - 1.0 - 10.0 * z0 * z0 })
            .collect();
        self.metric.apply(&y, g);
        let f = 0.5 * crate::linalg::dot(&y, g);
        let tail: f64 = g[1..].iter().sum();
        g[0] -= 20.0 * z0 * tail;
        f
    }

    fn known_minimum(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Problem D, extended Rosenbrock (`n` even).
#[derive(Debug, Clone)]
pub struct Rosenbrock {
    n: usize,
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
        let mut f = 0.0;
        for (xs, gs) in x.chunks_exact(2).zip(g.chunks_exact_mut(2)) {
            let (a, b) = (xs[0], xs[1]);
            let t1 = 10.0 * (b - a * a);
            let t2 = 1.0 - a;
            f += 0.5 * (t1 * t1 + t2 * t2);
            gs[0] = -20.0 * a * t1 - t2;
            gs[1] = 10.0 * t1;
        }
        f
    }

    fn hessian_action(&self, x: &[f64], v: &[f64], out: &mut [f64]) -> Result<(), Error> {
        for ((xs, vs), os) in x.chunks_exact(2).zip(v.chunks_exact(2)).zip(out.chunks_exact_mut(2)) {
            let (a, b) = (xs[0], xs[1]);
            let t1 = 10.0 * (b - a * a);
            let haa = 400.0 * a * a - 20.0 * t1 + 1.0;
            let hab = -200.0 * a;
            os[0] = haa * vs[0] + hab * vs[1];
            os[1] = hab * vs[0] + 100.0 * vs[1];
        }
        Ok(())
    }

    fn has_hessian_action(&self) -> bool {
        true
    }

    fn known_minimum(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Problem E, extended Powell singular (`n` a multiple of 4).
#[derive(Debug, Clone)]
pub struct Powell {
    n: usize,
}

impl Objective for Powell {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
        let s5 = libm::sqrt(5.0);
        let s10 = libm::sqrt(10.0);
        let mut f = 0.0;
        for (xs, gs) in x.chunks_exact(4).zip(g.chunks_exact_mut(4)) {
            let (a, b, c, d) = (xs[0], xs[1], xs[2], xs[3]);
            let t1 = a + 10.0 * b;
            let t2 = s5 * (c - d);
            let u = b - 2.0 * c;
            let t3 = u * u;
            let v = a - d;
            let t4 = s10 * v * v;
            f += 0.5 * (t1 * t1 + t2 * t2 + t3 * t3 + t4 * t4);
            gs[0] = t1 + t4 * 2.0 * s10 * v;
            gs[1] = 10.0 * t1 + t3 * 2.0 * u;
            gs[2] = s5 * t2 - t3 * 4.0 * u;
            gs[3] = -s5 * t2 - t4 * 2.0 * s10 * v;
        }
        f
    }

    fn known_minimum(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Problem F, trigonometric:
/// `t_j = n + j(1 − cos x_j) − sin x_j − Σ_i cos x_i`.
#[derive(Debug, Clone)]
pub struct Trigonometric {
    n: usize,
}

impl Objective for Trigonometric {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
        let n = self.n as f64;
        let cos: Vec<f64> = x.iter().map(|v| libm::cos(*v)).collect();
        let sin: Vec<f64> = x.iter().map(|v| libm::sin(*v)).collect();
        let cos_sum: f64 = cos.iter().sum();
        let t: Vec<f64> = (0..self.n)
            .map(|j| {
                let jj = (j + 1) as f64;
                n + jj * (1.0 - cos[j]) - sin[j] - cos_sum
            })
            .collect();
        let t_sum: f64 = t.iter().sum();
        for k in 0..self.n {
            let kk = (k + 1) as f64;
            g[k] = t[k] * (kk * sin[k] - cos[k]) + sin[k] * t_sum;
        }
        0.5 * crate::linalg::dot(&t, &t)
    }

    fn known_minimum(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Problem G, penalty function I:
/// `t_0 = Σ x_j² − ¼`, `t_j = √(1e-5)·(x_j − 1)`. The minimum is not known
/// in closed form.
#[derive(Debug, Clone)]
pub struct PenaltyI {
    n: usize,
}

impl Objective for PenaltyI {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64], g: &mut [f64]) -> f64 {
        let a = 1e-5;
        let t0 = crate::linalg::dot(x, x) - 0.25;
        let mut tail = 0.0;
        for (gk, xk) in g.iter_mut().zip(x) {
            let z = xk - 1.0;
            tail += a * z * z;
            *gk = 2.0 * t0 * xk + a * z;
        }
        0.5 * (t0 * t0 + tail)
    }
}

/// Minimizers where they are known: `1` for A-D, `0` for E and F.
pub fn known_minimizer(id: ProblemId, n: usize) -> Option<Vec<f64>> {
    match id {
        ProblemId::A | ProblemId::B | ProblemId::C | ProblemId::D => Some(vec![1.0; n]),
        ProblemId::E | ProblemId::F => Some(vec![0.0; n]),
        ProblemId::G => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn eval(obj: &dyn Objective, x: &[f64]) -> (f64, Vec<f64>) {
        let mut g = vec![0.0; x.len()];
        let f = obj.eval(x, &mut g);
        (f, g)
    }

    #[test]
    fn rosenbrock_hand_value() {
        let (f, _) = eval(&Rosenbrock { n: 2 }, &[-1.2, 1.0]);
        assert!((f - 12.1).abs() < 1e-12);
    }

    #[test]
    fn rosenbrock_hessian_at_origin() {
        let r = Rosenbrock { n: 2 };
        let mut out = [0.0; 2];
        r.hessian_action(&[0.0, 0.0], &[1.0, 0.0], &mut out).unwrap();
        assert_eq!(out, [1.0, 0.0]);
        r.hessian_action(&[0.0, 0.0], &[0.0, 1.0], &mut out).unwrap();
        assert_eq!(out, [0.0, 100.0]);
    }

    #[test]
    fn minima_are_zero() {
        for id in [ProblemId::A, ProblemId::B, ProblemId::C, ProblemId::D, ProblemId::E, ProblemId::F] {
            for n in [4, 8, 12] {
                let obj = make_problem(ProblemSpec::new(id, n, 3)).unwrap();
                let xs = known_minimizer(id, n).unwrap();
                let (f, g) = eval(obj.as_ref(), &xs);
                assert!(f.abs() < 1e-12, "{id} n={n} f={f}");
                assert!(crate::linalg::norm_inf(&g) < 1e-10 * n as f64, "{id} n={n}");
                assert_eq!(obj.known_minimum(), Some(0.0));
            }
        }
        let g = make_problem(ProblemSpec::new(ProblemId::G, 10, 0)).unwrap();
        assert_eq!(g.known_minimum(), None);
    }

    #[test]
    fn dimension_checks() {
        assert!(make_problem(ProblemSpec::new(ProblemId::D, 3, 0)).is_err());
        assert!(make_problem(ProblemSpec::new(ProblemId::E, 6, 0)).is_err());
        assert!(make_problem(ProblemSpec::new(ProblemId::A, 0, 0)).is_err());
        assert!(make_problem(ProblemSpec::new(ProblemId::E, 8, 0)).is_ok());
    }

    #[test]
    fn problem_ids_parse() {
        for id in ProblemId::ALL {
            let s = alloc::format!("{id}");
            assert_eq!(s.parse::<ProblemId>().unwrap(), id);
            assert_eq!(s.to_lowercase().parse::<ProblemId>().unwrap(), id);
        }
        assert!("H".parse::<ProblemId>().is_err());
        assert!("AB".parse::<ProblemId>().is_err());
    }

    #[test]
    fn orthogonal_one_by_one() {
        let q = random_orthogonal(1, 9);
        assert_eq!(q[(0, 0)].abs(), 1.0);
    }

    #[test]
    fn initial_guess_in_unit_cube() {
        let mut rng = stream_rng(5, crate::rng::X0_STREAM);
        let x = initial_guess(1000, &mut rng);
        assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
        let mut rng = stream_rng(5, crate::rng::X0_STREAM);
        assert_eq!(x, initial_guess(1000, &mut rng));
    }
}
