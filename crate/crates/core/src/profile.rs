//! Performance ratios, performance profiles and quantiles.
//!
//! For problem `p` and solver `s` let `t[p][s]` be the evaluations needed to
//! reach tolerance (`None` on failure). The ratio is
//! `ρ[p][s] = t[p][s] / min_s t[p][s]`, infinite for failures, and the
//! profile of solver `s` is the fraction of problems with `ρ[p][s] ≤ τ`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Error;

/// Performance ratios with the rows that could not be scored.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    /// `ratios[p][s]`; `f64::INFINITY` marks a failure.
    pub ratios: Vec<Vec<f64>>,
    /// Indices of input rows that no solver solved. They are left out of
    /// `ratios`.
    pub dropped: Vec<usize>,
}

/// Computes `ρ[p][s] = t[p][s] / min_s t[p][s]`.
pub fn performance_ratio(t: &[Vec<Option<u64>>]) -> RatioTable {
    let mut ratios = Vec::with_capacity(t.len());
    let mut dropped = Vec::new();
    for (p, row) in t.iter().enumerate() {
        match row.iter().flatten().min() {
            Some(&best) if best > 0 => ratios.push(
                row.iter()
                    .map(|v| v.map_or(f64::INFINITY, |v| v as f64 / best as f64))
                    .collect(),
            ),
            _ => dropped.push(p),
        }
    }
    RatioTable { ratios, dropped }
}

/// Sampled profile of one solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    /// Solver identifier.
    pub solver: String,
    /// `(τ, p_s(τ))` pairs in grid order.
    pub samples: Vec<(f64, f64)>,
}

/// `p_s(τ) = #{p : ρ[p][s] ≤ τ} / n_p` for every solver column and every
/// `τ` in `tau_grid`.
pub fn performance_profile(ratios: &[Vec<f64>], solvers: &[&str], tau_grid: &[f64]) -> Vec<ProfileCurve> {
    let n_p = ratios.len();
    solvers
        .iter()
        .enumerate()
        .map(|(s, name)| {
            let mut column: Vec<f64> = ratios.iter().map(|row| row[s]).collect();
            column.sort_by(f64::total_cmp);
            let samples = tau_grid
                .iter()
                .map(|&tau| {
                    let count = column.partition_point(|r| *r <= tau);
                    let p = if n_p == 0 { 0.0 } else { count as f64 / n_p as f64 };
                    (tau, p)
                })
                .collect();
            ProfileCurve { solver: String::from(*name), samples }
        })
        .collect()
}

/// `points` geometrically spaced values from 1 to `tau_max`.
pub fn tau_grid(tau_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![1.0],
        _ => (0..points)
            .map(|i| {
                if i + 1 == points {
                    tau_max
                } else {
                    libm::pow(tau_max, i as f64 / (points - 1) as f64)
                }
            })
            .collect(),
    }
}

/// Default profile grid: 400 points on `[1, 50]`.
pub fn default_tau_grid() -> Vec<f64> {
    tau_grid(50.0, 400)
}

/// Quantile by linear interpolation between order statistics: with sorted
/// `v_1..v_m`, `h = (m − 1)q + 1` and the result lies between `v_⌊h⌋` and
/// `v_⌈h⌉`. Infinite values (failures) are allowed.
pub fn quantile(values: &[f64], q: f64) -> Result<f64, Error> {
    if values.is_empty() {
        return Err(Error::InvalidParameter { name: "values", reason: "quantile of an empty sample" });
    }
    if !(0.0..=1.0).contains(&q) || values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter { name: "q", reason: "need q in [0, 1] and no NaN values" });
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = libm::ceil(h) as usize;
    let frac = h - lo as f64;
    if lo == hi || frac == 0.0 || v[lo] == v[hi] {
        return Ok(v[lo]);
    }
    Ok(v[lo] + frac * (v[hi] - v[lo]))
}
