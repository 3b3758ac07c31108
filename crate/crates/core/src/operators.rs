//! Two-sided bounds for the reduced norm `||lambda(f)||` of a group-ring
//! element acting by left convolution on `l^2(G)`.
//!
//! The lower side comes from finite sections: `lambda(f)` compressed to the
//! span of a ball is a finite sparse matrix whose norm never exceeds the true
//! operator norm, and `||f||_2 = ||lambda(f) delta_e||_2` is always a lower
//! bound. The upper side is `min(||f||_1, C ||f||_{l,s})`, the second term
//! being the rapid-decay inequality for the group's `(C, s)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Element, Group, DEFAULT_BALL_CAP};
use crate::ring::GroupRingElement;

/// Rapid-decay constants: `||lambda(f)|| <= C ||f||_{l,s}` for all `f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RdParams {
    pub c: f64,
    pub s: f64,
}

impl RdParams {
    pub fn new(c: f64, s: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && s > 0.0 && s.is_finite()) {
            return Err(Error::param(format!(
                "rapid-decay constants must be positive and finite, got C={c}, s={s}"
            )));
        }
        Ok(RdParams { c, s })
    }

    /// `C ||f||_{l,s}`.
    pub fn bound(&self, f: &GroupRingElement) -> f64 {
        self.c * f.sobolev_norm(self.s)
    }
}

/// Summation cutoff for the free abelian constant.
const ABELIAN_TERMS: u64 = 1_000_000;

/// Rapid-decay constants for a built-in group.
///
/// * `F_k`: `s = 2`, `C = pi / sqrt(6)`. Haagerup's inequality bounds an
///   element supported on the sphere of radius `n` by `(n + 1) ||f||_2`;
///   Cauchy-Schwarz over spheres with `sum (n + 1)^{-2} = pi^2 / 6` gives `C`.
/// * `Z^d`: `s = d`, `C = sqrt(sum_x (1 + |x|_1)^{-2d})` from
///   `||lambda(f)|| <= ||f||_1` and Cauchy-Schwarz. The series is summed up to
///   a cutoff and the remainder replaced by a rigorous integral bound, so `C`
///   errs on the large side.
/// * `Z/m`: `||lambda(f)|| <= ||f||_1 <= sqrt(m) ||f||_2`, and every Sobolev
///   weight is at least 1, so `C = sqrt(m)` works for any `s`; `s = 1`.
pub fn builtin_rd_params(g: &Group) -> RdParams {
    match *g {
        Group::Free { .. } => RdParams {
            c: PI / 6f64.sqrt(),
            s: 2.0,
        },
        Group::FreeAbelian { rank } => RdParams {
            c: abelian_rd_constant(rank).sqrt(),
            s: f64::from(rank),
        },
        Group::Cyclic { order } => RdParams {
            c: (order as f64).sqrt(),
            s: 1.0,
        },
    }
}

/// Upper bound for `sum_{x in Z^d} (1 + |x|_1)^{-2d}`.
fn abelian_rd_constant(rank: u32) -> f64 {
    let d = rank as usize;
    let exponent = -2.0 * d as f64;
    // ascending k would add the largest terms first; sum from the tail end
    let mut total = 0.0;
    for k in (1..=ABELIAN_TERMS).rev() {
        total += abelian_sphere_size(d, k) * (1.0 + k as f64).powf(exponent);
    }
    total += 1.0;
    // |sphere(k)| <= 2^d C(k+d-1, d-1) <= 2^d d^{d-1} (1+k)^{d-1} / (d-1)!,
    // and sum_{k>K} (1+k)^{-d-1} <= (1+K)^{-d} / d.
    let df = d as f64;
    let factorial: f64 = (1..d).map(|i| i as f64).product();
    let lead = 2f64.powi(rank as i32) * df.powi(rank as i32 - 1) / factorial;
    total + lead * (1.0 + ABELIAN_TERMS as f64).powf(-df) / df
}

/// Number of points of `Z^d` at l1 distance exactly `k >= 1` from the origin:
/// `sum_i 2^i C(d, i) C(k - 1, i - 1)`.
fn abelian_sphere_size(d: usize, k: u64) -> f64 {
    let mut total = 0.0;
    let mut choose_d = 1.0;
    let mut choose_k = 1.0;
    for i in 1..=d.min(k as usize) {
        choose_d *= (d - i + 1) as f64 / i as f64;
        if i > 1 {
            choose_k *= (k as f64 - (i - 1) as f64) / (i - 1) as f64;
        }
        total += 2f64.powi(i as i32) * choose_d * choose_k;
    }
    total
}

/// `lambda(f)` restricted to the span of a ball, in the ball's canonical order.
///
/// Entry `(i, j)` is `f(x_i x_j^{-1})`, so that `(lambda(f) v)(x) =
/// sum_y f(x y^{-1}) v(y)`. Stored in compressed sparse rows.
#[derive(Clone, Debug)]
pub struct CompressionMatrix {
    radius: u64,
    basis: Vec<Element>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl CompressionMatrix {
    pub fn new(f: &GroupRingElement, radius: u64, ball_cap: usize) -> Result<Self> {
        let g = f.group();
        let basis = g.ball(radius, ball_cap)?;
        let index: HashMap<&Element, usize> =
            basis.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut triplets = Vec::with_capacity(basis.len() * f.support_len());
        for (j, y) in basis.iter().enumerate() {
            for (x, c) in f.terms() {
                if let Some(&i) = index.get(&g.mul(x, y)) {
                    triplets.push((i, j, *c));
                }
            }
        }
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let n = basis.len();
        let mut row_ptr = vec![0; n + 1];
        for &(i, _, _) in &triplets {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let (cols, vals) = triplets.into_iter().map(|(_, j, c)| (j, c)).unzip();
        Ok(CompressionMatrix {
            radius,
            basis,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn radius(&self) -> u64 {
        self.radius
    }

    pub fn basis(&self) -> &[Element] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let row = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[row.clone()].binary_search(&j) {
            Ok(k) => self.vals[row.start + k],
            Err(_) => Complex64::default(),
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.get(i, j))
    }

    /// `A v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim())
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.vals[k] * v[self.cols[k]])
                    .sum()
            })
            .collect()
    }

    /// `A^H v`.
    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.dim()];
        for (i, vi) in v.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[self.cols[k]] += self.vals[k].conj() * vi;
            }
        }
        out
    }
}

pub fn compression_matrix(
    f: &GroupRingElement,
    radius: u64,
    ball_cap: usize,
) -> Result<CompressionMatrix> {
    CompressionMatrix::new(f, radius, ball_cap)
}

/// Settings for the finite-section lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerOptions {
    pub radius: u64,
    pub max_iters: usize,
    /// Stop once the relative change of the estimate drops below this.
    pub tol: f64,
    /// Seed of the start vector.
    pub seed: u64,
    pub ball_cap: usize,
}

impl PowerOptions {
    pub const DEFAULT_MAX_ITERS: usize = 10_000;
    pub const DEFAULT_TOL: f64 = 1e-10;
    pub const DEFAULT_SEED: u64 = 0x5eed;

    pub fn with_radius(radius: u64) -> Self {
        PowerOptions {
            radius,
            ..Self::default()
        }
    }
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            radius: 4,
            max_iters: Self::DEFAULT_MAX_ITERS,
            tol: Self::DEFAULT_TOL,
            seed: Self::DEFAULT_SEED,
            ball_cap: DEFAULT_BALL_CAP,
        }
    }
}

/// Largest singular value estimate of a compression.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingularEstimate {
    /// `max_k ||A x_k||` over the unit iterates; never exceeds `||A||`.
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative change at the last iteration.
    pub achieved_tolerance: f64,
}

/// Power iteration on `A^H A` from a seeded start vector.
pub fn largest_singular_value(a: &CompressionMatrix, opts: &PowerOptions) -> SingularEstimate {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(0.5..1.5), rng.random_range(-0.5..0.5)))
        .collect();
    normalize(&mut x);
    let mut best = 0.0f64;
    let mut prev = f64::NAN;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        let y = a.apply(&x);
        let sigma = norm(&y);
        best = best.max(sigma);
        if sigma == 0.0 {
            change = 0.0;
            converged = true;
            break;
        }
        if prev.is_finite() {
            change = (sigma - prev).abs() / sigma;
            if change < opts.tol {
                converged = true;
                break;
            }
        }
        prev = sigma;
        x = a.apply_adjoint(&y);
        if normalize(&mut x) == 0.0 {
            break;
        }
    }
    SingularEstimate {
        sigma: best,
        iterations,
        converged,
        achieved_tolerance: change,
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|c| *c /= n);
    }
    n
}

/// Certified lower bound for `||lambda(f)||` with its iteration metadata.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    /// `max(||f||_2, sigma)`.
    pub value: f64,
    pub compression: SingularEstimate,
}

pub fn opnorm_lower(f: &GroupRingElement, opts: &PowerOptions) -> Result<LowerBound> {
    if f.is_zero() {
        return Ok(LowerBound {
            value: 0.0,
            compression: SingularEstimate {
                sigma: 0.0,
                iterations: 0,
                converged: true,
                achieved_tolerance: 0.0,
            },
        });
    }
    let a = CompressionMatrix::new(f, opts.radius, opts.ball_cap)?;
    let compression = largest_singular_value(&a, opts);
    Ok(LowerBound {
        value: f.l2_norm().max(compression.sigma),
        compression,
    })
}

/// `min(||f||_1, C ||f||_{l,s})`.
pub fn opnorm_upper(f: &GroupRingElement, rd: &RdParams) -> f64 {
    f.l1_norm().min(rd.bound(f))
}

/// Interval `[lower, upper]` containing `||lambda(f)||`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_ball_radius: u64,
    pub iterations: usize,
    pub converged: bool,
    pub achieved_tolerance: f64,
}

impl NormBracket {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

pub fn opnorm_bracket(
    f: &GroupRingElement,
    rd: &RdParams,
    opts: &PowerOptions,
) -> Result<NormBracket> {
    let lower = opnorm_lower(f, opts)?;
    Ok(NormBracket {
        lower: lower.value,
        upper: opnorm_upper(f, rd),
        lower_ball_radius: opts.radius,
        iterations: lower.compression.iterations,
        converged: lower.compression.converged,
        achieved_tolerance: lower.compression.achieved_tolerance,
    })
}
