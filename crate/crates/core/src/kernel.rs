//! Conditional negativity of length kernels, positivity of their Schoenberg
//! transforms, and decay certificates for `e^{-r x} (1 + x)^s`.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{Element, Group};

/// Default tolerance for eigenvalue verdicts.
pub const DEFAULT_TOL: f64 = 1e-8;

const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric real matrix `k(x_i^{-1} x_j)` over an ordered point set.
///
/// Imported matrices may carry no points at all; otherwise there is one point
/// per row.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    group: Option<Group>,
    points: Vec<Element>,
    entries: DMatrix<f64>,
}

impl KernelMatrix {
    /// Wraps an explicit matrix. It must be square, finite and symmetric.
    pub fn from_entries(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidKernel(format!(
                "matrix is {}x{}, not square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidKernel("non-finite entry".into()));
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidKernel(format!(
                        "not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(KernelMatrix {
            group: None,
            points: Vec::new(),
            entries,
        })
    }

    /// Builds `k(x_i^{-1} x_j)` for a function `k` of the group element.
    pub fn from_group_function(
        g: &Group,
        points: &[Element],
        k: impl Fn(&Element) -> f64,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(points.len());
        for p in points {
            g.check(p)?;
            if !seen.insert(p) {
                return Err(Error::InvalidKernel(format!("duplicate point {p}")));
            }
        }
        let inverses: Vec<Element> = points.iter().map(|p| g.inv(p)).collect();
        let n = points.len();
        let mut entries = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = k(&g.mul(&inverses[i], &points[j]));
                entries[(i, j)] = v;
                entries[(j, i)] = v;
            }
        }
        Ok(KernelMatrix {
            group: Some(*g),
            points: points.to_vec(),
            entries,
        })
    }

    /// The word-length kernel `l(x_i^{-1} x_j)`.
    pub fn length_kernel(g: &Group, points: &[Element]) -> Result<Self> {
        Self::from_group_function(g, points, |x| g.len_of(x) as f64)
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn points(&self) -> &[Element] {
        &self.points
    }

    pub fn group(&self) -> Option<Group> {
        self.group
    }

    /// `c^T K c` with compensated summation.
    pub fn quadratic_form(&self, c: &[f64]) -> f64 {
        let n = self.size();
        assert_eq!(c.len(), n, "vector length must match kernel size");
        let mut acc = Neumaier::default();
        for i in 0..n {
            for j in 0..n {
                acc.add(c[i] * self.entries[(i, j)] * c[j]);
            }
        }
        acc.sum()
    }

    pub fn scaled(&self, t: f64) -> Self {
        KernelMatrix {
            group: self.group,
            points: self.points.clone(),
            entries: &self.entries * t,
        }
    }

    /// JSON form: `{"group": ..., "points": [...], "entries": [[row], ...]}`,
    /// rows in order. `group` and `points` are omitted for anonymous matrices.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Vec<f64>> = self
            .entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        let mut out = json!({ "entries": rows });
        if let Some(g) = self.group {
            out["group"] = serde_json::to_value(g).expect("group serializes");
            out["points"] = Value::from(
                self.points
                    .iter()
                    .map(|p| g.element_json(p))
                    .collect::<Vec<_>>(),
            );
        }
        out
    }

    /// Accepts `entries` either as an array of rows or as a flat row-major
    /// array of `n * n` numbers. When both `group` and `points` are present
    /// they are decoded and must match the matrix size.
    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidKernel(msg.to_string());
        let entries = value
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"entries\" array"))?;
        let number = |v: &Value| v.as_f64().ok_or_else(|| bad("non-numeric entry"));
        let matrix = if entries.iter().all(Value::is_array) {
            let n = entries.len();
            let mut flat = Vec::with_capacity(n * n);
            for row in entries {
                let row = row.as_array().expect("checked above");
                if row.len() != n {
                    return Err(bad("rows must all have length equal to the row count"));
                }
                for v in row {
                    flat.push(number(v)?);
                }
            }
            DMatrix::from_row_slice(n, n, &flat)
        } else {
            let flat = entries.iter().map(number).collect::<Result<Vec<_>>>()?;
            let n = (flat.len() as f64).sqrt().round() as usize;
            if n * n != flat.len() {
                return Err(bad("flat entry count is not a perfect square"));
            }
            DMatrix::from_row_slice(n, n, &flat)
        };
        let mut kernel = KernelMatrix::from_entries(matrix)?;
        if let (Some(g), Some(points)) = (value.get("group"), value.get("points")) {
            let g: Group = serde_json::from_value(g.clone())?;
            let points = points
                .as_array()
                .ok_or_else(|| bad("\"points\" must be an array"))?
                .iter()
                .map(|p| g.parse_element(p))
                .collect::<Result<Vec<_>>>()?;
            if points.len() != kernel.size() {
                return Err(bad("point count does not match matrix size"));
            }
            kernel.group = Some(g);
            kernel.points = points;
        }
        Ok(kernel)
    }
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Outcome of a conditional-negativity test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CnVerdict {
    pub passed: bool,
    /// Mean-zero vector with `c^T K c > 0`, present exactly when the test fails.
    pub witness: Option<Vec<f64>>,
    pub max_mean_zero_eigenvalue: f64,
}

/// Orthonormal basis of the mean-zero subspace of `R^n`, as the last `n - 1`
/// columns of the Householder reflection exchanging `1/sqrt(n)` and `e_1`.
fn mean_zero_basis(n: usize) -> DMatrix<f64> {
    let u = 1.0 / (n as f64).sqrt();
    let mut v = DVector::from_element(n, u);
    v[0] -= 1.0;
    let vv = v.norm_squared();
    let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv);
    h.columns(1, n - 1).into_owned()
}

/// Tests `sum c_i c_j K_ij <= 0` for every `c` with `sum c_i = 0`.
///
/// The kernel is compressed to the mean-zero subspace and diagonalized. The
/// test passes iff the largest eigenvalue there is at most `tol`; otherwise the
/// corresponding eigenvector is returned as a witness, rescaled so that its
/// smallest nonzero component is 1 in magnitude and its first nonzero
/// component is positive.
pub fn cn_check_matrix(kernel: &KernelMatrix, tol: f64) -> Result<CnVerdict> {
    if !(tol > 0.0) {
        return Err(Error::param(format!("tolerance must be positive, got {tol}")));
    }
    let n = kernel.size();
    if n <= 1 {
        return Ok(CnVerdict {
            passed: true,
            witness: None,
            max_mean_zero_eigenvalue: 0.0,
        });
    }
    let q = mean_zero_basis(n);
    let compressed = q.transpose() * kernel.entries() * &q;
    let eig = SymmetricEigen::new(compressed);
    let (top, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("n > 1");
    if lambda <= tol {
        return Ok(CnVerdict {
            passed: true,
            witness: None,
            max_mean_zero_eigenvalue: lambda,
        });
    }
    let c = &q * eig.eigenvectors.column(top);
    Ok(CnVerdict {
        passed: false,
        witness: Some(normalize_witness(c.as_slice())),
        max_mean_zero_eigenvalue: lambda,
    })
}

fn normalize_witness(c: &[f64]) -> Vec<f64> {
    let max = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 1e-9 * max;
    let smallest = c
        .iter()
        .map(|x| x.abs())
        .filter(|&a| a > floor)
        .fold(f64::INFINITY, f64::min);
    let first = c.iter().copied().find(|x| x.abs() > floor).unwrap_or(1.0);
    let scale = first.signum() / smallest;
    let mut out: Vec<f64> = c
        .iter()
        .map(|&x| if x.abs() > floor { x * scale } else { 0.0 })
        .collect();
    // snap to integers only when every component is one
    if out.iter().all(|x| (x - x.round()).abs() < 1e-9) {
        out.iter_mut().for_each(|x| *x = x.round());
    }
    out
}

/// [`cn_check_matrix`] on the word-length kernel of `points`.
pub fn cn_check(g: &Group, points: &[Element], tol: f64) -> Result<CnVerdict> {
    cn_check_matrix(&KernelMatrix::length_kernel(g, points)?, tol)
}

/// The kernel `e^{-r l(x_i^{-1} x_j)}`.
pub fn schoenberg_kernel(g: &Group, points: &[Element], r: f64) -> Result<KernelMatrix> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::param(format!("r must be positive, got {r}")));
    }
    KernelMatrix::from_group_function(g, points, |x| (-r * g.len_of(x) as f64).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdVerdict {
    pub passed: bool,
    pub min_eigenvalue: f64,
}

/// Passes iff the smallest eigenvalue is at least `-tol`.
pub fn psd_check(kernel: &KernelMatrix, tol: f64) -> PsdVerdict {
    let min_eigenvalue = if kernel.size() == 0 {
        0.0
    } else {
        SymmetricEigen::new(kernel.entries().clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    PsdVerdict {
        passed: min_eigenvalue >= -tol,
        min_eigenvalue,
    }
}

/// Bounds for the profile `p(x) = e^{-r x} (1 + x)^s` over real `x >= 0`.
///
/// `p` increases up to `x* = s/r - 1` and decreases afterwards, so both the
/// global supremum `K` and the tail suprema `K_n = sup_{x > n} p(x)` have
/// closed forms. The real-variable suprema dominate the values at any integer
/// lengths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayCertificate {
    pub r: f64,
    pub s: f64,
    /// Global supremum `K`.
    pub k: f64,
    /// Maximizer `max(s/r - 1, 0)`.
    pub peak: f64,
    pub integer_lengths: bool,
}

impl DecayCertificate {
    pub fn new(r: f64, s: f64, integer_lengths: bool) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::param(format!("r must be positive, got {r}")));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::param(format!("s must be positive, got {s}")));
        }
        let peak = (s / r - 1.0).max(0.0);
        let mut cert = DecayCertificate {
            r,
            s,
            k: 0.0,
            peak,
            integer_lengths,
        };
        cert.k = cert.profile(peak);
        Ok(cert)
    }

    /// `e^{-r x} (1 + x)^s`, evaluated in log space.
    pub fn profile(&self, x: f64) -> f64 {
        (self.s * x.ln_1p() - self.r * x).exp()
    }

    /// `K_n`: supremum of the profile over `x > n`.
    pub fn tail(&self, n: u64) -> f64 {
        let n = n as f64;
        if n >= self.peak {
            self.profile(n)
        } else {
            self.k
        }
    }

    /// Supremum of the profile over `0 <= x <= n`.
    pub fn head(&self, n: u64) -> f64 {
        let n = n as f64;
        if n >= self.peak {
            self.k
        } else {
            self.profile(n)
        }
    }
}

pub fn decay_certificate(r: f64, s: f64, integer_lengths: bool) -> Result<DecayCertificate> {
    DecayCertificate::new(r, s, integer_lengths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DEFAULT_BALL_CAP;

    fn counterexample() -> KernelMatrix {
        KernelMatrix::from_entries(DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 10.0, 1.0, 10.0, 0.0, 1.0, 1.0, 1.0, 0.0],
        ))
        .unwrap()
    }

    #[test]
    fn counterexample_fails_with_integer_witness() {
        let k = counterexample();
        let v = cn_check_matrix(&k, DEFAULT_TOL).unwrap();
        assert!(!v.passed);
        let c = v.witness.unwrap();
        assert_eq!(c, vec![1.0, 1.0, -2.0]);
        assert_eq!(k.quadratic_form(&c), 12.0);
        assert!((v.max_mean_zero_eigenvalue - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_passes() {
        let g = Group::free(2).unwrap();
        let v = cn_check(&g, &[g.identity()], DEFAULT_TOL).unwrap();
        assert!(v.passed);
        assert!(v.witness.is_none());
    }

    #[test]
    fn free_ball_is_conditionally_negative() {
        let g = Group::free(2).unwrap();
        let pts = g.ball(2, DEFAULT_BALL_CAP).unwrap();
        let v = cn_check(&g, &pts, DEFAULT_TOL).unwrap();
        assert!(v.passed, "{v:?}");
        assert!(v.max_mean_zero_eigenvalue < 0.0);
    }

    #[test]
    fn duplicate_points_rejected() {
        let g = Group::cyclic(5).unwrap();
        let p = vec![Element::Residue(1), Element::Residue(1)];
        assert!(cn_check(&g, &p, DEFAULT_TOL).is_err());
    }

    #[test]
    fn non_symmetric_import_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(KernelMatrix::from_entries(m).is_err());
        assert!(cn_check_matrix(&counterexample(), 0.0).is_err());
    }

    #[test]
    fn psd_examples() {
        let ones = KernelMatrix::from_entries(DMatrix::from_element(3, 3, 1.0)).unwrap();
        let v = psd_check(&ones, DEFAULT_TOL);
        assert!(v.passed);
        assert!(v.min_eigenvalue.abs() < 1e-12);
        let d = KernelMatrix::from_entries(DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0, -1.0,
        ])))
        .unwrap();
        let v = psd_check(&d, DEFAULT_TOL);
        assert!(!v.passed);
        assert_eq!(v.min_eigenvalue, -1.0);
    }

    #[test]
    fn schoenberg_on_integers() {
        let g = Group::free_abelian(1).unwrap();
        let pts: Vec<_> = [-1, 0, 1].iter().map(|&i| Element::Vector(vec![i])).collect();
        let k = schoenberg_kernel(&g, &pts, 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let d = (i as f64 - j as f64).abs();
                assert!((k.entries()[(i, j)] - (-d).exp()).abs() < 1e-15);
            }
        }
        assert!(psd_check(&k, DEFAULT_TOL).passed);
        assert!(schoenberg_kernel(&g, &pts, 0.0).is_err());
    }

    #[test]
    fn schoenberg_small_r_tends_to_ones() {
        let g = Group::free(2).unwrap();
        let pts = g.ball(1, DEFAULT_BALL_CAP).unwrap();
        let k = schoenberg_kernel(&g, &pts, 1e-12).unwrap();
        assert!(k.entries().iter().all(|x| (x - 1.0).abs() < 1e-11));
        assert!((0..pts.len()).all(|i| k.entries()[(i, i)] == 1.0));
    }

    #[test]
    fn decay_closed_forms() {
        let c = decay_certificate(1.0, 2.0, true).unwrap();
        assert!((c.k - 4.0 * (-1.0f64).exp()).abs() < 1e-14);
        assert!((c.tail(5) - 36.0 * (-5.0f64).exp()).abs() < 1e-14);
        assert_eq!(c.tail(0), c.k);
        assert!(c.tail(10_000) < 1e-300);
        // peak clamps to zero when s <= r
        let c = decay_certificate(2.0, 1.0, false).unwrap();
        assert_eq!(c.peak, 0.0);
        assert_eq!(c.k, 1.0);
        assert!(decay_certificate(0.0, 1.0, true).is_err());
        assert!(decay_certificate(1.0, -1.0, true).is_err());
    }

    #[test]
    fn kernel_json_round_trip() {
        let g = Group::free(2).unwrap();
        let pts = g.ball(1, DEFAULT_BALL_CAP).unwrap();
        let k = KernelMatrix::length_kernel(&g, &pts).unwrap();
        assert_eq!(KernelMatrix::from_json(&k.to_json()).unwrap(), k);
        let flat = json!({"entries": [0, 10, 1, 10, 0, 1, 1, 1, 0]});
        assert_eq!(KernelMatrix::from_json(&flat).unwrap(), counterexample());
        assert!(KernelMatrix::from_json(&json!({"entries": [1, 2, 3]})).is_err());
    }
}
