//! Small numeric kernels: 2-vectors, 3x3 matrices, cosine similarity and the
//! 9-dimensional null-space solve used by the homography estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norms below this are treated as zero.
pub const ZERO_NORM: f64 = 1e-12;

/// Relative gap below which the second-smallest eigenvalue of `AᵀA` counts as
/// zero, i.e. the null space is not one-dimensional.
const NULLITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat3(pub [f64; 9]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);

    pub fn translation(tx: f64, ty: f64) -> Mat3 {
        Mat3([1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0])
    }

    pub fn scaling(sx: f64, sy: f64) -> Mat3 {
        Mat3([sx, 0.0, 0.0, 0.0, sy, 0.0, 0.0, 0.0, 1.0])
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.0[r * 3 + c]
    }

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 3 + c] = (0..3).map(|k| self.at(r, k) * o.at(k, c)).sum();
            }
        }
        Mat3(out)
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        Mat3(self.0.map(|v| v * s))
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Inverse via the adjugate. Fails when `|det| <= 1e-12 * ‖m‖_F³`.
    pub fn inverse(&self) -> Result<Mat3> {
        let m = &self.0;
        let det = self.det();
        let scale = self.frobenius().powi(3);
        if !det.is_finite() || det.abs() <= ZERO_NORM * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotInvertible { det });
        }
        let adj = [
            m[4] * m[8] - m[5] * m[7],
            m[2] * m[7] - m[1] * m[8],
            m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8],
            m[0] * m[8] - m[2] * m[6],
            m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6],
            m[1] * m[6] - m[0] * m[7],
            m[0] * m[4] - m[1] * m[3],
        ];
        Ok(Mat3(adj.map(|v| v / det)))
    }

    /// Applies the matrix to `[x, y, 1]ᵀ` and returns the homogeneous triple.
    #[inline]
    pub fn apply_h(&self, p: Vec2) -> [f64; 3] {
        let m = &self.0;
        [
            m[0] * p.x + m[1] * p.y + m[2],
            m[3] * p.x + m[4] * p.y + m[5],
            m[6] * p.x + m[7] * p.y + m[8],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

/// A d-dimensional feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: Vec<f64>,
}

impl Embedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("embedding has no components"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("embedding has non-finite components".into()));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for Embedding {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity. Zero-norm inputs are similar to nothing (result 0).
pub fn cosine_sim(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            what: "cosine similarity operands",
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(cosine_with_norms(a, b, norm(a), norm(b)))
}

/// Cosine similarity with caller-supplied norms; lengths must already agree.
#[inline]
pub fn cosine_with_norms(a: &[f64], b: &[f64], norm_a: f64, norm_b: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if norm_a < ZERO_NORM || norm_b < ZERO_NORM {
        return 0.0;
    }
    (dot(a, b) / (norm_a * norm_b)).clamp(-1.0, 1.0)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (unsorted) and the eigenvectors as columns of a
/// row-major `N×N` array.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigen<const N: usize>(sym: &[[f64; N]; N]) -> ([f64; N], [[f64; N]; N]) {
    let mut a = *sym;
    let mut v = [[0.0; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let total: f64 = a.iter().flatten().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let off: f64 = (0..N)
            .flat_map(|p| (0..N).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off <= f64::EPSILON * f64::EPSILON * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut values = [0.0; N];
    for (i, val) in values.iter_mut().enumerate() {
        *val = a[i][i];
    }
    (values, v)
}

/// Unit vector `h` minimizing `‖A h‖₂` for a stacked `2M×9` constraint matrix.
///
/// Solved as the eigenvector of `AᵀA` with the smallest eigenvalue. A null
/// space of dimension > 1 is reported as a degenerate configuration.
#[allow(clippy::needless_range_loop)]
pub fn null_vector_9(rows: &[[f64; 9]]) -> Result<[f64; 9]> {
    let m = rows.len() / 2;
    if m < 4 {
        return Err(Error::InsufficientConstraints { needed: 4, got: m });
    }
    let mut ata = [[0.0; 9]; 9];
    for row in rows {
        for i in 0..9 {
            if row[i] == 0.0 {
                continue;
            }
            for j in i..9 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..9 {
        for j in 0..i {
            ata[i][j] = ata[j][i];
        }
    }
    if ata.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite constraint matrix".into()));
    }
    let (vals, vecs) = jacobi_eigen(&ata);
    let mut order: [usize; 9] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let largest = vals[order[8]].abs().max(f64::MIN_POSITIVE);
    if vals[order[1]] <= NULLITY_TOL * largest {
        return Err(Error::Degenerate(
            "constraint matrix has a null space of dimension > 1".into(),
        ));
    }
    let col = order[0];
    let mut h: [f64; 9] = std::array::from_fn(|i| vecs[i][col]);
    let n = h.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut h {
        *x /= n;
    }
    Ok(h)
}
