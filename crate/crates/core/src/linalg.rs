//! Small dense linear algebra: slice helpers, a symmetric matrix type and a
//! cyclic Jacobi eigensolver.
//!
//! The Jacobi solver is the ground-truth oracle for every spectral quantity in
//! the crate. It shares no code path with the gradient or power-iteration
//! methods it is used to check.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Dense symmetric matrix in full row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = v;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting asymmetry beyond
    /// `1e-10` relative to the largest entry. The stored matrix is the exact
    /// symmetrization `(B + Bᵀ)/2`.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        check_len(dim * dim, data.len())?;
        check_finite(&data)?;
        let scale = data.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
        let mut worst = 0.0_f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                worst = worst.max((data[i * dim + j] - data[j * dim + i]).abs());
            }
        }
        if worst > 1e-10 * scale {
            return Err(Error::NotSymmetric(worst));
        }
        let mut m = SymMatrix { dim, data };
        m.symmetrize();
        Ok(m)
    }

    /// Gram matrix `MᵀM` of `rows` (row-major, `cols` columns).
    pub fn gram(rows: &[f64], cols: usize) -> Self {
        let mut m = Self::zeros(cols);
        for row in rows.chunks_exact(cols) {
            for i in 0..cols {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..cols {
                    m.data[i * cols + j] += ri * row[j];
                }
            }
        }
        for i in 0..cols {
            for j in (i + 1)..cols {
                m.data[j * cols + i] = m.data[i * cols + j];
            }
        }
        m
    }

    fn symmetrize(&mut self) {
        let d = self.dim;
        for i in 0..d {
            for j in (i + 1)..d {
                let v = 0.5 * (self.data[i * d + j] + self.data[j * d + i]);
                self.data[i * d + j] = v;
                self.data[j * d + i] = v;
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| dot(row, x))
            .collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    pub fn add_assign(&mut self, other: &SymMatrix) -> Result<()> {
        check_len(self.dim, other.dim)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            data: scale(&self.data, s),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// `Q · diag(values) · Qᵀ` for the given columns of `Q`.
    pub fn from_eigen(values: &[f64], columns: &[Vec<f64>]) -> Self {
        let d = values.len();
        let mut m = Self::zeros(d);
        for (lambda, q) in values.iter().zip(columns) {
            for i in 0..d {
                for j in 0..d {
                    m.data[i * d + j] += lambda * q[i] * q[j];
                }
            }
        }
        m.symmetrize();
        m
    }
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Unit eigenvectors, `vectors[k]` pairs with `values[k]`.
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver.
///
/// Sweeps over all off-diagonal pairs, zeroing each with a plane rotation,
/// until the off-diagonal Frobenius mass drops below `1e-30` of the total
/// (or underflows). Converges quadratically for symmetric input.
pub fn jacobi_eigen(matrix: &SymMatrix) -> SymmetricEigen {
    let n = matrix.dim;
    let mut a = matrix.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let total: f64 = a.iter().map(|x| x * x).sum();
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off <= 1e-30 * total || off < f64::MIN_POSITIVE {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + libm::sqrt(theta * theta + 1.0))
                };
                if t == 0.0 {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                // A <- A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                // A <- Jᵀ A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                // V <- V J
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| {
            let col: Vec<f64> = (0..n).map(|k| v[k * n + i]).collect();
            let nrm = norm(&col);
            scale(&col, 1.0 / nrm)
        })
        .collect();
    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}
