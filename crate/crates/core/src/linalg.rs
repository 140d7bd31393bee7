//! Small dense linear algebra: a cyclic Jacobi eigensolver for the group
//! covariances and a Householder least-squares solver for the timing model.
//! Matrices are row-major `Vec<f64>`.

use crate::error::{Error, Result};

pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, descending.
    pub values: Vec<f64>,
    /// Eigenvectors as rows, matching `values`.
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &[f64], dim: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            if i != j {
                sum += a[i * dim + j] * a[i * dim + j];
            }
        }
    }
    sum.sqrt()
}

/// Eigen-decomposition of a symmetric `dim`×`dim` matrix by cyclic Jacobi
/// rotations. Stops when the off-diagonal Frobenius norm drops below
/// `JACOBI_TOLERANCE` times the matrix norm (or below the absolute tolerance
/// for a near-zero matrix), or after `JACOBI_MAX_SWEEPS` sweeps.
///
/// Eigenvalues are sorted descending (stable in the original diagonal
/// order), and each eigenvector is sign-fixed so that its first entry with
/// magnitude above 1e-12 is positive.
pub fn symmetric_eigen(matrix: &[f64], dim: usize) -> Result<SymmetricEigen> {
    assert_eq!(matrix.len(), dim * dim);
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut a = matrix.to_vec();
    // v holds eigenvectors as columns during the sweeps
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let threshold = JACOBI_TOLERANCE * scale;

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS && off_diagonal_norm(&a, dim) >= threshold {
        sweeps += 1;
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        a[j * dim + j]
            .partial_cmp(&a[i * dim + i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<f64> = order.iter().map(|&i| a[i * dim + i]).collect();
    let mut vectors = vec![0.0; dim * dim];
    for (row, &col) in order.iter().enumerate() {
        let mut sign = 1.0;
        for k in 0..dim {
            let x = v[k * dim + col];
            if x.abs() > 1e-12 {
                sign = x.signum();
                break;
            }
        }
        for k in 0..dim {
            vectors[row * dim + k] = sign * v[k * dim + col];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Ordinary least squares solution together with `(XᵀX)⁻¹`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub xtx_inverse: Vec<f64>,
    pub sse: f64,
}

/// Solves `min ‖Xβ − y‖` for an `rows`×`cols` design by Householder QR on
/// the column-equilibrated design. Fails with [`Error::RankDeficient`] when a
/// diagonal entry of R is negligible relative to the largest.
pub fn least_squares(x: &[f64], rows: usize, cols: usize, y: &[f64]) -> Result<LeastSquares> {
    assert_eq!(x.len(), rows * cols);
    assert_eq!(y.len(), rows);
    if rows < cols {
        return Err(Error::RankDeficient);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let col_scale: Vec<f64> = (0..cols)
        .map(|j| {
            let s = (0..rows).map(|i| x[i * cols + j].abs()).fold(0.0, f64::max);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let mut r: Vec<f64> = (0..rows * cols)
        .map(|idx| x[idx] / col_scale[idx % cols])
        .collect();
    let mut qty = y.to_vec();

    for k in 0..cols {
        let norm = (k..rows).map(|i| r[i * cols + k].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[k * cols + k] > 0.0 { -norm } else { norm };
        let mut u: Vec<f64> = (k..rows).map(|i| r[i * cols + k]).collect();
        u[0] -= alpha;
        let unorm2: f64 = u.iter().map(|v| v * v).sum();
        if unorm2 == 0.0 {
            continue;
        }
        for j in k..cols {
            let dot: f64 = (k..rows).map(|i| u[i - k] * r[i * cols + j]).sum();
            let f = 2.0 * dot / unorm2;
            for i in k..rows {
                r[i * cols + j] -= f * u[i - k];
            }
        }
        let dot: f64 = (k..rows).map(|i| u[i - k] * qty[i]).sum();
        let f = 2.0 * dot / unorm2;
        for i in k..rows {
            qty[i] -= f * u[i - k];
        }
    }

    let max_diag = (0..cols).map(|k| r[k * cols + k].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 || (0..cols).any(|k| r[k * cols + k].abs() <= 1e-10 * max_diag) {
        return Err(Error::RankDeficient);
    }

    // back substitution for the scaled coefficients
    let mut beta = vec![0.0; cols];
    for k in (0..cols).rev() {
        let mut s = qty[k];
        for j in (k + 1)..cols {
            s -= r[k * cols + j] * beta[j];
        }
        beta[k] = s / r[k * cols + k];
    }
    let sse: f64 = qty[cols..].iter().map(|v| v * v).sum();

    // R⁻¹ (upper triangular), then (XᵀX)⁻¹ = D⁻¹ R⁻¹ R⁻ᵀ D⁻¹
    let mut rinv = vec![0.0; cols * cols];
    for i in 0..cols {
        rinv[i * cols + i] = 1.0 / r[i * cols + i];
        for j in (i + 1)..cols {
            let mut s = 0.0;
            for k in i..j {
                s += rinv[i * cols + k] * r[k * cols + j];
            }
            rinv[i * cols + j] = -s / r[j * cols + j];
        }
    }
    let mut xtx_inverse = vec![0.0; cols * cols];
    for i in 0..cols {
        for j in 0..cols {
            let s: f64 = (i.max(j)..cols)
                .map(|k| rinv[i * cols + k] * rinv[j * cols + k])
                .sum();
            xtx_inverse[i * cols + j] = s / (col_scale[i] * col_scale[j]);
        }
    }
    let coefficients = beta
        .iter()
        .zip(&col_scale)
        .map(|(b, s)| b / s)
        .collect();
    Ok(LeastSquares {
        coefficients,
        xtx_inverse,
        sse,
    })
}
