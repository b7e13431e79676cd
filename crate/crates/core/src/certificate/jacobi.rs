//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use nalgebra::{SMatrix, SVector};

use crate::{Error, Result};

/// Symmetry tolerance, relative to the largest entry magnitude.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Convergence threshold on the off-diagonal Frobenius norm, relative to the
/// Frobenius norm of the input.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 50;

/// Eigen-decomposition `M = V·diag(values)·Vᵀ`, values in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen<const N: usize> {
    pub values: SVector<f64, N>,
    pub vectors: SMatrix<f64, N, N>,
    pub sweeps: usize,
}

impl<const N: usize> SymmetricEigen<N> {
    pub fn reconstruct(&self) -> SMatrix<f64, N, N> {
        self.vectors * SMatrix::from_diagonal(&self.values) * self.vectors.transpose()
    }
}

fn asymmetry<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..N {
        for j in (i + 1)..N {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn off_norm<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in (i + 1)..N {
            s += 2.0 * a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

pub fn symmetric_eigen<const N: usize>(m: &SMatrix<f64, N, N>) -> Result<SymmetricEigen<N>> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotSymmetric(f64::NAN));
    }
    let scale = m.amax().max(1.0);
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }

    let mut a = m.symmetric_part();
    let mut v = SMatrix::<f64, N, N>::identity();
    let threshold = OFF_DIAGONAL_TOL * a.norm();
    let mut sweeps = 0;

    while sweeps < MAX_SWEEPS && off_norm(&a) > threshold {
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;

                // A ← Jᵀ A J, touching rows/columns p and q only.
                for k in 0..N {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                for k in 0..N {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = SVector::<f64, N>::from_fn(|i, _| a[(order[i], order[i])]);
    let vectors = SMatrix::<f64, N, N>::from_fn(|r, c| v[(r, order[c])]);
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<const N: usize>(m: &SMatrix<f64, N, N>) -> Result<f64> {
    Ok(symmetric_eigen(m)?.values[0])
}
