//! Small dense matrices and the factorizations used on them.
//!
//! Everything here operates at "desk scale": row blocks extracted from the
//! augmented matrix, and the q x q Schur-like Gram matrix. The SVD is a
//! one-sided Jacobi iteration, which is slow on large matrices but very
//! accurate and rank-robust on the narrow blocks this crate produces.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            values: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_values(nrows: usize, ncols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {nrows}x{ncols} matrix",
                values.len()
            )));
        }
        Ok(Self {
            nrows,
            ncols,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch(
                    "ragged rows in dense construction".to_string(),
                ));
            }
            values.extend_from_slice(row);
        }
        Ok(Self {
            nrows,
            ncols,
            values,
        })
    }

    pub fn from_sparse(a: &SparseMatrix) -> Self {
        let mut m = Self::zeros(a.nrows(), a.ncols());
        for &(r, c, v) in a.entries() {
            m.set(r, c, v);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.ncols + j] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {}x{} times {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut out = Self::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.ncols {
                    out.values[i * other.ncols + j] += aik * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: length {} against {} columns",
                x.len(),
                self.ncols
            )));
        }
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            y[i] = self.row_slice(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(y)
    }

    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "matvec_t: length {} against {} rows",
                x.len(),
                self.nrows
            )));
        }
        let mut y = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (j, yj) in y.iter_mut().enumerate() {
                *yj += self.get(i, j) * xi;
            }
        }
        Ok(y)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.ncols)
            .map(|j| (0..self.nrows).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    }
}

/// Thin SVD `A = U diag(sigma) V^T` with `sigma` sorted nonincreasing.
/// Columns whose singular value is exactly zero carry zeroed U/V columns.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

const MAX_JACOBI_SWEEPS: usize = 40;

/// One-sided Jacobi SVD. Rotations orthogonalize the columns of the side with
/// fewer columns; the result is exact to roundoff for any rank.
pub fn jacobi_svd(a: &DenseMatrix) -> Result<Svd> {
    if a.ncols() > a.nrows() {
        let svd = jacobi_svd(&a.transpose())?;
        return Ok(Svd {
            u: svd.v,
            sigma: svd.sigma,
            v: svd.u,
        });
    }
    let m = a.nrows();
    let n = a.ncols();
    // Column-major working copy of A; rotations act on column pairs.
    let mut w: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..m).map(|i| a.get(i, j)).collect())
        .collect();
    let mut v = DenseMatrix::identity(n);

    // The dot product of two stored columns carries roundoff of relative
    // size about dim * eps, so that is the achievable orthogonality target.
    let dim = m.max(n) as f64;
    let tol = 8.0 * dim * f64::EPSILON;

    let mut converged = n < 2;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        // Columns that have decayed to roundoff junk (possible only when the
        // matrix is rank deficient: every column norm bounds sigma_min from
        // above) never become relatively orthogonal to anything and would
        // keep the sweep alive forever. They carry singular values below
        // every caller's rank cutoff, so freeze them.
        let max_col_sq = w
            .iter()
            .map(|col| col.iter().map(|x| x * x).sum::<f64>())
            .fold(0.0f64, f64::max);
        let floor = dim * f64::EPSILON;
        let floor_sq = floor * floor * max_col_sq;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = w[p].iter().map(|x| x * x).sum();
                let beta: f64 = w[q].iter().map(|x| x * x).sum();
                let gamma: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if alpha <= floor_sq || beta <= floor_sq {
                    continue;
                }
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wp = w[p][i];
                    let wq = w[q][i];
                    w[p][i] = c * wp - s * wq;
                    w[q][i] = s * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, c * vp - s * vq);
                    v.set(i, q, s * vp + c * vq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::SvdNonConvergence { block: 0 });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = w
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let mut u = DenseMatrix::zeros(m, n);
    let mut v_sorted = DenseMatrix::zeros(n, n);
    let mut sigma = vec![0.0; n];
    for (k, &j) in order.iter().enumerate() {
        sigma[k] = norms[j];
        if norms[j] > 0.0 {
            for i in 0..m {
                u.set(i, k, w[j][i] / norms[j]);
            }
        }
        for i in 0..n {
            v_sorted.set(i, k, v.get(i, j));
        }
    }
    Ok(Svd {
        u,
        sigma,
        v: v_sorted,
    })
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
/// Returns `None` on a non-positive pivot, the rank-deficiency signal.
pub fn cholesky(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.nrows();
    if n != a.ncols() {
        return None;
    }
    let max_diag = (0..n).fold(0.0f64, |acc, i| acc.max(a.get(i, i).abs()));
    let pivot_floor = (n as f64) * f64::EPSILON * max_diag;
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= pivot_floor {
                    return None;
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Some(l)
}

/// Solve `L L^T x = b` given the lower Cholesky factor.
pub fn cholesky_solve(l: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.nrows();
    debug_assert_eq!(b.len(), n);
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l.get(i, k) * y[k];
        }
        y[i] /= l.get(i, i);
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            y[i] -= l.get(k, i) * y[k];
        }
        y[i] /= l.get(i, i);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(svd: &Svd) -> DenseMatrix {
        let m = svd.u.nrows();
        let n = svd.v.nrows();
        let r = svd.sigma.len();
        let mut out = DenseMatrix::zeros(m, n);
        for k in 0..r {
            for i in 0..m {
                for j in 0..n {
                    let add = svd.u.get(i, k) * svd.sigma[k] * svd.v.get(j, k);
                    out.set(i, j, out.get(i, j) + add);
                }
            }
        }
        out
    }

    #[test]
    fn svd_of_wide_rank_one_row() {
        // [2, 0, 2, 0] has a single singular value sqrt(8).
        let a = DenseMatrix::from_rows(&[vec![2.0, 0.0, 2.0, 0.0]]).unwrap();
        let svd = jacobi_svd(&a).unwrap();
        assert!((svd.sigma[0] - 8.0f64.sqrt()).abs() < 1e-14);
        let back = reconstruct(&svd);
        for j in 0..4 {
            assert!((back.get(0, j) - a.get(0, j)).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_reconstructs_random_rank_deficient() {
        // Third row is the sum of the first two.
        let a = DenseMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0, -1.0],
            vec![0.5, -1.0, 3.0, 2.0],
            vec![1.5, 1.0, 3.0, 1.0],
        ])
        .unwrap();
        let svd = jacobi_svd(&a).unwrap();
        assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(svd.sigma[2] < 1e-12 * svd.sigma[0]);
        let back = reconstruct(&svd);
        for i in 0..3 {
            for j in 0..4 {
                assert!((back.get(i, j) - a.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_singular_vectors_are_orthonormal() {
        let a = DenseMatrix::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![0.0, 2.0, -1.0],
            vec![1.0, 0.0, 3.0],
            vec![2.0, 2.0, 2.0],
        ])
        .unwrap();
        let svd = jacobi_svd(&a).unwrap();
        for p in 0..3 {
            for q in 0..3 {
                let du: f64 = (0..4).map(|i| svd.u.get(i, p) * svd.u.get(i, q)).sum();
                let dv: f64 = (0..3).map(|i| svd.v.get(i, p) * svd.v.get(i, q)).sum();
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!((du - expect).abs() < 1e-13, "U^T U [{p},{q}] = {du}");
                assert!((dv - expect).abs() < 1e-13, "V^T V [{p},{q}] = {dv}");
            }
        }
    }

    #[test]
    fn svd_converges_on_low_rank_matrices() {
        // Rank 4 by construction; noise columns must not stall the sweeps.
        let mut a = DenseMatrix::zeros(15, 10);
        for i in 0..15 {
            for j in 0..10 {
                let f1 = ((i % 4) as f64 - 1.5) * ((j % 3) as f64 - 1.0);
                let f2 = (i as f64 % 5.0) * ((j as f64 % 7.0) - 3.0);
                let f3 = if (i + j) % 2 == 0 { 1.0 } else { -2.0 };
                a.set(i, j, 2.0 * f1 - f2 + 0.5 * f3);
            }
        }
        let svd = jacobi_svd(&a).unwrap();
        assert!(svd.sigma[4] <= 1e-12 * svd.sigma[0], "{:?}", svd.sigma);
        let back = reconstruct(&svd);
        for i in 0..15 {
            for j in 0..10 {
                assert!((back.get(i, j) - a.get(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn cholesky_factors_and_solves() {
        let s = DenseMatrix::from_rows(&[vec![0.25, -0.25], vec![-0.25, 0.75]]).unwrap();
        let l = cholesky(&s).expect("positive definite");
        let x = cholesky_solve(&l, &[0.0, 0.5]);
        // S^{-1} = [[6, 2], [2, 2]], so S^{-1} [0, 0.5] = [1, 1].
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_singular() {
        let s = DenseMatrix::from_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap();
        assert!(cholesky(&s).is_none());
    }
}
