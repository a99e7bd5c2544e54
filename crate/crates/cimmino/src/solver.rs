//! Closed-form solve on a mutually orthogonal augmented system.
//!
//! With orthogonal row blocks, the projector onto the row space of
//! `Abar` splits into per-block projectors,
//!
//! ```text
//! P = Abar^+ Abar = sum_i V_i V_i^T,
//! ```
//!
//! where each block's thin SVD supplies its pseudoinverse. A solution of the
//! consistent system `A x = b` is recovered from the extended square system
//! `[[A, Gamma], [B, S]] [x; y] = [b; f]` whose minimal-norm solution is
//!
//! ```text
//! z = Abar^+ b + (I - P) Y^T S^{-1} f,     f = -Y Abar^+ b,
//! ```
//!
//! with `Y = [0 I_q]` and `S = Y (I - P) Y^T` the q x q Gram matrix of the
//! row block `W = Y (I - P)`. The y part of `z` vanishes and the leading part
//! solves the original system. `S` loses rank exactly when the augmented
//! matrix does, which surfaces here as [`Error::SingularSchur`].
//!
//! All per-block work (factorization, pseudoinverse and projector
//! application, the q columns of `S`) runs as independent read-only tasks;
//! partial results are reduced in block order so thread count never changes
//! the output bits.

use crate::augment::{orthogonality_error, AugmentedSystem};
use crate::dense::{cholesky, cholesky_solve, jacobi_svd, DenseMatrix, Svd};
use crate::error::{Error, Result};
use crate::sparse::{norm2, BlockVector};
use rayon::prelude::*;

/// Condition estimate above which `S` is treated as singular.
pub const SCHUR_COND_LIMIT: f64 = 1e12;

/// Default relative residual threshold for the consistency warning.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-8;

/// Thin SVD of one row block, stored on its nonzero column support.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub row_start: usize,
    pub row_end: usize,
    /// Columns of the full-width block that carry nonzeros, ascending.
    pub support: Vec<usize>,
    /// Left singular vectors, (row_end - row_start) x rank.
    pub u: DenseMatrix,
    /// Singular values above the rank cutoff, nonincreasing.
    pub sigma: Vec<f64>,
    /// Right singular vectors on the support, support.len() x rank.
    pub v: DenseMatrix,
}

impl BlockOperator {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// V (Sigma^-1 (U^T b_k)): this block's share of `Abar^+ b`, on support.
    fn pinv_times(&self, b_seg: &[f64]) -> Vec<f64> {
        let mut t = self.u.matvec_t(b_seg).expect("segment matches block rows");
        for (tr, s) in t.iter_mut().zip(&self.sigma) {
            *tr /= s;
        }
        self.v.matvec(&t).expect("rank matches")
    }

    /// V (V^T gather(v)): this block's share of `P v`, on support.
    fn project_row_space(&self, v_full: &[f64]) -> Vec<f64> {
        let gathered: Vec<f64> = self.support.iter().map(|&c| v_full[c]).collect();
        let t = self.v.matvec_t(&gathered).expect("support matches");
        self.v.matvec(&t).expect("rank matches")
    }

    /// U (U^T z_k): the range projector of the block, acting on its rows.
    fn project_range(&self, z_seg: &[f64]) -> Vec<f64> {
        let t = self.u.matvec_t(z_seg).expect("segment matches block rows");
        self.u.matvec(&t).expect("rank matches")
    }
}

/// Per-block thin SVDs of an augmented system.
#[derive(Debug, Clone)]
pub struct BlockFactorization {
    nbar: usize,
    blocks: Vec<BlockOperator>,
}

impl BlockFactorization {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn nbar(&self) -> usize {
        self.nbar
    }

    pub fn block(&self, k: usize) -> &BlockOperator {
        &self.blocks[k]
    }

    /// Row block boundaries `[0, ..., nrows]`.
    pub fn row_bounds(&self) -> Vec<usize> {
        let mut bounds = vec![0];
        bounds.extend(self.blocks.iter().map(|b| b.row_end));
        bounds
    }
}

/// Densify each row block on its column support and take its SVD. Singular
/// values at or below `max(rows, nbar) * eps * sigma_max` are dropped.
pub fn factor_blocks(aug: &AugmentedSystem) -> Result<BlockFactorization> {
    let blocks: Vec<BlockOperator> = (0..aug.num_blocks())
        .into_par_iter()
        .map(|k| factor_one_block(aug, k))
        .collect::<Result<_>>()?;
    Ok(BlockFactorization {
        nbar: aug.nbar(),
        blocks,
    })
}

fn factor_one_block(aug: &AugmentedSystem, k: usize) -> Result<BlockOperator> {
    let (lo, hi) = aug.block_range(k);
    let offsets = aug.abar.row_offsets();
    let triplets = &aug.abar.entries()[offsets[lo]..offsets[hi]];

    let mut support: Vec<usize> = triplets.iter().map(|&(_, c, _)| c).collect();
    support.sort_unstable();
    support.dedup();

    let rows = hi - lo;
    if support.is_empty() {
        return Ok(BlockOperator {
            row_start: lo,
            row_end: hi,
            support,
            u: DenseMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            v: DenseMatrix::zeros(0, 0),
        });
    }

    let mut dense = DenseMatrix::zeros(rows, support.len());
    for &(r, c, v) in triplets {
        let local = support.binary_search(&c).expect("support contains column");
        dense.set(r - lo, local, v);
    }

    let svd = jacobi_svd(&dense).map_err(|e| match e {
        Error::SvdNonConvergence { .. } => Error::SvdNonConvergence { block: k },
        other => other,
    })?;
    let cutoff = rows.max(aug.nbar()) as f64 * f64::EPSILON * svd.sigma[0];
    let rank = svd.sigma.iter().take_while(|&&s| s > cutoff).count();

    let mut u = DenseMatrix::zeros(rows, rank);
    let mut v = DenseMatrix::zeros(support.len(), rank);
    for r in 0..rank {
        for i in 0..rows {
            u.set(i, r, svd.u.get(i, r));
        }
        for i in 0..support.len() {
            v.set(i, r, svd.v.get(i, r));
        }
    }
    Ok(BlockOperator {
        row_start: lo,
        row_end: hi,
        support,
        u,
        sigma: svd.sigma[..rank].to_vec(),
        v,
    })
}

/// Reduce per-block support contributions into a full-width vector, in block
/// order, so the result is independent of the parallel schedule.
fn scatter_sum(fact: &BlockFactorization, parts: Vec<(usize, Vec<f64>)>, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (k, part) in parts {
        for (&c, &x) in fact.blocks[k].support.iter().zip(&part) {
            out[c] += x;
        }
    }
    out
}

/// `Abar^+ b` as the sum of independent per-block pseudoinverse applications.
pub fn apply_pinv(fact: &BlockFactorization, b: &BlockVector) -> Result<Vec<f64>> {
    if b.bounds() != &fact.row_bounds()[1..] {
        return Err(Error::InvalidPartition(
            "right-hand side partition does not match row blocks".to_string(),
        ));
    }
    let parts: Vec<(usize, Vec<f64>)> = fact
        .blocks
        .par_iter()
        .enumerate()
        .map(|(k, blk)| (k, blk.pinv_times(b.segment(k))))
        .collect();
    Ok(scatter_sum(fact, parts, fact.nbar))
}

/// `P v = sum_i V_i V_i^T v`, the orthogonal projector onto the row space.
pub fn apply_projector(fact: &BlockFactorization, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != fact.nbar {
        return Err(Error::DimensionMismatch(format!(
            "projector input length {} != {}",
            v.len(),
            fact.nbar
        )));
    }
    let parts: Vec<(usize, Vec<f64>)> = fact
        .blocks
        .par_iter()
        .enumerate()
        .map(|(k, blk)| (k, blk.project_row_space(v)))
        .collect();
    Ok(scatter_sum(fact, parts, fact.nbar))
}

/// Sequential projector used inside the column-parallel Schur assembly.
fn apply_projector_seq(fact: &BlockFactorization, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; fact.nbar];
    for blk in &fact.blocks {
        let part = blk.project_row_space(v);
        for (&c, &x) in blk.support.iter().zip(&part) {
            out[c] += x;
        }
    }
    out
}

/// `f = -Y Abar^+ b`: the negated trailing `q` entries of the minimal-norm
/// preimage of `b`.
pub fn compute_f(fact: &BlockFactorization, b: &BlockVector, q: usize) -> Result<Vec<f64>> {
    let pinv_b = apply_pinv(fact, b)?;
    Ok(pinv_b[fact.nbar - q..].iter().map(|&x| -x).collect())
}

/// The q x q Gram matrix `S = Y (I - P) Y^T` with its factorization.
#[derive(Debug, Clone)]
pub struct SchurMatrix {
    pub s: DenseMatrix,
    factor: SchurFactor,
    /// One-norm condition estimate (Cholesky path) or exact two-norm
    /// condition (spectral fallback).
    pub cond: f64,
}

#[derive(Debug, Clone)]
enum SchurFactor {
    Empty,
    Cholesky(DenseMatrix),
    Spectral(Svd),
}

impl SchurMatrix {
    /// Factor a symmetrized `S`. Cholesky is attempted first (S is a Gram
    /// matrix, positive definite exactly when the augmented matrix has full
    /// row rank); on failure a spectral factorization estimates the
    /// condition, and anything past [`SCHUR_COND_LIMIT`] raises
    /// [`Error::SingularSchur`].
    pub fn new(s: DenseMatrix) -> Result<Self> {
        let q = s.nrows();
        if q == 0 {
            return Ok(Self {
                s,
                factor: SchurFactor::Empty,
                cond: 1.0,
            });
        }
        if let Some(l) = cholesky(&s) {
            let cond = estimate_condition(&s, |rhs| cholesky_solve(&l, rhs));
            if !cond.is_finite() || cond > SCHUR_COND_LIMIT {
                return Err(Error::SingularSchur { cond });
            }
            return Ok(Self {
                s,
                factor: SchurFactor::Cholesky(l),
                cond,
            });
        }
        let svd = jacobi_svd(&s)?;
        let smin = *svd.sigma.last().unwrap();
        let cond = if smin > 0.0 {
            svd.sigma[0] / smin
        } else {
            f64::INFINITY
        };
        if !cond.is_finite() || cond > SCHUR_COND_LIMIT {
            return Err(Error::SingularSchur { cond });
        }
        Ok(Self {
            s,
            factor: SchurFactor::Spectral(svd),
            cond,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.factor {
            SchurFactor::Empty => Vec::new(),
            SchurFactor::Cholesky(l) => cholesky_solve(l, rhs),
            SchurFactor::Spectral(svd) => {
                let mut t = svd.u.matvec_t(rhs).expect("square");
                for (tr, s) in t.iter_mut().zip(&svd.sigma) {
                    *tr /= s;
                }
                svd.v.matvec(&t).expect("square")
            }
        }
    }
}

/// Hager-style one-norm estimate of `||S^-1||`, times `||S||_1`.
fn estimate_condition(s: &DenseMatrix, solve: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let q = s.nrows();
    let mut x = vec![1.0 / q as f64; q];
    let mut est = 0.0f64;
    for _ in 0..5 {
        let y = solve(&x);
        est = est.max(y.iter().map(|v| v.abs()).sum());
        let xi: Vec<f64> = y
            .iter()
            .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        let z = solve(&xi);
        let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0f64), |(ja, va), (j, &v)| {
            if v.abs() > va {
                (j, v.abs())
            } else {
                (ja, va)
            }
        });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zmax <= ztx {
            break;
        }
        x = vec![0.0; q];
        x[jmax] = 1.0;
    }
    s.norm_one() * est
}

/// Assemble `S` column by column: column j is the trailing `q` entries of
/// `(I - P) Y^T e_j`. Columns are independent; the result is symmetrized as
/// `(S + S^T) / 2` before factorization.
pub fn assemble_s(fact: &BlockFactorization, q: usize) -> Result<SchurMatrix> {
    let n = fact.nbar - q;
    let cols: Vec<Vec<f64>> = (0..q)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; fact.nbar];
            e[n + j] = 1.0;
            let pe = apply_projector_seq(fact, &e);
            (0..q)
                .map(|i| {
                    let unit = if i == j { 1.0 } else { 0.0 };
                    unit - pe[n + i]
                })
                .collect()
        })
        .collect();
    let mut s = DenseMatrix::zeros(q, q);
    for j in 0..q {
        for i in 0..q {
            s.set(i, j, 0.5 * (cols[j][i] + cols[i][j]));
        }
    }
    SchurMatrix::new(s)
}

/// Block-parallel projection onto the range of `Abar`: segment k of the
/// output is `U_k U_k^T z_k`. Segments are disjoint, so the result is
/// bit-identical at any parallelism degree.
pub fn project_onto_range(fact: &BlockFactorization, z: &BlockVector) -> Result<Vec<f64>> {
    if z.bounds() != &fact.row_bounds()[1..] {
        return Err(Error::InvalidPartition(
            "vector partition does not match row blocks".to_string(),
        ));
    }
    let segments: Vec<Vec<f64>> = fact
        .blocks
        .par_iter()
        .enumerate()
        .map(|(k, blk)| blk.project_range(z.segment(k)))
        .collect();
    Ok(segments.concat())
}

/// Wall-clock seconds per pipeline phase.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct Timings {
    pub reorder: f64,
    pub augment: f64,
    pub factor: f64,
    pub schur: f64,
    pub solve: f64,
    pub total: f64,
}

/// Everything a solve reports back: the solution, the residual story, and
/// the health of the Schur factorization.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub mode: String,
    /// Rows of the system the caller posed.
    pub m: usize,
    /// Length of the returned solution.
    pub n: usize,
    /// Number of row blocks.
    pub p: usize,
    /// Augmentation width.
    pub q: usize,
    pub x: Vec<f64>,
    /// Least-squares residual vector `b - A x`, when the mode produces one.
    pub residual: Option<Vec<f64>>,
    pub y_norm: f64,
    pub residual_norm: f64,
    /// `||A^T (b - A x)||` in least-squares mode.
    pub normal_residual: Option<f64>,
    pub orthogonality_error: f64,
    pub s_condition: f64,
    pub timings: Timings,
    pub warnings: Vec<String>,
}

/// Solve the consistent system `A x = b` through the augmented machinery.
/// The residual is always measured and reported; a residual above
/// `consistency_tol * ||b||` only warns, since it signals that `b` was not
/// in the range of `A` (the wrong mode for this solver), not a failure of
/// the factorization.
pub fn solve_consistent(aug: &AugmentedSystem, b: &[f64]) -> Result<SolveReport> {
    let t0 = std::time::Instant::now();
    let fact = factor_blocks(aug)?;
    let factor_time = t0.elapsed().as_secs_f64();
    solve_with_factorization(aug, &fact, b, factor_time, DEFAULT_CONSISTENCY_TOL)
}

/// [`solve_consistent`] with a precomputed factorization.
pub fn solve_with_factorization(
    aug: &AugmentedSystem,
    fact: &BlockFactorization,
    b: &[f64],
    factor_time: f64,
    consistency_tol: f64,
) -> Result<SolveReport> {
    if b.len() != aug.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side length {} != {} rows",
            b.len(),
            aug.nrows()
        )));
    }
    let n = aug.a_cols;
    let q = aug.q;

    let t_schur = std::time::Instant::now();
    let schur = assemble_s(fact, q)?;
    let schur_time = t_schur.elapsed().as_secs_f64();

    let t_solve = std::time::Instant::now();
    let bv = BlockVector::from_bounds(b.to_vec(), &aug.row_bounds)?;
    let pinv_b = apply_pinv(fact, &bv)?;
    let f: Vec<f64> = pinv_b[n..].iter().map(|&x| -x).collect();
    let w = schur.solve(&f);

    let mut z = pinv_b;
    if q > 0 {
        let mut t = vec![0.0; fact.nbar];
        t[n..].copy_from_slice(&w);
        let pt = apply_projector(fact, &t)?;
        for i in 0..fact.nbar {
            z[i] += t[i] - pt[i];
        }
    }
    let x = z[..n].to_vec();
    let y_norm = norm2(&z[n..]);

    let ax = aug.apply_a(&x)?;
    let resid: Vec<f64> = ax.iter().zip(b).map(|(a, bb)| a - bb).collect();
    let residual_norm = norm2(&resid);
    let solve_time = t_solve.elapsed().as_secs_f64();

    let mut warnings = Vec::new();
    let threshold = consistency_tol * norm2(b);
    if residual_norm > threshold && norm2(b) > 0.0 {
        warnings.push(format!(
            "residual {residual_norm:.3e} exceeds {threshold:.3e}: right-hand side \
             appears inconsistent; use least-squares mode"
        ));
    }

    Ok(SolveReport {
        mode: "consistent".to_string(),
        m: aug.nrows(),
        n,
        p: aug.num_blocks(),
        q,
        x,
        residual: None,
        y_norm,
        residual_norm,
        normal_residual: None,
        orthogonality_error: orthogonality_error(aug),
        s_condition: schur.cond,
        timings: Timings {
            factor: factor_time,
            schur: schur_time,
            solve: solve_time,
            total: factor_time + schur_time + solve_time,
            ..Timings::default()
        },
        warnings,
    })
}
