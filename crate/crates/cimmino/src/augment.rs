//! Column augmentation that makes row blocks mutually orthogonal.
//!
//! Appending `Gamma` to a reordered matrix `A` gives `Abar = [A Gamma]` whose
//! row blocks satisfy `Abar_i Abar_j^T = 0` for `i != j`. Two constructions
//! are provided:
//!
//! * consistent case: the block bidiagonal `A` gets `Gamma = D A` with
//!   `D = diag(I, -I, I, ...)` per row block, so `Abar_i = [A_i, +/-A_i]`.
//!   Adjacent blocks cancel through the sign flip; non-adjacent blocks share
//!   no columns at all.
//! * least-squares case: the block tridiagonal reordered augmented matrix is
//!   first regrouped by pairing consecutive level blocks, which makes it
//!   block bidiagonal in the coarse blocks; `Gamma` then holds sign-flipped
//!   copies of the coarse blocks so that each adjacent pair of coarse row
//!   groups cancels in exactly one column group.

use crate::error::{Error, Result};
use crate::graph::{BlockPartition, BlockStructure};
use crate::sparse::SparseMatrix;

/// Relative tolerance for the orthogonality self-check; the construction
/// cancels exactly, so this only absorbs roundoff in the checker.
pub const ORTHOGONALITY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentMode {
    Consistent,
    AugmentedTridiagonal,
}

/// The extended matrix `[A Gamma]` with its row block layout and per-block
/// signs.
#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub abar: SparseMatrix,
    /// Width of the original (unaugmented) column range.
    pub a_cols: usize,
    /// Number of augmentation columns.
    pub q: usize,
    /// Row block boundaries `[0, ..., nrows]`.
    pub row_bounds: Vec<usize>,
    /// Sign applied to block k's contribution to `Gamma`.
    pub signs: Vec<f64>,
    pub mode: AugmentMode,
}

impl AugmentedSystem {
    pub fn new(
        abar: SparseMatrix,
        a_cols: usize,
        q: usize,
        row_bounds: Vec<usize>,
        signs: Vec<f64>,
        mode: AugmentMode,
    ) -> Result<Self> {
        if a_cols + q != abar.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "a_cols {a_cols} + q {q} != {} columns",
                abar.ncols()
            )));
        }
        if row_bounds.first() != Some(&0)
            || row_bounds.last() != Some(&abar.nrows())
            || row_bounds.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidPartition(
                "row bounds must increase from 0 to nrows".to_string(),
            ));
        }
        if signs.len() + 1 != row_bounds.len() {
            return Err(Error::InvalidPartition(
                "one sign per row block required".to_string(),
            ));
        }
        Ok(Self {
            abar,
            a_cols,
            q,
            row_bounds,
            signs,
            mode,
        })
    }

    pub fn nrows(&self) -> usize {
        self.abar.nrows()
    }

    /// Total extended width `a_cols + q`.
    pub fn nbar(&self) -> usize {
        self.abar.ncols()
    }

    pub fn num_blocks(&self) -> usize {
        self.row_bounds.len() - 1
    }

    pub fn block_range(&self, k: usize) -> (usize, usize) {
        (self.row_bounds[k], self.row_bounds[k + 1])
    }

    /// `A x` using only the original columns.
    pub fn apply_a(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.abar.spmv_leading_cols(self.a_cols, x)
    }
}

/// Augment a block bidiagonal matrix: `Gamma = D A` with alternating-sign
/// identity blocks on `D`, so `q` equals the column count.
pub fn augment_consistent(ar: &SparseMatrix, blocks: &BlockPartition) -> Result<AugmentedSystem> {
    if blocks.structure != BlockStructure::Bidiagonal {
        return Err(Error::InvalidPartition(
            "augment_consistent requires a bidiagonal partition".to_string(),
        ));
    }
    if *blocks.row_bounds.last().unwrap() != ar.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} rows, matrix has {}",
            blocks.row_bounds.last().unwrap(),
            ar.nrows()
        )));
    }
    let n = ar.ncols();
    let signs: Vec<f64> = (0..blocks.num_row_blocks())
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let mut triplets = Vec::with_capacity(2 * ar.nnz());
    for &(i, j, v) in ar.entries() {
        triplets.push((i, j, v));
        triplets.push((i, n + j, signs[blocks.row_block_of(i)] * v));
    }
    let abar = SparseMatrix::from_triplets(ar.nrows(), 2 * n, triplets)?;
    AugmentedSystem::new(
        abar,
        n,
        n,
        blocks.row_bounds.clone(),
        signs,
        AugmentMode::Consistent,
    )
}

/// Coarse regrouping of a block tridiagonal matrix: row groups pair fine
/// levels (1,2), (3,4), ...; column groups are level 1 alone, then (2,3),
/// (4,5), ... In the coarse blocks the matrix is block bidiagonal, with row
/// group k touching column groups k and k+1 only.
#[derive(Debug, Clone)]
pub struct GroupedPartition {
    /// Coarse row group boundaries in matrix indices.
    pub row_bounds: Vec<usize>,
    /// Coarse column group boundaries in matrix indices.
    pub col_bounds: Vec<usize>,
}

impl GroupedPartition {
    pub fn num_row_groups(&self) -> usize {
        self.row_bounds.len() - 1
    }

    pub fn num_col_groups(&self) -> usize {
        self.col_bounds.len() - 1
    }

    fn row_group_of(&self, i: usize) -> usize {
        self.row_bounds.partition_point(|&b| b <= i) - 1
    }

    fn col_group_of(&self, j: usize) -> usize {
        self.col_bounds.partition_point(|&b| b <= j) - 1
    }
}

/// Pair the fine level blocks of a tridiagonal partition into coarse groups
/// and verify the coarse bidiagonal pattern by an entry scan.
pub fn group_tridiagonal_blocks(
    ahat: &SparseMatrix,
    blocks: &BlockPartition,
) -> Result<GroupedPartition> {
    if blocks.structure != BlockStructure::Tridiagonal {
        return Err(Error::InvalidPartition(
            "grouping requires a tridiagonal partition".to_string(),
        ));
    }
    let fine = &blocks.row_bounds;
    let num_levels = fine.len() - 1;
    if num_levels == 0 {
        return Err(Error::InvalidPartition("empty partition".to_string()));
    }

    // Row groups: fine levels (0,1), (2,3), ...; a trailing odd level forms
    // a singleton group.
    let mut row_bounds = vec![0usize];
    let mut k = 0;
    while k < num_levels {
        let end = (k + 2).min(num_levels);
        row_bounds.push(fine[end]);
        k = end;
    }
    // Column groups: fine level 0 alone, then (1,2), (3,4), ...
    let mut col_bounds = vec![0usize, fine[1]];
    let mut k = 1;
    while k < num_levels {
        let end = (k + 2).min(num_levels);
        col_bounds.push(fine[end]);
        k = end;
    }

    let grouped = GroupedPartition {
        row_bounds,
        col_bounds,
    };
    for &(i, j, _) in ahat.entries() {
        let rg = grouped.row_group_of(i);
        let cg = grouped.col_group_of(j);
        if cg != rg && cg != rg + 1 {
            return Err(Error::Structure(format!(
                "entry ({i}, {j}) falls in coarse block ({rg}, {cg}), outside the \
                 bidiagonal grouping"
            )));
        }
    }
    Ok(grouped)
}

/// Augment a grouped tridiagonal matrix. Gamma column group g (one per
/// adjacent pair of coarse row groups) holds, with alternating signs, the
/// copies of coarse column group g+1 contributed by row groups g and g+1, so
/// their cross products cancel. A single coarse group needs no augmentation
/// (`q = 0`).
pub fn augment_tridiagonal(
    ahat: &SparseMatrix,
    grouped: &GroupedPartition,
) -> Result<AugmentedSystem> {
    let n = ahat.ncols();
    let p = grouped.num_row_groups();
    let signs: Vec<f64> = (0..p)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect();

    // Gamma group g mirrors coarse column group g + 1.
    let num_gamma = p.saturating_sub(1);
    let mut gamma_offsets = Vec::with_capacity(num_gamma + 1);
    let mut q = 0usize;
    for g in 0..num_gamma {
        gamma_offsets.push(q);
        q += grouped.col_bounds[g + 2] - grouped.col_bounds[g + 1];
    }
    gamma_offsets.push(q);

    let mut triplets = Vec::with_capacity(2 * ahat.nnz());
    for &(i, j, v) in ahat.entries() {
        triplets.push((i, j, v));
        let rg = grouped.row_group_of(i);
        let cg = grouped.col_group_of(j);
        let local = j - grouped.col_bounds[cg];
        if cg == rg && rg >= 1 {
            triplets.push((i, n + gamma_offsets[rg - 1] + local, signs[rg] * v));
        } else if cg == rg + 1 && rg + 1 < p {
            triplets.push((i, n + gamma_offsets[rg] + local, signs[rg] * v));
        }
    }
    let abar = SparseMatrix::from_triplets(ahat.nrows(), n + q, triplets)?;
    let aug = AugmentedSystem::new(
        abar,
        n,
        q,
        grouped.row_bounds.clone(),
        signs,
        AugmentMode::AugmentedTridiagonal,
    )?;

    let err = orthogonality_error(&aug);
    let scale = max_block_frobenius(&aug);
    if err > ORTHOGONALITY_RTOL * scale {
        return Err(Error::Structure(format!(
            "augmentation self-check failed: orthogonality error {err:.3e} exceeds \
             {ORTHOGONALITY_RTOL:.0e} * {scale:.3e}"
        )));
    }
    Ok(aug)
}

/// Largest row-block Frobenius norm, the scale for orthogonality tolerances.
pub fn max_block_frobenius(s: &AugmentedSystem) -> f64 {
    let offsets = s.abar.row_offsets();
    (0..s.num_blocks())
        .map(|k| {
            let (lo, hi) = s.block_range(k);
            s.abar.entries()[offsets[lo]..offsets[hi]]
                .iter()
                .map(|&(_, _, v)| v * v)
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0f64, f64::max)
}

/// Max over block pairs i != j of the largest entry of `Abar_i Abar_j^T`,
/// computed as sparse dot products of row pairs (no dense products formed).
/// Zero when there is at most one block.
pub fn orthogonality_error(s: &AugmentedSystem) -> f64 {
    let a = &s.abar;
    let row_span = |i: usize| -> Option<(usize, usize)> {
        let row = a.row(i);
        row.first().map(|f| (f.1, row.last().unwrap().1))
    };
    let mut worst = 0.0f64;
    for bi in 0..s.num_blocks() {
        for bj in (bi + 1)..s.num_blocks() {
            let (ilo, ihi) = s.block_range(bi);
            let (jlo, jhi) = s.block_range(bj);
            for u in ilo..ihi {
                let Some((umin, umax)) = row_span(u) else {
                    continue;
                };
                for w in jlo..jhi {
                    let Some((wmin, wmax)) = row_span(w) else {
                        continue;
                    };
                    if umax < wmin || wmax < umin {
                        continue;
                    }
                    worst = worst.max(sparse_row_dot(a.row(u), a.row(w)).abs());
                }
            }
        }
    }
    worst
}

fn sparse_row_dot(x: &[(usize, usize, f64)], y: &[(usize, usize, f64)]) -> f64 {
    let mut dot = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match x[i].1.cmp(&y[j].1) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += x[i].2 * y[j].2;
                i += 1;
                j += 1;
            }
        }
    }
    dot
}
