//! Sparse matrix and permutation containers.
//!
//! [`SparseMatrix`] stores a canonical coordinate list (sorted by row then
//! column, duplicates summed, explicit zeros dropped) together with
//! compressed-row offsets, so both triplet iteration and per-row slicing are
//! cheap. All containers are immutable after construction and safe to share
//! across threads.

use crate::error::{Error, Result};

/// Immutable sparse matrix in canonical coordinate form with a CSR view.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    /// Canonical triplets: sorted by (row, col), unique, nonzero values.
    entries: Vec<(usize, usize, f64)>,
    /// CSR offsets into `entries`, length `nrows + 1`.
    row_offsets: Vec<usize>,
}

impl SparseMatrix {
    /// Build a matrix from arbitrary triplets. Duplicate coordinates are
    /// summed and entries that cancel to exactly zero are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::IndexOutOfBounds {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
        }
        let mut entries = triplets;
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut canonical: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match canonical.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => canonical.push((r, c, v)),
            }
        }
        canonical.retain(|&(_, _, v)| v != 0.0);
        let row_offsets = Self::offsets_for(nrows, &canonical);
        Ok(Self {
            nrows,
            ncols,
            entries: canonical,
            row_offsets,
        })
    }

    /// Matrix with no stored entries.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
            row_offsets: vec![0; nrows + 1],
        }
    }

    pub fn identity(n: usize) -> Self {
        let entries: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        let row_offsets = (0..=n).collect();
        Self {
            nrows: n,
            ncols: n,
            entries,
            row_offsets,
        }
    }

    /// Build from dense row slices; zeros are not stored.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} columns, expected {ncols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, triplets)
    }

    fn offsets_for(nrows: usize, entries: &[(usize, usize, f64)]) -> Vec<usize> {
        let mut offsets = vec![0usize; nrows + 1];
        for &(r, _, _) in entries {
            offsets[r + 1] += 1;
        }
        for i in 0..nrows {
            offsets[i + 1] += offsets[i];
        }
        offsets
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Canonical triplets, sorted by (row, col).
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Compressed-row offsets, length `nrows + 1`.
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    /// Entries of row `i` as a slice of (row, col, value) triplets with
    /// ascending column indices.
    pub fn row(&self, i: usize) -> &[(usize, usize, f64)] {
        &self.entries[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    /// Stored value at (i, j), or 0.0 when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .binary_search_by(|&(_, c, _)| c.cmp(&j))
            .map(|k| self.row(i)[k].2)
            .unwrap_or(0.0)
    }

    pub fn transpose(&self) -> Self {
        let triplets = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, triplets).expect("transpose preserves bounds")
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && self.transpose().entries == self.entries
    }

    /// Apply row and column permutations: entry (i, j) moves to
    /// `(row_perm[i], col_perm[j])`. The multiset of values is preserved.
    pub fn permute(&self, row_perm: &Permutation, col_perm: &Permutation) -> Result<Self> {
        if row_perm.len() != self.nrows || col_perm.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "permutation sizes ({}, {}) do not match matrix shape {}x{}",
                row_perm.len(),
                col_perm.len(),
                self.nrows,
                self.ncols
            )));
        }
        let triplets = self
            .entries
            .iter()
            .map(|&(r, c, v)| (row_perm.position_of(r), col_perm.position_of(c), v))
            .collect();
        Self::from_triplets(self.nrows, self.ncols, triplets)
    }

    /// y = A x.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "spmv: vector length {} does not match {} columns",
                x.len(),
                self.ncols
            )));
        }
        let mut y = vec![0.0; self.nrows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        Ok(y)
    }

    /// y = A^T x, without materializing the transpose.
    pub fn spmv_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "spmv_t: vector length {} does not match {} rows",
                x.len(),
                self.nrows
            )));
        }
        let mut y = vec![0.0; self.ncols];
        for &(r, c, v) in &self.entries {
            y[c] += v * x[r];
        }
        Ok(y)
    }

    /// y = A[:, 0..cutoff] x, the product restricted to a leading column range.
    pub fn spmv_leading_cols(&self, cutoff: usize, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != cutoff || cutoff > self.ncols {
            return Err(Error::DimensionMismatch(format!(
                "spmv_leading_cols: cutoff {cutoff}, vector length {}, {} columns",
                x.len(),
                self.ncols
            )));
        }
        let mut y = vec![0.0; self.nrows];
        for &(r, c, v) in &self.entries {
            if c < cutoff {
                y[r] += v * x[c];
            }
        }
        Ok(y)
    }

    /// [self other], with `other`'s column indices shifted by `self.ncols`.
    pub fn horiz_concat(&self, other: &SparseMatrix) -> Result<Self> {
        if self.nrows != other.nrows {
            return Err(Error::DimensionMismatch(format!(
                "horiz_concat: {} vs {} rows",
                self.nrows, other.nrows
            )));
        }
        let mut triplets = self.entries.clone();
        triplets.extend(
            other
                .entries
                .iter()
                .map(|&(r, c, v)| (r, c + self.ncols, v)),
        );
        Self::from_triplets(self.nrows, self.ncols + other.ncols, triplets)
    }

    /// Rows `from..to` as a matrix with the full column dimension.
    pub fn extract_row_block(&self, from: usize, to: usize) -> Result<Self> {
        if from >= to || to > self.nrows {
            return Err(Error::DimensionMismatch(format!(
                "extract_row_block: range {from}..{to} invalid for {} rows",
                self.nrows
            )));
        }
        let triplets = self.entries[self.row_offsets[from]..self.row_offsets[to]]
            .iter()
            .map(|&(r, c, v)| (r - from, c, v))
            .collect();
        Self::from_triplets(to - from, self.ncols, triplets)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, _, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0f64, |acc, &(_, _, v)| acc.max(v.abs()))
    }
}

/// Bijection on `{0..size-1}`, stored as `forward[i] = new position of i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            forward: (0..n).collect(),
        }
    }

    /// Validates that `forward` is a bijection.
    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut seen = vec![false; n];
        for &f in &forward {
            if f >= n || seen[f] {
                return Err(Error::InvalidPermutation(format!(
                    "forward map is not a bijection on 0..{n}"
                )));
            }
            seen[f] = true;
        }
        Ok(Self { forward })
    }

    /// Build from a new ordering: `order[k]` is the old index placed at
    /// position `k`.
    pub fn from_new_order(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut forward = vec![usize::MAX; n];
        for (pos, &old) in order.iter().enumerate() {
            if old >= n || forward[old] != usize::MAX {
                return Err(Error::InvalidPermutation(format!(
                    "ordering is not a bijection on 0..{n}"
                )));
            }
            forward[old] = pos;
        }
        Ok(Self { forward })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// New position of original index `i`.
    pub fn position_of(&self, i: usize) -> usize {
        self.forward[i]
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0usize; self.forward.len()];
        for (i, &f) in self.forward.iter().enumerate() {
            inv[f] = i;
        }
        Self { forward: inv }
    }

    /// Composition `other after self`: index i first moves by self, then by
    /// other.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::InvalidPermutation(
                "compose: size mismatch".to_string(),
            ));
        }
        let forward = self.forward.iter().map(|&f| other.forward[f]).collect();
        Ok(Self { forward })
    }

    /// Reorder a vector: `out[forward[i]] = v[i]`.
    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.forward.len());
        let mut out = vec![0.0; v.len()];
        for (i, &f) in self.forward.iter().enumerate() {
            out[f] = v[i];
        }
        out
    }

    /// Undo [`Permutation::apply_vec`]: `out[i] = v[forward[i]]`.
    pub fn apply_inverse_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.forward.len());
        self.forward.iter().map(|&f| v[f]).collect()
    }
}

/// A vector partitioned into consecutive segments by strictly increasing
/// boundaries; `bounds` has the segment ends, the last equal to the length.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    values: Vec<f64>,
    bounds: Vec<usize>,
}

impl BlockVector {
    pub fn new(values: Vec<f64>, bounds: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() || *bounds.last().unwrap() != values.len() {
            return Err(Error::InvalidPartition(format!(
                "last boundary must equal vector length {}",
                values.len()
            )));
        }
        if bounds.windows(2).any(|w| w[0] >= w[1]) || bounds[0] == 0 {
            return Err(Error::InvalidPartition(
                "boundaries must be strictly increasing and positive".to_string(),
            ));
        }
        Ok(Self { values, bounds })
    }

    /// Partition according to block bounds given as `[0, b1, ..., len]`.
    pub fn from_bounds(values: Vec<f64>, full_bounds: &[usize]) -> Result<Self> {
        Self::new(values, full_bounds[1..].to_vec())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn num_segments(&self) -> usize {
        self.bounds.len()
    }

    pub fn segment(&self, k: usize) -> &[f64] {
        let start = if k == 0 { 0 } else { self.bounds[k - 1] };
        &self.values[start..self.bounds[k]]
    }

    pub fn segment_range(&self, k: usize) -> (usize, usize) {
        let start = if k == 0 { 0 } else { self.bounds[k - 1] };
        (start, self.bounds[k])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Max-abs norm.
pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}
