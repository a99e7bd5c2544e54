//! Independent dense oracles and randomized verification suites.
//!
//! Everything here goes through nalgebra's dense SVD, deliberately separate
//! from the hand-rolled Jacobi SVD the block solver uses, so the two sides of
//! every check fail independently. The suites are deterministic given a seed
//! and power both the `check` CLI command and the acceptance tests:
//!
//! * the four pseudoinverse equalities on random small matrices;
//! * the two rank identities (join and product form);
//! * the stacked operator `[Abar; W]` against `[Abar^+ W^+]`;
//! * the Gram identity `S = B B^T + S^2`;
//! * the rank chain `rank(S) = rank(W) = q - dim(R(Y^T) /\ R(Abar^T))`;
//! * positive definiteness of `S` on full-row-rank inputs, and an
//!   observational probe of rank-deficient ones (whether rank deficiency
//!   makes `S` singular is recorded per instance, never assumed in either
//!   direction).

use crate::augment::AugmentedSystem;
use crate::dense::DenseMatrix;
use crate::driver::{Pipeline, SolveMode};
use crate::error::{Error, Result};
use crate::solver::{apply_pinv, apply_projector, assemble_s};
use crate::sparse::{norm2, BlockVector, SparseMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_iterator(m.nrows(), m.ncols(), m.values().iter().copied())
}

fn from_na(m: &DMatrix<f64>) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.set(i, j, m[(i, j)]);
        }
    }
    out
}

/// Numerical rank with the singular values and tolerance that produced it.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
    /// Set when the report came from a subspace intersection query.
    pub intersection_dim: Option<usize>,
}

fn svd_parts(m: &DenseMatrix) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>, f64) {
    let na = to_na(m);
    let svd = na.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sigma.iter().fold(0.0f64, |a, &b| a.max(b));
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax;
    (u, sigma, v_t, tol)
}

pub fn rank_report(m: &DenseMatrix) -> RankReport {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RankReport {
            rank: 0,
            singular_values: Vec::new(),
            tolerance: 0.0,
            intersection_dim: None,
        };
    }
    let (_, sigma, _, tol) = svd_parts(m);
    RankReport {
        rank: sigma.iter().filter(|&&s| s > tol).count(),
        singular_values: sigma,
        tolerance: tol,
        intersection_dim: None,
    }
}

pub fn rank(m: &DenseMatrix) -> usize {
    rank_report(m).rank
}

/// Rank with an absolute noise floor on top of the self-relative tolerance.
/// Needed when the matrix is a residual of earlier computations (for
/// example `(I - E E^+) F`): a matrix that should be exactly zero carries
/// roundoff-sized singular values its own scale cannot reject.
pub fn rank_with_floor(m: &DenseMatrix, floor: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let (_, sigma, _, tol) = svd_parts(m);
    sigma.iter().filter(|&&s| s > tol.max(floor)).count()
}

/// SVD pseudoinverse with tolerance `max(dim) * eps * sigma_max`. Satisfies
/// the four defining equalities to roundoff for any rank.
pub fn dense_pinv(m: &DenseMatrix) -> Result<DenseMatrix> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(DenseMatrix::zeros(m.ncols(), m.nrows()));
    }
    let (u, sigma, v_t, tol) = svd_parts(m);
    let mut pinv = DMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in sigma.iter().enumerate() {
        if s <= tol {
            continue;
        }
        for i in 0..m.ncols() {
            for j in 0..m.nrows() {
                pinv[(i, j)] += v_t[(k, i)] * u[(j, k)] / s;
            }
        }
    }
    Ok(from_na(&pinv))
}

/// Minimal-norm least-squares solution `M^+ b`, the dense solve oracle.
pub fn min_norm_solve(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != m.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "oracle solve: rhs length {} != {} rows",
            b.len(),
            m.nrows()
        )));
    }
    let (u, sigma, v_t, tol) = svd_parts(m);
    let mut x = vec![0.0; m.ncols()];
    for (k, &s) in sigma.iter().enumerate() {
        if s <= tol {
            continue;
        }
        let ub: f64 = (0..m.nrows()).map(|i| u[(i, k)] * b[i]).sum();
        for (j, xj) in x.iter_mut().enumerate() {
            *xj += v_t[(k, j)] * ub / s;
        }
    }
    Ok(x)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(to_na(m));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Both sides of a rank identity and whether they agree.
#[derive(Debug, Clone, Copy)]
pub struct RankIdentity {
    pub lhs: usize,
    pub rhs: usize,
}

impl RankIdentity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

fn horiz_concat_dense(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.set(i, j, a.get(i, j));
        }
        for j in 0..b.ncols() {
            out.set(i, a.ncols() + j, b.get(i, j));
        }
    }
    out
}

/// rank([E F]) against rank(E) + rank((I - E E^+) F).
pub fn rank_join_identity(e: &DenseMatrix, f: &DenseMatrix) -> Result<RankIdentity> {
    if e.nrows() != f.nrows() {
        return Err(Error::DimensionMismatch(
            "rank join identity needs equal row counts".to_string(),
        ));
    }
    let lhs = rank(&horiz_concat_dense(e, f));
    let ee_pinv = e.matmul(&dense_pinv(e)?)?;
    let mut complement = ee_pinv;
    for i in 0..complement.nrows() {
        for j in 0..complement.ncols() {
            let unit = if i == j { 1.0 } else { 0.0 };
            complement.set(i, j, unit - complement.get(i, j));
        }
    }
    // The product is an earlier-computation residual; floor its rank
    // tolerance at roundoff scaled by the input magnitudes.
    let floor = 64.0 * f64::EPSILON * (1.0 + e.frobenius_norm()) * (1.0 + f.frobenius_norm());
    let rhs = rank(e) + rank_with_floor(&complement.matmul(f)?, floor);
    Ok(RankIdentity { lhs, rhs })
}

/// Rank report of the stacked basis `[U V]` with the intersection dimension
/// `dim U + dim V - rank([U V])` filled in.
pub fn subspace_intersection_report(
    basis_u: &DenseMatrix,
    basis_v: &DenseMatrix,
) -> Result<RankReport> {
    if basis_u.nrows() != basis_v.nrows() {
        return Err(Error::DimensionMismatch(
            "subspace bases must live in the same space".to_string(),
        ));
    }
    let dim_u = rank(basis_u);
    let dim_v = rank(basis_v);
    let mut report = rank_report(&horiz_concat_dense(basis_u, basis_v));
    report.intersection_dim = Some(dim_u + dim_v - report.rank);
    Ok(report)
}

/// Intersection dimension of two column spaces.
pub fn intersection_dim(basis_u: &DenseMatrix, basis_v: &DenseMatrix) -> Result<usize> {
    Ok(subspace_intersection_report(basis_u, basis_v)?
        .intersection_dim
        .expect("set by the query"))
}

/// Orthonormal basis of the null space of `M^T`, extracted from the
/// projector `I - M M^+` whose singular values are exactly zero or one: the
/// 0.5 threshold is unambiguous.
fn null_space_basis_t(m: &DenseMatrix) -> Result<DenseMatrix> {
    let mm_pinv = m.matmul(&dense_pinv(m)?)?;
    let dim = m.nrows();
    let mut complement = mm_pinv;
    for i in 0..dim {
        for j in 0..dim {
            let unit = if i == j { 1.0 } else { 0.0 };
            complement.set(i, j, unit - complement.get(i, j));
        }
    }
    let (u, sigma, _, _) = svd_parts(&complement);
    let kept: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] > 0.5).collect();
    let mut basis = DenseMatrix::zeros(dim, kept.len());
    for (col, &k) in kept.iter().enumerate() {
        for i in 0..dim {
            basis.set(i, col, u[(i, k)]);
        }
    }
    Ok(basis)
}

/// rank(E F) against rank(E) - dim(R(E^T) /\ N(F^T)).
pub fn rank_product_identity(e: &DenseMatrix, f: &DenseMatrix) -> Result<RankIdentity> {
    if e.ncols() != f.nrows() {
        return Err(Error::DimensionMismatch(
            "rank product identity needs conformal shapes".to_string(),
        ));
    }
    let lhs = rank(&e.matmul(f)?);
    let null_basis = null_space_basis_t(f)?;
    let inter = intersection_dim(&e.transpose(), &null_basis)?;
    Ok(RankIdentity {
        lhs,
        rhs: rank(e) - inter,
    })
}

/// Densified rank picture of one augmented system: how row-rank deficiency
/// of `Abar` relates to the rank of `W` and `S`. Purely observational; no
/// implication between the quantities is asserted.
#[derive(Debug, Clone)]
pub struct ConjectureProbe {
    pub m: usize,
    pub q: usize,
    pub rank_abar: usize,
    pub full_row_rank: bool,
    /// dim(R(Y^T) /\ R(Abar^T)).
    pub intersection_dim: usize,
    pub w_rank: usize,
    pub s_rank: usize,
    /// rank(S) = rank(W) = q - intersection_dim.
    pub chain_holds: bool,
    pub observations: Vec<String>,
}

/// Densify an augmented system (refusing past `cap` on the larger dimension)
/// and measure the rank chain.
pub fn conjecture_probe(aug: &AugmentedSystem, cap: usize) -> Result<ConjectureProbe> {
    let m = aug.nrows();
    let nbar = aug.nbar();
    let q = aug.q;
    if m.max(nbar) > cap {
        return Err(Error::TooLargeForDense {
            size: m.max(nbar),
            cap,
        });
    }

    let abar = DenseMatrix::from_sparse(&aug.abar);
    let abar_ranks = rank_report(&abar);
    let rank_abar = abar_ranks.rank;
    let full_row_rank = rank_abar == m;

    // Basis of R(Y^T): unit columns on the trailing q coordinates.
    let mut y_t = DenseMatrix::zeros(nbar, q);
    for j in 0..q {
        y_t.set(nbar - q + j, j, 1.0);
    }
    let inter = intersection_dim(&y_t, &abar.transpose())?;

    // W = Y (I - P) densely, P = Abar^+ Abar. W inherits roundoff of size
    // eps * cond(Abar) from the pseudoinverse while its honest singular
    // values sit in (0, 1], so its rank needs an absolute floor.
    let p = dense_pinv(&abar)?.matmul(&abar)?;
    let mut w = DenseMatrix::zeros(q, nbar);
    for i in 0..q {
        for j in 0..nbar {
            let unit = if nbar - q + i == j { 1.0 } else { 0.0 };
            w.set(i, j, unit - p.get(nbar - q + i, j));
        }
    }
    let cond_abar = if rank_abar > 0 {
        let smin = abar_ranks.singular_values[rank_abar - 1];
        abar_ranks.singular_values[0] / smin
    } else {
        1.0
    };
    let floor = 64.0 * f64::EPSILON * cond_abar;
    let w_rank = rank_with_floor(&w, floor);
    let s = w.matmul(&w.transpose())?;
    let s_rank = rank_with_floor(&s, floor);
    let chain_holds = s_rank == w_rank && w_rank == q - inter;

    let mut observations = Vec::new();
    if !full_row_rank {
        observations.push(format!(
            "rank-deficient case: rank(Abar) = {rank_abar} < {m}, intersection dim = {inter}, \
             rank(S) = {s_rank} of {q} (singular: {})",
            s_rank < q
        ));
    }
    if full_row_rank && s_rank < q {
        observations.push(format!(
            "converse counterexample candidate: Abar has full row rank but rank(S) = {s_rank} < {q}"
        ));
    }
    Ok(ConjectureProbe {
        m,
        q,
        rank_abar,
        full_row_rank,
        intersection_dim: inter,
        w_rank,
        s_rank,
        chain_holds,
        observations,
    })
}

// ---------------------------------------------------------------------------
// Random instance generation.

/// Sparse matrix with i.i.d. cell occupancy and uniform values in [-2, 2].
pub fn random_sparse(rng: &mut impl Rng, m: usize, n: usize, density: f64) -> SparseMatrix {
    let mut triplets = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.gen_bool(density) {
                let v = rng.gen_range(-2.0..2.0_f64);
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
    }
    SparseMatrix::from_triplets(m, n, triplets).expect("indices in range")
}

/// Sparse matrix with integer values in {-2, -1, 1, 2}; integer data keeps
/// ranks and subspace angles unambiguous under the SVD tolerance.
pub fn random_sparse_integer(rng: &mut impl Rng, m: usize, n: usize, density: f64) -> SparseMatrix {
    let mut triplets = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if rng.gen_bool(density) {
                let v = *[-2.0, -1.0, 1.0, 2.0_f64].get(rng.gen_range(0..4)).unwrap();
                triplets.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(m, n, triplets).expect("indices in range")
}

/// Dense matrix with integer entries in `[lo, hi]`, so ranks are unambiguous
/// under the SVD tolerance.
pub fn random_integer_matrix(
    rng: &mut impl Rng,
    rows: usize,
    cols: usize,
    lo: i64,
    hi: i64,
) -> DenseMatrix {
    let values = (0..rows * cols)
        .map(|_| rng.gen_range(lo..=hi) as f64)
        .collect();
    DenseMatrix::from_values(rows, cols, values).expect("sized to fit")
}

/// Random sparse m x n (m <= n) with a bumped diagonal, resampled until the
/// rank oracle confirms full row rank.
pub fn random_full_row_rank(rng: &mut impl Rng, m: usize, n: usize) -> SparseMatrix {
    assert!(m <= n, "full row rank generator needs m <= n");
    loop {
        let mut a = random_sparse(rng, m, n, 0.3);
        let mut triplets = a.entries().to_vec();
        for i in 0..m {
            triplets.push((i, i, 2.0 + rng.gen_range(0.0..1.0_f64)));
        }
        a = SparseMatrix::from_triplets(m, n, triplets).expect("in range");
        if rank(&DenseMatrix::from_sparse(&a)) == m {
            return a;
        }
    }
}

/// Random sparse overdetermined m x n (m > n) with full column rank.
pub fn random_full_col_rank(rng: &mut impl Rng, m: usize, n: usize) -> SparseMatrix {
    assert!(m > n, "full column rank generator needs m > n");
    loop {
        let mut a = random_sparse(rng, m, n, 0.3);
        let mut triplets = a.entries().to_vec();
        for j in 0..n {
            triplets.push((j, j, 2.0 + rng.gen_range(0.0..1.0_f64)));
        }
        a = SparseMatrix::from_triplets(m, n, triplets).expect("in range");
        if rank(&DenseMatrix::from_sparse(&a)) == n {
            return a;
        }
    }
}

/// Rank-deficient matrix built by duplicating a row of a random
/// integer-valued sparse matrix (retrying until the duplicated row is
/// nonzero).
pub fn random_rank_deficient(rng: &mut impl Rng, m: usize, n: usize) -> SparseMatrix {
    assert!(m >= 2);
    loop {
        let a = random_sparse_integer(rng, m, n, 0.4);
        let src = rng.gen_range(0..m);
        if a.row(src).is_empty() {
            continue;
        }
        let dst = (src + 1 + rng.gen_range(0..m - 1)) % m;
        let mut triplets: Vec<(usize, usize, f64)> = a
            .entries()
            .iter()
            .filter(|&&(r, _, _)| r != dst)
            .copied()
            .collect();
        triplets.extend(a.row(src).iter().map(|&(_, c, v)| (dst, c, v)));
        return SparseMatrix::from_triplets(m, n, triplets).expect("in range");
    }
}

// ---------------------------------------------------------------------------
// Verification suites.

/// Outcome of one randomized suite.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub observations: Vec<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn rel_err(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

/// The four pseudoinverse equalities on random small matrices, a third of
/// them forced rank-deficient.
pub fn penrose_suite(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for case in 0..cases {
        let rows = rng.gen_range(1..=8);
        let cols = rng.gen_range(1..=8);
        let mut m = random_integer_matrix(&mut rng, rows, cols, -3, 3);
        if case % 3 == 0 && rows >= 2 {
            // Duplicate a row to force rank deficiency.
            for j in 0..cols {
                let v = m.get(0, j);
                m.set(rows - 1, j, v);
            }
        }
        let pinv = dense_pinv(&m)?;
        let mpm = m.matmul(&pinv)?.matmul(&m)?;
        let pmp = pinv.matmul(&m)?.matmul(&pinv)?;
        let mp = m.matmul(&pinv)?;
        let pm = pinv.matmul(&m)?;
        let scale = m.frobenius_norm();
        let ok = rel_err(diff_norm(&mpm, &m), scale) <= 1e-10
            && rel_err(diff_norm(&pmp, &pinv), pinv.frobenius_norm()) <= 1e-10
            && rel_err(diff_norm(&mp, &mp.transpose()), 1.0) <= 1e-10
            && rel_err(diff_norm(&pm, &pm.transpose()), 1.0) <= 1e-10;
        if !ok {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "penrose_pinv",
        cases,
        failures,
        observations: Vec::new(),
    })
}

fn diff_norm(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let mut sum = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let d = a.get(i, j) - b.get(i, j);
            sum += d * d;
        }
    }
    sum.sqrt()
}

/// Join and product rank identities on random integer matrices.
pub fn rank_identity_suite(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..cases {
        let tau = rng.gen_range(1..=6);
        let mu = rng.gen_range(1..=6);
        let delta = rng.gen_range(1..=6);
        let e = random_integer_matrix(&mut rng, tau, mu, -2, 2);
        let f_join = random_integer_matrix(&mut rng, tau, delta, -2, 2);
        if !rank_join_identity(&e, &f_join)?.holds() {
            failures += 1;
        }
        let f_prod = random_integer_matrix(&mut rng, mu, delta, -2, 2);
        if !rank_product_identity(&e, &f_prod)?.holds() {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "rank_identities",
        cases: cases * 2,
        failures,
        observations: Vec::new(),
    })
}

/// Realize `M = [Abar; W]` and `N = [Abar^+ W^+]` as operators and check the
/// four pseudoinverse equalities on random probes, at 1e-9 relative.
pub fn stacked_operator_suite(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut total = 0;
    while total < cases {
        let m = rng.gen_range(2..=7);
        let n = rng.gen_range(m..=m + 4);
        let a = random_full_row_rank(&mut rng, m, n);
        let Ok(pipe) = Pipeline::build(&a, SolveMode::Consistent) else {
            continue;
        };
        let aug = &pipe.aug;
        let fact = &pipe.fact;
        let nbar = aug.nbar();
        let q = aug.q;
        let ncols_a = aug.a_cols;
        let schur = match assemble_s(fact, q) {
            Ok(s) => s,
            Err(Error::SingularSchur { .. }) => continue,
            Err(e) => return Err(e),
        };

        // M v = [Abar v; (v - P v) restricted to the trailing q coords].
        let apply_m = |v: &[f64]| -> Vec<f64> {
            let top = aug.abar.spmv(v).unwrap();
            let pv = apply_projector(fact, v).unwrap();
            let mut out = top;
            out.extend((0..q).map(|i| v[ncols_a + i] - pv[ncols_a + i]));
            out
        };
        // N [u; w] = Abar^+ u + (I - P) Y^T S^{-1} w.
        let apply_n = |uw: &[f64]| -> Vec<f64> {
            let (u, w) = uw.split_at(aug.nrows());
            let bv = BlockVector::from_bounds(u.to_vec(), &aug.row_bounds).unwrap();
            let mut out = apply_pinv(fact, &bv).unwrap();
            let sw = schur.solve(w);
            let mut t = vec![0.0; nbar];
            t[ncols_a..].copy_from_slice(&sw);
            let pt = apply_projector(fact, &t).unwrap();
            for i in 0..nbar {
                out[i] += t[i] - pt[i];
            }
            out
        };

        for _ in 0..4 {
            total += 1;
            let v: Vec<f64> = (0..nbar).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let uw: Vec<f64> = (0..aug.nrows() + q)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();

            let mv = apply_m(&v);
            let mnmv = apply_m(&apply_n(&mv));
            let nuw = apply_n(&uw);
            let nmnuw = apply_n(&apply_m(&nuw));
            // Symmetry of M N and N M through inner-product probes.
            let u2: Vec<f64> = (0..aug.nrows() + q)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let v2: Vec<f64> = (0..nbar).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mn_u = apply_m(&apply_n(&uw));
            let mn_u2 = apply_m(&apply_n(&u2));
            let nm_v = apply_n(&apply_m(&v));
            let nm_v2 = apply_n(&apply_m(&v2));

            let ok = rel_err(vec_diff(&mnmv, &mv), norm2(&mv)) <= 1e-9
                && rel_err(vec_diff(&nmnuw, &nuw), norm2(&nuw)) <= 1e-9
                && rel_err(
                    (dot(&mn_u, &u2) - dot(&uw, &mn_u2)).abs(),
                    norm2(&uw) * norm2(&u2),
                ) <= 1e-9
                && rel_err(
                    (dot(&nm_v, &v2) - dot(&v, &nm_v2)).abs(),
                    norm2(&v) * norm2(&v2),
                ) <= 1e-9;
            if !ok {
                failures += 1;
            }
        }
    }
    Ok(SuiteResult {
        name: "stacked_operator",
        cases: total,
        failures,
        observations: Vec::new(),
    })
}

fn vec_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Build `W` densely row by row and check `S = B B^T + S^2` with
/// `B = W[:, :n]` and `S = W[:, n:]`, at 1e-10 relative.
pub fn schur_identity_suite(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut total = 0;
    while total < cases {
        let m = rng.gen_range(2..=7);
        let n = rng.gen_range(2..=7);
        let a = random_sparse(&mut rng, m, n, 0.45);
        if a.nnz() == 0 {
            continue;
        }
        let Ok(pipe) = Pipeline::build(&a, SolveMode::Consistent) else {
            continue;
        };
        total += 1;
        let fact = &pipe.fact;
        let nbar = pipe.aug.nbar();
        let q = pipe.aug.q;
        let ncols_a = pipe.aug.a_cols;
        let mut w = DenseMatrix::zeros(q, nbar);
        for i in 0..q {
            let mut e = vec![0.0; nbar];
            e[ncols_a + i] = 1.0;
            let pe = apply_projector(fact, &e)?;
            for j in 0..nbar {
                let unit = if ncols_a + i == j { 1.0 } else { 0.0 };
                w.set(i, j, unit - pe[j]);
            }
        }
        let mut b_part = DenseMatrix::zeros(q, ncols_a);
        let mut s_part = DenseMatrix::zeros(q, q);
        for i in 0..q {
            for j in 0..ncols_a {
                b_part.set(i, j, w.get(i, j));
            }
            for j in 0..q {
                s_part.set(i, j, w.get(i, ncols_a + j));
            }
        }
        let bbt = b_part.matmul(&b_part.transpose())?;
        let ss = s_part.matmul(&s_part)?;
        let mut recomposed = bbt;
        for i in 0..q {
            for j in 0..q {
                recomposed.set(i, j, recomposed.get(i, j) + ss.get(i, j));
            }
        }
        if diff_norm(&recomposed, &s_part) > 1e-10 * s_part.frobenius_norm().max(1.0) {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "schur_identity",
        cases: total,
        failures,
        observations: Vec::new(),
    })
}

/// The rank chain on a mix of full-rank and rank-deficient instances.
pub fn rank_chain_suite(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut total = 0;
    while total < cases {
        let m = rng.gen_range(2..=6);
        let n = rng.gen_range(2..=6);
        let a = if total % 2 == 0 {
            random_sparse_integer(&mut rng, m, n, 0.5)
        } else {
            random_rank_deficient(&mut rng, m.max(2), n)
        };
        if a.nnz() == 0 {
            continue;
        }
        let Ok(pipe) = Pipeline::build(&a, SolveMode::Consistent) else {
            continue;
        };
        total += 1;
        let probe = conjecture_probe(&pipe.aug, 512)?;
        if !probe.chain_holds {
            failures += 1;
        }
    }
    Ok(SuiteResult {
        name: "rank_chain",
        cases: total,
        failures,
        observations: Vec::new(),
    })
}

/// Full-row-rank instances (m <= n) must always factor: S stays positive
/// definite and its smallest eigenvalue positive.
pub fn full_row_rank_suite(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..cases {
        let m = rng.gen_range(2..=9);
        let n = rng.gen_range(m..=m + 5);
        let a = random_full_row_rank(&mut rng, m, n);
        let pipe = match Pipeline::build(&a, SolveMode::Consistent) {
            Ok(p) => p,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        match assemble_s(&pipe.fact, pipe.aug.q) {
            Ok(schur) => {
                let min_eig = sym_eigenvalues(&schur.s)[0];
                if min_eig <= 0.0 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    Ok(SuiteResult {
        name: "full_row_rank_definiteness",
        cases,
        failures,
        observations: Vec::new(),
    })
}

/// Probe rank-deficient instances and record what happens to S; nothing is
/// asserted beyond the probe completing and its rank chain holding.
pub fn rank_deficient_probe_suite(cases: usize, seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut observations = Vec::new();
    let mut total = 0;
    while total < cases {
        let m = rng.gen_range(2..=6);
        let n = rng.gen_range(2..=6);
        let a = random_rank_deficient(&mut rng, m, n);
        if a.nnz() == 0 {
            continue;
        }
        let Ok(pipe) = Pipeline::build(&a, SolveMode::Consistent) else {
            continue;
        };
        total += 1;
        match conjecture_probe(&pipe.aug, 512) {
            Ok(probe) => {
                if !probe.chain_holds {
                    failures += 1;
                }
                observations.extend(probe.observations);
            }
            Err(_) => failures += 1,
        }
    }
    Ok(SuiteResult {
        name: "rank_deficient_probe",
        cases: total,
        failures,
        observations,
    })
}

/// Every suite at its standard size, in a fixed order.
pub fn run_all_suites(seed: u64) -> Result<Vec<SuiteResult>> {
    Ok(vec![
        penrose_suite(100, seed)?,
        rank_identity_suite(100, seed.wrapping_add(1))?,
        stacked_operator_suite(20, seed.wrapping_add(2))?,
        schur_identity_suite(20, seed.wrapping_add(3))?,
        rank_chain_suite(30, seed.wrapping_add(4))?,
        full_row_rank_suite(50, seed.wrapping_add(5))?,
        rank_deficient_probe_suite(20, seed.wrapping_add(6))?,
    ])
}
