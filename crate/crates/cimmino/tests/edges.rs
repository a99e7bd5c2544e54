//! Edge-shaped inputs: degenerate dimensions, empty rows and columns, long
//! level chains, and rank-deficient least-squares behavior.

use cimmino::driver::{solve, Pipeline, SolveMode, SolveOptions};
use cimmino::error::Error;
use cimmino::sparse::{norm2, SparseMatrix};
use cimmino::verify;

fn mat(rows: &[Vec<f64>]) -> SparseMatrix {
    SparseMatrix::from_rows(rows).unwrap()
}

#[test]
fn one_by_one_system() {
    let a = mat(&[vec![3.0]]);
    let report = solve(&a, &[6.0], SolveMode::Consistent).unwrap();
    assert!((report.x[0] - 2.0).abs() < 1e-14);
    let lsq = solve(&a, &[6.0], SolveMode::LeastSquares).unwrap();
    assert!((lsq.x[0] - 2.0).abs() < 1e-12);
}

#[test]
fn single_row_gets_minimal_norm_solution() {
    // One row: x = A^T b / ||A||^2 is the minimal-norm solution.
    let a = mat(&[vec![1.0, 2.0, 0.0, -2.0]]);
    let report = solve(&a, &[9.0], SolveMode::Consistent).unwrap();
    let expect = [1.0, 2.0, 0.0, -2.0].map(|v| v * 9.0 / 9.0);
    for (x, e) in report.x.iter().zip(expect) {
        assert!((x - e).abs() < 1e-12, "{:?}", report.x);
    }
    assert!(report.residual_norm < 1e-12);
}

#[test]
fn single_column_least_squares() {
    let a = mat(&[vec![1.0], vec![2.0], vec![-1.0]]);
    let b = [1.0, 0.0, 1.0];
    let report = solve(&a, &b, SolveMode::LeastSquares).unwrap();
    // Normal equations: x = (A^T b) / (A^T A) = 0 / 6.
    assert!(report.x[0].abs() < 1e-13);
    assert!(report.normal_residual.unwrap() < 1e-12);
}

#[test]
fn empty_row_is_isolated_and_harmless_when_consistent() {
    let a = mat(&[vec![2.0, 0.0], vec![0.0, 0.0], vec![0.0, 3.0]]);
    let report = solve(&a, &[4.0, 0.0, 6.0], SolveMode::Consistent).unwrap();
    assert!((report.x[0] - 2.0).abs() < 1e-12);
    assert!((report.x[1] - 2.0).abs() < 1e-12);
    assert!(report.residual_norm < 1e-12);
    assert!(report.warnings.is_empty());
}

#[test]
fn empty_row_with_nonzero_rhs_warns() {
    let a = mat(&[vec![2.0, 0.0], vec![0.0, 0.0], vec![0.0, 3.0]]);
    let report = solve(&a, &[4.0, 1.0, 6.0], SolveMode::Consistent).unwrap();
    assert!(!report.warnings.is_empty());
    // The reachable part is still solved.
    assert!((report.x[0] - 2.0).abs() < 1e-12);
}

#[test]
fn empty_column_gets_zero_coefficient() {
    let a = mat(&[vec![1.0, 0.0, 2.0], vec![0.0, 0.0, 1.0]]);
    let report = solve(&a, &[3.0, 1.0], SolveMode::Consistent).unwrap();
    assert!(report.x[1].abs() < 1e-13, "{:?}", report.x);
    assert!(report.residual_norm < 1e-12);
}

#[test]
fn long_chain_exercises_deep_level_structures() {
    // Bidiagonal 8x8 chain: eight alternating levels in the consistent
    // path, sixteen in the augmented one.
    let n = 8;
    let mut triplets = Vec::new();
    for i in 0..n {
        triplets.push((i, i, 2.0));
        if i + 1 < n {
            triplets.push((i, i + 1, 1.0));
        }
    }
    let a = SparseMatrix::from_triplets(n, n, triplets).unwrap();
    let x_star: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
    let b = a.spmv(&x_star).unwrap();

    let report = solve(&a, &b, SolveMode::Consistent).unwrap();
    assert!(report.residual_norm <= 1e-10 * norm2(&b));
    // The system is square and nonsingular, so both modes agree.
    let lsq = solve(&a, &b, SolveMode::LeastSquares).unwrap();
    for (c, l) in report.x.iter().zip(&lsq.x) {
        assert!((c - l).abs() < 1e-9);
    }
    let pipe = Pipeline::build(&a, SolveMode::LeastSquares).unwrap();
    assert!(pipe.blocks.num_row_blocks() >= 8);
}

#[test]
fn duplicate_column_least_squares_is_singular_or_valid() {
    // Columns 0 and 1 coincide: the normal-equations solution set is a
    // line. The pipeline must either refuse (singular Gram matrix) or
    // return a genuine least-squares solution; never garbage.
    let a = mat(&[
        vec![1.0, 1.0, 0.0],
        vec![1.0, 1.0, 2.0],
        vec![0.0, 0.0, 1.0],
        vec![2.0, 2.0, 1.0],
    ]);
    let b = [1.0, -1.0, 0.5, 2.0];
    match solve(&a, &b, SolveMode::LeastSquares) {
        Ok(report) => {
            let ax = a.spmv(&report.x).unwrap();
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bb, y)| bb - y).collect();
            assert!(norm2(&a.spmv_t(&r).unwrap()) <= 1e-8 * (1.0 + norm2(&b)));
        }
        Err(Error::SingularSchur { .. }) => {}
        Err(e) => panic!("unexpected error: {e}"),
    }
}

#[test]
fn wide_matrix_least_squares_is_singular_or_valid() {
    // More columns than rows: the augmented adjacency is always singular,
    // so the embedded solve may fail with SingularSchur; if it goes
    // through, the result must satisfy the normal equations.
    let a = mat(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, -1.0]]);
    let b = [1.0, 2.0];
    match solve(&a, &b, SolveMode::LeastSquares) {
        Ok(report) => {
            let ax = a.spmv(&report.x).unwrap();
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bb, y)| bb - y).collect();
            assert!(norm2(&a.spmv_t(&r).unwrap()) <= 1e-8 * (1.0 + norm2(&b)));
        }
        Err(Error::SingularSchur { .. }) => {}
        Err(e) => panic!("unexpected error: {e}"),
    }
}

#[test]
fn dense_block_matrix_solves() {
    // Fully dense, diagonally dominant 10x10: Cuthill-McKee collapses to a
    // couple of fat levels, so one block carries almost the whole matrix.
    let n = 10;
    let mut rows = Vec::new();
    for i in 0..n {
        rows.push(
            (0..n)
                .map(|j| {
                    let base = (0.3 * i as f64 - 0.7 * j as f64).sin();
                    if i == j {
                        base + 4.0
                    } else {
                        base
                    }
                })
                .collect::<Vec<f64>>(),
        );
    }
    let a = mat(&rows);
    let x_star: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
    let b = a.spmv(&x_star).unwrap();
    let report = solve(&a, &b, SolveMode::Consistent).unwrap();
    assert!(
        report.residual_norm <= 1e-8 * norm2(&b),
        "residual {}",
        report.residual_norm
    );
}

#[test]
fn options_tolerance_controls_warning() {
    let a = mat(&[vec![1.0], vec![1.0]]);
    let pipe = Pipeline::build(&a, SolveMode::Consistent).unwrap();
    // b slightly off the range: warning under a tight tolerance only.
    let b = [1.0, 1.0 + 1e-6];
    let tight = pipe
        .solve(
            &b,
            &SolveOptions {
                consistency_tol: 1e-9,
            },
        )
        .unwrap();
    assert!(!tight.warnings.is_empty());
    let loose = pipe
        .solve(
            &b,
            &SolveOptions {
                consistency_tol: 1e-3,
            },
        )
        .unwrap();
    assert!(loose.warnings.is_empty());
}

#[test]
fn random_tall_systems_with_empty_rows_and_columns() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let m = rng.gen_range(4..=20);
        let n = rng.gen_range(4..=20);
        // Sparse enough that empty rows and columns are likely.
        let a = verify::random_sparse(&mut rng, m, n, 0.08);
        let x_star: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = a.spmv(&x_star).unwrap();
        match solve(&a, &b, SolveMode::Consistent) {
            Ok(report) => {
                assert!(
                    report.residual_norm <= 1e-9 * norm2(&b).max(1e-12),
                    "residual {} vs b {}",
                    report.residual_norm,
                    norm2(&b)
                );
            }
            Err(Error::SingularSchur { .. }) => {} // rank-deficient draw
            Err(e) => panic!("unexpected error: {e}"),
        }
    }
}

#[test]
fn zero_matrix_behaves_in_both_modes() {
    let a = SparseMatrix::zeros(2, 2);
    // Consistent mode: x = 0 with the full right-hand side left as residual,
    // flagged as inconsistent.
    let report = solve(&a, &[1.0, -1.0], SolveMode::Consistent).unwrap();
    assert_eq!(report.x, vec![0.0, 0.0]);
    assert!((report.residual_norm - 2.0f64.sqrt()).abs() < 1e-14);
    assert!(!report.warnings.is_empty());
    // Least-squares mode: x = 0 is the minimal-norm minimizer, r = b.
    let lsq = solve(&a, &[1.0, -1.0], SolveMode::LeastSquares).unwrap();
    assert!(norm2(&lsq.x) < 1e-13);
    let r = lsq.residual.as_ref().unwrap();
    assert!((r[0] - 1.0).abs() < 1e-13 && (r[1] + 1.0).abs() < 1e-13);
    assert!(lsq.normal_residual.unwrap() < 1e-13);
}

#[test]
fn uniformly_scaled_data_keeps_relative_accuracy() {
    // Everything in the pipeline is tolerance-relative, so rescaling the
    // matrix must not change relative residuals.
    let base = mat(&[
        vec![2.0, 0.0, 1.0, 0.0],
        vec![1.0, 1.0, 0.0, 0.0],
        vec![0.0, 3.0, 1.0, 2.0],
    ]);
    for scale in [1e-8, 1.0, 1e8] {
        let scaled = SparseMatrix::from_triplets(
            base.nrows(),
            base.ncols(),
            base.entries()
                .iter()
                .map(|&(i, j, v)| (i, j, v * scale))
                .collect(),
        )
        .unwrap();
        let x_star = [1.0, -1.0, 2.0, 0.5];
        let b = scaled.spmv(&x_star).unwrap();
        let report = solve(&scaled, &b, SolveMode::Consistent).unwrap();
        assert!(
            report.residual_norm <= 1e-11 * norm2(&b),
            "scale {scale:e}: rel residual {}",
            report.residual_norm / norm2(&b)
        );
        assert!(report.warnings.is_empty(), "scale {scale:e}");
    }
}

#[test]
fn mixed_row_scales_stay_within_tolerance() {
    // Rows eight orders of magnitude apart: each block is factored on its
    // own scale, so the solve should stay accurate relative to b.
    let a = mat(&[
        vec![2.0e8, 0.0, 1.0e8],
        vec![1.0e-4, 1.0e-4, 0.0],
        vec![0.0, 3.0e2, 1.0e2],
    ]);
    let x_star = [1.0, -1.0, 2.0];
    let b = a.spmv(&x_star).unwrap();
    let report = solve(&a, &b, SolveMode::Consistent).unwrap();
    let ax = a.spmv(&report.x).unwrap();
    // Componentwise relative check: each equation is satisfied on its own
    // scale.
    for ((axi, bi), row) in ax.iter().zip(&b).zip(0..) {
        let row_scale: f64 = a.row(row).iter().map(|e| e.2.abs()).sum();
        assert!(
            (axi - bi).abs() <= 1e-9 * row_scale * 3.0,
            "row {row}: {axi} vs {bi}"
        );
    }
}
