//! Exhaustive sweep over every zero/nonzero pattern of small matrices.
//!
//! Randomized suites sample; these loops enumerate. Every 3x3 pattern (512
//! of them, including empty rows and columns and all disconnection shapes)
//! goes through both pipelines, with structure verification implied by the
//! builders and solve results checked against dense oracles.

use cimmino::dense::DenseMatrix;
use cimmino::driver::{Pipeline, SolveMode, SolveOptions};
use cimmino::error::Error;
use cimmino::sparse::{norm2, SparseMatrix};
use cimmino::verify;

fn pattern_matrix(mask: u32, m: usize, n: usize) -> SparseMatrix {
    let mut triplets = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if mask & (1 << (i * n + j)) != 0 {
                // Distinct values keep the instance away from accidental
                // symmetry while staying exactly representable.
                let v = 1.0 + 0.5 * (i * n + j) as f64;
                triplets.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(m, n, triplets).unwrap()
}

#[test]
fn every_3x3_pattern_through_the_consistent_pipeline() {
    let opts = SolveOptions::default();
    for mask in 1u32..512 {
        let a = pattern_matrix(mask, 3, 3);
        let pipe = Pipeline::build(&a, SolveMode::Consistent)
            .unwrap_or_else(|e| panic!("mask {mask:#b}: build failed: {e}"));

        // Manufactured consistent right-hand side.
        let x_star = [1.0, -2.0, 0.5];
        let b = a.spmv(&x_star).unwrap();
        match pipe.solve(&b, &opts) {
            Ok(report) => {
                assert!(
                    report.residual_norm <= 1e-10 * norm2(&b).max(1e-12),
                    "mask {mask:#b}: residual {}",
                    report.residual_norm
                );
                assert!(
                    report.y_norm <= 1e-10 * (1.0 + norm2(&report.x)),
                    "mask {mask:#b}: y norm {}",
                    report.y_norm
                );
                assert!(
                    report.warnings.is_empty(),
                    "mask {mask:#b}: {:?}",
                    report.warnings
                );
            }
            // Rank-deficient patterns may make S singular; that refusal is
            // part of the contract. The rank chain must still hold.
            Err(Error::SingularSchur { .. }) => {
                let probe = verify::conjecture_probe(&pipe.aug, 64).unwrap();
                assert!(probe.chain_holds, "mask {mask:#b}: rank chain broken");
                assert!(
                    probe.s_rank < probe.q,
                    "mask {mask:#b}: solver refused an invertible S"
                );
            }
            Err(e) => panic!("mask {mask:#b}: unexpected error {e}"),
        }
    }
}

#[test]
fn every_3x2_pattern_through_the_least_squares_pipeline() {
    let opts = SolveOptions::default();
    let b = [1.0, -1.0, 2.0];
    for mask in 1u32..64 {
        let a = pattern_matrix(mask, 3, 2);
        let pipe = Pipeline::build(&a, SolveMode::LeastSquares)
            .unwrap_or_else(|e| panic!("mask {mask:#b}: build failed: {e}"));
        match pipe.solve(&b, &opts) {
            Ok(report) => {
                // Any accepted answer must satisfy the normal equations.
                let ax = a.spmv(&report.x).unwrap();
                let r: Vec<f64> = b.iter().zip(&ax).map(|(bb, y)| bb - y).collect();
                let normal = norm2(&a.spmv_t(&r).unwrap());
                assert!(
                    normal <= 1e-9 * (1.0 + a.frobenius_norm() * norm2(&b)),
                    "mask {mask:#b}: normal residual {normal}"
                );
                // Full column rank: unique minimizer, compare to the oracle.
                let dense = DenseMatrix::from_sparse(&a);
                if verify::rank(&dense) == 2 {
                    let oracle = verify::min_norm_solve(&dense, &b).unwrap();
                    let diff: Vec<f64> =
                        report.x.iter().zip(&oracle).map(|(x, o)| x - o).collect();
                    assert!(
                        norm2(&diff) <= 1e-9 * (1.0 + norm2(&oracle)),
                        "mask {mask:#b}: {:?} vs oracle {:?}",
                        report.x,
                        oracle
                    );
                }
            }
            Err(Error::SingularSchur { .. }) => {
                // Acceptable only when the matrix is genuinely column-rank
                // deficient.
                let rank = verify::rank(&DenseMatrix::from_sparse(&a));
                assert!(rank < 2, "mask {mask:#b}: refused a full-rank problem");
            }
            Err(e) => panic!("mask {mask:#b}: unexpected error {e}"),
        }
    }
}

#[test]
fn every_2x4_pattern_keeps_blocks_orthogonal() {
    use cimmino::augment::{max_block_frobenius, orthogonality_error};
    for mask in 1u32..256 {
        let a = pattern_matrix(mask, 2, 4);
        let pipe = Pipeline::build(&a, SolveMode::Consistent).unwrap();
        let err = orthogonality_error(&pipe.aug);
        let bound = 1e-12 * max_block_frobenius(&pipe.aug);
        assert!(err <= bound, "mask {mask:#b}: {err} > {bound}");
    }
}
