//! Property tests for the sparse containers, the Matrix Market codec, and
//! the reordering machinery.

use cimmino::dense::DenseMatrix;
use cimmino::graph::{
    build_augmented_adjacency, build_bipartite, cuthill_mckee, derive_permutations,
    reorder_augmented,
};
use cimmino::market::{read_from, write_to};
use cimmino::sparse::{norm2, Permutation, SparseMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sparse_matrix(max_dim: usize) -> impl Strategy<Value = SparseMatrix> {
    (1..=max_dim, 1..=max_dim)
        .prop_flat_map(|(m, n)| {
            let entry = (0..m, 0..n, -10.0..10.0f64);
            (
                Just(m),
                Just(n),
                prop::collection::vec(entry, 0..=2 * m * n.min(6)),
            )
        })
        .prop_map(|(m, n, trips)| SparseMatrix::from_triplets(m, n, trips).unwrap())
}

fn random_permutation(n: usize, seed: u64) -> Permutation {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Permutation::from_new_order(&order).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matrix_market_roundtrip(a in sparse_matrix(8)) {
        let mut buf = Vec::new();
        write_to(&mut buf, &a).unwrap();
        let back = read_from(std::io::Cursor::new(buf)).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn permutation_preserves_values_and_norm(a in sparse_matrix(8), seed in 0u64..1000) {
        let rp = random_permutation(a.nrows(), seed);
        let cp = random_permutation(a.ncols(), seed.wrapping_add(1));
        let b = a.permute(&rp, &cp).unwrap();

        let mut va: Vec<f64> = a.entries().iter().map(|e| e.2).collect();
        let mut vb: Vec<f64> = b.entries().iter().map(|e| e.2).collect();
        va.sort_by(|x, y| x.partial_cmp(y).unwrap());
        vb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assert_eq!(va, vb);

        let diff = (a.frobenius_norm() - b.frobenius_norm()).abs();
        prop_assert!(diff <= 4.0 * f64::EPSILON * a.frobenius_norm());

        let back = b.permute(&rp.inverse(), &cp.inverse()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn spmv_matches_dense_oracle(a in sparse_matrix(10), seed in 0u64..1000) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..a.ncols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xt: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dense = DenseMatrix::from_sparse(&a);

        let y = a.spmv(&x).unwrap();
        let y_oracle = dense.matvec(&x).unwrap();
        let tol = 4.0 * f64::EPSILON * a.frobenius_norm() * norm2(&x);
        for (s, o) in y.iter().zip(&y_oracle) {
            prop_assert!((s - o).abs() <= tol, "spmv {s} vs {o}");
        }

        let yt = a.spmv_t(&xt).unwrap();
        let yt_oracle = dense.matvec_t(&xt).unwrap();
        let tol_t = 4.0 * f64::EPSILON * a.frobenius_norm() * norm2(&xt);
        for (s, o) in yt.iter().zip(&yt_oracle) {
            prop_assert!((s - o).abs() <= tol_t, "spmv_t {s} vs {o}");
        }
    }

    #[test]
    fn cuthill_mckee_level_invariants(a in sparse_matrix(12)) {
        let levels = cuthill_mckee(&build_bipartite(&a)).unwrap();
        levels.verify_coverage().unwrap();
        levels.verify_alternation().unwrap();

        // Row levels cover m nodes, column levels cover n.
        let (mut rows, mut cols) = (0usize, 0usize);
        for level in &levels.levels {
            match level.kind {
                cimmino::graph::NodeKind::Row => rows += level.nodes.len(),
                cimmino::graph::NodeKind::Col => cols += level.nodes.len(),
            }
        }
        prop_assert_eq!(rows, a.nrows());
        prop_assert_eq!(cols, a.ncols());

        // Deterministic: a second run reproduces the labeling.
        let again = cuthill_mckee(&build_bipartite(&a)).unwrap();
        prop_assert_eq!(levels.new_order(), again.new_order());
    }

    #[test]
    fn reordered_matrix_is_block_bidiagonal(a in sparse_matrix(12)) {
        let levels = cuthill_mckee(&build_bipartite(&a)).unwrap();
        let (rp, cp, blocks) = derive_permutations(&levels, a.nrows(), a.ncols()).unwrap();
        let ar = a.permute(&rp, &cp).unwrap();
        blocks.verify_structure(&ar).unwrap();
    }

    #[test]
    fn augmented_adjacency_reorders_tridiagonal(a in sparse_matrix(8)) {
        let h = build_augmented_adjacency(&a);
        prop_assert!(h.is_symmetric());
        // reorder_augmented verifies the tridiagonal pattern and the
        // identity/zero diagonal alternation internally.
        let (perm, ahat, blocks) = reorder_augmented(&h).unwrap();
        prop_assert_eq!(blocks.num_row_blocks(), blocks.num_col_blocks());
        let back = ahat.permute(&perm.inverse(), &perm.inverse()).unwrap();
        prop_assert_eq!(back, h);
    }
}
