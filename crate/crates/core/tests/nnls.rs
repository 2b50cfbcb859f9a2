use ccnmf_core::matrix::DenseMatrix;
use ccnmf_core::nnls::{kkt_violation, nnls_multi, nnls_multi_warm, nnls_single, oracle_nnls, BppConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn matrix(p: usize, q: usize, v: &[f64]) -> DenseMatrix {
    DenseMatrix::new(DMatrix::from_column_slice(p, q, v)).unwrap()
}

/// `(C, b)` with `p × q` uniform entries in `[-3, 3)`, `q ≤ 8`.
fn instance() -> impl Strategy<Value = (DenseMatrix, Vec<f64>)> {
    (1usize..=12, 1usize..=8).prop_flat_map(|(p, q)| {
        (prop::collection::vec(-3.0f64..3.0, p * q), prop::collection::vec(-3.0f64..3.0, p))
            .prop_map(move |(c, b)| (matrix(p, q, &c), b))
    })
}

fn objective(c: &DenseMatrix, b: &[f64], x: &[f64]) -> f64 {
    let r = c.as_dmatrix() * nalgebra::DVector::from_column_slice(x) - nalgebra::DVector::from_column_slice(b);
    r.norm_squared()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn single_matches_exhaustive_oracle((c, b) in instance()) {
        let sol = nnls_single(&c, &b, &BppConfig::default()).unwrap();
        let oracle = oracle_nnls(&c, &b).unwrap();
        prop_assert!((sol.objective - oracle.objective).abs() <= 1e-9 * (1.0 + oracle.objective));
        prop_assert!(sol.x.iter().all(|v| *v >= 0.0));
        prop_assert!((objective(&c, &b, &sol.x) - sol.objective).abs() <= 1e-9 * (1.0 + sol.objective));
    }

    #[test]
    fn single_satisfies_kkt((c, b) in instance()) {
        let sol = nnls_single(&c, &b, &BppConfig::default()).unwrap();
        prop_assert!(kkt_violation(&c, &b, &sol.x).unwrap() <= 1e-10);
    }

    #[test]
    fn exchange_rule_terminates_on_full_column_rank((c, b) in instance()) {
        // the exchange argument needs every free block to have full rank;
        // wide matrices may fall back to the active-set solver
        prop_assume!(c.rows() >= c.cols());
        let cfg = BppConfig { active_set_fallback: false, ..BppConfig::default() };
        let sol = nnls_single(&c, &b, &cfg).unwrap();
        prop_assert!(sol.iterations <= cfg.iteration_cap(c.cols()));
    }

    #[test]
    fn multi_matches_columnwise_single(
        (c, _) in instance(),
        cols in 1usize..6,
        seed in prop::collection::vec(-3.0f64..3.0, 72),
    ) {
        let p = c.rows();
        let b = DenseMatrix::new(DMatrix::from_fn(p, cols, |i, j| seed[(i * 6 + j) % seed.len()])).unwrap();
        let x = nnls_multi(&c, &b, &BppConfig::default()).unwrap();
        for j in 0..cols {
            let bj: Vec<f64> = b.column(j).iter().copied().collect();
            let single = nnls_single(&c, &bj, &BppConfig::default()).unwrap();
            let xj: Vec<f64> = x.column(j).iter().copied().collect();
            prop_assert!((objective(&c, &bj, &xj) - single.objective).abs() <= 1e-9 * (1.0 + single.objective));
        }
    }

    #[test]
    fn warm_start_does_not_change_the_optimum((c, b) in instance(), start in prop::collection::vec(any::<bool>(), 8)) {
        let q = c.cols();
        let free: Vec<usize> = (0..q).filter(|i| start[*i]).collect();
        let bm = matrix(b.len(), 1, &b);
        let warm = nnls_multi_warm(&c, &bm, &BppConfig::default(), &[free]).unwrap();
        let cold = nnls_single(&c, &b, &BppConfig::default()).unwrap();
        let xw: Vec<f64> = warm.x.column(0).iter().copied().collect();
        prop_assert!((objective(&c, &b, &xw) - cold.objective).abs() <= 1e-9 * (1.0 + cold.objective));
    }

    #[test]
    fn nonnegative_data_gives_zero_residual_on_own_columns(v in prop::collection::vec(0.01f64..2.0, 12), k in 0usize..3) {
        // b equal to a column of a nonnegative C is fitted exactly
        let c = matrix(4, 3, &v);
        let b: Vec<f64> = c.column(k).iter().copied().collect();
        let sol = nnls_single(&c, &b, &BppConfig::default()).unwrap();
        prop_assert!(sol.objective <= 1e-20);
    }
}

#[test]
fn scalar_least_squares_is_the_mean() {
    let c = matrix(2, 1, &[1.0, 1.0]);
    let sol = nnls_single(&c, &[1.0, 3.0], &BppConfig::default()).unwrap();
    assert!((sol.x[0] - 2.0).abs() < 1e-15);
}

#[test]
fn rank_deficient_duplicate_columns() {
    let c = matrix(3, 4, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 2.0, 0.0, 2.0]);
    let b = [2.0, 1.0, 2.0];
    let sol = nnls_single(&c, &b, &BppConfig::default()).unwrap();
    let oracle = oracle_nnls(&c, &b).unwrap();
    assert!((sol.objective - oracle.objective).abs() <= 1e-12);
    assert!(kkt_violation(&c, &b, &sol.x).unwrap() <= 1e-12);
}
