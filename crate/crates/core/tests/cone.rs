use ccnmf_core::cone::{
    c1_shortcut, collapse, is_frozen, mean_tilt, prune_redundant, CollapseConfig, Collapser, RayBasis, StepOutcome,
};
use ccnmf_core::matrix::{cosine, dot, mean_direction, normalize, relative_residual_norms, DenseMatrix};
use ccnmf_core::nnls::{nnls_multi, BppConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn nonneg_unit(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, d)
        .prop_filter("nonzero", |v| v.iter().any(|x| *x > 1e-3))
        .prop_map(|v| normalize(&v).unwrap().into_vec())
}

/// Rays with a unit entry on distinct axes and off-axis entries below 0.2,
/// which keeps every ray extreme for up to five rays.
fn cone_instance() -> impl Strategy<Value = (Vec<Vec<f64>>, DenseMatrix)> {
    (2usize..=5, 5usize..=7).prop_flat_map(|(c, d)| {
        (
            prop::collection::vec(prop::collection::vec(0.0f64..0.2, d), c),
            prop::collection::vec(0.5f64..2.0, 2 * c),
            prop::collection::vec(prop::collection::vec(0.0f64..1.0, c), 6),
        )
            .prop_map(move |(off, scales, weights)| {
                let rays: Vec<Vec<f64>> = off
                    .into_iter()
                    .enumerate()
                    .map(|(k, mut v)| {
                        v[k] = 1.0;
                        normalize(&v).unwrap().into_vec()
                    })
                    .collect();
                let mut cols: Vec<Vec<f64>> = Vec::new();
                for (k, r) in rays.iter().enumerate() {
                    for s in &scales[2 * k..2 * k + 2] {
                        cols.push(r.iter().map(|v| v * s).collect());
                    }
                }
                for w in &weights {
                    let mut p = vec![0.0; d];
                    for (wk, r) in w.iter().zip(&rays) {
                        for (pi, ri) in p.iter_mut().zip(r) {
                            *pi += (0.05 + wk) * ri;
                        }
                    }
                    cols.push(p);
                }
                (rays, DenseMatrix::from_columns(&cols).unwrap())
            })
    })
}

fn residuals(points: &DenseMatrix, basis: &RayBasis) -> Vec<f64> {
    let u = DenseMatrix::new(basis.to_matrix()).unwrap();
    let h = nnls_multi(&u, points, &BppConfig { feasibility_tol: 1e-15, ..BppConfig::default() }).unwrap();
    relative_residual_norms(points, &u, &h).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn tilt_strictly_increases_cosine(
        u in nonneg_unit(6),
        mu in nonneg_unit(6),
        k in 0usize..4,
    ) {
        let eta = [0.1, 0.25, 0.5, 0.9][k];
        let before = dot(&u, &mu);
        prop_assume!(before < 1.0 - 1e-9);
        let t = mean_tilt(&u, &mu, eta).unwrap();
        prop_assert!(dot(&t, &mu) > before);
        prop_assert!(t.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn cap_is_closed_under_conic_combinations(
        mu in nonneg_unit(5),
        bs in prop::collection::vec(nonneg_unit(5), 2..6),
        w in prop::collection::vec(0.0f64..1.0, 6),
    ) {
        prop_assume!(w.iter().take(bs.len()).any(|x| *x > 1e-6));
        let alpha = bs.iter().map(|b| dot(b, &mu)).fold(f64::INFINITY, f64::min);
        let mut s = vec![0.0; 5];
        for (b, wi) in bs.iter().zip(&w) {
            for (si, bi) in s.iter_mut().zip(b) {
                *si += wi * bi;
            }
        }
        prop_assert!(cosine(&s, &mu).unwrap() >= alpha - 1e-12);
    }

    #[test]
    fn cosine_is_scale_invariant_and_bounded(a in nonneg_unit(4), b in nonneg_unit(4), s in 0.01f64..100.0, t in 0.01f64..100.0) {
        let sa: Vec<f64> = a.iter().map(|v| v * s).collect();
        let tb: Vec<f64> = b.iter().map(|v| v * t).collect();
        let c = cosine(&a, &b).unwrap();
        prop_assert!((cosine(&sa, &tb).unwrap() - c).abs() <= 1e-12);
        prop_assert!((cosine(&b, &a).unwrap() - c).abs() <= 1e-15);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&c));
        let n = normalize(&sa).unwrap();
        prop_assert!((normalize(&n).unwrap().as_slice().iter().zip(n.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn collapse_recovers_planted_rays((rays, points) in cone_instance()) {
        let cfg = CollapseConfig::default();
        let (basis, trace) = collapse(&points, &cfg).unwrap();
        prop_assert_eq!(basis.len(), rays.len());
        for r in &rays {
            prop_assert!(basis.rays().iter().any(|b| dot(b, r) >= 1.0 - 1e-6));
        }
        for rec in &trace.records {
            prop_assert!(rec.max_relative_residual <= cfg.epsilon);
        }
        prop_assert!(residuals(&points, &basis).iter().all(|r| *r <= cfg.epsilon));
    }

    #[test]
    fn mean_is_not_an_extreme_ray((rays, points) in cone_instance()) {
        let mu = mean_direction(&points).unwrap();
        for r in &rays {
            prop_assert!(dot(&mu, r) < 1.0 - CollapseConfig::default().delta_cos);
        }
    }

    #[test]
    fn frozen_rays_are_never_tilted((_, points) in cone_instance()) {
        let cfg = CollapseConfig::default();
        let mut state = Collapser::new(&points, cfg).unwrap();
        loop {
            let frozen: Vec<Vec<f64>> = state
                .rays()
                .iter()
                .filter(|u| is_frozen(u, &points, cfg.delta_cos))
                .cloned()
                .collect();
            let outcome = state.step().unwrap();
            for f in &frozen {
                // either kept bit for bit or pruned, never moved
                let moved = state.rays().iter().any(|u| u != f && dot(u, f) >= 1.0 - 1e-15);
                prop_assert!(!moved);
            }
            if outcome == StepOutcome::Converged {
                break;
            }
        }
    }

    #[test]
    fn pruning_keeps_every_point_inside((rays, points) in cone_instance()) {
        // the planted rays plus the data directions themselves: heavily redundant
        let mut all: Vec<_> = rays.iter().map(|r| normalize(r).unwrap()).collect();
        all.extend((0..points.cols()).map(|j| normalize(points.col_slice(j)).unwrap()));
        let basis = RayBasis::new(points.rows(), all).unwrap();
        let pruned = prune_redundant(&basis, 1e-8, &BppConfig { feasibility_tol: 1e-15, ..BppConfig::default() }).unwrap();
        prop_assert!(pruned.len() <= basis.len());
        prop_assert!(residuals(&points, &pruned).iter().all(|r| *r <= 1e-8));
    }
}

#[test]
fn shortcut_examples() {
    let colinear = DMatrix::from_column_slice(2, 2, &[1.0, 2.0, 3.0, 6.0]);
    let u = c1_shortcut(&colinear, 1e-10).unwrap();
    assert!((u[0] - 1.0 / 5f64.sqrt()).abs() < 1e-12 && (u[1] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    assert!(c1_shortcut(&DMatrix::identity(2, 2), 1e-10).is_none());
    assert_eq!(c1_shortcut(&DMatrix::from_column_slice(2, 1, &[5.0, 0.0]), 1e-10).unwrap().as_slice(), [1.0, 0.0]);
}

#[test]
fn orthant_corners_are_recovered() {
    let points = DenseMatrix::new(DMatrix::from_column_slice(
        3,
        4,
        &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0, 1.0, 1.0, 1.0],
    ))
    .unwrap();
    let (basis, _) = collapse(&points, &CollapseConfig::default()).unwrap();
    assert_eq!(basis.len(), 3);
    for e in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]] {
        assert!(basis.find_colinear(&e, 1e-9).is_some());
    }
}

#[test]
fn collapse_is_deterministic() {
    let points = DenseMatrix::new(DMatrix::from_fn(4, 9, |i, j| ((i * 7 + j * 3) % 5) as f64 + 0.5)).unwrap();
    let a = collapse(&points, &CollapseConfig::default()).unwrap();
    let b = collapse(&points, &CollapseConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn mean_on_a_data_point_does_not_leave_duplicates() {
    // the third point is the sum of the other two and so lies on the mean;
    // every free ray converges onto it
    let points = DenseMatrix::new(DMatrix::from_column_slice(
        4,
        3,
        &[1.0, 2.0, 0.0, 1.0, 0.0, 1.0, 3.0, 2.0, 1.0, 3.0, 3.0, 3.0],
    ))
    .unwrap();
    let (basis, _) = collapse(&points, &CollapseConfig::default()).unwrap();
    assert_eq!(basis.len(), 2);
    for j in 0..2 {
        assert!(basis.find_colinear(points.col_slice(j), 1e-12).is_some());
    }
}
