mod common;

use common::{gaussian, low_rank, max_abs_diff, norm, rng};
use penreg::linalg::{min_norm_solve, pinv, projector, svd, ProjectorKind};
use penreg::Matrix;
use proptest::prelude::*;

fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
    a.shape() == b.shape() && a.max_abs_diff(b) <= tol
}

#[test]
fn small_pseudoinverse_examples() {
    let p = pinv(&m(&[&[1.0], &[2.0]]), 0.0).unwrap();
    assert!(close(&p, &m(&[&[0.2, 0.4]]), 1e-12));
    let p = pinv(&m(&[&[1.0, 1.0], &[1.0, 1.0]]), 0.0).unwrap();
    assert!(close(&p, &m(&[&[0.25, 0.25], &[0.25, 0.25]]), 1e-12));
    let a = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
    assert!(close(&pinv(&a, 0.0).unwrap(), &a, 1e-12));
}

#[test]
fn projector_examples() {
    let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
    let r = projector(&a, ProjectorKind::RangeXt, 0.0).unwrap();
    assert!(close(&r, &m(&[&[0.2, 0.4], &[0.4, 0.8]]), 1e-12));
    let k = projector(&a, ProjectorKind::KerX, 0.0).unwrap();
    assert!(close(&k, &m(&[&[0.8, -0.4], &[-0.4, 0.2]]), 1e-12));
    let inv = m(&[&[2.0, 1.0], &[0.5, 3.0]]);
    assert!(close(&projector(&inv, ProjectorKind::RangeX, 0.0).unwrap(), &Matrix::identity(2), 1e-12));
}

#[test]
fn min_norm_examples() {
    let t = min_norm_solve(&m(&[&[1.0, 2.0], &[2.0, 4.0]]), &[1.0, 2.0], 0.0).unwrap();
    assert!(max_abs_diff(&t, &[0.2, 0.4]) <= 1e-12);
    let t = min_norm_solve(&Matrix::identity(2), &[7.0, -3.0], 0.0).unwrap();
    assert!(max_abs_diff(&t, &[7.0, -3.0]) <= 1e-12);
    assert!(min_norm_solve(&Matrix::identity(2), &[1.0], 0.0).is_err());
}

#[test]
fn min_norm_grid_oracle() {
    // Brute force over a grid: minimize ||A t - b|| first, then ||t||.
    let a = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
    let b = [1.0, 1.0];
    let mut best = (f64::INFINITY, f64::INFINITY, [0.0, 0.0]);
    for i in -40..=40 {
        for j in -40..=40 {
            let t = [i as f64 / 20.0, j as f64 / 20.0];
            let r = a.matvec(&t).unwrap();
            let res = (r[0] - b[0]).powi(2) + (r[1] - b[1]).powi(2);
            let nt = norm(&t);
            if res < best.0 - 1e-12 || ((res - best.0).abs() <= 1e-12 && nt < best.1) {
                best = (res, nt, t);
            }
        }
    }
    let t = min_norm_solve(&a, &b, 0.0).unwrap();
    assert!(max_abs_diff(&t, &best.2) <= 1e-12);
    assert!(max_abs_diff(&t, &[1.0, 0.0]) <= 1e-12);
}

#[test]
fn svd_examples() {
    let f = svd(&Matrix::identity(2), 0.0).unwrap();
    assert_eq!((f.singular_values.clone(), f.rank), (vec![1.0, 1.0], 2));
    let f = svd(&Matrix::diag(&[3.0, 0.0]), 0.0).unwrap();
    assert_eq!(f.rank, 1);
    assert!(max_abs_diff(&f.singular_values, &[3.0, 0.0]) < 1e-15);
    let f = svd(&m(&[&[1.0, 2.0], &[2.0, 4.0]]), 0.0).unwrap();
    assert_eq!(f.rank, 1);
    assert!(max_abs_diff(&f.singular_values, &[5.0, 0.0]) < 1e-12);
    assert!(svd(&m(&[&[1.0]]), -1.0).is_err());
}

fn dims() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (1usize..=8, 1usize..=8, 1usize..=8, any::<u64>())
}

fn sample((n, p, r, seed): (usize, usize, usize, u64)) -> Matrix {
    let mut g = rng(seed);
    if r >= n.min(p) {
        gaussian(&mut g, n, p)
    } else {
        low_rank(&mut g, n, p, r)
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn svd_invariants(d in dims()) {
        let a = sample(d);
        let f = svd(&a, 0.0).unwrap();
        let (n, p) = a.shape();
        prop_assert!(close(&f.u.transpose().matmul(&f.u).unwrap(), &Matrix::identity(n), 1e-10));
        prop_assert!(close(&f.v.transpose().matmul(&f.v).unwrap(), &Matrix::identity(p), 1e-10));
        prop_assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(f.singular_values.iter().all(|&s| s >= 0.0));
        prop_assert_eq!(f.rank, f.singular_values.iter().filter(|&&s| s > f.tol).count());
        prop_assert!(close(&f.reconstruct(), &a, 1e-10 * f.largest().max(1e-300)));
        prop_assert_eq!(f.rank, d.2.min(n).min(p));
        // deterministic
        prop_assert_eq!(svd(&a, 0.0).unwrap(), f);
    }

    #[test]
    fn penrose_conditions(d in dims()) {
        let a = sample(d);
        let pi = pinv(&a, 0.0).unwrap();
        // Entry scales: M ~ |M|, P ~ |P|; products inherit them.
        let sa = a.max_abs().max(1.0);
        let sp = pi.max_abs().max(1.0);
        let ap = a.matmul(&pi).unwrap();
        let pa = pi.matmul(&a).unwrap();
        prop_assert!(close(&ap.matmul(&a).unwrap(), &a, 1e-9 * sa));
        prop_assert!(close(&pa.matmul(&pi).unwrap(), &pi, 1e-9 * sp * sp * sa));
        prop_assert!(close(&ap.transpose(), &ap, 1e-9 * sa * sp));
        prop_assert!(close(&pa.transpose(), &pa, 1e-9 * sa * sp));
        prop_assert_eq!(svd(&pi, 0.0).unwrap().rank, svd(&a, 0.0).unwrap().rank);
    }

    #[test]
    fn pinv_is_an_involution(d in dims()) {
        let a = sample(d);
        let back = pinv(&pinv(&a, 0.0).unwrap(), 0.0).unwrap();
        prop_assert!(close(&back, &a, 1e-8 * a.max_abs().max(1.0)));
    }

    #[test]
    fn projectors_are_complementary(d in dims()) {
        let a = sample(d);
        let (n, p) = a.shape();
        let kinds = [
            (ProjectorKind::RangeXt, ProjectorKind::KerX, p),
            (ProjectorKind::RangeX, ProjectorKind::KerXt, n),
        ];
        for (r, k, dim) in kinds {
            let pr = projector(&a, r, 0.0).unwrap();
            let pk = projector(&a, k, 0.0).unwrap();
            prop_assert!(close(&pr.add(&pk).unwrap(), &Matrix::identity(dim), 1e-12));
            for q in [&pr, &pk] {
                prop_assert!(q.is_symmetric(1e-9));
                prop_assert!(close(&q.matmul(q).unwrap(), q, 1e-9));
            }
        }
        // RangeXt = M^+ M
        let pi = pinv(&a, 0.0).unwrap();
        prop_assert!(close(&projector(&a, ProjectorKind::RangeXt, 0.0).unwrap(), &pi.matmul(&a).unwrap(), 1e-9));
    }

    #[test]
    fn min_norm_beats_other_solutions(d in dims(), bseed in any::<u64>()) {
        let a = sample(d);
        let (n, p) = a.shape();
        let mut g = rng(bseed);
        let b = common::normal_vec(&mut g, n);
        let t = min_norm_solve(&a, &b, 0.0).unwrap();
        let kernel = projector(&a, ProjectorKind::KerX, 0.0).unwrap();
        let rowspace = projector(&a, ProjectorKind::RangeXt, 0.0).unwrap();
        prop_assert!(norm(&kernel.matvec(&t).unwrap()) <= 1e-9 * norm(&t).max(1.0));
        prop_assert!(max_abs_diff(&rowspace.matvec(&t).unwrap(), &t) <= 1e-9 * norm(&t).max(1.0));
        let base = norm(&t);
        for _ in 0..100 {
            let z = common::normal_vec(&mut g, p);
            let other: Vec<f64> = t.iter().zip(kernel.matvec(&z).unwrap()).map(|(x, k)| x + k).collect();
            prop_assert!(base <= norm(&other) + 1e-12);
        }
    }
}

#[test]
fn f32_pipeline_runs() {
    let a: penreg::linalg::Matrix<f32> = penreg::linalg::Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
    let t = min_norm_solve(&a, &[1.0, 2.0], 0.0).unwrap();
    assert!((t[0] - 0.2).abs() < 1e-5 && (t[1] - 0.4).abs() < 1e-5);
}
