mod common;

use common::{gaussian, rng};
use penreg::bounds::{
    column_norm_bound, lambda_oracle, lasso_bound_report, lemma_audit, re_constant_bound, subgaussian_lambda,
    BoundInputs, BoundMode, ConeSpec, Kappa,
};
use penreg::estimators::{fit_lasso_cd, fit_ridgeless, CdOptions};
use penreg::linalg::svd;
use penreg::simulate::{orthonormal_design, sample_dgp, DgpSpec, Design, ErrorDist};
use penreg::{Dataset, Error};
use proptest::prelude::*;

fn sparse_spec(x: penreg::Matrix, seed: u64) -> DgpSpec {
    let p = x.cols();
    let mut theta0 = vec![0.0; p];
    theta0[0] = 1.0;
    theta0[5] = -2.0;
    theta0[11] = 0.5;
    DgpSpec { n: x.rows(), design: Design::Fixed(x), theta0, error: ErrorDist::Gaussian(1.0), seed }
}

#[test]
fn subgaussian_plug_in() {
    let inputs = BoundInputs {
        lambda: 1.0,
        s0: 3,
        kappa: Kappa::Exact(0.5),
        theta0_l1: 2.0,
        c: 1.0,
        sigma: 1.0,
        delta: 0.2,
        p: 50,
        n: 100,
    };
    let r = lasso_bound_report(&inputs, BoundMode::SubGaussian).unwrap();
    let root = (2.0 * 50f64.ln() / 100.0).sqrt();
    assert!((r.lambda - 2.0 * (root + 0.2)).abs() < 1e-15);
    assert!((r.probability_floor - (1.0 - 2.0 * (-2.0f64).exp())).abs() < 1e-15);
    let rate = 2.0 * 50f64.ln() / 100.0 + 0.04;
    assert!((r.est_bound - 72.0 * 3.0 / 0.25 * rate).abs() < 1e-12);
    assert!((r.pr_bound - 72.0 * 3.0 / 0.5 * rate).abs() < 1e-12);
    assert!((r.lemma_pr_bound - 24.0 * 2.0 * (root + 0.2)).abs() < 1e-12);
    assert_eq!(r.kappa.provenance(), "exact");
}

#[test]
fn subgaussian_lambda_monotonicity() {
    let base = |c: f64, s: f64, n: usize, p: usize, d: f64| subgaussian_lambda(c, s, n, p, d);
    for &c in &[0.5, 1.0, 2.0] {
        for &s in &[0.5, 1.0, 3.0] {
            for &n in &[20usize, 100, 500] {
                for &p in &[2usize, 10, 200] {
                    for &d in &[0.05, 0.3, 1.0] {
                        let v = base(c, s, n, p, d);
                        assert!(base(c * 1.01, s, n, p, d) > v);
                        assert!(base(c, s * 1.01, n, p, d) > v);
                        assert!(base(c, s, n + 1, p, d) < v);
                        assert!(base(c, s, n, p + 1, d) > v);
                        assert!(base(c, s, n, p, d * 1.01) > v);
                    }
                }
            }
        }
    }
}

#[test]
fn lemma_holds_on_simulated_replications() {
    let mut g = rng(3);
    let spec = sparse_spec(gaussian(&mut g, 100, 20), 41);
    for r in 0..25 {
        let (d, eps) = sample_dgp(&spec, r).unwrap();
        let lam = lambda_oracle(&d.x, &eps).unwrap();
        let fit = fit_lasso_cd(&d, lam, &CdOptions::default()).unwrap();
        assert!(fit.converged);
        let audit = lemma_audit(&d, &fit, &spec.theta0, &eps).unwrap();
        assert!(audit.all_pass(), "replication {r}: {audit:?}");
        assert_eq!(audit.checks.len(), 5);
        // Wider penalties keep the guarantees.
        let fit2 = fit_lasso_cd(&d, 3.0 * lam, &CdOptions::default()).unwrap();
        assert!(lemma_audit(&d, &fit2, &spec.theta0, &eps).unwrap().all_pass());
    }
}

#[test]
fn risk_bounds_hold_with_exact_kappa() {
    let spec = sparse_spec(orthonormal_design(100, 20, 5).unwrap(), 77);
    for r in 0..25 {
        let (d, eps) = sample_dgp(&spec, r).unwrap();
        let lam = lambda_oracle(&d.x, &eps).unwrap();
        let fit = fit_lasso_cd(&d, lam, &CdOptions::default()).unwrap();
        let inputs = BoundInputs {
            lambda: lam,
            s0: 3,
            kappa: Kappa::Exact(1.0),
            theta0_l1: 3.5,
            c: column_norm_bound(&d.x),
            sigma: 1.0,
            delta: 0.1,
            p: 20,
            n: 100,
        };
        let mut rep = lasso_bound_report(&inputs, BoundMode::Deterministic).unwrap();
        let obs = rep.observe(&fit.theta, &spec.theta0, &d.x).unwrap();
        assert!(obs.all_ok(), "{obs:?}");
    }
}

#[test]
fn audit_guards() {
    let mut g = rng(4);
    let spec = sparse_spec(gaussian(&mut g, 100, 20), 1);
    let (d, eps) = sample_dgp(&spec, 0).unwrap();
    let lam = lambda_oracle(&d.x, &eps).unwrap();
    let low = fit_lasso_cd(&d, 0.5 * lam, &CdOptions::default()).unwrap();
    assert!(matches!(lemma_audit(&d, &low, &spec.theta0, &eps), Err(Error::Precondition(_))));
    let rl = fit_ridgeless(&d).unwrap();
    assert!(matches!(lemma_audit(&d, &rl, &spec.theta0, &eps), Err(Error::Precondition(_))));
    let ok = fit_lasso_cd(&d, lam, &CdOptions::default()).unwrap();
    let wrong_eps: Vec<f64> = eps.iter().map(|e| e * 1.5).collect();
    assert!(matches!(lemma_audit(&d, &ok, &spec.theta0, &wrong_eps), Err(Error::InvalidInput(_))));

    // noise orthogonal to every column
    let x = penreg::Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
    let d = Dataset::new(x, vec![2.0, 0.0]).unwrap();
    let fit = fit_lasso_cd(&d, 0.1, &CdOptions::default()).unwrap();
    assert!(matches!(lemma_audit(&d, &fit, &[1.0], &[1.0, -1.0]), Err(Error::Precondition(_))));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn sampled_kappa_is_a_rayleigh_value(seed in any::<u64>(), n in 3usize..30, p in 2usize..10, alpha in 1.0f64..4.0) {
        let mut g = rng(seed);
        let x = gaussian(&mut g, n, p);
        let cone = ConeSpec::new(vec![0, p - 1], alpha, p).unwrap();
        let k = re_constant_bound(&x, &cone, 64, 5, seed).unwrap();
        let s = svd(&x, 0.0).unwrap();
        let top = s.largest().powi(2) / n as f64;
        let bottom = if n >= p { s.singular_values[p - 1].powi(2) / n as f64 } else { 0.0 };
        prop_assert!(k <= top * (1.0 + 1e-12));
        prop_assert!(k >= bottom * (1.0 - 1e-12) - 1e-12);
        prop_assert_eq!(k, re_constant_bound(&x, &cone, 64, 5, seed).unwrap());
    }
}
