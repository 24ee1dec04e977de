mod common;

use penreg::bounds::{BoundMode, Kappa};
use penreg::estimators::{CdOptions, EstimatorSpec};
use penreg::linalg::{projector, ProjectorKind};
use penreg::risk::RiskSource;
use penreg::simulate::{
    gaussian_design, mc_bound_coverage, mc_loss_probe, mc_risk, orthonormal_design, rank_deficient_design,
    sample_dgp, BoundConfig, DgpSpec, Design, ErrorDist, KappaSource, McConfig,
};
use penreg::Matrix;

fn fixed(x: Matrix, theta0: Vec<f64>, error: ErrorDist) -> DgpSpec {
    DgpSpec { n: x.rows(), design: Design::Fixed(x), theta0, error, seed: 0 }
}

fn ses(src: &RiskSource<f64>) -> (f64, f64) {
    match *src {
        RiskSource::Empirical { mse_se, mpr_se, .. } => (mse_se, mpr_se),
        RiskSource::Theoretical => panic!("expected an empirical report"),
    }
}

#[test]
fn gaussian_errors_have_the_right_moments() {
    let spec = fixed(gaussian_design(50, 2, 1).unwrap(), vec![0.0, 0.0], ErrorDist::Gaussian(2.0));
    let reps = 10_000;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for r in 0..reps {
        let (_, eps) = sample_dgp(&spec, r).unwrap();
        sum += eps.iter().sum::<f64>();
        sq += eps.iter().map(|e| e * e).sum::<f64>();
    }
    let total = (50 * reps) as f64;
    let mean = sum / total;
    let var = sq / total - mean * mean;
    assert!(mean.abs() <= 4.0 * 2.0 / total.sqrt(), "mean {mean}");
    assert!((var / 4.0 - 1.0).abs() <= 0.05, "variance {var}");
}

#[test]
fn bounded_families_match_their_variances() {
    for (err, var) in [(ErrorDist::SymmetricBernoulli(0.7), 0.49), (ErrorDist::Uniform(1.5), 0.75)] {
        let spec = fixed(gaussian_design(100, 1, 2).unwrap(), vec![0.0], err);
        let mut sq = 0.0;
        for r in 0..500 {
            sq += sample_dgp(&spec, r).unwrap().1.iter().map(|e| e * e).sum::<f64>();
        }
        assert!((sq / 50_000.0 / var - 1.0).abs() < 0.05);
        assert!((err.std_dev().powi(2) - var).abs() < 1e-12);
    }
}

#[test]
fn noiseless_lse_has_no_risk() {
    let spec = fixed(gaussian_design(30, 4, 3).unwrap(), vec![1.0, -2.0, 3.0, 0.5], ErrorDist::Gaussian(0.0));
    let cfg = McConfig { replications: 20, workers: 2, base_seed: 1 };
    let r = mc_risk(&spec, &EstimatorSpec::Ls, &cfg).unwrap();
    assert!(r.empirical.mse <= 1e-18);
    assert!(r.empirical.mpr <= 1e-18);
}

#[test]
fn lse_is_unbiased_and_matches_theory() {
    let theta0 = vec![1.0, -1.0, 0.5, 2.0, 0.0];
    let spec = fixed(gaussian_design(60, 5, 9).unwrap(), theta0.clone(), ErrorDist::Gaussian(1.0));
    let cfg = McConfig { replications: 4000, workers: 0, base_seed: 12 };
    let r = mc_risk(&spec, &EstimatorSpec::Ls, &cfg).unwrap();
    for j in 0..5 {
        assert!((r.mean_theta[j] - theta0[j]).abs() <= 4.0 * r.theta_se[j], "coordinate {j}");
    }
    let th = r.theoretical.as_ref().unwrap();
    let (mse_se, mpr_se) = ses(&r.empirical.source);
    assert!((r.empirical.mse - th.mse).abs() <= 3.0 * mse_se);
    assert!((r.empirical.mpr - th.mpr).abs() <= 3.0 * mpr_se);
    assert!((r.empirical.mse - r.empirical.bias_norm_sq - r.empirical.trace_var).abs() < 1e-12);
    assert!((r.empirical.mpr - r.empirical.pred_bias_sq - r.empirical.pred_var).abs() < 1e-12);
    assert!(!r.conditional_on_design);
}

#[test]
fn ridgeless_mean_is_the_projected_estimand() {
    let x = rank_deficient_design(40, 5, 3, 4).unwrap();
    let theta0 = vec![1.0, 0.0, -1.0, 2.0, 0.5];
    let spec = fixed(x.clone(), theta0.clone(), ErrorDist::Uniform(1.0));
    let cfg = McConfig { replications: 3000, workers: 3, base_seed: 5 };
    let r = mc_risk(&spec, &EstimatorSpec::Ridgeless, &cfg).unwrap();
    let target = projector(&x, ProjectorKind::RangeXt, 0.0).unwrap().matvec(&theta0).unwrap();
    assert!(common::max_abs_diff(&r.target, &target) < 1e-9);
    for j in 0..5 {
        assert!((r.mean_theta[j] - target[j]).abs() <= 4.0 * r.theta_se[j].max(1e-15), "coordinate {j}");
    }
    let (_, mpr_se) = ses(&r.empirical.source);
    let sigma2 = 1.0 / 3.0;
    assert!((r.empirical.mpr - 3.0 * sigma2 / 40.0).abs() <= 3.0 * mpr_se);
}

#[test]
fn aggregates_do_not_depend_on_worker_count() {
    let spec = fixed(gaussian_design(40, 6, 2).unwrap(), vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.5], ErrorDist::Gaussian(1.0));
    let est = EstimatorSpec::Lasso { lambda: 0.1, options: CdOptions::default() };
    let runs: Vec<_> = [1, 2, 5]
        .iter()
        .map(|&w| mc_risk(&spec, &est, &McConfig { replications: 60, workers: w, base_seed: 9 }).unwrap())
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);

    let bc = BoundConfig {
        mode: BoundMode::SubGaussian,
        kappa: KappaSource::Sampled { samples: 32, refine_steps: 3 },
        delta: 0.3,
        cd: CdOptions::default(),
    };
    let a = mc_bound_coverage(&spec, &bc, &McConfig { replications: 30, workers: 1, base_seed: 2 }).unwrap();
    let b = mc_bound_coverage(&spec, &bc, &McConfig { replications: 30, workers: 4, base_seed: 2 }).unwrap();
    assert_eq!(a, b);
    assert!(matches!(a.kappa, Kappa::Sampled(_)));
}

#[test]
fn loss_identity_for_fixed_probes() {
    let x = gaussian_design(30, 3, 6).unwrap();
    let theta0 = vec![0.5, -1.0, 2.0];
    let spec = fixed(x, theta0.clone(), ErrorDist::SymmetricBernoulli(1.0));
    let probes = vec![
        theta0.clone(),
        vec![0.0, 0.0, 0.0],
        vec![1.0, 1.0, 1.0],
        vec![0.5, -1.0, 1.0],
        vec![-2.0, 0.0, 3.0],
    ];
    let cfg = McConfig { replications: 5000, workers: 0, base_seed: 3 };
    for p in mc_loss_probe(&spec, &probes, &cfg).unwrap() {
        assert!((p.mean_loss - p.mpr - p.sigma_sq).abs() <= 3.0 * p.loss_se, "{p:?}");
        assert!((p.mean_excess - p.mpr).abs() <= 3.0 * p.excess_se.max(1e-15), "{p:?}");
    }
}

#[test]
fn deterministic_coverage_has_no_violations() {
    let mut theta0 = vec![0.0; 20];
    theta0[2] = 1.0;
    theta0[9] = -1.0;
    theta0[15] = 2.0;
    let spec = fixed(orthonormal_design(100, 20, 1).unwrap(), theta0.clone(), ErrorDist::Gaussian(1.0));
    let cfg = McConfig { replications: 100, workers: 0, base_seed: 4 };
    let bc = BoundConfig { mode: BoundMode::Deterministic, kappa: KappaSource::Exact(1.0), delta: 0.3, cd: CdOptions::default() };
    let r = mc_bound_coverage(&spec, &bc, &cfg).unwrap();
    assert_eq!((r.violations, r.audit_failures, r.nonconverged), (0, 0, 0));
    assert!(r.pass);
    assert_eq!(r.ceiling, 0.0);

    let bc = BoundConfig { mode: BoundMode::SubGaussian, delta: 3.0, ..bc };
    let r = mc_bound_coverage(&spec, &bc, &cfg).unwrap();
    assert!(r.ceiling < 1e-100);
    assert_eq!(r.violations, 0);
}

#[test]
fn coverage_needs_hard_sparsity() {
    let spec = fixed(orthonormal_design(20, 4, 1).unwrap(), vec![1.0; 4], ErrorDist::Gaussian(1.0));
    let bc = BoundConfig { mode: BoundMode::Deterministic, kappa: KappaSource::Exact(1.0), delta: 0.3, cd: CdOptions::default() };
    let cfg = McConfig { replications: 2, workers: 1, base_seed: 0 };
    assert!(mc_bound_coverage(&spec, &bc, &cfg).is_err());
    assert!(mc_risk(&spec, &EstimatorSpec::Ls, &McConfig { replications: 1, ..cfg }).is_err());
}

#[test]
fn random_design_reports_conditional_theory() {
    let cov = Matrix::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.3, 1.0, 0.2], vec![0.0, 0.2, 1.0]]).unwrap();
    let spec = DgpSpec {
        design: Design::RandomGaussian { mean: vec![0.0; 3], covariance: cov },
        theta0: vec![1.0, 2.0, -1.0],
        error: ErrorDist::Gaussian(1.0),
        n: 40,
        seed: 0,
    };
    let cfg = McConfig { replications: 2000, workers: 0, base_seed: 8 };
    let r = mc_risk(&spec, &EstimatorSpec::Ridge { lambda: 2.0 }, &cfg).unwrap();
    assert!(r.conditional_on_design);
    let th = r.theoretical.unwrap();
    let (mse_se, mpr_se) = ses(&r.empirical.source);
    assert!((r.empirical.mse - th.mse).abs() <= 4.0 * mse_se);
    assert!((r.empirical.mpr - th.mpr).abs() <= 4.0 * mpr_se);
}
