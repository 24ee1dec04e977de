//! Risk functionals and the exact fixed-design bias, variance, MSE and mean
//! predictive risk of the least squares, ridgeless and ridge estimators.

use crate::error::{Error, Result};
use crate::linalg::{svd, symmetric_spectrum, Matrix, ProjectorKind};
use crate::scalar::{dot, norm2, norm2_sq, sub, Scalar};

/// Where the numbers in a [`RiskReport`] come from.
#[derive(Debug, Clone, PartialEq)]
pub enum RiskSource<T> {
    Theoretical,
    Empirical { replications: usize, mse_se: T, mpr_se: T },
}

/// Risk summary of one estimator configuration.
///
/// `mse = bias_norm_sq + trace_var` and `mpr = pred_bias_sq + pred_var` for
/// theoretical reports. For ridge, `pred_var` is the variance-only
/// expression `(sigma^2/n) sum lambda_j^2 / (lambda_j + lambda/n)^2` and
/// `pred_bias_sq = ||X (I - Q) theta||^2 / n` carries the shrinkage bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport<T> {
    pub estimator: String,
    pub lambda: Option<T>,
    pub bias_norm_sq: T,
    pub trace_var: T,
    pub mse: T,
    pub pred_bias_sq: T,
    pub pred_var: T,
    pub mpr: T,
    pub source: RiskSource<T>,
}

impl<T: Scalar> RiskReport<T> {
    fn theoretical(estimator: &str, lambda: Option<T>, bias: T, var: T, pbias: T, pvar: T) -> Self {
        RiskReport {
            estimator: estimator.to_owned(),
            lambda,
            bias_norm_sq: bias,
            trace_var: var,
            mse: bias + var,
            pred_bias_sq: pbias,
            pred_var: pvar,
            mpr: pbias + pvar,
            source: RiskSource::Theoretical,
        }
    }
}

/// Linear estimator family with closed-form risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearKind<T> {
    Lse,
    Ridgeless,
    Ridge(T),
}

impl<T: Scalar> LinearKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            LinearKind::Lse => "ls",
            LinearKind::Ridgeless => "ridgeless",
            LinearKind::Ridge(_) => "ridge",
        }
    }

    pub fn lambda(&self) -> Option<T> {
        match self {
            LinearKind::Ridge(l) => Some(*l),
            _ => None,
        }
    }
}

/// The ridgeless estimand together with the error scale and the population
/// second moment it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimand<T> {
    pub theta0_rl: Vec<T>,
    /// Error standard deviation, `Var[eps] = sigma^2 I`.
    pub sigma: T,
    pub second_moment: Matrix<T>,
    pub rank0: usize,
}

/// Solution of `E[xx'] theta = E[xy]` of minimum norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimandSolution<T> {
    pub theta: Vec<T>,
    /// False when `E[xy]` is outside the range of `E[xx']`, in which case
    /// the set of coefficients satisfying the moment condition is empty.
    pub solvable: bool,
    /// Norm of the part of `E[xy]` outside the range of `E[xx']`.
    pub residual: T,
}

/// `||theta_hat - theta0||^2` and `||X (theta_hat - theta0)||^2 / n`.
pub fn empirical_risks<T: Scalar>(theta_hat: &[T], theta0: &[T], x: &Matrix<T>) -> Result<(T, T)> {
    if theta_hat.len() != theta0.len() || theta0.len() != x.cols() {
        return Err(Error::dims(format!(
            "estimate {}, target {}, design with {} columns",
            theta_hat.len(),
            theta0.len(),
            x.cols()
        )));
    }
    let diff = sub(theta_hat, theta0);
    let n = T::from_usize_lossy(x.rows());
    Ok((norm2_sq(&diff), norm2_sq(&x.matvec(&diff)?) / n))
}

pub(crate) fn check_second_moment<T: Scalar>(m: &Matrix<T>) -> Result<()> {
    let scale = m.max_abs().max(T::one());
    if !m.is_symmetric(T::lit(1e-10) * scale) {
        return Err(Error::invalid("second moment matrix is not symmetric"));
    }
    let min_eig = symmetric_spectrum(m)?.into_iter().fold(T::infinity(), T::min);
    if min_eig < -T::lit(1e-10) * scale {
        return Err(Error::invalid(format!("second moment matrix has eigenvalue {min_eig} < 0")));
    }
    Ok(())
}

/// `E[xx']^+ E[xy]`, flagging an empty solution set.
pub fn ridgeless_estimand<T: Scalar>(second_moment: &Matrix<T>, cross_moment: &[T]) -> Result<EstimandSolution<T>> {
    if second_moment.rows() != cross_moment.len() {
        return Err(Error::dims("cross moment length differs from second moment order"));
    }
    check_second_moment(second_moment)?;
    let f = svd(second_moment, T::zero())?;
    let theta = f.solve_min_norm(cross_moment)?;
    let outside = f.projector(ProjectorKind::KerXt).matvec(cross_moment)?;
    let residual = norm2(&outside);
    let solvable = residual <= T::lit(1e-8) * norm2(cross_moment).max(T::min_positive_value());
    Ok(EstimandSolution { theta, solvable, residual })
}

impl<T: Scalar> Estimand<T> {
    /// Builds the estimand from population moments; errors when the moment
    /// condition has no solution.
    pub fn from_moments(second_moment: Matrix<T>, cross_moment: &[T], sigma: T) -> Result<Self> {
        if !(sigma >= T::zero()) {
            return Err(Error::invalid("sigma must be non-negative"));
        }
        let sol = ridgeless_estimand(&second_moment, cross_moment)?;
        if !sol.solvable {
            return Err(Error::Precondition(
                "E[xy] lies outside the range of E[xx']: no coefficient satisfies the moment condition".into(),
            ));
        }
        let rank0 = svd(&second_moment, T::zero())?.rank;
        Ok(Estimand { theta0_rl: sol.theta, sigma, second_moment, rank0 })
    }

    /// Uses `X'X / n` as the second moment and `X'X theta0 / n` as the cross
    /// moment, so that the estimand is the projection of `theta0` onto the
    /// row space of `X`.
    pub fn fixed_design(x: &Matrix<T>, theta0: &[T], sigma: T) -> Result<Self> {
        if theta0.len() != x.cols() {
            return Err(Error::dims("theta0 length differs from design width"));
        }
        let n = T::from_usize_lossy(x.rows());
        let gram = x.gram().scale(T::one() / n);
        let cross = gram.matvec(theta0)?;
        Self::from_moments(gram, &cross, sigma)
    }

    /// Uses `theta0` directly as the estimand with a given second moment.
    /// It must lie in the range of the second moment.
    pub fn with_theta(second_moment: Matrix<T>, theta0: Vec<T>, sigma: T) -> Result<Self> {
        let cross = second_moment.matvec(&theta0)?;
        let e = Self::from_moments(second_moment, &cross, sigma)?;
        let gap = norm2(&sub(&e.theta0_rl, &theta0));
        if gap > T::lit(1e-9) * norm2(&theta0).max(T::one()) {
            return Err(Error::invalid("theta0 is not in the range of the second moment"));
        }
        Ok(e)
    }
}

/// Exact moments of a linear estimator `theta_hat = A y` under
/// `y = X theta0 + eps`, `Var[eps] = sigma^2 I`.
pub fn linear_estimator_moments<T: Scalar>(a: &Matrix<T>, x: &Matrix<T>, theta0: &[T], sigma: T) -> Result<RiskReport<T>> {
    let (n, p) = x.shape();
    if a.shape() != (p, n) || theta0.len() != p {
        return Err(Error::dims(format!(
            "A is {}x{}, X is {n}x{p}, theta0 has {} entries",
            a.rows(),
            a.cols(),
            theta0.len()
        )));
    }
    if !(sigma >= T::zero()) {
        return Err(Error::invalid("sigma must be non-negative"));
    }
    let nf = T::from_usize_lossy(n);
    let s2 = sigma * sigma;
    let ax = a.matmul(x)?;
    let bias = sub(&ax.matvec(theta0)?, theta0);
    let trace_var = s2 * norm2_sq(a.as_slice());
    let xa = x.matmul(a)?;
    let pred_var = s2 * norm2_sq(xa.as_slice()) / nf;
    let pred_bias = norm2_sq(&x.matvec(&bias)?) / nf;
    Ok(RiskReport::theoretical("linear", None, norm2_sq(&bias), trace_var, pred_bias, pred_var))
}

/// Closed-form fixed-design risk of the LSE, ridgeless or ridge estimator
/// against the ridgeless estimand. Eigenvalues of `X'X/n` are taken as
/// `s_j^2 / n` from the SVD of `X`.
pub fn theoretical_risk<T: Scalar>(kind: LinearKind<T>, x: &Matrix<T>, est: &Estimand<T>) -> Result<RiskReport<T>> {
    let (n, p) = x.shape();
    if est.theta0_rl.len() != p {
        return Err(Error::dims("estimand length differs from design width"));
    }
    let f = svd(x, T::zero())?;
    let r = f.rank;
    let nf = T::from_usize_lossy(n);
    let s2 = est.sigma * est.sigma;
    let eig = f.gram_eigenvalues();
    let theta = &est.theta0_rl;
    // Coordinates of theta along the right singular vectors.
    let proj: Vec<T> = (0..p).map(|j| dot(&f.v_col(j), theta)).collect();

    match kind {
        LinearKind::Lse => {
            if r < p {
                return Err(Error::Precondition(format!("LSE risk needs rank(X) = p = {p}, found {r}")));
            }
            let var = s2 / nf * eig.iter().map(|&l| T::one() / l).sum::<T>();
            let pvar = T::from_usize_lossy(p) * s2 / nf;
            Ok(RiskReport::theoretical(kind.name(), None, T::zero(), var, T::zero(), pvar))
        }
        LinearKind::Ridgeless => {
            let var = s2 / nf * eig.iter().map(|&l| T::one() / l).sum::<T>();
            let bias: T = proj[r..].iter().map(|&c| c * c).sum();
            let pvar = T::from_usize_lossy(r) * s2 / nf;
            Ok(RiskReport::theoretical(kind.name(), None, bias, var, T::zero(), pvar))
        }
        LinearKind::Ridge(lambda) => {
            if !(lambda > T::zero()) {
                return Err(Error::invalid("ridge risk needs lambda > 0"));
            }
            let shift = lambda / nf;
            let var = s2 / nf * eig.iter().map(|&l| l / ((l + shift) * (l + shift))).sum::<T>();
            let pvar = s2 / nf * eig.iter().map(|&l| l * l / ((l + shift) * (l + shift))).sum::<T>();
            // (I - Q) theta has coordinate shift/(l_j + shift) * c_j on the
            // retained directions and c_j elsewhere.
            let mut bias = T::zero();
            let mut pbias = T::zero();
            for (j, &c) in proj.iter().enumerate() {
                if j < r {
                    let w = shift / (eig[j] + shift) * c;
                    bias += w * w;
                    pbias += eig[j] * w * w;
                } else {
                    bias += c * c;
                }
            }
            Ok(RiskReport::theoretical(kind.name(), Some(lambda), bias, var, pbias, pvar))
        }
    }
}

/// Grid point with the smallest theoretical ridge MSE, if that MSE is
/// strictly below the ridgeless MSE.
pub fn find_lambda_star<T: Scalar>(x: &Matrix<T>, est: &Estimand<T>, grid: &[T]) -> Result<Option<T>> {
    if grid.is_empty() {
        return Err(Error::invalid("empty penalty grid"));
    }
    let base = theoretical_risk(LinearKind::Ridgeless, x, est)?.mse;
    let mut best: Option<(T, T)> = None;
    for &lam in grid {
        let mse = theoretical_risk(LinearKind::Ridge(lam), x, est)?.mse;
        if best.is_none_or(|(_, m)| mse < m) {
            best = Some((lam, mse));
        }
    }
    Ok(best.filter(|&(_, m)| m < base).map(|(l, _)| l))
}

/// `count` log-spaced points from `hi` down to `lo`.
pub fn log_grid<T: Scalar>(lo: T, hi: T, count: usize) -> Result<Vec<T>> {
    if !(lo > T::zero() && hi >= lo) || count == 0 {
        return Err(Error::invalid("log grid needs 0 < lo <= hi and count >= 1"));
    }
    if count == 1 {
        return Ok(vec![hi]);
    }
    let steps = T::from_usize_lossy(count - 1);
    let ratio = lo / hi;
    Ok((0..count).map(|k| hi * ratio.powf(T::from_usize_lossy(k) / steps)).collect())
}
