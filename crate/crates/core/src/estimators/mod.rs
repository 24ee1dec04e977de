//! The estimators: least squares, ridgeless, ridge, lasso (cyclical
//! coordinate descent and pathwise), exhaustive best subset, and recursive
//! least squares.

mod closed_form;
mod l0;
mod lasso;
mod online;
mod standardize;

pub use closed_form::{
    fit_ls, fit_ridge, fit_ridgeless, ridge_from_ridgeless, ridgeless_from_ridge,
};
pub use l0::{fit_l0_brute, L0_MAX_PREDICTORS};
pub use lasso::{
    fit_lasso_cd, kkt_violation, lambda_max, lasso_cd_with_history, lasso_objective, lasso_path,
    soft_threshold, CdInit, CdOptions, LambdaPath, KKT_TOL,
};
pub use online::OnlineLs;
pub use standardize::{recover_intercept, standardize, StandardizeTransform};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Response vector `y` paired with the design matrix `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub y: Vec<T>,
    pub x: Matrix<T>,
    pub names: Option<Vec<String>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: Matrix<T>, y: Vec<T>) -> Result<Self> {
        Self::with_names(x, y, None)
    }

    pub fn with_names(x: Matrix<T>, y: Vec<T>, names: Option<Vec<String>>) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 || p == 0 {
            return Err(Error::invalid(format!("dataset needs n >= 1 and p >= 1, got {n}x{p}")));
        }
        if y.len() != n {
            return Err(Error::dims(format!("y has {} entries but X has {n} rows", y.len())));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("y[{i}]")));
        }
        if x.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("X".into()));
        }
        if let Some(names) = &names {
            if names.len() != p {
                return Err(Error::dims(format!("{} names for {p} columns", names.len())));
            }
        }
        Ok(Dataset { y, x, names })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    /// `||y - X theta||^2`.
    pub fn rss(&self, theta: &[T]) -> Result<T> {
        let fitted = predict(&self.x, theta)?;
        Ok(self.y.iter().zip(&fitted).map(|(&a, &b)| (a - b) * (a - b)).sum())
    }

    /// `y - X theta`.
    pub fn residual(&self, theta: &[T]) -> Result<Vec<T>> {
        let fitted = predict(&self.x, theta)?;
        Ok(self.y.iter().zip(&fitted).map(|(&a, &b)| a - b).collect())
    }

    pub fn column_name(&self, j: usize) -> Option<&str> {
        self.names.as_ref().and_then(|n| n.get(j)).map(String::as_str)
    }
}

/// Which estimator produced a [`FitResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Ls,
    Ridgeless,
    Ridge,
    Lasso,
    L0Brute,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Ls => "ls",
            EstimatorKind::Ridgeless => "ridgeless",
            EstimatorKind::Ridge => "ridge",
            EstimatorKind::Lasso => "lasso",
            EstimatorKind::L0Brute => "l0",
        }
    }
}

/// Regularization attached to a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty<T> {
    None,
    Lambda(T),
    /// Maximum support size of the best-subset search.
    Radius(usize),
}

impl<T: Copy> Penalty<T> {
    pub fn lambda(&self) -> Option<T> {
        match self {
            Penalty::Lambda(l) => Some(*l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub kind: EstimatorKind,
    pub theta: Vec<T>,
    pub intercept: Option<T>,
    pub penalty: Penalty<T>,
    /// Full coordinate descent cycles; zero for closed forms.
    pub iterations: usize,
    pub converged: bool,
    /// Objective value of the estimator's own criterion at `theta`.
    pub objective: T,
}

impl<T: Scalar> FitResult<T> {
    pub(crate) fn closed_form(kind: EstimatorKind, theta: Vec<T>, penalty: Penalty<T>, objective: T) -> Self {
        FitResult { kind, theta, intercept: None, penalty, iterations: 0, converged: true, objective }
    }

    pub fn nonzeros(&self) -> usize {
        self.theta.iter().filter(|&&t| t != T::zero()).count()
    }

    pub fn l1_norm(&self) -> T {
        crate::scalar::norm1(&self.theta)
    }

    /// Indices of nonzero coefficients.
    pub fn support(&self) -> Vec<usize> {
        self.theta
            .iter()
            .enumerate()
            .filter(|(_, &t)| t != T::zero())
            .map(|(j, _)| j)
            .collect()
    }
}

/// `X theta`.
pub fn predict<T: Scalar>(x: &Matrix<T>, theta: &[T]) -> Result<Vec<T>> {
    x.matvec(theta)
}

/// Estimator choice for [`fit`] and the Monte Carlo engine.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec<T> {
    Ls,
    Ridgeless,
    Ridge { lambda: T },
    Lasso { lambda: T, options: CdOptions<T> },
    L0Brute { radius: usize },
}

impl<T: Scalar> EstimatorSpec<T> {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            EstimatorSpec::Ls => EstimatorKind::Ls,
            EstimatorSpec::Ridgeless => EstimatorKind::Ridgeless,
            EstimatorSpec::Ridge { .. } => EstimatorKind::Ridge,
            EstimatorSpec::Lasso { .. } => EstimatorKind::Lasso,
            EstimatorSpec::L0Brute { .. } => EstimatorKind::L0Brute,
        }
    }

    pub fn lambda(&self) -> Option<T> {
        match self {
            EstimatorSpec::Ridge { lambda } | EstimatorSpec::Lasso { lambda, .. } => Some(*lambda),
            _ => None,
        }
    }

    /// Fits on the data exactly as given: no centering, no intercept.
    pub fn fit_raw(&self, d: &Dataset<T>) -> Result<FitResult<T>> {
        match self {
            EstimatorSpec::Ls => fit_ls(d),
            EstimatorSpec::Ridgeless => fit_ridgeless(d),
            EstimatorSpec::Ridge { lambda } => fit_ridge(d, *lambda),
            EstimatorSpec::Lasso { lambda, options } => fit_lasso_cd(d, *lambda, options),
            EstimatorSpec::L0Brute { radius } => fit_l0_brute(d, *radius),
        }
    }
}

/// Standardizes, fits on the standardized scale, maps the coefficients back
/// to the original column units and attaches the intercept `ybar - xbar' theta`.
pub fn fit<T: Scalar>(d: &Dataset<T>, spec: &EstimatorSpec<T>) -> Result<FitResult<T>> {
    let (std, transform) = standardize(d)?;
    let mut res = spec.fit_raw(&std)?;
    res.theta = transform.coefficients_to_original(&res.theta)?;
    res.intercept = Some(recover_intercept(&res.theta, &transform)?);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_validation() {
        let x = Matrix::<f64>::identity(2);
        assert!(Dataset::new(x.clone(), vec![1.0]).is_err());
        assert!(Dataset::new(x.clone(), vec![1.0, f64::INFINITY]).is_err());
        assert!(Dataset::with_names(x.clone(), vec![1.0, 2.0], Some(vec!["a".into()])).is_err());
        assert!(Dataset::new(Matrix::<f64>::zeros(0, 2), vec![]).is_err());
        assert!(Dataset::new(x, vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn predict_examples() {
        let i2 = Matrix::<f64>::identity(2);
        assert_eq!(predict(&i2, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        let x = Matrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(predict(&x, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let y = predict(&x, &[0.2, 0.4]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 2.0).abs() < 1e-15);
        assert!(predict(&x, &[1.0]).is_err());
    }

    #[test]
    fn public_fit_recovers_intercept() {
        // y = 3 + 2 x exactly
        let x = Matrix::<f64>::from_rows(&[vec![1.0], vec![2.0], vec![4.0]]).unwrap();
        let d = Dataset::new(x, vec![5.0, 7.0, 11.0]).unwrap();
        let f = fit(&d, &EstimatorSpec::Ridgeless).unwrap();
        assert!((f.theta[0] - 2.0).abs() < 1e-12);
        assert!((f.intercept.unwrap() - 3.0).abs() < 1e-12);
    }
}
