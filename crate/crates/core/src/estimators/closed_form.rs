use crate::error::{Error, Result};
use crate::estimators::{Dataset, EstimatorKind, FitResult, Penalty};
use crate::linalg::{pinv, solve_spd, svd, Matrix};
use crate::scalar::{norm2_sq, Scalar};

/// Least squares estimator; requires full column rank so that it is unique.
pub fn fit_ls<T: Scalar>(d: &Dataset<T>) -> Result<FitResult<T>> {
    let f = svd(&d.x, T::zero())?;
    if f.rank < d.p() {
        return Err(Error::Precondition(format!(
            "least squares needs rank(X) = p = {}, found rank {}",
            d.p(),
            f.rank
        )));
    }
    let theta = f.solve_min_norm(&d.y)?;
    let objective = d.rss(&theta)? / T::lit(2.0);
    Ok(FitResult::closed_form(EstimatorKind::Ls, theta, Penalty::None, objective))
}

/// Ridgeless estimator `X^+ y`, the minimum-norm least squares solution.
pub fn fit_ridgeless<T: Scalar>(d: &Dataset<T>) -> Result<FitResult<T>> {
    let theta = svd(&d.x, T::zero())?.solve_min_norm(&d.y)?;
    let objective = d.rss(&theta)? / T::lit(2.0);
    Ok(FitResult::closed_form(EstimatorKind::Ridgeless, theta, Penalty::None, objective))
}

/// Ridge estimator `(X'X + lambda I)^{-1} X'y`, evaluated through the SVD as
/// `sum_j s_j / (s_j^2 + lambda) v_j u_j' y`.
pub fn fit_ridge<T: Scalar>(d: &Dataset<T>, lambda: T) -> Result<FitResult<T>> {
    check_lambda(lambda)?;
    let f = svd(&d.x, T::zero())?;
    let p = d.p();
    let mut theta = vec![T::zero(); p];
    for (j, &s) in f.singular_values.iter().enumerate() {
        if s == T::zero() {
            continue;
        }
        let coef = f.u.dot_column(j, &d.y) * s / (s * s + lambda);
        for (k, t) in theta.iter_mut().enumerate() {
            *t += coef * f.v[(k, j)];
        }
    }
    let objective = (d.rss(&theta)? + lambda * norm2_sq(&theta)) / T::lit(2.0);
    Ok(FitResult::closed_form(EstimatorKind::Ridge, theta, Penalty::Lambda(lambda), objective))
}

/// `(X'X + lambda I)^{-1} X'X theta_rl`, via a Cholesky solve.
pub fn ridge_from_ridgeless<T: Scalar>(
    d: &Dataset<T>,
    ridgeless_theta: &[T],
    lambda: T,
) -> Result<Vec<T>> {
    check_lambda(lambda)?;
    check_len(d, ridgeless_theta)?;
    let gram = d.x.gram();
    let rhs = gram.matvec(ridgeless_theta)?;
    solve_spd(&shifted(&gram, lambda), &rhs)
}

/// `(X'X)^+ (X'X + lambda I) theta_r`, inverting [`ridge_from_ridgeless`].
pub fn ridgeless_from_ridge<T: Scalar>(
    d: &Dataset<T>,
    ridge_theta: &[T],
    lambda: T,
) -> Result<Vec<T>> {
    check_lambda(lambda)?;
    check_len(d, ridge_theta)?;
    let gram = d.x.gram();
    let rhs = shifted(&gram, lambda).matvec(ridge_theta)?;
    pinv(&gram, T::zero())?.matvec(&rhs)
}

fn shifted<T: Scalar>(gram: &Matrix<T>, lambda: T) -> Matrix<T> {
    let mut a = gram.clone();
    for i in 0..a.rows() {
        a[(i, i)] += lambda;
    }
    a
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::invalid(format!("penalty must be positive and finite, got {lambda}")));
    }
    Ok(())
}

fn check_len<T: Scalar>(d: &Dataset<T>, theta: &[T]) -> Result<()> {
    if theta.len() != d.p() {
        return Err(Error::dims(format!("{} coefficients for {} columns", theta.len(), d.p())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> Dataset<f64> {
        Dataset::new(
            Matrix::<f64>::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap(),
            vec![1.0, 2.0],
        )
        .unwrap()
    }

    #[test]
    fn ridgeless_examples() {
        let d = Dataset::new(Matrix::<f64>::identity(2), vec![3.0, 4.0]).unwrap();
        let f = fit_ridgeless(&d).unwrap();
        assert!((f.theta[0] - 3.0).abs() < 1e-15 && (f.theta[1] - 4.0).abs() < 1e-15);
        let f = fit_ridgeless(&worked()).unwrap();
        assert!((f.theta[0] - 0.2).abs() < 1e-12 && (f.theta[1] - 0.4).abs() < 1e-12);
        assert!(f.objective < 1e-24);
    }

    #[test]
    fn ridgeless_on_orthonormal_columns_is_xty() {
        let s = 1.0 / 2f64.sqrt();
        let x = Matrix::<f64>::from_rows(&[vec![s, 0.0], vec![s, 0.0], vec![0.0, 1.0]]).unwrap();
        let y = vec![1.0, 3.0, -2.0];
        let d = Dataset::new(x.clone(), y.clone()).unwrap();
        let f = fit_ridgeless(&d).unwrap();
        let xty = x.tmatvec(&y).unwrap();
        assert!(f.theta.iter().zip(&xty).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn ls_requires_full_rank() {
        assert!(matches!(fit_ls(&worked()), Err(Error::Precondition(_))));
    }

    #[test]
    fn ridge_examples() {
        let y = vec![2.0, -1.0, 0.5];
        let d = Dataset::new(Matrix::<f64>::identity(3), y.clone()).unwrap();
        let f = fit_ridge(&d, 0.5).unwrap();
        assert!(f.theta.iter().zip(&y).all(|(t, v)| (t - v / 1.5).abs() < 1e-15));

        let d = Dataset::new(Matrix::<f64>::from_rows(&[vec![1.0], vec![1.0]]).unwrap(), vec![1.0, 1.0]).unwrap();
        assert!((fit_ridge(&d, 2.0).unwrap().theta[0] - 0.5).abs() < 1e-15);

        assert!(fit_ridge(&d, 0.0).is_err());
        assert!(fit_ridge(&d, -1.0).is_err());
    }

    #[test]
    fn ridge_tends_to_ridgeless() {
        let d = worked();
        let rl = fit_ridgeless(&d).unwrap().theta;
        let lam = 1e-10 * 25.0;
        let r = fit_ridge(&d, lam).unwrap().theta;
        assert!(crate::scalar::norm2(&crate::scalar::sub(&r, &rl)) < 1e-6);

        let mut last = f64::INFINITY;
        for lam in [1e-2, 1e-4, 1e-6] {
            let t = ridge_from_ridgeless(&d, &rl, lam).unwrap();
            let dist = crate::scalar::norm2(&crate::scalar::sub(&t, &rl));
            assert!(dist < last);
            last = dist;
        }
    }

    #[test]
    fn transfer_matches_direct_fit() {
        let d = worked();
        let rl = fit_ridgeless(&d).unwrap().theta;
        for lam in [0.1, 1.0, 10.0] {
            let direct = fit_ridge(&d, lam).unwrap().theta;
            let via = ridge_from_ridgeless(&d, &rl, lam).unwrap();
            assert!(direct.iter().zip(&via).all(|(a, b)| (a - b).abs() < 1e-8));
            let back = ridgeless_from_ridge(&d, &direct, lam).unwrap();
            assert!(back.iter().zip(&rl).all(|(a, b)| (a - b).abs() < 1e-8));
        }
        let d = Dataset::new(Matrix::<f64>::identity(2), vec![1.0, 2.0]).unwrap();
        let t = ridge_from_ridgeless(&d, &[1.0, 2.0], 1.0).unwrap();
        assert!((t[0] - 0.5).abs() < 1e-15 && (t[1] - 1.0).abs() < 1e-15);
        assert!(ridge_from_ridgeless(&d, &[1.0], 1.0).is_err());
    }
}
