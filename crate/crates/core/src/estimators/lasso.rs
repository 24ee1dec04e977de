use crate::error::{Error, Result};
use crate::estimators::{fit_ridge, fit_ridgeless, Dataset, EstimatorKind, FitResult, Penalty};
use crate::scalar::{dot, norm1, Scalar};

/// Target accuracy of the subgradient optimality conditions at convergence.
pub const KKT_TOL: f64 = 1e-8;

/// `S_lambda(eta)`: shrink toward zero by `lambda`, clipping to zero inside
/// `[-lambda, lambda]`.
pub fn soft_threshold<T: Scalar>(eta: T, lambda: T) -> T {
    if eta > lambda {
        eta - lambda
    } else if eta < -lambda {
        eta + lambda
    } else {
        T::zero()
    }
}

/// Starting point for coordinate descent.
#[derive(Debug, Clone, PartialEq)]
pub enum CdInit<T> {
    Zeros,
    /// Ridge fit at the given penalty; a zero penalty means ridgeless.
    Ridge(T),
    Warm(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdOptions<T> {
    /// Cap on full passes over the coordinates.
    pub max_iterations: usize,
    /// Stop once no coordinate moves by this much in a pass.
    pub tol: T,
    pub init: CdInit<T>,
}

impl<T: Scalar> Default for CdOptions<T> {
    fn default() -> Self {
        CdOptions { max_iterations: 10_000, tol: T::lit(1e-10), init: CdInit::Zeros }
    }
}

impl<T: Scalar> CdOptions<T> {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.tol > T::zero()) || !self.tol.is_finite() {
            return Err(Error::invalid("coordinate descent tolerance must be positive"));
        }
        Ok(())
    }

    pub fn with_init(mut self, init: CdInit<T>) -> Self {
        self.init = init;
        self
    }
}

/// Smallest penalty whose lasso solution is the zero vector:
/// `max_j |X_j' y / n|`.
pub fn lambda_max<T: Scalar>(d: &Dataset<T>) -> T {
    let n = T::from_usize_lossy(d.n());
    (0..d.p()).fold(T::zero(), |m, j| m.max((dot(&d.x.column(j), &d.y) / n).abs()))
}

/// `||y - X theta||^2 / (2n) + lambda ||theta||_1`.
pub fn lasso_objective<T: Scalar>(d: &Dataset<T>, theta: &[T], lambda: T) -> Result<T> {
    let n = T::from_usize_lossy(d.n());
    Ok(d.rss(theta)? / (T::lit(2.0) * n) + lambda * norm1(theta))
}

/// Largest violation of the lasso subgradient conditions at `theta`.
pub fn kkt_violation<T: Scalar>(d: &Dataset<T>, theta: &[T], lambda: T) -> Result<T> {
    let r = d.residual(theta)?;
    let grad = d.x.tmatvec(&r)?;
    let n = T::from_usize_lossy(d.n());
    Ok(grad.iter().zip(theta).fold(T::zero(), |m, (&g, &t)| {
        let g = g / n;
        let v = if t == T::zero() {
            (g.abs() - lambda).max(T::zero())
        } else {
            (g - lambda * t.signum()).abs()
        };
        m.max(v)
    }))
}

/// Lasso by cyclical coordinate descent on the data as given (no
/// centering). Each coordinate is set to
/// `S_lambda(X_j' e_j / n) / (X_j' X_j / n)` with `e_j` the partial residual.
///
/// Non-convergence is reported through `converged = false`, not an error.
pub fn fit_lasso_cd<T: Scalar>(d: &Dataset<T>, lambda: T, opts: &CdOptions<T>) -> Result<FitResult<T>> {
    solve(d, lambda, opts, None)
}

/// As [`fit_lasso_cd`], also returning the objective after every cycle.
pub fn lasso_cd_with_history<T: Scalar>(
    d: &Dataset<T>,
    lambda: T,
    opts: &CdOptions<T>,
) -> Result<(FitResult<T>, Vec<T>)> {
    let mut hist = Vec::new();
    let fit = solve(d, lambda, opts, Some(&mut hist))?;
    Ok((fit, hist))
}

fn solve<T: Scalar>(
    d: &Dataset<T>,
    lambda: T,
    opts: &CdOptions<T>,
    mut history: Option<&mut Vec<T>>,
) -> Result<FitResult<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::invalid(format!("lasso penalty must be positive, got {lambda}")));
    }
    opts.validate()?;
    let (n, p) = d.x.shape();
    let nf = T::from_usize_lossy(n);
    let cols = d.x.columns();
    let col_sq: Vec<T> = cols.iter().map(|c| dot(c, c) / nf).collect();
    if let Some(j) = col_sq.iter().position(|&c| !(c > T::zero())) {
        return Err(Error::Precondition(format!("column {j} has zero norm")));
    }

    let mut theta = match &opts.init {
        CdInit::Zeros => vec![T::zero(); p],
        CdInit::Ridge(l) if *l > T::zero() => fit_ridge(d, *l)?.theta,
        CdInit::Ridge(_) => fit_ridgeless(d)?.theta,
        CdInit::Warm(w) => {
            if w.len() != p {
                return Err(Error::dims(format!("warm start of length {} for {p} columns", w.len())));
            }
            w.clone()
        }
    };
    let mut resid = d.residual(&theta)?;
    let kkt_tol = T::lit(KKT_TOL).max(T::lit(64.0) * T::epsilon() * lambda_max(d).max(T::one()));

    let mut converged = false;
    let mut cycles = 0;
    while cycles < opts.max_iterations {
        cycles += 1;
        let mut max_change = T::zero();
        for j in 0..p {
            let old = theta[j];
            let z = dot(&cols[j], &resid) / nf + col_sq[j] * old;
            let new = soft_threshold(z, lambda) / col_sq[j];
            if new != old {
                let delta = new - old;
                for (r, &x) in resid.iter_mut().zip(&cols[j]) {
                    *r -= x * delta;
                }
                theta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if let Some(h) = history.as_deref_mut() {
            h.push(crate::scalar::norm2_sq(&resid) / (T::lit(2.0) * nf) + lambda * norm1(&theta));
        }
        if max_change < opts.tol {
            resid = d.residual(&theta)?;
            if kkt_violation(d, &theta, lambda)? <= kkt_tol {
                converged = true;
                break;
            }
        }
    }
    let objective = lasso_objective(d, &theta, lambda)?;
    Ok(FitResult {
        kind: EstimatorKind::Lasso,
        theta,
        intercept: None,
        penalty: Penalty::Lambda(lambda),
        iterations: cycles,
        converged,
        objective,
    })
}

/// Fits along a decreasing, log-spaced penalty grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPath<T> {
    pub grid: Vec<T>,
    pub fits: Vec<FitResult<T>>,
    pub lambda_max: T,
}

/// Pathwise coordinate descent from `lambda_max` down to
/// `ratio * lambda_max`, warm-starting every fit at its predecessor.
pub fn lasso_path<T: Scalar>(
    d: &Dataset<T>,
    n_lambda: usize,
    ratio: T,
    opts: &CdOptions<T>,
) -> Result<LambdaPath<T>> {
    if n_lambda < 2 {
        return Err(Error::invalid("a path needs at least two penalties"));
    }
    if !(ratio > T::zero() && ratio < T::one()) {
        return Err(Error::invalid(format!("path ratio must lie in (0, 1), got {ratio}")));
    }
    let lmax = lambda_max(d);
    if !(lmax > T::zero()) {
        return Err(Error::Precondition("y is orthogonal to every column; lambda_max = 0".into()));
    }
    let last = T::from_usize_lossy(n_lambda - 1);
    let grid: Vec<T> = (0..n_lambda)
        .map(|k| match k {
            0 => lmax,
            k if k == n_lambda - 1 => lmax * ratio,
            k => lmax * ratio.powf(T::from_usize_lossy(k) / last),
        })
        .collect();

    let mut fits: Vec<FitResult<T>> = Vec::with_capacity(n_lambda);
    for &lam in &grid {
        let o = match fits.last() {
            Some(prev) => opts.clone().with_init(CdInit::Warm(prev.theta.clone())),
            None => opts.clone(),
        };
        fits.push(fit_lasso_cd(d, lam, &o)?);
    }
    Ok(LambdaPath { grid, fits, lambda_max: lmax })
}
