use crate::error::{Error, Result};
use crate::estimators::{Dataset, EstimatorKind, FitResult, Penalty};
use crate::linalg::svd;
use crate::scalar::{norm2_sq, Scalar};

/// Exhaustive enumeration is `2^p`; beyond this it is refused.
pub const L0_MAX_PREDICTORS: usize = 15;

/// Best subset of size at most `radius`: least squares on every support,
/// keeping the smallest `||y - X theta||^2 / 2`. Ties go to the
/// lexicographically smallest support.
pub fn fit_l0_brute<T: Scalar>(d: &Dataset<T>, radius: usize) -> Result<FitResult<T>> {
    let p = d.p();
    if p > L0_MAX_PREDICTORS {
        return Err(Error::SizeLimit(format!(
            "best-subset search is limited to p <= {L0_MAX_PREDICTORS}, got {p}"
        )));
    }
    if radius > p {
        return Err(Error::invalid(format!("support size {radius} exceeds p = {p}")));
    }
    let tie = T::lit(1e-12) * (norm2_sq(&d.y) / T::lit(2.0)).max(T::min_positive_value());

    let mut best_support: Vec<usize> = Vec::new();
    let mut best_theta = vec![T::zero(); p];
    let mut best_obj = norm2_sq(&d.y) / T::lit(2.0);

    for mask in 1u32..(1u32 << p) {
        if mask.count_ones() as usize > radius {
            continue;
        }
        let support: Vec<usize> = (0..p).filter(|&j| mask & (1 << j) != 0).collect();
        let sub = d.x.select_columns(&support);
        let coef = svd(&sub, T::zero())?.solve_min_norm(&d.y)?;
        let mut theta = vec![T::zero(); p];
        for (&j, &c) in support.iter().zip(&coef) {
            theta[j] = c;
        }
        let obj = d.rss(&theta)? / T::lit(2.0);
        let better = obj < best_obj - tie
            || ((obj - best_obj).abs() <= tie && support < best_support);
        if better {
            best_obj = obj;
            best_support = support;
            best_theta = theta;
        }
    }
    Ok(FitResult::closed_form(EstimatorKind::L0Brute, best_theta, Penalty::Radius(radius), best_obj))
}
