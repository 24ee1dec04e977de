use crate::error::{Error, Result};
use crate::estimators::Dataset;
use crate::linalg::{svd, Matrix};
use crate::scalar::{dot, Scalar};

/// Recursive least squares: keeps `(X'X)^{-1}` and the current estimate and
/// folds in one observation at a time with a rank-one update.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineLs<T> {
    pub inv: Matrix<T>,
    pub theta: Vec<T>,
}

impl<T: Scalar> OnlineLs<T> {
    /// Initial state from a full-column-rank batch.
    pub fn from_batch(d: &Dataset<T>) -> Result<Self> {
        let f = svd(&d.x, T::zero())?;
        if f.rank < d.p() {
            return Err(Error::Precondition(format!(
                "online least squares needs full column rank, found rank {} of {}",
                f.rank,
                d.p()
            )));
        }
        let theta = f.solve_min_norm(&d.y)?;
        let p = d.p();
        let mut inv = Matrix::zeros(p, p);
        for j in 0..p {
            let s2 = f.singular_values[j] * f.singular_values[j];
            for a in 0..p {
                let va = f.v[(a, j)] / s2;
                for b in 0..p {
                    inv[(a, b)] += va * f.v[(b, j)];
                }
            }
        }
        Ok(OnlineLs { inv, theta })
    }

    /// Adds `(x_new, y_new)`: with `eta = inv x`, `a = x' eta` and innovation
    /// `u = y - x' theta`, sets `theta += u / (1 + a) eta` and
    /// `inv -= eta eta' / (1 + a)`.
    pub fn update(&mut self, x_new: &[T], y_new: T) -> Result<()> {
        let p = self.theta.len();
        if x_new.len() != p {
            return Err(Error::dims(format!("observation of length {} for p = {p}", x_new.len())));
        }
        let eta = self.inv.matvec(x_new)?;
        let denom = T::one() + dot(x_new, &eta);
        if !(denom > T::lit(1e-12)) {
            return Err(Error::Singular(format!("rank-one update denominator {denom}")));
        }
        let u = y_new - dot(x_new, &self.theta);
        for (t, &e) in self.theta.iter_mut().zip(&eta) {
            *t += u / denom * e;
        }
        for a in 0..p {
            for b in 0..p {
                self.inv[(a, b)] -= eta[a] * eta[b] / denom;
            }
        }
        Ok(())
    }
}
