use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::dims("Cholesky needs a square matrix"));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return Err(Error::Singular(format!("pivot {j} is not positive")));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn solve_spd<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    if b.len() != a.rows() {
        return Err(Error::dims("right-hand side length differs from matrix order"));
    }
    let l = cholesky(a)?;
    let n = b.len();
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] = z[i] - l[(i, k)] * z[k];
        }
        z[i] = z[i] / l[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            z[i] = z[i] - l[(k, i)] * z[k];
        }
        z[i] = z[i] / l[(i, i)];
    }
    Ok(z)
}
