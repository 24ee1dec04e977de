use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{dot, norm2, Scalar};

const MAX_SWEEPS: usize = 100;

/// Full singular value decomposition `M = U S V'` with a numerical rank.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors<T> {
    /// `n x n` orthogonal.
    pub u: Matrix<T>,
    /// `min(n, p)` values, non-increasing, all non-negative.
    pub singular_values: Vec<T>,
    /// `p x p` orthogonal.
    pub v: Matrix<T>,
    /// Number of singular values strictly above `tol`.
    pub rank: usize,
    /// Truncation threshold actually applied.
    pub tol: T,
}

/// Default truncation threshold `s_1 * max(n, p) * 2^-45`, floored at machine
/// epsilon for scalars coarser than `f64`.
pub fn default_tolerance<T: Scalar>(s1: T, rows: usize, cols: usize) -> T {
    let rel = T::lit(2f64.powi(-45)).max(T::epsilon());
    s1 * T::from_usize_lossy(rows.max(cols)) * rel
}

/// Computes the SVD by one-sided Jacobi rotations. `tol = 0` selects
/// [`default_tolerance`].
///
/// Right singular vectors are signed so that their first non-negligible
/// entry is positive, which makes the factors reproducible.
pub fn svd<T: Scalar>(m: &Matrix<T>, tol: T) -> Result<SvdFactors<T>> {
    if !(tol >= T::zero()) || !tol.is_finite() {
        return Err(Error::invalid("SVD tolerance must be finite and non-negative"));
    }
    if m.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("SVD input".into()));
    }
    let (n, p) = m.shape();
    let (u, s, v) = if n >= p {
        jacobi(m)?
    } else {
        // M' = U2 S V2'  =>  M = V2 S U2'
        let (u2, s, v2) = jacobi(&m.transpose())?;
        (v2, s, u2)
    };
    let mut f = SvdFactors { u, singular_values: s, v, rank: 0, tol };
    f.fix_signs();
    let s1 = f.singular_values.first().copied().unwrap_or_else(T::zero);
    f.tol = if tol == T::zero() { default_tolerance(s1, n, p) } else { tol };
    f.rank = f.singular_values.iter().filter(|&&s| s > f.tol).count();
    Ok(f)
}

/// One-sided Jacobi on an `n x m` matrix with `n >= m`.
fn jacobi<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, Vec<T>, Matrix<T>)> {
    let (n, m) = a.shape();
    let mut cols = a.columns();
    let mut vcols: Vec<Vec<T>> = (0..m)
        .map(|j| (0..m).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let eps = T::epsilon();
    // Columns this small are numerically zero; rotating them against each
    // other only shuffles rounding noise and can keep the sweep from settling.
    let negligible = {
        let f = eps * norm2(a.as_slice());
        f * f
    };

    let mut converged = m < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..m {
            for j in i + 1..m {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(T::one()));
                let c = T::one() / t.hypot(T::one());
                let s = c * t;
                rotate(&mut cols, i, j, c, s);
                rotate(&mut vcols, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNonConvergence { rows: n, cols: m });
    }

    let norms: Vec<T> = cols.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap_or(std::cmp::Ordering::Equal));

    let s: Vec<T> = order.iter().map(|&k| norms[k]).collect();
    let s1 = s.first().copied().unwrap_or_else(T::zero);
    let mut v = Matrix::zeros(m, m);
    for (j, &k) in order.iter().enumerate() {
        v.set_column(j, &vcols[k]);
    }

    // Left vectors: normalized columns where the singular value is not
    // negligible, completed to an orthonormal basis of R^n.
    let floor = s1 * eps * eps;
    let mut basis: Vec<Option<Vec<T>>> = vec![None; n];
    let mut accepted: Vec<Vec<T>> = Vec::with_capacity(n);
    for (j, &k) in order.iter().enumerate() {
        if s[j] > floor && s[j] > T::zero() {
            let cand: Vec<T> = cols[k].iter().map(|&x| x / s[j]).collect();
            if let Some(q) = orthonormalize(cand, &accepted) {
                accepted.push(q.clone());
                basis[j] = Some(q);
            }
        }
    }
    // Complete with coordinate vectors in order. While a slot is open, some
    // coordinate keeps at least 1/n of its squared norm after projection and
    // projections only shrink, so a 1/(2n) threshold never runs out.
    let keep = (T::one() / T::from_usize_lossy(2 * n)).sqrt();
    let mut unit = 0;
    for slot in basis.iter_mut().filter(|b| b.is_none()) {
        loop {
            if unit >= n {
                return Err(Error::SvdNonConvergence { rows: n, cols: m });
            }
            let mut e = vec![T::zero(); n];
            e[unit] = T::one();
            unit += 1;
            let r = project_out(e, &accepted);
            let nr = norm2(&r);
            if nr >= keep {
                let q: Vec<T> = r.into_iter().map(|x| x / nr).collect();
                accepted.push(q.clone());
                *slot = Some(q);
                break;
            }
        }
    }
    let mut u = Matrix::zeros(n, n);
    for (j, b) in basis.into_iter().enumerate() {
        u.set_column(j, &b.expect("every slot filled"));
    }
    Ok((u, s, v))
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(j);
    for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
        let xi = *x;
        *x = c * xi - s * *y;
        *y = s * xi + c * *y;
    }
}

fn project_out<T: Scalar>(mut v: Vec<T>, basis: &[Vec<T>]) -> Vec<T> {
    for _ in 0..2 {
        for q in basis {
            let c = dot(&v, q);
            for (x, &qi) in v.iter_mut().zip(q) {
                *x -= c * qi;
            }
        }
    }
    v
}

/// Two passes of Gram-Schmidt against `basis`; `None` if too little of the
/// candidate survives.
fn orthonormalize<T: Scalar>(cand: Vec<T>, basis: &[Vec<T>]) -> Option<Vec<T>> {
    let start = norm2(&cand);
    let cand = project_out(cand, basis);
    let nrm = norm2(&cand);
    if nrm <= start * T::lit(0.5) || nrm == T::zero() {
        return None;
    }
    Some(cand.into_iter().map(|x| x / nrm).collect())
}

impl<T: Scalar> SvdFactors<T> {
    fn fix_signs(&mut self) {
        let p = self.v.rows();
        let n = self.u.rows();
        let thresh = T::lit(1e3) * T::epsilon();
        for j in 0..self.v.cols() {
            let first = (0..p).map(|i| self.v[(i, j)]).find(|x| x.abs() > thresh);
            if first.is_some_and(|x| x < T::zero()) {
                for i in 0..p {
                    self.v[(i, j)] = -self.v[(i, j)];
                }
                if j < self.singular_values.len() {
                    for i in 0..n {
                        self.u[(i, j)] = -self.u[(i, j)];
                    }
                }
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    pub fn largest(&self) -> T {
        self.singular_values.first().copied().unwrap_or_else(T::zero)
    }

    /// Eigenvalues `s_j^2 / n` of `X'X / n` for the retained directions.
    pub fn gram_eigenvalues(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.rows());
        self.singular_values[..self.rank].iter().map(|&s| s * s / n).collect()
    }

    pub fn u_col(&self, j: usize) -> Vec<T> {
        self.u.column(j)
    }

    pub fn v_col(&self, j: usize) -> Vec<T> {
        self.v.column(j)
    }

    /// `U S V'` using every singular value, truncated or not.
    pub fn reconstruct(&self) -> Matrix<T> {
        let (n, p) = (self.rows(), self.cols());
        let mut m = Matrix::zeros(n, p);
        for (j, &s) in self.singular_values.iter().enumerate() {
            for i in 0..n {
                let us = self.u[(i, j)] * s;
                for k in 0..p {
                    m[(i, k)] += us * self.v[(k, j)];
                }
            }
        }
        m
    }

    /// `V S^+ U'` over the retained singular values.
    pub fn pinv(&self) -> Matrix<T> {
        let (n, p) = (self.rows(), self.cols());
        let mut out = Matrix::zeros(p, n);
        for j in 0..self.rank {
            let inv = T::one() / self.singular_values[j];
            for k in 0..p {
                let vk = self.v[(k, j)] * inv;
                for i in 0..n {
                    out[(k, i)] += vk * self.u[(i, j)];
                }
            }
        }
        out
    }

    /// `A^+ b`, the minimum-norm least squares solution.
    pub fn solve_min_norm(&self, b: &[T]) -> Result<Vec<T>> {
        self.spectral_apply(b, |s| T::one() / s)
    }

    /// `sum_j f(s_j) v_j u_j' b` over the retained singular values.
    pub fn spectral_apply(&self, b: &[T], f: impl Fn(T) -> T) -> Result<Vec<T>> {
        if b.len() != self.rows() {
            return Err(Error::dims(format!(
                "right-hand side of length {} for a system with {} rows",
                b.len(),
                self.rows()
            )));
        }
        let p = self.cols();
        let mut x = vec![T::zero(); p];
        for j in 0..self.rank {
            let coef = self.u.dot_column(j, b) * f(self.singular_values[j]);
            for (k, xk) in x.iter_mut().enumerate() {
                *xk += coef * self.v[(k, j)];
            }
        }
        Ok(x)
    }

    /// Orthogonal projector onto one of the four fundamental subspaces.
    pub fn projector(&self, kind: ProjectorKind) -> Matrix<T> {
        let (basis, dim) = match kind {
            ProjectorKind::RangeXt | ProjectorKind::KerX => (&self.v, self.cols()),
            ProjectorKind::RangeX | ProjectorKind::KerXt => (&self.u, self.rows()),
        };
        let mut pr = Matrix::zeros(dim, dim);
        for j in 0..self.rank {
            for a in 0..dim {
                let ba = basis[(a, j)];
                for b in 0..dim {
                    pr[(a, b)] += ba * basis[(b, j)];
                }
            }
        }
        match kind {
            ProjectorKind::RangeXt | ProjectorKind::RangeX => pr,
            ProjectorKind::KerX | ProjectorKind::KerXt => {
                Matrix::identity(dim).sub(&pr).expect("square shapes agree")
            }
        }
    }
}

/// The four orthogonal projectors attached to a matrix `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectorKind {
    /// Onto the row space, `X^+ X`.
    RangeXt,
    /// Onto the null space, `I - X^+ X`.
    KerX,
    /// Onto the column space, `X X^+`.
    RangeX,
    /// Onto the left null space, `I - X X^+`.
    KerXt,
}

pub fn pinv<T: Scalar>(m: &Matrix<T>, tol: T) -> Result<Matrix<T>> {
    Ok(svd(m, tol)?.pinv())
}

pub fn projector<T: Scalar>(m: &Matrix<T>, kind: ProjectorKind, tol: T) -> Result<Matrix<T>> {
    Ok(svd(m, tol)?.projector(kind))
}

pub fn min_norm_solve<T: Scalar>(a: &Matrix<T>, b: &[T], tol: T) -> Result<Vec<T>> {
    if b.len() != a.rows() {
        return Err(Error::dims(format!(
            "right-hand side of length {} for a {}x{} system",
            b.len(),
            a.rows(),
            a.cols()
        )));
    }
    svd(a, tol)?.solve_min_norm(b)
}

/// Rayleigh quotients `v_j' M v_j` along the right singular vectors of a
/// symmetric `M`. For symmetric input these are its eigenvalues with sign.
pub fn symmetric_spectrum<T: Scalar>(m: &Matrix<T>) -> Result<Vec<T>> {
    if m.rows() != m.cols() {
        return Err(Error::dims("symmetric spectrum needs a square matrix"));
    }
    let f = svd(m, T::zero())?;
    (0..m.cols())
        .map(|j| {
            let v = f.v_col(j);
            Ok(dot(&v, &m.matvec(&v)?))
        })
        .collect()
}
