//! Dense linear algebra: the matrix type, a Jacobi SVD, the Moore-Penrose
//! inverse, the four fundamental projectors and minimum-norm solves.

mod chol;
mod matrix;
mod svd;

pub use chol::{cholesky, solve_spd};
pub use matrix::Matrix;
pub use svd::{
    default_tolerance, min_norm_solve, pinv, projector, svd, symmetric_spectrum, ProjectorKind,
    SvdFactors,
};
