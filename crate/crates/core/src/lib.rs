//! Penalized least squares: the least squares, ridgeless, ridge and lasso
//! estimators, an exhaustive best-subset oracle, exact finite-sample risk
//! formulas, lasso risk bounds, and a Monte Carlo harness that checks the
//! closed forms against simulation.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! simulation layer and the command line tool use.

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod risk;
pub mod scalar;
pub mod simulate;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Dense row-major `f64` matrix.
pub type Matrix = linalg::Matrix<f64>;
/// Singular value decomposition over `f64`.
pub type SvdFactors = linalg::SvdFactors<f64>;
/// Response vector plus design matrix over `f64`.
pub type Dataset = estimators::Dataset<f64>;
/// Centering and scaling applied by [`estimators::standardize`].
pub type StandardizeTransform = estimators::StandardizeTransform<f64>;
/// Output of every estimator.
pub type FitResult = estimators::FitResult<f64>;
/// Coordinate descent options over `f64`.
pub type CdOptions = estimators::CdOptions<f64>;
/// Lasso regularization path over `f64`.
pub type LambdaPath = estimators::LambdaPath<f64>;
/// Bias, variance, MSE and MPR of one estimator configuration.
pub type RiskReport = risk::RiskReport<f64>;
/// Ridgeless estimand and error scale.
pub type Estimand = risk::Estimand<f64>;
/// Evaluated lasso risk bounds.
pub type BoundReport = bounds::BoundReport<f64>;
