//! Lasso finite-sample bounds: the oracle penalty level, the cone
//! `C_alpha(S)`, a sampled restricted-eigenvalue constant, the deterministic
//! inequalities every lasso solution obeys once the penalty dominates the
//! noise, and the sub-Gaussian slow and fast rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{Dataset, EstimatorKind, FitResult};
use crate::linalg::Matrix;
use crate::scalar::{norm1, norm2, norm2_sq, norm_inf, sub, Scalar};

/// Relative slack for the audit inequalities, covering solver tolerance.
const AUDIT_SLACK: f64 = 1e-9;

/// The cone `{v : ||v_{S^c}||_1 <= alpha ||v_S||_1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec<T> {
    pub support: Vec<usize>,
    pub alpha: T,
}

impl<T: Scalar> ConeSpec<T> {
    pub fn new(mut support: Vec<usize>, alpha: T, p: usize) -> Result<Self> {
        if !(alpha >= T::one()) {
            return Err(Error::invalid(format!("cone parameter must be >= 1, got {alpha}")));
        }
        support.sort_unstable();
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("cone support has repeated indices"));
        }
        if let Some(&j) = support.iter().find(|&&j| j >= p) {
            return Err(Error::invalid(format!("support index {j} out of range for p = {p}")));
        }
        Ok(ConeSpec { support, alpha })
    }

    /// `C_3(supp(theta0))`.
    pub fn lasso_error_cone(theta0: &[T]) -> Self {
        ConeSpec { support: support_of(theta0), alpha: T::lit(3.0) }
    }

    /// `(||v_S||_1, ||v_{S^c}||_1)`.
    fn split_l1(&self, v: &[T]) -> (T, T) {
        let mut on = T::zero();
        let mut off = T::zero();
        let mut it = self.support.iter().peekable();
        for (j, &x) in v.iter().enumerate() {
            if it.peek() == Some(&&j) {
                it.next();
                on += x.abs();
            } else {
                off += x.abs();
            }
        }
        (on, off)
    }
}

pub fn support_of<T: Scalar>(v: &[T]) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, &x)| x != T::zero()).map(|(j, _)| j).collect()
}

pub fn cone_membership<T: Scalar>(v: &[T], cone: &ConeSpec<T>) -> bool {
    let (on, off) = cone.split_l1(v);
    off <= cone.alpha * on + T::lit(1e-12)
}

/// `2 ||X' eps / n||_inf`, the smallest penalty covered by the deterministic
/// lasso inequalities.
pub fn lambda_oracle<T: Scalar>(x: &Matrix<T>, eps: &[T]) -> Result<T> {
    let g = x.tmatvec(eps)?;
    Ok(T::lit(2.0) * norm_inf(&g) / T::from_usize_lossy(x.rows()))
}

/// `max_j ||X_j||_2 / sqrt(n)`.
pub fn column_norm_bound<T: Scalar>(x: &Matrix<T>) -> T {
    let rn = T::from_usize_lossy(x.rows()).sqrt();
    (0..x.cols()).fold(T::zero(), |m, j| m.max(norm2(&x.column(j)) / rn))
}

/// `2 C sigma (sqrt(2 ln p / n) + delta)`.
pub fn subgaussian_lambda<T: Scalar>(c: T, sigma: T, n: usize, p: usize, delta: T) -> T {
    T::lit(2.0) * c * sigma * (rate_root::<T>(n, p) + delta)
}

fn rate_root<T: Scalar>(n: usize, p: usize) -> T {
    (T::lit(2.0) * T::from_usize_lossy(p).ln() / T::from_usize_lossy(n)).sqrt()
}

fn quotient<T: Scalar>(x: &Matrix<T>, eta: &[T]) -> T {
    let xe = x.matvec(eta).expect("dimensions checked by caller");
    norm2_sq(&xe) / (T::from_usize_lossy(x.rows()) * norm2_sq(eta))
}

/// Pulls `v` back into the cone by shrinking its off-support part; `None` if
/// nothing of the on-support part is left.
fn project_into_cone<T: Scalar>(mut v: Vec<T>, cone: &ConeSpec<T>) -> Option<Vec<T>> {
    let (on, off) = cone.split_l1(&v);
    if !(on > T::zero()) {
        return None;
    }
    let cap = cone.alpha * on;
    if off > cap {
        let shrink = cap / off;
        for (j, x) in v.iter_mut().enumerate() {
            if cone.support.binary_search(&j).is_err() {
                *x *= shrink;
            }
        }
    }
    let nrm = norm2(&v);
    Some(v.into_iter().map(|x| x / nrm).collect())
}

/// Upper estimate of `min ||X eta||^2 / (n ||eta||^2)` over the cone: random
/// unit vectors in the cone followed by coordinate-wise local search from
/// the best few. The true restricted eigenvalue is at most the result.
pub fn re_constant_bound<T: Scalar>(
    x: &Matrix<T>,
    cone: &ConeSpec<T>,
    n_samples: usize,
    refine_steps: usize,
    seed: u64,
) -> Result<T> {
    let p = x.cols();
    if n_samples == 0 {
        return Err(Error::invalid("need at least one cone sample"));
    }
    if cone.support.is_empty() {
        return Err(Error::Precondition("cone with empty support contains only the zero vector".into()));
    }
    if cone.support.iter().any(|&j| j >= p) {
        return Err(Error::dims("cone support exceeds design width"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let mut v = vec![T::zero(); p];
        let mut off_dir = vec![T::zero(); p];
        for j in 0..p {
            let g: f64 = rng.sample(StandardNormal);
            if cone.support.binary_search(&j).is_ok() {
                v[j] = T::lit(g);
            } else {
                off_dir[j] = T::lit(g);
            }
        }
        let frac = T::lit(rng.random::<f64>());
        let (on, _) = cone.split_l1(&v);
        let off_l1 = norm1(&off_dir);
        if off_l1 > T::zero() {
            let scale = frac * cone.alpha * on / off_l1;
            for (vj, &d) in v.iter_mut().zip(&off_dir) {
                if d != T::zero() {
                    *vj = d * scale;
                }
            }
        }
        if let Some(u) = project_into_cone(v, cone) {
            candidates.push(u);
        }
    }
    if candidates.is_empty() {
        return Err(Error::Precondition("no usable cone sample".into()));
    }

    let mut scored: Vec<(T, Vec<T>)> =
        candidates.into_par_iter().map(|c| (quotient(x, &c), c)).collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let keep = scored.len().min(4);
    let best = scored
        .into_iter()
        .take(keep)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(q, c)| refine(x, cone, c, q, refine_steps))
        .reduce(T::infinity, T::min);
    Ok(best)
}

fn refine<T: Scalar>(x: &Matrix<T>, cone: &ConeSpec<T>, mut eta: Vec<T>, mut q: T, steps: usize) -> T {
    let mut h = T::lit(0.5);
    for _ in 0..steps {
        let mut improved = false;
        for j in 0..eta.len() {
            for sign in [T::one(), -T::one()] {
                let mut cand = eta.clone();
                cand[j] += sign * h;
                if let Some(c) = project_into_cone(cand, cone) {
                    let cq = quotient(x, &c);
                    if cq < q {
                        q = cq;
                        eta = c;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            h = h * T::lit(0.5);
        }
    }
    q
}

/// How the restricted eigenvalue constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa<T> {
    /// Known from the construction of the design.
    Exact(T),
    /// From [`re_constant_bound`]; an upper estimate, so bounds computed
    /// with it may be optimistic.
    Sampled(T),
}

impl<T: Scalar> Kappa<T> {
    pub fn value(&self) -> T {
        match *self {
            Kappa::Exact(k) | Kappa::Sampled(k) => k,
        }
    }

    pub fn provenance(&self) -> &'static str {
        match self {
            Kappa::Exact(_) => "exact",
            Kappa::Sampled(_) => "sampled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs<T> {
    /// Penalty for deterministic mode; replaced by the sub-Gaussian choice in
    /// that mode.
    pub lambda: T,
    pub s0: usize,
    pub kappa: Kappa<T>,
    pub theta0_l1: T,
    /// Column-norm bound `max_j ||X_j|| / sqrt(n) <= C`.
    pub c: T,
    /// Variance proxy scale of the errors.
    pub sigma: T,
    pub delta: T,
    pub p: usize,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// Bounds that hold whenever `lambda >= lambda_oracle`.
    Deterministic,
    /// Penalty from the sub-Gaussian tail; bounds hold with probability at
    /// least `1 - 2 exp(-n delta^2 / 2)`.
    SubGaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedRisk<T> {
    pub est_risk: T,
    pub pred_risk: T,
    pub cone_ok: bool,
    pub lemma_pr_ok: bool,
    pub est_ok: bool,
    pub pr_ok: bool,
}

impl<T> ObservedRisk<T> {
    pub fn all_ok(&self) -> bool {
        self.cone_ok && self.lemma_pr_ok && self.est_ok && self.pr_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub mode: BoundMode,
    pub lambda: T,
    pub kappa: Kappa<T>,
    /// `12 lambda ||theta0||_1`; in sub-Gaussian mode the slow rate
    /// `24 C ||theta0||_1 sigma (sqrt(2 ln p / n) + delta)`.
    pub lemma_pr_bound: T,
    pub est_bound: T,
    pub pr_bound: T,
    pub probability_floor: T,
    pub observed: Option<ObservedRisk<T>>,
}

pub fn lasso_bound_report<T: Scalar>(inputs: &BoundInputs<T>, mode: BoundMode) -> Result<BoundReport<T>> {
    let k = inputs.kappa.value();
    if !(k > T::zero()) {
        return Err(Error::invalid("kappa must be positive"));
    }
    if !(inputs.theta0_l1 >= T::zero()) || inputs.n == 0 || inputs.p == 0 {
        return Err(Error::invalid("bound inputs need ||theta0||_1 >= 0 and n, p >= 1"));
    }
    let s0 = T::from_usize_lossy(inputs.s0);
    let nine = T::lit(9.0);
    match mode {
        BoundMode::Deterministic => {
            let l = inputs.lambda;
            if !(l > T::zero()) {
                return Err(Error::invalid("lambda must be positive"));
            }
            Ok(BoundReport {
                mode,
                lambda: l,
                kappa: inputs.kappa,
                lemma_pr_bound: T::lit(12.0) * l * inputs.theta0_l1,
                est_bound: nine * s0 * l * l / (k * k),
                pr_bound: nine * s0 * l * l / k,
                probability_floor: T::one(),
                observed: None,
            })
        }
        BoundMode::SubGaussian => {
            let (c, sigma, delta) = (inputs.c, inputs.sigma, inputs.delta);
            if !(c > T::zero() && sigma > T::zero() && delta > T::zero()) {
                return Err(Error::invalid("C, sigma and delta must be positive"));
            }
            let root: T = rate_root(inputs.n, inputs.p);
            let rate = root * root + delta * delta;
            let fast = T::lit(72.0) * c * c * sigma * sigma * s0 * rate;
            let nf = T::from_usize_lossy(inputs.n);
            Ok(BoundReport {
                mode,
                lambda: subgaussian_lambda(c, sigma, inputs.n, inputs.p, delta),
                kappa: inputs.kappa,
                lemma_pr_bound: T::lit(24.0) * c * inputs.theta0_l1 * sigma * (root + delta),
                est_bound: fast / (k * k),
                pr_bound: fast / k,
                probability_floor: T::one() - T::lit(2.0) * (-nf * delta * delta / T::lit(2.0)).exp(),
                observed: None,
            })
        }
    }
}

fn within<T: Scalar>(lhs: T, rhs: T) -> bool {
    lhs <= rhs + T::lit(AUDIT_SLACK) * rhs.abs().max(T::one())
}

impl<T: Scalar> BoundReport<T> {
    /// Records the realized risks of a fit against the bounds.
    pub fn observe(&mut self, theta_hat: &[T], theta0: &[T], x: &Matrix<T>) -> Result<&ObservedRisk<T>> {
        let (est, pred) = crate::risk::empirical_risks(theta_hat, theta0, x)?;
        let eta = sub(theta_hat, theta0);
        let cone = ConeSpec::lasso_error_cone(theta0);
        self.observed = Some(ObservedRisk {
            est_risk: est,
            pred_risk: pred,
            cone_ok: cone_membership(&eta, &cone),
            lemma_pr_ok: within(pred, self.lemma_pr_bound),
            est_ok: within(est, self.est_bound),
            pr_ok: within(pred, self.pr_bound),
        });
        Ok(self.observed.as_ref().expect("just set"))
    }
}

/// One inequality of the audit.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditCheck<T> {
    pub name: &'static str,
    pub lhs: T,
    pub rhs: T,
    pub pass: bool,
}

impl<T: Scalar> AuditCheck<T> {
    fn new(name: &'static str, lhs: T, rhs: T) -> Self {
        AuditCheck { name, lhs, rhs, pass: within(lhs, rhs) }
    }

    pub fn slack(&self) -> T {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaAudit<T> {
    pub lambda: T,
    pub lambda_oracle: T,
    pub checks: Vec<AuditCheck<T>>,
}

impl<T> LemmaAudit<T> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Checks the five deterministic consequences of `lambda >= 2||X'eps/n||_inf`
/// on a lasso fit of `y = X theta0 + eps`.
pub fn lemma_audit<T: Scalar>(d: &Dataset<T>, fit: &FitResult<T>, theta0: &[T], eps: &[T]) -> Result<LemmaAudit<T>> {
    if fit.kind != EstimatorKind::Lasso {
        return Err(Error::Precondition("the audit applies to lasso fits".into()));
    }
    let lambda = fit
        .penalty
        .lambda()
        .ok_or_else(|| Error::Precondition("lasso fit carries no penalty".into()))?;
    if !fit.converged {
        return Err(Error::Precondition("lasso fit did not converge".into()));
    }
    if theta0.len() != d.p() || eps.len() != d.n() || fit.theta.len() != d.p() {
        return Err(Error::dims("audit inputs do not match the dataset"));
    }
    let model = d.x.matvec(theta0)?;
    let scale = norm_inf(&d.y).max(T::one());
    let gap = d.y.iter().zip(&model).zip(eps).fold(T::zero(), |m, ((&y, &f), &e)| m.max((y - f - e).abs()));
    if gap > T::lit(1e-10) * scale {
        return Err(Error::invalid(format!("y differs from X theta0 + eps by {gap}")));
    }
    let oracle = lambda_oracle(&d.x, eps)?;
    if !(oracle > T::zero()) {
        return Err(Error::Precondition("noise is orthogonal to every column; oracle penalty is 0".into()));
    }
    if lambda < oracle {
        return Err(Error::Precondition(format!("lambda {lambda} is below the oracle level {oracle}")));
    }

    let n = T::from_usize_lossy(d.n());
    let eta = sub(&fit.theta, theta0);
    let xeta = d.x.matvec(&eta)?;
    let pr = norm2_sq(&xeta) / n;
    let t0 = norm1(theta0);
    let s0 = T::from_usize_lossy(support_of(theta0).len());
    let cone = ConeSpec::lasso_error_cone(theta0);
    let (on, off) = cone.split_l1(&eta);

    let checks = vec![
        AuditCheck::new("predictive_risk", pr, T::lit(12.0) * lambda * t0),
        AuditCheck::new("theta_l1", norm1(&fit.theta), T::lit(3.0) * t0),
        AuditCheck::new("error_l1", norm1(&eta), T::lit(4.0) * t0),
        AuditCheck::new("cone", off, T::lit(3.0) * on),
        AuditCheck::new("prediction_vs_l2", pr, T::lit(3.0) * s0.sqrt() * lambda * norm2(&eta)),
    ];
    Ok(LemmaAudit { lambda, lambda_oracle: oracle, checks })
}
