//! Subcommand dispatch.

use penreg::bounds::{
    column_norm_bound, lambda_oracle, lasso_bound_report, lemma_audit, re_constant_bound, support_of, BoundInputs,
    BoundMode, ConeSpec, Kappa, LemmaAudit,
};
use penreg::estimators::{
    fit, fit_lasso_cd, lasso_path, recover_intercept, standardize, EstimatorSpec, FitResult, Penalty,
};
use penreg::linalg::svd;
use penreg::risk::{find_lambda_star, log_grid, theoretical_risk, LinearKind, RiskReport, RiskSource};
use penreg::simulate::{
    mc_bound_coverage, mc_loss_probe, mc_risk, sample_dgp, BoundConfig, CoverageReport, DgpSpec, KappaSource, McConfig,
};
use penreg::{Dataset, Estimand};

use crate::config::{BoundModeConfig, Command, Input, KappaConfig, McTask, RunConfig, DEFAULT_DELTA, DEFAULT_REPLICATIONS};
use crate::data::{column_names, load_csv};
use crate::report::{Record, Report};
use crate::CliError;

/// Executes the configured subcommand. Errors carry the subcommand name.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let command = cfg
        .command
        .ok_or_else(|| CliError::Validation("no subcommand given (fit, path, risk, bounds or mc)".into()))?;
    let records = match command {
        Command::Fit => run_fit(cfg),
        Command::Path => run_path(cfg),
        Command::Risk => run_risk(cfg),
        Command::Bounds => run_bounds(cfg),
        Command::Mc => run_mc(cfg),
    }
    .map_err(|e| e.context(command))?;
    Ok(Report { command, records })
}

/// Data plus, for simulated input, what generated it.
struct Loaded {
    data: Dataset,
    truth: Option<Truth>,
}

struct Truth {
    spec: DgpSpec,
    eps: Vec<f64>,
}

fn load(cfg: &RunConfig) -> Result<Loaded, CliError> {
    match &cfg.input {
        None => Err(CliError::Validation("no input: pass --input or an input section in the config".into())),
        Some(Input::Csv(c)) => Ok(Loaded { data: load_csv(&c.path, c.has_header, c.target.as_deref())?, truth: None }),
        Some(Input::Dgp(g)) => {
            let spec = g.to_spec(cfg.seed)?;
            let (data, eps) = sample_dgp(&spec, 0)?;
            Ok(Loaded { data, truth: Some(Truth { spec, eps }) })
        }
    }
}

fn dgp_spec(cfg: &RunConfig) -> Result<DgpSpec, CliError> {
    match &cfg.input {
        Some(Input::Dgp(g)) => g.to_spec(cfg.seed),
        _ => Err(CliError::Validation("Monte Carlo runs need a dgp input".into())),
    }
}

fn fit_record(res: &FitResult<f64>, names: &[String]) -> Record {
    let radius = match res.penalty {
        Penalty::Radius(r) => Some(r),
        _ => None,
    };
    Record::new()
        .put("estimator", res.kind.name())
        .opt_num("lambda", res.penalty.lambda())
        .put("radius", radius)
        .named("coefficients", names, &res.theta)
        .opt_num("intercept", res.intercept)
        .put("nonzeros", res.nonzeros())
        .num("l1_norm", res.l1_norm())
        .num("objective", res.objective)
        .put("iterations", res.iterations)
        .put("converged", res.converged)
}

fn run_fit(cfg: &RunConfig) -> Result<Vec<Record>, CliError> {
    let Loaded { data, .. } = load(cfg)?;
    let spec = cfg.estimator_spec()?;
    let res = if cfg.intercept { fit(&data, &spec)? } else { spec.fit_raw(&data)? };
    Ok(vec![fit_record(&res, &column_names(&data))])
}

fn run_path(cfg: &RunConfig) -> Result<Vec<Record>, CliError> {
    let Loaded { data, .. } = load(cfg)?;
    let names = column_names(&data);
    let n_lambda = cfg.path.n_lambda.unwrap_or(100);
    let ratio = cfg.path.ratio.unwrap_or(if data.n() > data.p() { 1e-3 } else { 1e-2 });
    let opts = cfg.cd_options()?;
    let (work, transform) = if cfg.intercept {
        let (s, t) = standardize(&data)?;
        (s, Some(t))
    } else {
        (data.clone(), None)
    };
    let path = lasso_path(&work, n_lambda, ratio, &opts)?;
    path.fits
        .into_iter()
        .map(|mut f| {
            if let Some(t) = &transform {
                f.theta = t.coefficients_to_original(&f.theta)?;
                f.intercept = Some(recover_intercept(&f.theta, t)?);
            }
            Ok(fit_record(&f, &names))
        })
        .collect()
}

fn risk_record(r: &RiskReport<f64>) -> Record {
    let (source, reps, mse_se, mpr_se) = match r.source {
        RiskSource::Theoretical => ("theoretical", None, None, None),
        RiskSource::Empirical { replications, mse_se, mpr_se } => {
            ("empirical", Some(replications), Some(mse_se), Some(mpr_se))
        }
    };
    Record::new()
        .put("estimator", r.estimator.as_str())
        .opt_num("lambda", r.lambda)
        .put("source", source)
        .put("replications", reps)
        .num("bias_norm_sq", r.bias_norm_sq)
        .num("trace_var", r.trace_var)
        .num("mse", r.mse)
        .opt_num("mse_se", mse_se)
        .num("pred_bias_sq", r.pred_bias_sq)
        .num("pred_var", r.pred_var)
        .num("mpr", r.mpr)
        .opt_num("mpr_se", mpr_se)
}

fn run_risk(cfg: &RunConfig) -> Result<Vec<Record>, CliError> {
    let Loaded { data, truth } = load(cfg)?;
    let x = &data.x;
    let est = match &truth {
        Some(t) => t.spec.estimand()?,
        None => {
            let theta0 = cfg.risk.theta0.as_ref().ok_or_else(|| {
                CliError::Validation("risk on CSV input needs risk.theta0 in the config".into())
            })?;
            let sigma = cfg
                .risk
                .sigma
                .ok_or_else(|| CliError::Validation("risk on CSV input needs risk.sigma in the config".into()))?;
            Estimand::fixed_design(x, theta0, sigma)?
        }
    };
    let mut out = Vec::new();
    if svd(x, 0.0)?.rank == x.cols() {
        out.push(risk_record(&theoretical_risk(LinearKind::Lse, x, &est)?));
    }
    let ridgeless = theoretical_risk(LinearKind::Ridgeless, x, &est)?;
    out.push(risk_record(&ridgeless));
    let mut lambdas = cfg.risk.lambdas.clone();
    if let Some(l) = cfg.estimator.lambda {
        if !lambdas.contains(&l) {
            lambdas.push(l);
        }
    }
    for l in lambdas {
        out.push(risk_record(&theoretical_risk(LinearKind::Ridge(l), x, &est)?));
    }
    if let Some(g) = cfg.risk.lambda_star_grid {
        let grid = log_grid(g.lo, g.hi, g.count)?;
        let star = find_lambda_star(x, &est, &grid)?;
        let star_mse = star.map(|l| theoretical_risk(LinearKind::Ridge(l), x, &est).map(|r| r.mse)).transpose()?;
        out.push(
            Record::new()
                .put("estimator", "lambda_star")
                .opt_num("lambda", star)
                .num("ridgeless_mse", ridgeless.mse)
                .opt_num("ridge_mse", star_mse),
        );
    }
    Ok(out)
}

fn bound_mode(m: BoundModeConfig) -> BoundMode {
    match m {
        BoundModeConfig::Deterministic => BoundMode::Deterministic,
        BoundModeConfig::Subgaussian => BoundMode::SubGaussian,
    }
}

fn mode_name(m: BoundMode) -> &'static str {
    match m {
        BoundMode::Deterministic => "deterministic",
        BoundMode::SubGaussian => "subgaussian",
    }
}

fn audit_records(audit: &LemmaAudit<f64>) -> impl Iterator<Item = Record> + '_ {
    audit.checks.iter().map(|c| {
        Record::new()
            .put("row", "audit")
            .put("check", c.name)
            .num("lhs", c.lhs)
            .num("rhs", c.rhs)
            .put("pass", c.pass)
    })
}

fn run_bounds(cfg: &RunConfig) -> Result<Vec<Record>, CliError> {
    let Loaded { data, truth } = load(cfg)?;
    let x = &data.x;
    let (n, p) = x.shape();
    let theta0 = match (&cfg.bounds.theta0, &truth) {
        (Some(t), _) => t.clone(),
        (None, Some(t)) => t.spec.theta0.clone(),
        (None, None) => return Err(CliError::Validation("bounds on CSV input need bounds.theta0".into())),
    };
    if theta0.len() != p {
        return Err(CliError::Validation(format!("theta0 has {} entries, design has {p} columns", theta0.len())));
    }
    let sigma = cfg.bounds.sigma.or(truth.as_ref().map(|t| t.spec.error.variance_proxy()));
    let eps = truth.as_ref().map(|t| t.eps.as_slice());
    let mode = bound_mode(cfg.bounds.mode);
    let delta = cfg.bounds.delta.unwrap_or(DEFAULT_DELTA);
    let cone = ConeSpec::lasso_error_cone(&theta0);
    let kappa = match cfg.bounds.kappa {
        KappaConfig::Exact(k) => Kappa::Exact(k),
        KappaConfig::Sampled { samples, refine_steps } => {
            Kappa::Sampled(re_constant_bound(x, &cone, samples, refine_steps, cfg.seed)?)
        }
    };
    let oracle = eps.map(|e| lambda_oracle(x, e)).transpose()?;
    let lambda = match mode {
        BoundMode::Deterministic => cfg.estimator.lambda.or(oracle).ok_or_else(|| {
            CliError::Validation("deterministic bounds need --lambda when the errors are unknown".into())
        })?,
        BoundMode::SubGaussian => f64::NAN,
    };
    if mode == BoundMode::SubGaussian && sigma.is_none() {
        return Err(CliError::Validation("sub-Gaussian bounds need bounds.sigma".into()));
    }
    let inputs = BoundInputs {
        lambda,
        s0: support_of(&theta0).len(),
        kappa,
        theta0_l1: theta0.iter().map(|v| v.abs()).sum(),
        c: column_norm_bound(x),
        sigma: sigma.unwrap_or(f64::NAN),
        delta,
        p,
        n,
    };
    let mut report = lasso_bound_report(&inputs, mode)?;
    let fitted = fit_lasso_cd(&data, report.lambda, &cfg.cd_options()?)?;
    let obs = report.observe(&fitted.theta, &theta0, x)?.clone();
    let mut out = vec![Record::new()
        .put("row", "bound")
        .put("mode", mode_name(mode))
        .num("lambda", report.lambda)
        .opt_num("lambda_oracle", oracle)
        .num("kappa", kappa.value())
        .put("kappa_provenance", kappa.provenance())
        .num("c", inputs.c)
        .num("sigma", inputs.sigma)
        .num("delta", delta)
        .put("s0", inputs.s0)
        .num("theta0_l1", inputs.theta0_l1)
        .num("lemma_pr_bound", report.lemma_pr_bound)
        .num("est_bound", report.est_bound)
        .num("pr_bound", report.pr_bound)
        .num("probability_floor", report.probability_floor)
        .num("est_risk", obs.est_risk)
        .num("pred_risk", obs.pred_risk)
        .put("cone_ok", obs.cone_ok)
        .put("lemma_pr_ok", obs.lemma_pr_ok)
        .put("est_ok", obs.est_ok)
        .put("pr_ok", obs.pr_ok)
        .put("nonzeros", fitted.nonzeros())
        .put("iterations", fitted.iterations)
        .put("converged", fitted.converged)];
    if let (Some(e), Some(o)) = (eps, oracle) {
        if fitted.converged && o > 0.0 && report.lambda >= o {
            out.extend(audit_records(&lemma_audit(&data, &fitted, &theta0, e)?));
        }
    }
    Ok(out)
}

fn coverage_record(r: &CoverageReport) -> Record {
    Record::new()
        .put("mode", mode_name(r.mode))
        .put("replications", r.replications)
        .put("violations", r.violations)
        .put("audit_failures", r.audit_failures)
        .put("nonconverged", r.nonconverged)
        .num("frequency", r.frequency)
        .num("ceiling", r.ceiling)
        .num("binomial_se", r.binomial_se)
        .put("pass", r.pass)
        .num("kappa", r.kappa.value())
        .put("kappa_provenance", r.kappa.provenance())
        .num("c", r.c)
        .num("sigma", r.sigma)
        .put("s0", r.s0)
        .num("mean_lambda", r.mean_lambda)
        .num("max_est_ratio", r.max_est_ratio)
        .num("max_pr_ratio", r.max_pr_ratio)
}

fn run_mc(cfg: &RunConfig) -> Result<Vec<Record>, CliError> {
    let spec = dgp_spec(cfg)?;
    let mc = McConfig {
        replications: cfg.mc.replications.unwrap_or(DEFAULT_REPLICATIONS),
        workers: cfg.mc.workers.unwrap_or(0),
        base_seed: cfg.seed,
    };
    match cfg.mc.task {
        McTask::Risk => {
            let est: EstimatorSpec<f64> = cfg.estimator_spec()?;
            let r = mc_risk(&spec, &est, &mc)?;
            let mut out = vec![risk_record(&r.empirical)
                .put("conditional_on_design", r.conditional_on_design)
                .put("nonconverged", r.nonconverged)
                .nums("target", &r.target)
                .nums("mean_theta", &r.mean_theta)
                .nums("theta_se", &r.theta_se)];
            out.extend(r.theoretical.as_ref().map(risk_record));
            Ok(out)
        }
        McTask::Coverage => {
            let bc = BoundConfig {
                mode: bound_mode(cfg.bounds.mode),
                kappa: match cfg.bounds.kappa {
                    KappaConfig::Exact(k) => KappaSource::Exact(k),
                    KappaConfig::Sampled { samples, refine_steps } => KappaSource::Sampled { samples, refine_steps },
                },
                delta: cfg.bounds.delta.unwrap_or(DEFAULT_DELTA),
                cd: cfg.cd_options()?,
            };
            Ok(vec![coverage_record(&mc_bound_coverage(&spec, &bc, &mc)?)])
        }
        McTask::LossProbe => {
            if cfg.mc.probes.is_empty() {
                return Err(CliError::Validation("loss_probe needs at least one entry in mc.probes".into()));
            }
            let probes = mc_loss_probe(&spec, &cfg.mc.probes, &mc)?;
            Ok(probes
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    Record::new()
                        .put("probe", i + 1)
                        .num("mean_loss", l.mean_loss)
                        .num("loss_se", l.loss_se)
                        .num("mean_excess", l.mean_excess)
                        .num("excess_se", l.excess_se)
                        .num("mpr", l.mpr)
                        .num("sigma_sq", l.sigma_sq)
                })
                .collect())
        }
    }
}
