//! Turning a config cell (problem, noise level, seed, method, rule) into a
//! solved instance.

use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use super::config::{ExperimentConfig, Method, RuleKind};
use super::CliError;
use crate::error::Error;
use crate::problems::{
    build_problem_with, noise_for, read_problem_dir, ProblemKind, Spacing, TestProblem,
};
use crate::regularization::{
    lsqr_baseline, spr_solve, tikhonov_opt, twsvd_solve, RunRecord, SprConfig, StopFlag,
    StoppingRule,
};
use crate::weights::WeightMatrix;
use crate::wgkb::BidiagOptions;
use crate::wsvd::Wsvd;

/// One right-hand side of one problem, with whatever ground truth is known.
#[derive(Debug, Clone)]
pub struct Case {
    pub name: String,
    pub a: Arc<DMatrix<f64>>,
    pub weight: WeightMatrix,
    pub b: DVector<f64>,
    pub x_true: Option<DVector<f64>>,
    pub noise_norm: Option<f64>,
    pub epsilon: f64,
    pub seed: u64,
}

pub fn spacing(cfg: &ExperimentConfig) -> Spacing {
    if cfg.paper_h {
        Spacing::Literal
    } else {
        Spacing::Nodes
    }
}

pub fn build(cfg: &ExperimentConfig, kind: ProblemKind) -> Result<TestProblem, CliError> {
    let (m, n) = cfg.dims(kind);
    build_problem_with(kind, m, n, spacing(cfg)).map_err(CliError::Config)
}

/// A generated problem whose matrix is shared between its noisy cases.
#[derive(Debug, Clone)]
pub struct Shared {
    pub kind: ProblemKind,
    pub a: Arc<DMatrix<f64>>,
    pub weight: WeightMatrix,
    pub x_true: DVector<f64>,
    pub b_exact: DVector<f64>,
}

impl From<TestProblem> for Shared {
    fn from(p: TestProblem) -> Self {
        Self {
            kind: p.kind,
            a: Arc::new(p.a),
            weight: p.weight,
            x_true: p.x_true,
            b_exact: p.b_exact,
        }
    }
}

pub fn noisy_case(shared: &Shared, epsilon: f64, seed: u64) -> Result<Case, CliError> {
    let data = noise_for(&shared.b_exact, epsilon, seed).map_err(CliError::Config)?;
    Ok(Case {
        name: shared.kind.name().to_string(),
        a: Arc::clone(&shared.a),
        weight: shared.weight.clone(),
        noise_norm: (epsilon > 0.0).then(|| data.noise_norm()),
        b: data.b,
        x_true: Some(shared.x_true.clone()),
        epsilon,
        seed,
    })
}

pub fn load_case(dir: &std::path::Path) -> Result<Case, CliError> {
    // an unreadable or malformed input directory is a configuration problem
    let data = read_problem_dir(dir).map_err(CliError::Config)?;
    let weight = WeightMatrix::diagonal(data.weights).map_err(CliError::Config)?;
    Ok(Case {
        name: data.meta.name,
        a: Arc::new(data.a),
        weight,
        b: data.b,
        x_true: data.x_true,
        noise_norm: data.e.map(|e| e.norm()).filter(|&v| v > 0.0),
        epsilon: data.meta.epsilon,
        seed: data.meta.seed,
    })
}

/// Builds the stopping rule, failing as a configuration error when the case
/// lacks what the rule needs.
pub fn make_rule(kind: RuleKind, case: &Case, tau: f64) -> Result<StoppingRule, CliError> {
    match kind {
        RuleKind::Dp => {
            let noise = case.noise_norm.ok_or_else(|| {
                CliError::Config(Error::InvalidParameter(
                    "the discrepancy principle needs the noise norm, which is unknown for this problem"
                        .into(),
                ))
            })?;
            StoppingRule::dp_with_tau(tau, noise).map_err(CliError::Config)
        }
        RuleKind::Lc => Ok(StoppingRule::LCurve),
        RuleKind::Oracle => {
            let x = case.x_true.clone().ok_or_else(|| {
                CliError::Config(Error::InvalidParameter(
                    "the oracle rule needs the true solution, which is unknown for this problem"
                        .into(),
                ))
            })?;
            StoppingRule::oracle(x).map_err(CliError::Config)
        }
        RuleKind::Maxiter => Ok(StoppingRule::MaxIter),
    }
}

/// Result of one (case, method, rule) run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub x: DVector<f64>,
    pub stop_k: Option<usize>,
    pub rel_err: Option<f64>,
    pub flag: Option<StopFlag>,
    pub lambda: Option<f64>,
    pub record: Option<RunRecord>,
    pub wall: Duration,
}

pub fn run(
    case: &Case,
    method: Method,
    rule: &StoppingRule,
    cfg: &ExperimentConfig,
    wsvd: Option<&Wsvd>,
) -> Result<Outcome, CliError> {
    let start = Instant::now();
    if method == Method::TikhOpt && !matches!(rule, StoppingRule::Oracle { .. }) {
        return Err(CliError::Config(Error::InvalidParameter(
            "tikh-opt chooses its parameter with the true solution; use --rule oracle".into(),
        )));
    }
    let mut spr = SprConfig::new(cfg.max_iter);
    spr.bidiag = BidiagOptions {
        reorth: cfg.reorth,
        ..BidiagOptions::default()
    };
    spr.reference = case.x_true.clone();

    let owned;
    let factorization = if method.needs_wsvd() {
        Some(match wsvd {
            Some(f) => f,
            None => {
                owned = Wsvd::compute(&case.a, &case.weight)?;
                &owned
            }
        })
    } else {
        None
    };

    let sol = match (method, factorization) {
        (Method::Wlsqr, _) => spr_solve(&case.a, &case.weight, &case.b, rule, &spr)?,
        (Method::Lsqr, _) => lsqr_baseline(&case.a, &case.b, rule, &spr)?,
        (Method::Twsvd, Some(f)) => {
            twsvd_solve(f, &case.b, rule, cfg.max_iter, case.x_true.as_ref())?
        }
        (Method::TikhOpt, Some(f)) => {
            let StoppingRule::Oracle { x_true } = rule else {
                unreachable!("checked above");
            };
            let t = tikhonov_opt(f, &case.b, x_true)?;
            return Ok(Outcome {
                x: t.x,
                stop_k: None,
                rel_err: Some(t.relative_error),
                flag: None,
                lambda: Some(t.lambda),
                record: None,
                wall: start.elapsed(),
            });
        }
        (Method::Twsvd | Method::TikhOpt, None) => unreachable!("factorization computed above"),
    };
    Ok(Outcome {
        stop_k: Some(sol.record.stop.k),
        rel_err: sol.record.stop_error(),
        flag: sol.record.stop.flag,
        lambda: None,
        record: Some(sol.record),
        x: sol.x,
        wall: start.elapsed(),
    })
}
