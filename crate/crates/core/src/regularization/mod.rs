//! Regularization by early stopping of weighted LSQR, plus the baselines it
//! is measured against.
//!
//! [`spr_solve`] runs WLSQR with a [`StoppingRule`] attached. The discrepancy
//! principle stops the loop as soon as it fires; the L-curve and oracle rules
//! look at the whole history, so they run to `max_iter` (or termination) and
//! then pick an iterate retrospectively.

mod rules;
mod tikhonov;

pub use rules::{
    stop_dp, stop_lcurve, stop_oracle, DpStop, LCurveCorner, StopFlag, LCURVE_DEDUP_TOL,
    LCURVE_FLAT_TOL,
};
pub use tikhonov::{tikhonov_error, tikhonov_opt, twsvd_solve, TikhonovOpt};

use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::weights::WeightMatrix;
use crate::wgkb::BidiagOptions;
use crate::wlsqr::{IterationRecord, Wlsqr};

pub const DEFAULT_TAU: f64 = 1.01;

#[derive(Debug, Clone, PartialEq)]
pub enum StoppingRule {
    /// Discrepancy principle with safety factor `tau > 1` and known `||e||_2`.
    Dp { tau: f64, noise_norm: f64 },
    /// Corner of the `(log ||A x_k - b||, log ||x_k||_M)` curve.
    LCurve,
    /// Smallest relative error against the true solution.
    Oracle { x_true: DVector<f64> },
    /// No early stopping: the last iterate.
    MaxIter,
}

impl StoppingRule {
    pub fn dp(noise_norm: f64) -> Result<Self> {
        Self::dp_with_tau(DEFAULT_TAU, noise_norm)
    }

    pub fn dp_with_tau(tau: f64, noise_norm: f64) -> Result<Self> {
        let rule = StoppingRule::Dp { tau, noise_norm };
        rule.check()?;
        Ok(rule)
    }

    pub fn oracle(x_true: DVector<f64>) -> Result<Self> {
        let rule = StoppingRule::Oracle { x_true };
        rule.check()?;
        Ok(rule)
    }

    pub fn name(&self) -> &'static str {
        match self {
            StoppingRule::Dp { .. } => "dp",
            StoppingRule::LCurve => "lc",
            StoppingRule::Oracle { .. } => "oracle",
            StoppingRule::MaxIter => "maxiter",
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            StoppingRule::Dp { tau, noise_norm } => {
                if !(*tau > 1.0 && tau.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "discrepancy factor tau must exceed 1, got {tau}"
                    )));
                }
                if !(*noise_norm > 0.0 && noise_norm.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "discrepancy principle needs a positive noise norm, got {noise_norm}"
                    )));
                }
            }
            StoppingRule::Oracle { x_true } => {
                if x_true.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("true solution"));
                }
                if x_true.norm() == 0.0 {
                    return Err(Error::InvalidParameter(
                        "oracle rule needs a nonzero true solution".into(),
                    ));
                }
            }
            StoppingRule::LCurve | StoppingRule::MaxIter => {}
        }
        Ok(())
    }

    /// Checks the rule against a problem with `n` unknowns.
    pub fn validate(&self, n: usize) -> Result<()> {
        self.check()?;
        if let StoppingRule::Oracle { x_true } = self {
            check_dim("true solution", n, x_true.len())?;
        }
        Ok(())
    }

    fn x_true(&self) -> Option<&DVector<f64>> {
        match self {
            StoppingRule::Oracle { x_true } => Some(x_true),
            _ => None,
        }
    }
}

/// How retrospective rules get back to the chosen iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IterateStorage {
    /// Keep every iterate in memory (`n x max_iter` values).
    #[default]
    Retain,
    /// Re-run the iteration up to the chosen index. Bit-identical to
    /// retaining, at the cost of a second pass.
    Replay,
}

#[derive(Debug, Clone)]
pub struct SprConfig {
    pub max_iter: usize,
    pub bidiag: BidiagOptions,
    pub storage: IterateStorage,
    /// Optional reference solution for error tracking under non-oracle rules.
    pub reference: Option<DVector<f64>>,
}

impl SprConfig {
    pub fn new(max_iter: usize) -> Self {
        Self {
            max_iter,
            bidiag: BidiagOptions::default(),
            storage: IterateStorage::default(),
            reference: None,
        }
    }

    pub fn with_reference(mut self, x_true: DVector<f64>) -> Self {
        self.reference = Some(x_true);
        self
    }
}

impl Default for SprConfig {
    fn default() -> Self {
        Self::new(200)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopDecision {
    /// 1-based iteration; `0` only when no iteration could be taken.
    pub k: usize,
    pub flag: Option<StopFlag>,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub rule: &'static str,
    pub iterations: Vec<IterationRecord>,
    /// `||x_k - x_true|| / ||x_true||` per iteration, when a reference is known.
    pub relative_errors: Option<Vec<f64>>,
    /// `φ̄_1 = ||b||_2`.
    pub initial_residual: f64,
    pub stop: StopDecision,
    /// Iteration at which the bidiagonalization terminated, if it did.
    pub terminated_at: Option<usize>,
    pub wall: Duration,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    /// `[φ̄_1, φ̄_2, ..., φ̄_{K+1}]`.
    pub fn phibar(&self) -> Vec<f64> {
        std::iter::once(self.initial_residual)
            .chain(self.iterations.iter().map(|r| r.residual_norm))
            .collect()
    }

    pub fn residual_norms(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.residual_norm).collect()
    }

    pub fn solution_norms(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.solution_m_norm).collect()
    }

    /// Relative error of `x_k`.
    pub fn error_at(&self, k: usize) -> Option<f64> {
        let errs = self.relative_errors.as_ref()?;
        k.checked_sub(1).and_then(|i| errs.get(i)).copied()
    }

    pub fn stop_error(&self) -> Option<f64> {
        self.error_at(self.stop.k)
    }
}

#[derive(Debug, Clone)]
pub struct SprSolution {
    pub x: DVector<f64>,
    pub record: RunRecord,
}

/// WLSQR with early stopping.
pub fn spr_solve(
    a: &DMatrix<f64>,
    weight: &WeightMatrix,
    b: &DVector<f64>,
    rule: &StoppingRule,
    config: &SprConfig,
) -> Result<SprSolution> {
    let start = Instant::now();
    let n = a.ncols();
    rule.validate(n)?;
    if config.max_iter == 0 {
        return Err(Error::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }
    let reference = rule.x_true().or(config.reference.as_ref());
    if let Some(r) = reference {
        check_dim("reference solution", n, r.len())?;
    }
    let ref_norm = reference.map(|r| r.norm());

    let mut solver = Wlsqr::new(a, weight, b, config.bidiag)?;
    let initial_residual = solver.residual_norm();
    let retrospective = matches!(rule, StoppingRule::LCurve | StoppingRule::Oracle { .. });
    let retain = retrospective && config.storage == IterateStorage::Retain;
    let dp_threshold = match rule {
        StoppingRule::Dp { tau, noise_norm } => Some(tau * noise_norm),
        _ => None,
    };

    let mut errors = Vec::new();
    let mut kept = Vec::new();
    let mut dp_hit = None;
    solver.run(config.max_iter, |it| {
        if let (Some(r), Some(rn)) = (reference, ref_norm) {
            errors.push((it.x - r).norm() / rn);
        }
        if retain {
            kept.push(it.x.clone());
        }
        match dp_threshold {
            Some(t) if it.residual_norm <= t => {
                dp_hit = Some(DpStop {
                    k: it.k,
                    degenerate: initial_residual <= t,
                });
                ControlFlow::Break(())
            }
            _ => ControlFlow::Continue(()),
        }
    });

    let last = solver.iterations();
    let mut record = RunRecord {
        rule: rule.name(),
        iterations: solver.history().to_vec(),
        relative_errors: reference.map(|_| errors),
        initial_residual,
        stop: StopDecision {
            k: last,
            flag: None,
        },
        terminated_at: solver.bidiagonalization().terminated_at(),
        wall: Duration::ZERO,
    };

    record.stop = match rule {
        StoppingRule::Dp { .. } => match dp_hit {
            Some(s) => StopDecision {
                k: s.k,
                flag: s.degenerate.then_some(StopFlag::Degenerate),
            },
            None => StopDecision {
                k: last,
                flag: Some(StopFlag::NotReached),
            },
        },
        StoppingRule::LCurve => {
            let corner = stop_lcurve(&record.residual_norms(), &record.solution_norms())?;
            StopDecision {
                k: corner.k,
                flag: corner.no_corner.then_some(StopFlag::NoCorner),
            }
        }
        StoppingRule::Oracle { .. } => {
            let errs = record.relative_errors.as_deref().unwrap_or(&[]);
            match stop_oracle(errs) {
                Some(k) => StopDecision { k, flag: None },
                None => StopDecision {
                    k: 0,
                    flag: Some(StopFlag::NotReached),
                },
            }
        }
        StoppingRule::MaxIter => StopDecision {
            k: last,
            flag: None,
        },
    };
    if last == 0 {
        log::warn!("bidiagonalization terminated before the first iteration; returning x_0 = 0");
    }

    let k = record.stop.k;
    let x = if k == last {
        solver.into_solution()
    } else if retain {
        kept.swap_remove(k - 1)
    } else {
        let mut replay = Wlsqr::new(a, weight, b, config.bidiag)?;
        replay.run(k, |_| ControlFlow::Continue(()));
        replay.into_solution()
    };
    record.wall = start.elapsed();
    Ok(SprSolution { x, record })
}

/// Standard LSQR (`M = I`) under the same stopping rules.
pub fn lsqr_baseline(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    rule: &StoppingRule,
    config: &SprConfig,
) -> Result<SprSolution> {
    let identity = WeightMatrix::identity(a.ncols());
    spr_solve(a, &identity, b, rule, config)
}
