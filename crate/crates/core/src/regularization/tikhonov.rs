//! WSVD-based baselines: Tikhonov with the error-optimal `λ` and truncated
//! WSVD under the same stopping rules as the iterative solver.

use std::time::{Duration, Instant};

use nalgebra::{DVector, DVectorView};

use super::{
    stop_dp, stop_lcurve, stop_oracle, RunRecord, SprSolution, StopDecision, StopFlag, StoppingRule,
};
use crate::error::{check_dim, Error, Result};
use crate::wlsqr::IterationRecord;
use crate::wsvd::Wsvd;

#[derive(Debug, Clone)]
pub struct TikhonovOpt {
    pub lambda: f64,
    pub x: DVector<f64>,
    pub relative_error: f64,
    /// Lower and upper end of the searched `λ` interval.
    pub bracket: (f64, f64),
}

/// Precomputed pieces of `x_λ = Σ σ_i β_i / (σ_i² + λ) v_i`.
struct Filter<'f> {
    f: &'f Wsvd,
    beta: DVector<f64>,
    x_true: &'f DVector<f64>,
    true_norm: f64,
}

impl Filter<'_> {
    fn solution(&self, lambda: f64) -> DVector<f64> {
        let r = self.f.rank();
        let sigma = self.f.sigma();
        let coeffs = DVector::from_fn(r, |i, _| {
            let s = sigma[i];
            s * self.beta[i] / (s * s + lambda)
        });
        self.f.v_full().columns(0, r) * coeffs
    }

    fn error(&self, lambda: f64) -> f64 {
        (self.solution(lambda) - self.x_true).norm() / self.true_norm
    }
}

fn filter<'f>(f: &'f Wsvd, b: &DVector<f64>, x_true: &'f DVector<f64>) -> Result<Filter<'f>> {
    check_dim("right-hand side", f.nrows(), b.len())?;
    check_dim("true solution", f.ncols(), x_true.len())?;
    let true_norm = x_true.norm();
    if true_norm == 0.0 {
        return Err(Error::InvalidParameter(
            "true solution must be nonzero".into(),
        ));
    }
    if f.rank() == 0 {
        return Err(Error::InvalidParameter("matrix is numerically zero".into()));
    }
    Ok(Filter {
        f,
        beta: f.u().tr_mul(b),
        x_true,
        true_norm,
    })
}

/// Relative error of the Tikhonov solution for each `λ`.
pub fn tikhonov_error(
    f: &Wsvd,
    b: &DVector<f64>,
    x_true: &DVector<f64>,
    lambdas: &[f64],
) -> Result<Vec<f64>> {
    let filt = filter(f, b, x_true)?;
    Ok(lambdas.iter().map(|&l| filt.error(l)).collect())
}

/// `λ` minimizing `||x_λ - x_true|| / ||x_true||`.
///
/// Golden-section search on `log λ` over `[1e-16 σ_1², σ_1²]`, stopped when
/// the bracket is within a relative factor `1e-3` in `λ`. The bracket ends are
/// also compared, so a monotone error curve returns the boundary.
pub fn tikhonov_opt(f: &Wsvd, b: &DVector<f64>, x_true: &DVector<f64>) -> Result<TikhonovOpt> {
    let filt = filter(f, b, x_true)?;
    let s1 = f.sigma()[0];
    let (lo0, hi0) = ((1e-16 * s1 * s1).ln(), (s1 * s1).ln());
    let g = |u: f64| filt.error(u.exp());

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let tol = 1e-3f64.ln_1p();
    let (mut lo, mut hi) = (lo0, hi0);
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut gc, mut gd) = (g(c), g(d));
    while hi - lo > tol {
        if gc <= gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - ratio * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + ratio * (hi - lo);
            gd = g(d);
        }
    }

    let mid = 0.5 * (lo + hi);
    let (u, err) = [(mid, g(mid)), (lo0, g(lo0)), (hi0, g(hi0))]
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, cand| {
            if cand.1 < best.1 {
                cand
            } else {
                best
            }
        });
    let lambda = u.exp();
    Ok(TikhonovOpt {
        lambda,
        x: filt.solution(lambda),
        relative_error: err,
        bracket: (lo0.exp(), hi0.exp()),
    })
}

/// Truncated WSVD, `x_k = Σ_{i<=k} (u_i^T b / σ_i) v_i`, with `k` chosen by
/// `rule` over `k = 1..=min(rank, max_k)`.
///
/// The history mirrors an iterative run: residual norms come from the
/// discarded coefficients, `||x_k||_M` from the kept ones.
pub fn twsvd_solve(
    f: &Wsvd,
    b: &DVector<f64>,
    rule: &StoppingRule,
    max_k: usize,
    reference: Option<&DVector<f64>>,
) -> Result<SprSolution> {
    let start = Instant::now();
    rule.validate(f.ncols())?;
    check_dim("right-hand side", f.nrows(), b.len())?;
    if max_k == 0 {
        return Err(Error::InvalidParameter("max_k must be at least 1".into()));
    }
    let kmax = f.rank().min(max_k);
    let reference = match rule {
        StoppingRule::Oracle { x_true } => Some(x_true),
        _ => reference,
    };
    if let Some(r) = reference {
        check_dim("reference solution", f.ncols(), r.len())?;
    }

    let beta = f.u().tr_mul(b);
    let outside = (b - f.u() * &beta).norm_squared();
    let mut tail: f64 = beta.iter().map(|c| c * c).sum();
    let sigma = f.sigma();
    let v = f.v_full();
    let column = |i: usize| -> DVectorView<'_, f64> { v.column(i) };

    let mut x = DVector::zeros(f.ncols());
    let mut iterations = Vec::with_capacity(kmax);
    let mut errors = Vec::new();
    let mut norm2 = 0.0;
    for i in 0..kmax {
        let c = beta[i] / sigma[i];
        x.axpy(c, &column(i), 1.0);
        tail -= beta[i] * beta[i];
        norm2 += c * c;
        iterations.push(IterationRecord {
            k: i + 1,
            residual_norm: (outside + tail.max(0.0)).sqrt(),
            solution_m_norm: norm2.sqrt(),
        });
        if let Some(r) = reference {
            errors.push((&x - r).norm() / r.norm());
        }
    }

    let mut record = RunRecord {
        rule: rule.name(),
        iterations,
        relative_errors: reference.map(|_| errors),
        initial_residual: b.norm(),
        stop: StopDecision {
            k: kmax,
            flag: None,
        },
        terminated_at: (kmax == f.rank()).then_some(kmax),
        wall: Duration::ZERO,
    };
    record.stop = match rule {
        StoppingRule::Dp { tau, noise_norm } => {
            match stop_dp(&record.phibar(), *tau, *noise_norm) {
                Some(s) => StopDecision {
                    k: s.k,
                    flag: s.degenerate.then_some(StopFlag::Degenerate),
                },
                None => StopDecision {
                    k: kmax,
                    flag: Some(StopFlag::NotReached),
                },
            }
        }
        StoppingRule::LCurve => {
            let c = stop_lcurve(&record.residual_norms(), &record.solution_norms())?;
            StopDecision {
                k: c.k,
                flag: c.no_corner.then_some(StopFlag::NoCorner),
            }
        }
        StoppingRule::Oracle { .. } => StopDecision {
            k: stop_oracle(record.relative_errors.as_deref().unwrap_or(&[])).unwrap_or(0),
            flag: None,
        },
        StoppingRule::MaxIter => record.stop,
    };
    let k = record.stop.k;
    let x = if k == 0 {
        DVector::zeros(f.ncols())
    } else {
        f.truncated_solution(b, k)?
    };
    record.wall = start.elapsed();
    Ok(SprSolution { x, record })
}
