//! Stopping rules evaluated over a finished (or growing) iteration history.
//!
//! Iteration numbers are 1-based throughout: index `k` refers to `x_k`.

use crate::error::{Error, Result};

/// Why a stop index carries a caveat.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopFlag {
    /// The discrepancy threshold was already met by `x_0 = 0`; `k = 1` is
    /// returned as the least-iterated solution.
    Degenerate,
    /// The rule never fired before the iteration ended; the last iterate is used.
    NotReached,
    /// The L-curve has no detectable corner (nearly straight in log-log).
    NoCorner,
}

impl StopFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            StopFlag::Degenerate => "degenerate",
            StopFlag::NotReached => "not-reached",
            StopFlag::NoCorner => "no-corner",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpStop {
    pub k: usize,
    pub degenerate: bool,
}

/// Discrepancy principle over `phibar = [φ̄_1, φ̄_2, ...]`, where `φ̄_1 = ||b||`
/// and `φ̄_{k+1} = ||A x_k - b||`.
///
/// Returns the first `k` with `φ̄_{k+1} <= τ ||e|| < φ̄_k`. When `φ̄_1` is
/// already below the threshold, returns `k = 1` flagged as degenerate.
/// `tau` is expected to exceed one.
pub fn stop_dp(phibar: &[f64], tau: f64, noise_norm: f64) -> Option<DpStop> {
    let threshold = tau * noise_norm;
    let first = *phibar.first()?;
    if first <= threshold {
        return Some(DpStop {
            k: 1,
            degenerate: true,
        });
    }
    phibar
        .windows(2)
        .position(|w| w[1] <= threshold && threshold < w[0])
        .map(|i| DpStop {
            k: i + 1,
            degenerate: false,
        })
}

/// Index of the smallest error, 1-based; ties go to the smaller `k`.
pub fn stop_oracle(errors: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &e) in errors.iter().enumerate() {
        if best.is_none_or(|(_, b)| e < b) {
            best = Some((i, e));
        }
    }
    best.map(|(i, _)| i + 1)
}

/// Points closer than this in log-log space are merged before measuring
/// curvature.
pub const LCURVE_DEDUP_TOL: f64 = 1e-12;

/// Curvature below this is treated as a straight line.
pub const LCURVE_FLAT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LCurveCorner {
    /// 1-based iteration of the corner.
    pub k: usize,
    /// Signed Menger curvature per input point; `None` at the ends, at
    /// merged duplicates and at points with a zero coordinate. Positive values bend like the corner of an L
    /// traversed in iteration order.
    pub curvature: Vec<Option<f64>>,
    /// `log10 ||A x_k - b||` per input point.
    pub log_res: Vec<f64>,
    /// `log10 ||x_k||_M` per input point.
    pub log_norm: Vec<f64>,
    pub no_corner: bool,
}

/// Maximum-curvature point of `(log10 res_k, log10 norm_k)`, k = 1, 2, ...
pub fn stop_lcurve(res: &[f64], norm: &[f64]) -> Result<LCurveCorner> {
    if res.len() != norm.len() {
        return Err(Error::DimensionMismatch {
            what: "L-curve norms",
            expected: res.len(),
            found: norm.len(),
        });
    }
    if res.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: res.len(),
        });
    }
    let log_res: Vec<f64> = res.iter().map(|v| v.log10()).collect();
    let log_norm: Vec<f64> = norm.iter().map(|v| v.log10()).collect();
    if res.iter().chain(norm).any(|v| v.is_nan()) {
        return Err(Error::NonFinite("L-curve points"));
    }

    // Zero residuals (exact termination) and zero norms have no place on a
    // log-log plot; they are skipped like duplicates.
    let mut kept: Vec<usize> = Vec::with_capacity(res.len());
    for i in 0..res.len() {
        if !(log_res[i].is_finite() && log_norm[i].is_finite()) {
            continue;
        }
        let dup = kept.last().is_some_and(|&j| {
            (log_res[i] - log_res[j]).hypot(log_norm[i] - log_norm[j]) < LCURVE_DEDUP_TOL
        });
        if !dup {
            kept.push(i);
        }
    }
    if kept.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: kept.len(),
        });
    }

    let mut curvature = vec![None; res.len()];
    let mut best: Option<(usize, f64)> = None;
    for t in kept.windows(3) {
        let p = |i: usize| (log_res[i], log_norm[i]);
        let kappa = menger(p(t[0]), p(t[1]), p(t[2]));
        curvature[t[1]] = Some(kappa);
        if best.is_none_or(|(_, b)| kappa > b) {
            best = Some((t[1], kappa));
        }
    }
    let (idx, peak) = best.expect("at least one interior point");
    Ok(LCurveCorner {
        k: idx + 1,
        curvature,
        log_res,
        log_norm,
        no_corner: peak <= LCURVE_FLAT_TOL,
    })
}

/// Signed curvature of the circle through three points: `4·area / (abc)`.
/// Clockwise turns are positive.
fn menger(p1: (f64, f64), p2: (f64, f64), p3: (f64, f64)) -> f64 {
    let cross = (p2.0 - p1.0) * (p3.1 - p1.1) - (p2.1 - p1.1) * (p3.0 - p1.0);
    let a = (p2.0 - p1.0).hypot(p2.1 - p1.1);
    let b = (p3.0 - p2.0).hypot(p3.1 - p2.1);
    let c = (p3.0 - p1.0).hypot(p3.1 - p1.1);
    let denom = a * b * c;
    if denom == 0.0 {
        0.0
    } else {
        -2.0 * cross / denom
    }
}
