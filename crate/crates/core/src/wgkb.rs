//! Weighted Golub–Kahan bidiagonalization.
//!
//! Starting from `β_1 p_1 = b`, the process builds 2-orthonormal left
//! vectors `p_i`, M-orthonormal right vectors `q_i` and a lower-bidiagonal
//! `B_k` such that
//!
//! ```text
//! A Q_k             = P_{k+1} B_k
//! M^{-1} A^T P_{k+1} = Q_k B_k^T + α_{k+1} q_{k+1} e_{k+1}^T
//! ```
//!
//! The adjoint of `A` in the M-inner product is `M^{-1} A^T`, so each step
//! costs one product with `A`, one with `A^T` and one solve with `M`.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{check_dim, Error, Result};
use crate::weights::WeightMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidiagOptions {
    /// Reorthogonalize each new vector against all previous ones (two passes
    /// of modified Gram–Schmidt in the 2- and M-inner products).
    pub reorth: bool,
    /// A step terminates when `α` or `β` drops below this multiple of the
    /// running estimate of `||A||_{M,2}`.
    pub break_tol: f64,
}

impl Default for BidiagOptions {
    fn default() -> Self {
        Self {
            reorth: true,
            break_tol: 1e-14,
        }
    }
}

/// An approximate weighted singular triplet extracted from `B_k`.
#[derive(Debug, Clone)]
pub struct ApproxTriplet {
    pub sigma: f64,
    /// `P_{k+1} y_i`, unit 2-norm.
    pub u: DVector<f64>,
    /// `Q_k h_i`, unit M-norm.
    pub v: DVector<f64>,
    /// `|α_{k+1} e_{k+1}^T y_i|`, the size of the defect in
    /// `A^T u - σ M v = α_{k+1} (e_{k+1}^T y_i) M q_{k+1}`.
    pub residual_bound: f64,
    /// `e_{k+1}^T y_i`, kept for checking the defect direction.
    pub last_component: f64,
}

impl ApproxTriplet {
    pub fn converged(&self, tol: f64) -> bool {
        self.residual_bound <= tol
    }
}

/// State of the weighted bidiagonalization after `k` steps.
#[derive(Debug, Clone)]
pub struct Wgkb<'a> {
    a: &'a DMatrix<f64>,
    weight: &'a WeightMatrix,
    opts: BidiagOptions,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    p: Vec<DVector<f64>>,
    q: Vec<DVector<f64>>,
    // M q_i, kept so the recurrence and reorthogonalization avoid re-applying M
    mq: Vec<DVector<f64>>,
    steps: usize,
    terminated_at: Option<usize>,
    norm_estimate: f64,
}

impl<'a> Wgkb<'a> {
    /// `β_1 = ||b||_2`, `p_1 = b / β_1`, `s̄ = A^T p_1`, `s = M^{-1} s̄`,
    /// `α_1 = (s^T s̄)^{1/2}`, `q_1 = s / α_1`.
    pub fn new(
        a: &'a DMatrix<f64>,
        weight: &'a WeightMatrix,
        b: &DVector<f64>,
        opts: BidiagOptions,
    ) -> Result<Self> {
        let (m, n) = a.shape();
        check_dim("right-hand side", m, b.len())?;
        check_dim("matrix columns vs weight order", weight.order(), n)?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        let beta = b.norm();
        if beta == 0.0 {
            return Err(Error::ZeroRhs);
        }
        let p1 = b / beta;
        let s_bar = a.tr_mul(&p1);
        let s = weight.solve_unchecked(&s_bar);
        let alpha = s.dot(&s_bar).max(0.0).sqrt();

        let mut state = Self {
            a,
            weight,
            opts,
            alphas: Vec::new(),
            betas: vec![beta],
            p: vec![p1],
            q: Vec::new(),
            mq: Vec::new(),
            steps: 0,
            terminated_at: None,
            norm_estimate: alpha,
        };
        if alpha > 0.0 {
            state.alphas.push(alpha);
            state.q.push(s / alpha);
            state.mq.push(s_bar / alpha);
        } else {
            // b is orthogonal to the range of A
            state.alphas.push(0.0);
            state.terminated_at = Some(0);
        }
        Ok(state)
    }

    /// One loop iteration: appends `β_{k+1}, p_{k+1}, α_{k+1}, q_{k+1}`.
    /// Returns `false` without doing anything once the process has terminated.
    pub fn step(&mut self) -> bool {
        if self.terminated_at.is_some() {
            return false;
        }
        let i = self.steps;
        let alpha = self.alphas[i];

        let mut r = self.a * &self.q[i];
        r.axpy(-alpha, &self.p[i], 1.0);
        if self.opts.reorth {
            for _ in 0..2 {
                for pj in &self.p {
                    let c = pj.dot(&r);
                    r.axpy(-c, pj, 1.0);
                }
            }
        }
        let beta = r.norm();
        self.norm_estimate = self.norm_estimate.max(alpha.hypot(beta));
        let tol = self.opts.break_tol * self.norm_estimate;
        self.steps = i + 1;

        if beta <= tol {
            self.betas.push(0.0);
            self.alphas.push(0.0);
            self.terminated_at = Some(i + 1);
            return true;
        }
        let p_next = r / beta;

        let mut s_bar = self.a.tr_mul(&p_next);
        s_bar.axpy(-beta, &self.mq[i], 1.0);
        let mut s = self.weight.solve_unchecked(&s_bar);
        if self.opts.reorth {
            for _ in 0..2 {
                for (qj, mqj) in self.q.iter().zip(&self.mq) {
                    let c = mqj.dot(&s);
                    s.axpy(-c, qj, 1.0);
                    s_bar.axpy(-c, mqj, 1.0);
                }
            }
        }
        let alpha_next = s.dot(&s_bar).max(0.0).sqrt();
        self.norm_estimate = self.norm_estimate.max(alpha_next);
        self.betas.push(beta);
        self.p.push(p_next);

        if alpha_next <= self.opts.break_tol * self.norm_estimate {
            self.alphas.push(0.0);
            self.terminated_at = Some(i + 1);
        } else {
            self.alphas.push(alpha_next);
            self.q.push(s / alpha_next);
            self.mq.push(s_bar / alpha_next);
        }
        true
    }

    /// Number of completed loop iterations `k`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// The termination step `k_t`, once `α_{k+1} β_{k+1} = 0` was detected.
    pub fn terminated_at(&self) -> Option<usize> {
        self.terminated_at
    }

    /// `α_1..α_{k+1}`.
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `β_1..β_{k+1}`.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Left vectors `p_1..` (stored up to `p_{k+1}` unless `β_{k+1} = 0`).
    pub fn p(&self) -> &[DVector<f64>] {
        &self.p
    }

    /// Right vectors `q_1..` (stored up to `q_{k+1}` unless `α_{k+1} = 0`).
    pub fn q(&self) -> &[DVector<f64>] {
        &self.q
    }

    pub fn p_matrix(&self, cols: usize) -> DMatrix<f64> {
        DMatrix::from_columns(&self.p[..cols.min(self.p.len())])
    }

    pub fn q_matrix(&self, cols: usize) -> DMatrix<f64> {
        DMatrix::from_columns(&self.q[..cols.min(self.q.len())])
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.a
    }

    pub fn weight(&self) -> &WeightMatrix {
        self.weight
    }

    /// Running lower estimate of `||A||_{M,2}` from the bidiagonal entries.
    pub fn norm_estimate(&self) -> f64 {
        self.norm_estimate
    }

    /// The `(k+1) x k` lower-bidiagonal projection `B_k`.
    pub fn bidiagonal(&self) -> DMatrix<f64> {
        let k = self.steps;
        let mut b = DMatrix::zeros(k + 1, k);
        for i in 0..k {
            b[(i, i)] = self.alphas[i];
            b[(i + 1, i)] = self.betas[i + 1];
        }
        b
    }

    /// The `count` largest approximate weighted singular triplets, from the
    /// compact SVD of `B_k`, in decreasing order.
    pub fn approx_triplets(&self, count: usize) -> Result<Vec<ApproxTriplet>> {
        let k = self.steps;
        if count == 0 || count > k {
            return Err(Error::OutOfRange {
                what: "triplet count",
                value: count,
                min: 1,
                max: k,
            });
        }
        let svd = SVD::new(self.bidiagonal(), true, true);
        let (y, h_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(vt)) => (u, vt),
            _ => unreachable!("vectors were requested"),
        };
        let theta = svd.singular_values;
        let mut order: Vec<usize> = (0..theta.len()).collect();
        order.sort_by(|&i, &j| theta[j].total_cmp(&theta[i]));

        let p_cols = self.p.len().min(k + 1);
        let alpha_next = self.alphas[k];
        let (m, n) = self.a.shape();
        Ok(order
            .into_iter()
            .take(count)
            .map(|i| {
                let yi = y.column(i);
                let mut u = DVector::zeros(m);
                for (j, pj) in self.p.iter().take(p_cols).enumerate() {
                    u.axpy(yi[j], pj, 1.0);
                }
                let mut v = DVector::zeros(n);
                for (j, qj) in self.q.iter().take(k).enumerate() {
                    v.axpy(h_t[(i, j)], qj, 1.0);
                }
                let last = yi[k];
                ApproxTriplet {
                    sigma: theta[i],
                    u,
                    v,
                    residual_bound: (alpha_next * last).abs(),
                    last_component: last,
                }
            })
            .collect())
    }
}
