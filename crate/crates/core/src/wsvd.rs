//! Dense weighted SVD and the closed-form solutions built on it.
//!
//! For `A` (m x n) and SPD `M` (n x n) the factorization is
//! `A = U Σ V^T M`, with `U^T U = I` and `V^T M V = I`. It is computed from
//! the standard SVD of `A L^{-1}` where `M = L^T L`: if
//! `A L^{-1} = Û Σ V̂^T` then `U = Û` and `V = L^{-1} V̂`.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{check_dim, Error, Result};
use crate::weights::WeightMatrix;

/// Weighted singular value decomposition of a dense matrix.
#[derive(Debug, Clone)]
pub struct Wsvd {
    /// m x r, 2-orthonormal columns.
    u: DMatrix<f64>,
    /// r positive values, nonincreasing.
    sigma: DVector<f64>,
    /// n x n, M-orthonormal. Columns `r..n` span the null space of `A`.
    v: DMatrix<f64>,
    rank: usize,
    weight: WeightMatrix,
}

impl Wsvd {
    pub fn compute(a: &DMatrix<f64>, weight: &WeightMatrix) -> Result<Self> {
        let (m, n) = a.shape();
        check_dim("matrix columns vs weight order", weight.order(), n)?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }

        let transformed = weight.right_factor_solve(a)?;
        // Pad short matrices so the SVD returns a complete right basis.
        let padded = if m < n {
            let mut p = DMatrix::zeros(n, n);
            p.view_mut((0, 0), (m, n)).copy_from(&transformed);
            p
        } else {
            transformed
        };
        let svd = SVD::new(padded, true, true);
        let (u_hat, v_hat_t) = match (svd.u, svd.v_t) {
            (Some(u), Some(vt)) => (u, vt),
            _ => unreachable!("vectors were requested"),
        };
        let s = svd.singular_values;

        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

        let sigma_max = order.first().map_or(0.0, |&i| s[i]);
        let threshold = m.max(n) as f64 * f64::EPSILON * sigma_max;
        let rank = if sigma_max > 0.0 {
            order.iter().take_while(|&&i| s[i] > threshold).count()
        } else {
            0
        };

        let mut u = DMatrix::zeros(m, rank);
        let mut sigma = DVector::zeros(rank);
        let mut v_hat = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            v_hat.set_column(col, &v_hat_t.row(i).transpose());
            if col < rank {
                sigma[col] = s[i];
                u.set_column(col, &u_hat.column(i).rows(0, m));
            }
        }
        let mut v = weight_solve_columns(weight, &v_hat);

        for col in 0..n {
            let pivot = if col < rank {
                first_significant(u.column(col).iter().copied())
            } else {
                first_significant(v.column(col).iter().copied())
            };
            if pivot < 0.0 {
                v.column_mut(col).neg_mut();
                if col < rank {
                    u.column_mut(col).neg_mut();
                }
            }
        }

        Ok(Self {
            u,
            sigma,
            v,
            rank,
            weight: weight.clone(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }

    /// Left singular vectors, m x r.
    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Right singular vectors `v_1..v_r`, n x r.
    pub fn v(&self) -> DMatrix<f64> {
        self.v.columns(0, self.rank).into_owned()
    }

    /// The full M-orthonormal right basis, n x n.
    pub fn v_full(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// M-orthonormal basis of the null space of `A`, n x (n - r).
    pub fn null_space(&self) -> DMatrix<f64> {
        let n = self.v.ncols();
        self.v.columns(self.rank, n - self.rank).into_owned()
    }

    pub fn weight(&self) -> &WeightMatrix {
        &self.weight
    }

    /// `||A||_{M,2}`, the largest weighted singular value.
    pub fn operator_norm(&self) -> f64 {
        self.sigma.get(0).copied().unwrap_or(0.0)
    }

    /// `U Σ V^T M`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.partial_sum(self.rank)
    }

    fn partial_sum(&self, k: usize) -> DMatrix<f64> {
        let (m, n) = (self.nrows(), self.ncols());
        let mut out = DMatrix::zeros(m, n);
        for i in 0..k {
            let mv = self.weight.apply_unchecked(&self.v.column(i).into_owned());
            out.ger(self.sigma[i], &self.u.column(i), &mv, 1.0);
        }
        out
    }

    /// Best rank-`k` approximation in `||.||_{M,2}`, `Σ_{i<=k} σ_i u_i v_i^T M`.
    pub fn low_rank_approx(&self, k: usize) -> Result<DMatrix<f64>> {
        if k == 0 || k >= self.rank {
            return Err(Error::OutOfRange {
                what: "approximation rank",
                value: k,
                min: 1,
                max: self.rank.saturating_sub(1),
            });
        }
        Ok(self.partial_sum(k))
    }

    fn projections(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("right-hand side", self.nrows(), b.len())?;
        Ok(self.u.tr_mul(b))
    }

    fn expand(&self, coeffs: impl Iterator<Item = f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.ncols());
        for (i, c) in coeffs.enumerate() {
            x.axpy(c, &self.v.column(i), 1.0);
        }
        x
    }

    /// Minimum-M-norm least-squares solution `Σ_{i<=r} (u_i^T b / σ_i) v_i`.
    pub fn min_norm_solution(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.truncated_solution_unchecked(b, self.rank)
    }

    /// Truncated WSVD solution keeping the first `k` terms.
    pub fn truncated_solution(&self, b: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
        if k == 0 || k > self.rank {
            return Err(Error::OutOfRange {
                what: "truncation index",
                value: k,
                min: 1,
                max: self.rank,
            });
        }
        self.truncated_solution_unchecked(b, k)
    }

    fn truncated_solution_unchecked(&self, b: &DVector<f64>, k: usize) -> Result<DVector<f64>> {
        let beta = self.projections(b)?;
        Ok(self.expand((0..k).map(|i| beta[i] / self.sigma[i])))
    }

    /// Expansion coefficients of the Tikhonov solution in the `v_i` basis.
    pub fn tikhonov_coefficients(&self, b: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "regularization parameter must be finite and >= 0, got {lambda}"
            )));
        }
        let beta = self.projections(b)?;
        Ok(DVector::from_fn(self.rank, |i, _| {
            let s = self.sigma[i];
            s * beta[i] / (s * s + lambda)
        }))
    }

    /// Minimizer of `||A x - b||_2^2 + λ ||x||_M^2`, via filter factors
    /// `σ_i^2 / (σ_i^2 + λ)`.
    pub fn tikhonov_solution(&self, b: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
        let coeffs = self.tikhonov_coefficients(b, lambda)?;
        Ok(self.expand(coeffs.iter().copied()))
    }
}

/// `||A||_{M,2}` without forming singular vectors.
pub fn weighted_operator_norm(a: &DMatrix<f64>, weight: &WeightMatrix) -> Result<f64> {
    check_dim("matrix columns vs weight order", weight.order(), a.ncols())?;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let t = weight.right_factor_solve(a)?;
    Ok(t.singular_values().max())
}

fn weight_solve_columns(weight: &WeightMatrix, v_hat: &DMatrix<f64>) -> DMatrix<f64> {
    let mut v = v_hat.clone();
    for mut col in v.column_iter_mut() {
        let solved = weight
            .factor_solve(&col.clone_owned())
            .expect("column length equals weight order");
        col.copy_from(&solved);
    }
    v
}

fn first_significant(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let scale = values.clone().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    values
        .into_iter()
        .find(|v| v.abs() > 1e-10 * scale)
        .unwrap_or(0.0)
}
