//! Symmetric positive definite weight matrices and the M-inner product.
//!
//! A [`WeightMatrix`] `M` induces `<x, y>_M = x^T M y` and `||x||_M`. It also
//! carries a lower-triangular factor `L` with `M = L^T L`, so that
//! `||x||_M = ||L x||_2`. Quadrature weights give the common diagonal case,
//! which never materializes an `n x n` matrix.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// Condition number above which construction logs a warning.
const ILL_CONDITIONED: f64 = 1e12;

#[derive(Debug)]
enum Repr {
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

#[derive(Debug)]
struct Inner {
    repr: Repr,
    factor: OnceLock<DMatrix<f64>>,
}

/// An SPD weight matrix, immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    inner: Arc<Inner>,
}

impl WeightMatrix {
    /// Diagonal weights; every entry must be finite and strictly positive.
    pub fn diagonal(weights: DVector<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "weight matrix must have order >= 1".into(),
            ));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite("weight diagonal"));
            }
            if w <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: i, value: w });
            }
        }
        let (lo, hi) = weights
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &w| {
                (lo.min(w), hi.max(w))
            });
        if hi / lo > ILL_CONDITIONED {
            log::warn!(
                "weight matrix is nearly singular (condition ~ {:.3e})",
                hi / lo
            );
        }
        Ok(Self::from_repr(Repr::Diagonal(weights), None))
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(DVector::from_element(n.max(1), 1.0)).expect("identity is SPD")
    }

    /// Dense SPD weights. The input is symmetrized; an asymmetric input or a
    /// failed factorization is rejected here rather than at first use.
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        check_dim("weight matrix columns", n, matrix.ncols())?;
        if n == 0 {
            return Err(Error::InvalidParameter(
                "weight matrix must have order >= 1".into(),
            ));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("weight matrix"));
        }
        let scale = matrix.amax();
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter(format!(
                "weight matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let factor = reverse_cholesky(&sym)?;
        let d = factor.diagonal();
        let ratio = d.max() / d.min();
        if ratio * ratio > ILL_CONDITIONED {
            log::warn!(
                "weight matrix is nearly singular (condition ~ {:.3e})",
                ratio * ratio
            );
        }
        Ok(Self::from_repr(Repr::Dense(sym), Some(factor)))
    }

    fn from_repr(repr: Repr, factor: Option<DMatrix<f64>>) -> Self {
        let cell = OnceLock::new();
        if let Some(f) = factor {
            let _ = cell.set(f);
        }
        Self {
            inner: Arc::new(Inner { repr, factor: cell }),
        }
    }

    pub fn order(&self) -> usize {
        match &self.inner.repr {
            Repr::Diagonal(d) => d.len(),
            Repr::Dense(m) => m.nrows(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.inner.repr, Repr::Diagonal(_))
    }

    /// The diagonal entries, when this is a diagonal weight.
    pub fn diagonal_entries(&self) -> Option<&DVector<f64>> {
        match &self.inner.repr {
            Repr::Diagonal(d) => Some(d),
            Repr::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.inner.repr {
            Repr::Diagonal(d) => DMatrix::from_diagonal(d),
            Repr::Dense(m) => m.clone(),
        }
    }

    /// `M x`.
    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("vector", self.order(), x.len())?;
        Ok(self.apply_unchecked(x))
    }

    /// `<x, y>_M = x^T M y`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        check_dim("left vector", self.order(), x.len())?;
        check_dim("right vector", self.order(), y.len())?;
        Ok(self.inner_unchecked(x, y))
    }

    /// `||x||_M`.
    pub fn norm(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.inner(x, x)?.max(0.0).sqrt())
    }

    /// Solves `M w = v`.
    pub fn solve(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("vector", self.order(), v.len())?;
        Ok(self.solve_unchecked(v))
    }

    /// Lower-triangular `L` with `M = L^T L`, computed once and cached.
    pub fn factor(&self) -> &DMatrix<f64> {
        self.inner.factor.get_or_init(|| match &self.inner.repr {
            Repr::Diagonal(d) => DMatrix::from_diagonal(&d.map(f64::sqrt)),
            Repr::Dense(m) => reverse_cholesky(m).expect("validated at construction"),
        })
    }

    /// `L x`, so that `||L x||_2 = ||x||_M`.
    pub fn factor_apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("vector", self.order(), x.len())?;
        Ok(match &self.inner.repr {
            Repr::Diagonal(d) => x.zip_map(d, |xi, di| xi * di.sqrt()),
            Repr::Dense(_) => self.factor() * x,
        })
    }

    /// `L^{-1} z`.
    pub fn factor_solve(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("vector", self.order(), z.len())?;
        Ok(match &self.inner.repr {
            Repr::Diagonal(d) => z.zip_map(d, |zi, di| zi / di.sqrt()),
            Repr::Dense(_) => self
                .factor()
                .solve_lower_triangular(z)
                .expect("factor has a positive diagonal"),
        })
    }

    /// `A L^{-1}` for an `m x n` matrix `A`.
    pub fn right_factor_solve(&self, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_dim("matrix columns", self.order(), a.ncols())?;
        Ok(match &self.inner.repr {
            Repr::Diagonal(d) => {
                let mut out = a.clone();
                for (j, mut col) in out.column_iter_mut().enumerate() {
                    col /= d[j].sqrt();
                }
                out
            }
            // X L = A  <=>  L^T X^T = A^T
            Repr::Dense(_) => self
                .factor()
                .tr_solve_lower_triangular(&a.transpose())
                .expect("factor has a positive diagonal")
                .transpose(),
        })
    }

    pub(crate) fn apply_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.inner.repr {
            Repr::Diagonal(d) => x.component_mul(d),
            Repr::Dense(m) => m * x,
        }
    }

    pub(crate) fn inner_unchecked(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        match &self.inner.repr {
            Repr::Diagonal(d) => x
                .iter()
                .zip(d.iter())
                .zip(y.iter())
                .map(|((xi, di), yi)| xi * di * yi)
                .sum(),
            Repr::Dense(m) => x.dot(&(m * y)),
        }
    }

    pub(crate) fn solve_unchecked(&self, v: &DVector<f64>) -> DVector<f64> {
        match &self.inner.repr {
            Repr::Diagonal(d) => v.component_div(d),
            Repr::Dense(_) => {
                let l = self.factor();
                let y = l
                    .tr_solve_lower_triangular(v)
                    .expect("factor has a positive diagonal");
                l.solve_lower_triangular(&y)
                    .expect("factor has a positive diagonal")
            }
        }
    }
}

/// Lower-triangular `L` with `M = L^T L`, eliminating from the last index up.
fn reverse_cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for i in (0..n).rev() {
        let mut d = m[(i, i)];
        for k in i + 1..n {
            d -= l[(k, i)] * l[(k, i)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: i, value: d });
        }
        let lii = d.sqrt();
        l[(i, i)] = lii;
        for j in 0..i {
            let mut s = m[(i, j)];
            for k in i + 1..n {
                s -= l[(k, i)] * l[(k, j)];
            }
            l[(i, j)] = s / lii;
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        g.transpose() * &g + DMatrix::identity(n, n) * n as f64
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn inner_product_examples() {
        let id = WeightMatrix::identity(2);
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let y = DVector::from_vec(vec![3.0, 4.0]);
        assert_eq!(id.inner(&x, &y).unwrap(), 11.0);

        let m = WeightMatrix::diagonal(DVector::from_vec(vec![4.0, 1.0])).unwrap();
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(m.inner(&e1, &e1).unwrap(), 4.0);
    }

    #[test]
    fn inner_matches_elementwise_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w: Vec<f64> = (0..5).map(|_| rng.random_range(0.1..3.0)).collect();
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let brute: f64 = (0..5).map(|i| w[i] * x[i] * x[i]).sum();
        let m = WeightMatrix::diagonal(DVector::from_vec(w)).unwrap();
        let x = DVector::from_vec(x);
        assert!(rel(m.inner(&x, &x).unwrap(), brute) < 1e-14);
    }

    #[test]
    fn norm_examples() {
        let m = WeightMatrix::diagonal(DVector::from_vec(vec![4.0])).unwrap();
        assert_eq!(m.norm(&DVector::from_vec(vec![3.0])).unwrap(), 6.0);
        assert_eq!(m.norm(&DVector::zeros(1)).unwrap(), 0.0);
    }

    #[test]
    fn norm_matches_factor_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = WeightMatrix::dense(random_spd(7, &mut rng)).unwrap();
        for _ in 0..20 {
            let x = DVector::from_fn(7, |_, _| rng.random_range(-1.0..1.0));
            let via_factor = m.factor_apply(&x).unwrap().norm();
            assert!(rel(m.norm(&x).unwrap(), via_factor) < 1e-12);
        }
    }

    #[test]
    fn solve_examples() {
        let m = WeightMatrix::diagonal(DVector::from_vec(vec![2.0, 5.0])).unwrap();
        let w = m.solve(&DVector::from_vec(vec![4.0, 10.0])).unwrap();
        assert_eq!(w.as_slice(), &[2.0, 2.0]);

        let id = WeightMatrix::identity(3);
        let v = DVector::from_vec(vec![1.5, -2.0, 7.0]);
        assert_eq!(id.solve(&v).unwrap(), v);
    }

    #[test]
    fn dense_solve_multiplies_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let dense = random_spd(6, &mut rng);
        let m = WeightMatrix::dense(dense.clone()).unwrap();
        let v = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let w = m.solve(&v).unwrap();
        assert!((&dense * &w - &v).norm() <= 1e-12 * v.norm());
    }

    #[test]
    fn factor_examples() {
        let m = WeightMatrix::dense(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(m.factor(), &DMatrix::<f64>::identity(3, 3));

        let d = WeightMatrix::diagonal(DVector::from_vec(vec![4.0, 9.0])).unwrap();
        assert_eq!(
            d.factor(),
            &DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))
        );
    }

    #[test]
    fn factor_reassembles_and_is_lower_triangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 12] {
            let dense = random_spd(n, &mut rng);
            let m = WeightMatrix::dense(dense.clone()).unwrap();
            let l = m.factor();
            for i in 0..n {
                for j in i + 1..n {
                    assert_eq!(l[(i, j)], 0.0);
                }
            }
            let err = (l.transpose() * l - &dense).amax();
            assert!(err <= 1e-12 * dense.amax(), "n={n} err={err:e}");
        }
    }

    #[test]
    fn non_spd_names_pivot() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match WeightMatrix::dense(m) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 0),
            other => panic!("expected SPD failure, got {other:?}"),
        }
        match WeightMatrix::diagonal(DVector::from_vec(vec![1.0, 0.0, 2.0])) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected SPD failure, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_dense_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 2.0]);
        assert!(matches!(
            WeightMatrix::dense(m),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn dimension_mismatch() {
        let m = WeightMatrix::identity(3);
        let x = DVector::zeros(2);
        assert!(matches!(m.norm(&x), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(m.solve(&x), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn diagonal_and_dense_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = DVector::from_fn(9, |_, _| rng.random_range(0.01..5.0));
        let diag = WeightMatrix::diagonal(w.clone()).unwrap();
        let dense = WeightMatrix::dense(DMatrix::from_diagonal(&w)).unwrap();
        for _ in 0..10 {
            let x = DVector::from_fn(9, |_, _| rng.random_range(-1.0..1.0));
            let y = DVector::from_fn(9, |_, _| rng.random_range(-1.0..1.0));
            assert!(rel(diag.inner(&x, &y).unwrap(), dense.inner(&x, &y).unwrap()) < 1e-13);
            assert!(rel(diag.norm(&x).unwrap(), dense.norm(&x).unwrap()) < 1e-13);
            let a = diag.solve(&x).unwrap();
            let b = dense.solve(&x).unwrap();
            assert!((a - &b).norm() <= 1e-13 * b.norm());
        }
    }

    #[test]
    fn factor_is_computed_once_under_contention() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = WeightMatrix::diagonal(DVector::from_fn(50, |_, _| rng.random_range(0.5..2.0)))
            .unwrap();
        let ptrs: Vec<usize> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..8)
                .map(|_| s.spawn(|| m.factor() as *const _ as usize))
                .collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert!(ptrs.windows(2).all(|w| w[0] == w[1]));
    }
}
