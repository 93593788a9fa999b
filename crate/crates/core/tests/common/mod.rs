//! Reference implementations used as oracles. None of them call into the
//! crate's factorizations or solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use weighted_krylov::problems::ProblemKind;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, n, n).qr().q()
}

/// Positive diagonal with condition number at most `cond`.
pub fn spd_diagonal(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> DVector<f64> {
    let scale = rng.random_range(0.1..10.0);
    DVector::from_fn(n, |_, _| scale * cond.powf(rng.random_range(0.0..1.0)))
}

/// Dense SPD `Q diag(d) Q^T` with condition number at most `cond`.
pub fn spd_dense(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> DMatrix<f64> {
    let q = orthogonal(rng, n);
    let d = spd_diagonal(rng, n, cond);
    let m = &q * DMatrix::from_diagonal(&d) * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// `M^{-1/2}` through a symmetric eigendecomposition.
pub fn inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// `||X||_{M,2} = ||X M^{-1/2}||_2`, with `M^{-1/2}` precomputed.
pub fn weighted_norm(x: &DMatrix<f64>, m_inv_sqrt: &DMatrix<f64>) -> f64 {
    let y = x * m_inv_sqrt;
    let g = y.transpose() * &y;
    SymmetricEigen::new(g).eigenvalues.max().max(0.0).sqrt()
}

/// Singular values by one-sided (Hestenes) Jacobi, in decreasing order.
pub fn jacobi_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut w = if a.nrows() >= a.ncols() {
        a.clone()
    } else {
        a.transpose()
    };
    let n = w.ncols();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..w.nrows() {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Textbook LSQR (unit weights) with two-pass classical Gram-Schmidt
/// reorthogonalization. Returns `x_1, x_2, ...` up to `kmax` or until the
/// bidiagonalization breaks down.
pub fn lsqr_iterates(a: &DMatrix<f64>, b: &DVector<f64>, kmax: usize) -> Vec<DVector<f64>> {
    let n = a.ncols();
    let beta1 = b.norm();
    let mut us = vec![b / beta1];
    let mut v = a.tr_mul(&us[0]);
    let mut alpha = v.norm();
    v /= alpha;
    let mut vs = vec![v.clone()];
    let mut scale = alpha;

    let mut w = v.clone();
    let mut x = DVector::zeros(n);
    let mut phibar = beta1;
    let mut rhobar = alpha;
    let mut out = Vec::new();

    let reorth = |z: &mut DVector<f64>, basis: &[DVector<f64>]| {
        for _ in 0..2 {
            let coeffs: Vec<f64> = basis.iter().map(|q| q.dot(z)).collect();
            for (q, c) in basis.iter().zip(coeffs) {
                z.axpy(-c, q, 1.0);
            }
        }
    };

    for _ in 0..kmax {
        let mut u = a * vs.last().unwrap() - us.last().unwrap() * alpha;
        reorth(&mut u, &us);
        let beta = u.norm();
        scale = scale.max(alpha.hypot(beta));
        let beta_done = beta <= 1e-14 * scale;

        let mut next_alpha = 0.0;
        let mut next_v = None;
        if !beta_done {
            u /= beta;
            us.push(u);
            let mut z = a.tr_mul(us.last().unwrap()) - vs.last().unwrap() * beta;
            reorth(&mut z, &vs);
            let a_next = z.norm();
            if a_next > 1e-14 * scale.max(a_next) {
                next_alpha = a_next;
                next_v = Some(z / a_next);
            }
        }
        let beta = if beta_done { 0.0 } else { beta };

        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * next_alpha;
        rhobar = -c * next_alpha;
        let phi = c * phibar;
        phibar *= s;

        x.axpy(phi / rho, &w, 1.0);
        out.push(x.clone());
        match next_v {
            Some(v) => {
                w = &v - &w * (theta / rho);
                vs.push(v);
                alpha = next_alpha;
            }
            None => break,
        }
    }
    out
}

/// Problem dimensions scaled to `n` nodes, keeping the reference aspect ratio.
pub fn scaled_dims(kind: ProblemKind, n: usize) -> (usize, usize) {
    let (m0, n0) = kind.default_dims();
    (((m0 * n) as f64 / n0 as f64).round() as usize, n)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn rel_diff(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    (x - y).norm() / y.norm()
}
