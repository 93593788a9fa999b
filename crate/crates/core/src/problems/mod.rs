//! Discretized first-kind Fredholm test problems.
//!
//! `∫ K(s, t) f(t) dt = g(s)` is collocated at `m` uniform points `s_j` and
//! the integral is replaced by composite Simpson's rule on `n` uniform nodes
//! `t_i`, giving `A_{ji} = K(s_j, t_i) w_i`. The quadrature weights double as
//! the diagonal weight matrix `M = diag(w)`, so `||x||_M` approximates the
//! `L²` norm of the function sampled by `x`.

mod export;
mod kernels;
mod quadrature;

pub use export::{
    read_problem_dir, write_array, write_matrix, write_problem_dir, Meta, ProblemData,
};
pub use kernels::ProblemKind;
pub use quadrature::{simpson_weights, simpson_weights_with, uniform_grid, Spacing};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::weights::WeightMatrix;

#[derive(Debug, Clone)]
pub struct TestProblem {
    pub kind: ProblemKind,
    pub a: DMatrix<f64>,
    pub weight: WeightMatrix,
    pub x_true: DVector<f64>,
    pub b_exact: DVector<f64>,
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub spacing: Spacing,
}

impl TestProblem {
    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    /// Quadrature weights `w_i`.
    pub fn weights(&self) -> &DVector<f64> {
        self.weight
            .diagonal_entries()
            .expect("test problems use diagonal weights")
    }
}

/// Observations `b = b_exact + e` with `||e||_2 = ε ||b_exact||_2`.
#[derive(Debug, Clone)]
pub struct NoisyData {
    pub b: DVector<f64>,
    pub e: DVector<f64>,
    pub epsilon: f64,
    pub seed: u64,
}

impl NoisyData {
    pub fn noise_norm(&self) -> f64 {
        self.e.norm()
    }
}

pub fn build_problem(kind: ProblemKind, m: usize, n: usize) -> Result<TestProblem> {
    build_problem_with(kind, m, n, Spacing::Nodes)
}

pub fn build_problem_with(
    kind: ProblemKind,
    m: usize,
    n: usize,
    spacing: Spacing,
) -> Result<TestProblem> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "need at least one observation point".into(),
        ));
    }
    let (s1, s2, t1, t2) = kind.domain();
    let w = simpson_weights_with(n, t1, t2, spacing)?;
    let s_grid = uniform_grid(m, s1, s2);
    let t_grid = uniform_grid(n, t1, t2);

    // column-major: column i holds K(s_j, t_i) w_i
    let mut a = DMatrix::<f64>::zeros(m, n);
    a.as_mut_slice()
        .par_chunks_mut(m)
        .enumerate()
        .for_each(|(i, col)| {
            let (t, wi) = (t_grid[i], w[i]);
            for (j, entry) in col.iter_mut().enumerate() {
                *entry = kind.kernel(s_grid[j], t) * wi;
            }
        });

    let x_true = DVector::from_iterator(n, t_grid.iter().map(|&t| kind.solution(t)));
    let b_exact = &a * &x_true;
    let weight = WeightMatrix::diagonal(DVector::from_vec(w))?;
    Ok(TestProblem {
        kind,
        a,
        weight,
        x_true,
        b_exact,
        s_grid,
        t_grid,
        spacing,
    })
}

/// Gaussian white noise from a seeded generator, rescaled so that
/// `||e||_2 / ||b_exact||_2 = epsilon` exactly.
pub fn add_noise(problem: &TestProblem, epsilon: f64, seed: u64) -> Result<NoisyData> {
    noise_for(&problem.b_exact, epsilon, seed)
}

pub fn noise_for(b_exact: &DVector<f64>, epsilon: f64, seed: u64) -> Result<NoisyData> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be finite and >= 0, got {epsilon}"
        )));
    }
    let m = b_exact.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: DVector<f64> =
        DVector::from_iterator(m, (0..m).map(|_| StandardNormal.sample(&mut rng)));
    let e = if epsilon == 0.0 {
        DVector::zeros(m)
    } else {
        let scale = epsilon * b_exact.norm() / raw.norm();
        raw * scale
    };
    Ok(NoisyData {
        b: b_exact + &e,
        e,
        epsilon,
        seed,
    })
}

/// `σ_max / σ_min` over the numerically nonzero singular values of `A`.
pub fn condition_estimate(problem: &TestProblem) -> f64 {
    condition_number(&problem.a)
}

pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let s = a.clone().singular_values();
    let max = s.max();
    if max == 0.0 {
        return f64::INFINITY;
    }
    let tol = a.nrows().max(a.ncols()) as f64 * f64::EPSILON * max;
    let min = s
        .iter()
        .copied()
        .filter(|&v| v > tol)
        .fold(f64::INFINITY, f64::min);
    max / min
}
