//! Weighted LSQR.
//!
//! Iterates `x_k = Q_k y_k` with `y_k = B_k^† β_1 e_1`, updated through
//! Givens rotations of `B_k` so that no least-squares problem is formed
//! explicitly. The residual norm `||A x_k - b||_2` is available for free as
//! `φ̄_{k+1}`; `||x_k||_M` is recomputed each step. Both drive the stopping
//! rules in [`crate::regularization`].

use std::ops::ControlFlow;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::weights::WeightMatrix;
use crate::wgkb::{BidiagOptions, Wgkb};

/// Default iteration cap: `min(m, n, 200)`.
pub fn default_max_iter(rows: usize, cols: usize) -> usize {
    rows.min(cols).min(200)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// `φ̄_{k+1} = ||A x_k - b||_2`.
    pub residual_norm: f64,
    /// `||x_k||_M`.
    pub solution_m_norm: f64,
}

/// A view of the solver after iteration `k`, handed to run callbacks.
#[derive(Debug, Clone, Copy)]
pub struct Iterate<'s> {
    pub k: usize,
    pub x: &'s DVector<f64>,
    pub residual_norm: f64,
    pub solution_m_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Wlsqr<'a> {
    gkb: Wgkb<'a>,
    x: DVector<f64>,
    w: DVector<f64>,
    phibar: f64,
    rhobar: f64,
    history: Vec<IterationRecord>,
    complete: bool,
}

impl<'a> Wlsqr<'a> {
    /// `x_0 = 0`, `w_1 = q_1`, `φ̄_1 = β_1`, `ρ̄_1 = α_1`.
    pub fn new(
        a: &'a DMatrix<f64>,
        weight: &'a WeightMatrix,
        b: &DVector<f64>,
        opts: BidiagOptions,
    ) -> Result<Self> {
        let gkb = Wgkb::new(a, weight, b, opts)?;
        let n = a.ncols();
        let complete = gkb.terminated_at().is_some();
        let w = gkb
            .q()
            .first()
            .cloned()
            .unwrap_or_else(|| DVector::zeros(n));
        let phibar = gkb.betas()[0];
        let rhobar = gkb.alphas()[0];
        Ok(Self {
            gkb,
            x: DVector::zeros(n),
            w,
            phibar,
            rhobar,
            history: Vec::new(),
            complete,
        })
    }

    /// One bidiagonalization step, one Givens rotation and one update of `x`.
    /// Returns `false` once the bidiagonalization has terminated, at which
    /// point `x` is the minimum-M-norm least-squares solution.
    pub fn step(&mut self) -> bool {
        if self.complete {
            return false;
        }
        self.gkb.step();
        let i = self.gkb.steps();
        let beta = self.gkb.betas()[i];
        let alpha = self.gkb.alphas()[i];

        let rho = self.rhobar.hypot(beta);
        let c = self.rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        self.rhobar = -c * alpha;
        let phi = c * self.phibar;
        self.phibar *= s;

        self.x.axpy(phi / rho, &self.w, 1.0);
        match self.gkb.q().get(i) {
            Some(q_next) => {
                self.w *= -theta / rho;
                self.w += q_next;
            }
            None => self.w.fill(0.0),
        }

        let m_norm = self
            .gkb
            .weight()
            .inner_unchecked(&self.x, &self.x)
            .max(0.0)
            .sqrt();
        self.history.push(IterationRecord {
            k: i,
            residual_norm: self.phibar,
            solution_m_norm: m_norm,
        });
        if self.gkb.terminated_at().is_some() {
            self.complete = true;
        }
        true
    }

    /// Steps until `max_iter` iterations, termination, or the callback breaks.
    /// Returns the number of iterations performed by this call.
    pub fn run<F>(&mut self, max_iter: usize, mut callback: F) -> usize
    where
        F: FnMut(&Iterate<'_>) -> ControlFlow<()>,
    {
        let mut done = 0;
        while self.iterations() < max_iter && self.step() {
            done += 1;
            let rec = *self.history.last().expect("a step was taken");
            let it = Iterate {
                k: rec.k,
                x: &self.x,
                residual_norm: rec.residual_norm,
                solution_m_norm: rec.solution_m_norm,
            };
            if callback(&it).is_break() {
                break;
            }
        }
        done
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn into_solution(self) -> DVector<f64> {
        self.x
    }

    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    /// Current `φ̄_{k+1}`.
    pub fn residual_norm(&self) -> f64 {
        self.phibar
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    /// `true` once the bidiagonalization has terminated.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn bidiagonalization(&self) -> &Wgkb<'a> {
        &self.gkb
    }
}

/// Runs weighted LSQR from `x_0 = 0`.
pub fn wlsqr_run<'a, F>(
    a: &'a DMatrix<f64>,
    weight: &'a WeightMatrix,
    b: &DVector<f64>,
    max_iter: usize,
    opts: BidiagOptions,
    callback: F,
) -> Result<Wlsqr<'a>>
where
    F: FnMut(&Iterate<'_>) -> ControlFlow<()>,
{
    if max_iter == 0 {
        return Err(Error::InvalidParameter(
            "max_iter must be at least 1".into(),
        ));
    }
    let mut solver = Wlsqr::new(a, weight, b, opts)?;
    solver.run(max_iter, callback);
    Ok(solver)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(m: usize, n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_weight(n: usize, rng: &mut ChaCha8Rng) -> WeightMatrix {
        WeightMatrix::diagonal(DVector::from_fn(n, |_, _| rng.random_range(0.2..4.0))).unwrap()
    }

    fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn initial_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(9, 7, &mut rng);
        let m = random_weight(7, &mut rng);
        let b = DVector::from_fn(9, |_, _| rng.random_range(-1.0..1.0));
        let s = Wlsqr::new(&a, &m, &b, BidiagOptions::default()).unwrap();
        assert_eq!(s.x().norm(), 0.0);
        assert_eq!(s.residual_norm(), b.norm());
        assert_eq!((&a * s.x() - &b).norm(), s.residual_norm());
        assert!(matches!(
            Wlsqr::new(&a, &m, &DVector::zeros(9), BidiagOptions::default()),
            Err(Error::ZeroRhs)
        ));
    }

    #[test]
    fn first_iterate_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(12, 8, &mut rng);
        let m = random_weight(8, &mut rng);
        let b = DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
        let mut s = Wlsqr::new(&a, &m, &b, BidiagOptions::default()).unwrap();
        s.step();
        let g = s.bidiagonalization();
        let (a1, b1, b2) = (g.alphas()[0], g.betas()[0], g.betas()[1]);
        let rho = (a1 * a1 + b2 * b2).sqrt();
        let phi = a1 / rho * b1;
        let expected = &g.q()[0] * (phi / rho);
        assert!(rel_err(s.x(), &expected) < 1e-14);
    }

    #[test]
    fn iterates_match_projected_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(50, 40, &mut rng);
        let m = random_weight(40, &mut rng);
        let b = DVector::from_fn(50, |_, _| rng.random_range(-1.0..1.0));
        let mut s = Wlsqr::new(&a, &m, &b, BidiagOptions::default()).unwrap();
        for k in 1..=15 {
            s.step();
            let g = s.bidiagonalization();
            let bk = g.bidiagonal();
            let mut rhs = DVector::zeros(k + 1);
            rhs[0] = g.betas()[0];
            let y = bk.clone().svd(true, true).solve(&rhs, 0.0).unwrap();
            let x = g.q_matrix(k) * &y;
            assert!(rel_err(s.x(), &x) < 1e-10, "k={k}");
            // ||x_k||_M = ||y_k||_2 and the residual equals φ̄_{k+1}
            let rec = s.history()[k - 1];
            assert!((rec.solution_m_norm - y.norm()).abs() < 1e-10 * y.norm());
            let res = (&a * s.x() - &b).norm();
            assert!((res - rec.residual_norm).abs() < 1e-8 * res);
        }
    }

    #[test]
    fn residual_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(30, 25, &mut rng);
        let m = random_weight(25, &mut rng);
        let b = DVector::from_fn(30, |_, _| rng.random_range(-1.0..1.0));
        let s = wlsqr_run(&a, &m, &b, 25, BidiagOptions::default(), |_| {
            ControlFlow::Continue(())
        })
        .unwrap();
        let mut prev = b.norm();
        for r in s.history() {
            assert!(r.residual_norm >= 0.0 && r.residual_norm <= prev);
            prev = r.residual_norm;
        }
    }

    #[test]
    fn consistent_system_is_solved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(20, 12, &mut rng);
        let m = random_weight(12, &mut rng);
        let x_true = DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
        let b = &a * &x_true;
        let s = wlsqr_run(&a, &m, &b, 50, BidiagOptions::default(), |_| {
            ControlFlow::Continue(())
        })
        .unwrap();
        assert!(s.is_complete());
        assert!((&a * s.x() - &b).norm() <= 1e-10 * b.norm());
        assert!(rel_err(s.x(), &x_true) < 1e-9);
    }

    #[test]
    fn callback_can_stop_early() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_matrix(20, 12, &mut rng);
        let m = random_weight(12, &mut rng);
        let b = DVector::from_fn(20, |_, _| rng.random_range(-1.0..1.0));
        let mut seen = Vec::new();
        let s = wlsqr_run(&a, &m, &b, 10, BidiagOptions::default(), |it| {
            seen.push((it.k, it.residual_norm));
            if it.k == 4 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .unwrap();
        assert_eq!(s.iterations(), 4);
        assert_eq!(seen.len(), 4);
        assert_eq!(seen[3].1, s.residual_norm());
        assert!(wlsqr_run(&a, &m, &b, 0, BidiagOptions::default(), |_| {
            ControlFlow::Continue(())
        })
        .is_err());
    }

    #[test]
    fn default_cap() {
        assert_eq!(default_max_iter(2500, 2001), 200);
        assert_eq!(default_max_iter(40, 30), 30);
    }
}
