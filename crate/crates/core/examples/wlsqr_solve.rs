//! Weighted LSQR on noisy data, one line per iteration. The error first drops
//! and then grows once noise starts to dominate.
//!
//! cargo run --release --example wlsqr_solve [problem] [epsilon]

use std::ops::ControlFlow;

use weighted_krylov::problems::{add_noise, build_problem, ProblemKind};
use weighted_krylov::wgkb::BidiagOptions;
use weighted_krylov::wlsqr::Wlsqr;

fn main() -> weighted_krylov::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: ProblemKind = args.next().as_deref().unwrap_or("phillips").parse()?;
    let eps: f64 = args.next().map(|s| s.parse().expect("epsilon")).unwrap_or(1e-3);

    let (m0, n0) = kind.default_dims();
    let n = 501;
    let m = m0 * n / n0;
    let p = build_problem(kind, m, n)?;
    let data = add_noise(&p, eps, 0)?;
    let x_norm = p.x_true.norm();

    println!("{kind} {m}x{n}, noise level {eps:e}, ||e|| = {:.3e}", data.noise_norm());
    println!("{:>3} {:>12} {:>12} {:>10}", "k", "residual", "||x||_M", "rel err");
    let mut solver = Wlsqr::new(&p.a, &p.weight, &data.b, BidiagOptions::default())?;
    solver.run(30, |it| {
        let err = (it.x - &p.x_true).norm() / x_norm;
        println!("{:>3} {:>12.4e} {:>12.4e} {:>10.4}", it.k, it.residual_norm, it.solution_m_norm, err);
        ControlFlow::Continue(())
    });
    if solver.is_complete() {
        println!("bidiagonalization terminated after {} steps", solver.iterations());
    }
    Ok(())
}
