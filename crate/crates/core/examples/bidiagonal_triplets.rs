//! Approximate weighted singular triplets from a few bidiagonalization steps,
//! compared with the dense weighted SVD.
//!
//! cargo run --release --example bidiagonal_triplets

use weighted_krylov::problems::{add_noise, build_problem, ProblemKind};
use weighted_krylov::wgkb::{BidiagOptions, Wgkb};
use weighted_krylov::wsvd::Wsvd;

fn main() -> weighted_krylov::Result<()> {
    let p = build_problem(ProblemKind::Phillips, 360, 301)?;
    let b = add_noise(&p, 1e-3, 0)?.b;
    let exact = Wsvd::compute(&p.a, &p.weight)?;

    let mut g = Wgkb::new(&p.a, &p.weight, &b, BidiagOptions::default())?;
    for target in [5, 10, 20, 40] {
        while g.steps() < target && g.step() {}
        let k = g.steps();
        println!("k = {k}");
        for (i, t) in g.approx_triplets(4.min(k))?.iter().enumerate() {
            let s = exact.sigma()[i];
            println!(
                "  i={} sigma_bar {:.10e}  rel gap {:.1e}  residual bound {:.1e}",
                i + 1,
                t.sigma,
                (t.sigma - s).abs() / s,
                t.residual_bound
            );
        }
    }
    Ok(())
}
