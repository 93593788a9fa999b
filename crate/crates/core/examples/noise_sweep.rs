//! Best-iterate error as the noise level shrinks. Weighted LSQR keeps
//! improving while plain LSQR stalls at the same error for every level.
//!
//! cargo run --release --example noise_sweep [n]

use rayon::prelude::*;
use weighted_krylov::cli::SWEEP_EPSILONS;
use weighted_krylov::problems::{add_noise, build_problem, ProblemKind};
use weighted_krylov::regularization::{lsqr_baseline, spr_solve, SprConfig, StoppingRule};

fn main() -> weighted_krylov::Result<()> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse().expect("odd n")).unwrap_or(1001);
    print!("{:<9} {:<6}", "problem", "method");
    for e in SWEEP_EPSILONS {
        print!(" {e:>9.1e}");
    }
    println!();
    for kind in ProblemKind::ALL {
        let (m0, n0) = kind.default_dims();
        let p = build_problem(kind, (m0 * n).div_ceil(n0), n)?;
        let rule = StoppingRule::oracle(p.x_true.clone())?;
        let cfg = SprConfig::new(200);
        let rows: Vec<(f64, f64)> = SWEEP_EPSILONS
            .par_iter()
            .map(|&eps| {
                let b = add_noise(&p, eps, 0).expect("valid noise level").b;
                let w = spr_solve(&p.a, &p.weight, &b, &rule, &cfg).expect("wlsqr run");
                let l = lsqr_baseline(&p.a, &b, &rule, &cfg).expect("lsqr run");
                (w.record.stop_error().unwrap(), l.record.stop_error().unwrap())
            })
            .collect();
        for (name, pick) in [("wlsqr", 0), ("lsqr", 1)] {
            print!("{:<9} {:<6}", kind.name(), name);
            for r in &rows {
                print!(" {:>9.4}", if pick == 0 { r.0 } else { r.1 });
            }
            println!();
        }
    }
    Ok(())
}
