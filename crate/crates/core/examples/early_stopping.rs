//! The three stopping rules side by side: discrepancy principle, L-curve
//! corner and the oracle optimum, for weighted LSQR and for plain LSQR.
//!
//! cargo run --release --example early_stopping [n]

use weighted_krylov::problems::{add_noise, build_problem, ProblemKind};
use weighted_krylov::regularization::{lsqr_baseline, spr_solve, SprConfig, StoppingRule};

fn main() -> weighted_krylov::Result<()> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse().expect("odd n")).unwrap_or(1001);
    println!("{:<9} {:<7} {:>6} {:>6} {:>6}   {:>9} {:>9} {:>9}", "problem", "method", "dp", "lc", "oracle", "err dp", "err lc", "err opt");
    for kind in ProblemKind::ALL {
        let (m0, n0) = kind.default_dims();
        let p = build_problem(kind, (m0 * n).div_ceil(n0), n)?;
        let data = add_noise(&p, 1e-3, 0)?;
        let rules = [
            StoppingRule::dp(data.noise_norm())?,
            StoppingRule::LCurve,
            StoppingRule::oracle(p.x_true.clone())?,
        ];
        let cfg = SprConfig::new(200).with_reference(p.x_true.clone());
        for weighted in [true, false] {
            let mut ks = Vec::new();
            let mut errs = Vec::new();
            for rule in &rules {
                let sol = if weighted {
                    spr_solve(&p.a, &p.weight, &data.b, rule, &cfg)?
                } else {
                    lsqr_baseline(&p.a, &data.b, rule, &cfg)?
                };
                if let Some(flag) = sol.record.stop.flag {
                    eprintln!("{kind} {}: {}", rule.name(), flag.as_str());
                }
                ks.push(sol.record.stop.k);
                errs.push(sol.record.stop_error().unwrap_or(f64::NAN));
            }
            println!(
                "{:<9} {:<7} {:>6} {:>6} {:>6}   {:>9.4} {:>9.4} {:>9.4}",
                kind.name(),
                if weighted { "wlsqr" } else { "lsqr" },
                ks[0], ks[1], ks[2], errs[0], errs[1], errs[2]
            );
        }
    }
    Ok(())
}
