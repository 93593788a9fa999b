//! Median best-iterate errors and discrepancy stops over five noise draws at
//! noise level 1e-3, for every test problem. Uses the reference problem sizes
//! unless `n` is given.
//!
//! cargo run --release --example error_table [n]

use std::time::Instant;

use rayon::prelude::*;
use weighted_krylov::problems::{add_noise, build_problem, ProblemKind};
use weighted_krylov::regularization::{
    lsqr_baseline, spr_solve, stop_lcurve, SprConfig, StoppingRule,
};

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn main() -> weighted_krylov::Result<()> {
    let n_arg: Option<usize> = std::env::args().nth(1).map(|s| s.parse().expect("odd n"));
    println!("{:<9} {:>11} {:>10} {:>10} {:>10} {:>8}", "problem", "size", "wlsqr opt", "lsqr opt", "dp stops", "lc");
    for kind in ProblemKind::ALL {
        let start = Instant::now();
        let (m0, n0) = kind.default_dims();
        let (m, n) = match n_arg {
            Some(n) => ((m0 * n).div_ceil(n0), n),
            None => (m0, n0),
        };
        let p = build_problem(kind, m, n)?;
        let runs: Vec<(f64, f64, usize, usize)> = (0..5u64)
            .into_par_iter()
            .map(|seed| {
                let data = add_noise(&p, 1e-3, seed).expect("valid noise level");
                let oracle = StoppingRule::oracle(p.x_true.clone()).expect("nonzero solution");
                let cfg = SprConfig::new(200);
                let w = spr_solve(&p.a, &p.weight, &data.b, &oracle, &cfg).expect("wlsqr");
                let l = lsqr_baseline(&p.a, &data.b, &oracle, &cfg).expect("lsqr");
                let dp = StoppingRule::dp(data.noise_norm()).expect("positive noise");
                let k_dp = spr_solve(&p.a, &p.weight, &data.b, &dp, &cfg).expect("dp").record.stop.k;
                let lc = stop_lcurve(&w.record.residual_norms(), &w.record.solution_norms())
                    .map(|c| c.k)
                    .unwrap_or(0);
                (w.record.stop_error().unwrap(), l.record.stop_error().unwrap(), k_dp, lc)
            })
            .collect();
        let mut we: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let mut le: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let dps: Vec<String> = runs.iter().map(|r| r.2.to_string()).collect();
        println!(
            "{:<9} {:>11} {:>10.4} {:>10.4} {:>10} {:>8}   ({:.0}s)",
            kind.name(),
            format!("{m}x{n}"),
            median(&mut we),
            median(&mut le),
            dps.join("/"),
            runs[0].3,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
