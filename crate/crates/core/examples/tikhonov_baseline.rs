//! Direct regularization baselines from the dense weighted SVD: Tikhonov at
//! its error-optimal parameter and truncation at the best rank, against
//! weighted LSQR stopped at its best iterate.
//!
//! cargo run --release --example tikhonov_baseline

use weighted_krylov::problems::{add_noise, build_problem, ProblemKind};
use weighted_krylov::regularization::{
    spr_solve, tikhonov_error, tikhonov_opt, twsvd_solve, SprConfig, StoppingRule,
};
use weighted_krylov::wsvd::Wsvd;

fn main() -> weighted_krylov::Result<()> {
    let n = 501;
    for kind in ProblemKind::ALL {
        let (m0, n0) = kind.default_dims();
        let p = build_problem(kind, (m0 * n).div_ceil(n0), n)?;
        let data = add_noise(&p, 1e-3, 0)?;
        let f = Wsvd::compute(&p.a, &p.weight)?;
        let oracle = StoppingRule::oracle(p.x_true.clone())?;

        let t = tikhonov_opt(&f, &data.b, &p.x_true)?;
        let tsvd = twsvd_solve(&f, &data.b, &oracle, 200, Some(&p.x_true))?;
        let krylov = spr_solve(&p.a, &p.weight, &data.b, &oracle, &SprConfig::new(200))?;
        println!(
            "{kind}: tikhonov {:.4} (lambda {:.2e}), truncated k={} {:.4}, wlsqr k={} {:.4}",
            t.relative_error,
            t.lambda,
            tsvd.record.stop.k,
            tsvd.record.stop_error().unwrap_or(f64::NAN),
            krylov.record.stop.k,
            krylov.record.stop_error().unwrap_or(f64::NAN),
        );

        // the error as a function of the parameter around the optimum
        let lambdas: Vec<f64> = (-4..=4).map(|j| t.lambda * 10f64.powf(j as f64 / 2.0)).collect();
        let errs = tikhonov_error(&f, &data.b, &p.x_true, &lambdas)?;
        let row: Vec<String> = errs.iter().map(|e| format!("{e:.3}")).collect();
        println!("    error at lambda_opt * 10^(j/2), j=-4..4: {}", row.join(" "));
    }
    Ok(())
}
