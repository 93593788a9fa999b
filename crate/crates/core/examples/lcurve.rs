//! L-curve points and signed curvature for one run; the corner is the
//! point of largest curvature.
//!
//! cargo run --release --example lcurve [problem]

use weighted_krylov::problems::{add_noise, build_problem, ProblemKind};
use weighted_krylov::regularization::{spr_solve, stop_lcurve, SprConfig, StoppingRule};

fn main() -> weighted_krylov::Result<()> {
    let kind: ProblemKind = std::env::args().nth(1).as_deref().unwrap_or("shaw").parse()?;
    let (m0, n0) = kind.default_dims();
    let n = 1001;
    let p = build_problem(kind, (m0 * n).div_ceil(n0), n)?;
    let data = add_noise(&p, 1e-3, 0)?;
    let cfg = SprConfig::new(40).with_reference(p.x_true.clone());
    let run = spr_solve(&p.a, &p.weight, &data.b, &StoppingRule::MaxIter, &cfg)?;
    let rec = &run.record;

    let corner = stop_lcurve(&rec.residual_norms(), &rec.solution_norms())?;
    println!("{:>3} {:>10} {:>10} {:>11} {:>8}", "k", "log res", "log norm", "curvature", "rel err");
    for i in 0..rec.len() {
        let mark = if i + 1 == corner.k { "  <- corner" } else { "" };
        println!(
            "{:>3} {:>10.4} {:>10.4} {:>11} {:>8.4}{mark}",
            i + 1,
            corner.log_res[i],
            corner.log_norm[i],
            corner.curvature[i].map(|c| format!("{c:.3}")).unwrap_or_else(|| "-".into()),
            rec.error_at(i + 1).unwrap_or(f64::NAN),
        );
    }
    if corner.no_corner {
        println!("the curve is nearly straight; the corner is not reliable");
    }
    Ok(())
}
