//! Writes a noisy test problem to a directory in the CLI's on-disk format,
//! reads it back and solves it from the files alone.
//!
//! cargo run --release --example export_problem [dir]

use weighted_krylov::problems::{
    add_noise, build_problem, read_problem_dir, write_problem_dir, ProblemKind,
};
use weighted_krylov::regularization::{spr_solve, SprConfig, StoppingRule};
use weighted_krylov::weights::WeightMatrix;

fn main() -> weighted_krylov::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("wkrylov-green"));
    let p = build_problem(ProblemKind::Green, 401, 351)?;
    let data = add_noise(&p, 1e-2, 7)?;
    write_problem_dir(&dir, &p, &data)?;
    println!("wrote {}", dir.display());

    let back = read_problem_dir(&dir)?;
    print!("{}", back.meta.to_text());
    let weight = WeightMatrix::diagonal(back.weights)?;
    let noise = back.e.as_ref().map(|e| e.norm()).expect("noise stored");
    let sol = spr_solve(&back.a, &weight, &back.b, &StoppingRule::dp(noise)?, &SprConfig::new(100))?;
    let x_true = back.x_true.expect("solution stored");
    println!(
        "discrepancy stop k = {}, relative error {:.4}",
        sol.record.stop.k,
        (&sol.x - &x_true).norm() / x_true.norm()
    );
    Ok(())
}
