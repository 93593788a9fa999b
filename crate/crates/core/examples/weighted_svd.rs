//! Weighted SVD of a small discretized kernel: factorization checks, the
//! best rank-k approximation, and the minimum M-norm solution.
//!
//! cargo run --release --example weighted_svd

use nalgebra::DMatrix;
use weighted_krylov::problems::{build_problem, ProblemKind};
use weighted_krylov::wsvd::Wsvd;

fn main() -> weighted_krylov::Result<()> {
    let p = build_problem(ProblemKind::Shaw, 60, 41)?;
    let f = Wsvd::compute(&p.a, &p.weight)?;
    let m = p.weight.to_dense();

    println!("shaw 60x41: numerical rank {}", f.rank());
    println!("leading singular values:");
    for (i, s) in f.sigma().iter().take(8).enumerate() {
        println!("  sigma_{:<2} {s:.6e}", i + 1);
    }

    let r = f.rank();
    let utu = f.u().transpose() * f.u() - DMatrix::identity(r, r);
    let n = p.ncols();
    let vmv = f.v_full().transpose() * &m * f.v_full() - DMatrix::identity(n, n);
    let recon = f.reconstruct() - &p.a;
    println!("|U'U - I|_max   {:.2e}", utu.amax());
    println!("|V'MV - I|_max  {:.2e}", vmv.amax());
    println!("|A - U S V'M|   {:.2e}", recon.amax());

    for k in [1, 3, 6] {
        let ak = f.low_rank_approx(k)?;
        // ||A - A_k||_{M,2} equals sigma_{k+1}
        let rest = Wsvd::compute(&(&p.a - ak), &p.weight)?;
        println!(
            "rank {k}: ||A - A_k|| = {:.6e}, sigma_{} = {:.6e}",
            rest.sigma()[0],
            k + 1,
            f.sigma()[k]
        );
    }

    let x = f.min_norm_solution(&p.b_exact)?;
    println!(
        "min-norm solution from exact data: relative error {:.2e}",
        (&x - &p.x_true).norm() / p.x_true.norm()
    );
    Ok(())
}
