//! Two-dimensional solve on the unit square by matrix-free conjugate
//! gradients, with a dense Cholesky cross-check on a small grid.
//!
//! cargo run --release --example solve_2d -- [n]

use cf_fracdiff::analysis::error_norms;
use cf_fracdiff::manufactured::ManufacturedCase;
use cf_fracdiff::solver::{solve_2d_with, LinearSolver2D, ProblemSpec2D, SolveOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(32), |s| s.parse())?;
    let (gamma, alpha, beta) = (0.3, 1.2, 1.3);
    let case = ManufacturedCase::example_2(gamma, alpha, beta)?;

    let spec = ProblemSpec2D::manufactured(gamma, alpha, beta, n);
    let out = solve_2d_with(&spec, &SolveOptions::default())?;
    let t = out.time;
    let err = error_norms(&out.values, |x, y| case.exact(x, y, t), &out.grid)?;
    let iters: usize = out.cg_iterations.iter().sum();
    println!(
        "{}x{} cells, {} steps: max error {:.4e}, L2 error {:.4e}",
        n, n, spec.n_steps, err.linf, err.l2
    );
    println!(
        "CG iterations per step: mean {:.1}, max {}",
        iters as f64 / out.cg_iterations.len() as f64,
        out.cg_iterations.iter().max().copied().unwrap_or(0)
    );

    let small = ProblemSpec2D::manufactured(gamma, alpha, beta, 8);
    let cg = solve_2d_with(&small, &SolveOptions::default())?;
    let dense = solve_2d_with(
        &small,
        &SolveOptions {
            linear_solver: LinearSolver2D::DenseCholesky,
            ..SolveOptions::default()
        },
    )?;
    let gap = cg
        .values
        .iter()
        .zip(&dense.values)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    println!("8x8 CG vs dense Cholesky: max difference {gap:.2e}");
    Ok(())
}
