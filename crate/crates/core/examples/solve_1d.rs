//! One-dimensional solve of the manufactured problem, compared with the
//! exact solution at the final time.
//!
//! cargo run --example solve_1d -- [gamma] [alpha] [n]

use cf_fracdiff::analysis::error_norms;
use cf_fracdiff::manufactured::ManufacturedCase;
use cf_fracdiff::solver::{solve_1d, ProblemSpec1D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let gamma: f64 = args.first().map_or(Ok(0.5), |s| s.parse())?;
    let alpha: f64 = args.get(1).map_or(Ok(1.5), |s| s.parse())?;
    let n: usize = args.get(2).map_or(Ok(64), |s| s.parse())?;

    let spec = ProblemSpec1D::manufactured(gamma, alpha, n);
    let out = solve_1d(&spec)?;
    let case = ManufacturedCase::example_1(gamma, alpha)?;
    let t = out.time;
    let err = error_norms(&out.values, |x, y| case.exact(x, y, t), &out.grid)?;

    println!("gamma {gamma} alpha {alpha} tau = dx = 1/{n}, T = {t}");
    println!("{:>8} {:>14} {:>14}", "x", "numerical", "exact");
    for k in (0..out.values.len()).step_by((n / 8).max(1)) {
        let (x, _) = out.grid.point(k);
        println!(
            "{x:>8.4} {:>14.6e} {:>14.6e}",
            out.values[k],
            case.exact(x, 0.0, t)
        );
    }
    println!(
        "max error {:.4e}, discrete L2 error {:.4e}",
        err.linf, err.l2
    );
    println!("elapsed {:?}", out.elapsed);
    Ok(())
}
