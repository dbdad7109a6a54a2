//! Refinement study with tau = dx = dy in two dimensions. Writes CSV to
//! stdout.
//!
//! cargo run --release --example convergence_2d -- [gamma] [alpha] [beta]

use cf_fracdiff::analysis::convergence_study;
use cf_fracdiff::manufactured::ManufacturedCase;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let gamma = args.first().copied().unwrap_or(0.7);
    let alpha = args.get(1).copied().unwrap_or(1.8);
    let beta = args.get(2).copied().unwrap_or(1.7);

    let case = ManufacturedCase::example_2(gamma, alpha, beta)?;
    let table = convergence_study(&case, &[10, 20, 40, 80])?;
    print!("{}", table.to_csv());
    for row in &table.rows {
        eprintln!("1/{}: {:?}", row.n, row.elapsed);
    }
    Ok(())
}
