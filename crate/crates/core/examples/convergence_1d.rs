//! Refinement study with tau = dx in one dimension, printed as a markdown
//! table for each time order.
//!
//! cargo run --release --example convergence_1d -- [alpha]

use cf_fracdiff::analysis::convergence_study;
use cf_fracdiff::manufactured::ManufacturedCase;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha: f64 = std::env::args().nth(1).map_or(Ok(1.8), |s| s.parse())?;
    for gamma in [0.1, 0.5, 0.9] {
        let case = ManufacturedCase::example_1(gamma, alpha)?;
        let table = convergence_study(&case, &[40, 80, 160, 320])?;
        println!("{}", table.to_markdown());
    }
    Ok(())
}
