//! Sign, row-sum, partial-sum and quadratic-form checks on the Riesz
//! coefficients for a sweep of orders, plus the history-matrix dominance.
//!
//! cargo run --example coefficient_checks -- [n_cells]

use cf_fracdiff::cf_time::{cf_params, history_matrix_dominance};
use cf_fracdiff::riesz::{assemble_riesz_matrix, check_coefficient_lemmas, LemmaCheckOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(256), |s| s.parse())?;
    for k in 1..=9 {
        let alpha = 1.0 + 0.1 * k as f64;
        let op = assemble_riesz_matrix(alpha, n, 1.0)?;
        let report =
            check_coefficient_lemmas(op.coefficients(), &op, LemmaCheckOptions::default())?;
        let failed: Vec<String> = report
            .clauses
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({}, margin {:.3e})", c.name, c.worst_at, c.worst_margin))
            .collect();
        if failed.is_empty() {
            println!(
                "alpha {alpha:.1}: all {} clauses hold",
                report.clauses.len()
            );
        } else {
            println!("alpha {alpha:.1}: failed {}", failed.join(", "));
        }
    }
    for gamma in [0.1, 0.5, 0.9] {
        let d = history_matrix_dominance(&cf_params(gamma, 1.0 / n as f64)?, n)?;
        println!(
            "history matrix gamma {gamma}: diagonal {:.4e}, off-diagonal row sum {:.4e}",
            d.diagonal, d.max_offdiagonal_row_sum
        );
    }
    Ok(())
}
