//! Error norms, refinement studies and table output.

use std::fmt::Write as _;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manufactured::{CaseId, ManufacturedCase};
use crate::solver::{
    solve_1d_with, solve_2d_with, Grid, ProblemSpec1D, ProblemSpec2D, SolveOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPair {
    /// Max over all nodes.
    pub linf: f64,
    /// `(dx sum_{i<N_x} e_i^2)^{1/2}`, with `dx dy` and `j < N_y` in 2D.
    pub l2: f64,
}

/// Compares a full-grid solution (boundaries included, x fastest) with
/// `exact(x, y)`; `y` is 0 on a line.
pub fn error_norms(
    numerical: &[f64],
    exact: impl Fn(f64, f64) -> f64,
    grid: &Grid,
) -> Result<ErrorPair> {
    if numerical.len() != grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            actual: numerical.len(),
        });
    }
    let mut linf: f64 = 0.0;
    let mut sum = 0.0;
    for (k, u) in numerical.iter().enumerate() {
        let (x, y) = grid.point(k);
        let e = (exact(x, y) - u).abs();
        linf = linf.max(e);
        if in_l2_range(grid, k) {
            sum += e * e;
        }
    }
    let cell = match grid {
        Grid::Line(x) => x.step(),
        Grid::Rect(x, y) => x.step() * y.step(),
    };
    Ok(ErrorPair {
        linf,
        l2: (cell * sum).sqrt(),
    })
}

fn in_l2_range(grid: &Grid, k: usize) -> bool {
    match grid {
        Grid::Line(x) => k < x.n_cells,
        Grid::Rect(x, y) => k % x.nodes() < x.n_cells && k / x.nodes() < y.n_cells,
    }
}

/// `log2(coarse / fine)`.
pub fn rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// Cells per unit length and time steps; `tau = dx = 1/n`.
    pub n: usize,
    pub tau: f64,
    pub dx: f64,
    pub dy: Option<f64>,
    pub errors: ErrorPair,
    pub linf_rate: Option<f64>,
    pub l2_rate: Option<f64>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub case: ManufacturedCase,
    pub horizon: f64,
    pub rows: Vec<ConvergenceRow>,
}

/// Solves `case` on the unit domain up to `T = 1` for each `n` in
/// `refinements` with `tau = dx (= dy) = 1/n`.
pub fn convergence_study(
    case: &ManufacturedCase,
    refinements: &[usize],
) -> Result<ConvergenceTable> {
    convergence_study_with(case, refinements, &SolveOptions::default())
}

pub fn convergence_study_with(
    case: &ManufacturedCase,
    refinements: &[usize],
    options: &SolveOptions,
) -> Result<ConvergenceTable> {
    case.validate()?;
    check_dyadic(refinements)?;
    let options = SolveOptions {
        keep_snapshots: false,
        ..*options
    };
    let results: Vec<Result<(ErrorPair, Duration)>> = refinements
        .par_iter()
        .map(|&n| solve_row(case, n, &options))
        .collect();

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(refinements.len());
    for (&n, res) in refinements.iter().zip(results) {
        let (errors, elapsed) = res?;
        let h = 1.0 / n as f64;
        let (linf_rate, l2_rate) = match rows.last() {
            Some(prev) => (
                Some(rate(prev.errors.linf, errors.linf)),
                Some(rate(prev.errors.l2, errors.l2)),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n,
            tau: h,
            dx: h,
            dy: (case.id == CaseId::Example2).then_some(h),
            errors,
            linf_rate,
            l2_rate,
            elapsed,
        });
    }
    Ok(ConvergenceTable {
        case: *case,
        horizon: 1.0,
        rows,
    })
}

fn check_dyadic(refinements: &[usize]) -> Result<()> {
    if refinements.is_empty() {
        return Err(Error::Invalid("refinement list is empty".into()));
    }
    if refinements[0] < 2 {
        return Err(Error::Invalid(
            "coarsest grid needs at least 2 cells".into(),
        ));
    }
    for w in refinements.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::Invalid(format!(
                "refinements must halve the step each row; got 1/{} then 1/{}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn solve_row(
    case: &ManufacturedCase,
    n: usize,
    options: &SolveOptions,
) -> Result<(ErrorPair, Duration)> {
    match (case.id, case.beta) {
        (CaseId::Example2, Some(beta)) => {
            let spec = ProblemSpec2D::manufactured(case.gamma, case.alpha, beta, n);
            let out = solve_2d_with(&spec, options)?;
            let t = out.time;
            let e = error_norms(&out.values, |x, y| case.exact(x, y, t), &out.grid)?;
            Ok((e, out.elapsed))
        }
        _ => {
            let spec = ProblemSpec1D::manufactured(case.gamma, case.alpha, n);
            let out = solve_1d_with(&spec, options)?;
            let t = out.time;
            let e = error_norms(&out.values, |x, y| case.exact(x, y, t), &out.grid)?;
            Ok((e, out.elapsed))
        }
    }
}

/// `1.0686e-04` style: four decimals, signed two-digit exponent.
pub fn format_sci(v: f64) -> String {
    let s = format!("{v:.4e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

impl ConvergenceTable {
    fn is_2d(&self) -> bool {
        self.case.id == CaseId::Example2
    }

    fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("case {}", self.case.id)];
        let mut params = format!("gamma {} alpha {}", self.case.gamma, self.case.alpha);
        if let Some(b) = self.case.beta {
            let _ = write!(params, " beta {b}");
        }
        let _ = write!(params, " T {}", self.horizon);
        lines.push(params);
        lines.push(if self.is_2d() {
            "tau = dx = dy; l2 = (dx dy sum_{i<Nx, j<Ny} e_ij^2)^(1/2)".into()
        } else {
            "tau = dx; l2 = (dx sum_{i<Nx} e_i^2)^(1/2)".into()
        });
        lines
    }

    /// Machine-readable table. Numbers use shortest round-trip formatting;
    /// the first row has empty rate fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in self.header_lines() {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str(if self.is_2d() {
            "tau,dx,dy,linf_error,linf_rate,l2_error,l2_rate\n"
        } else {
            "tau,dx,linf_error,linf_rate,l2_error,l2_rate\n"
        });
        let opt = |r: Option<f64>| r.map(|v| format!("{v}")).unwrap_or_default();
        for row in &self.rows {
            let _ = write!(out, "{},{}", row.tau, row.dx);
            if let Some(dy) = row.dy {
                let _ = write!(out, ",{dy}");
            }
            let _ = writeln!(
                out,
                ",{:e},{},{:e},{}",
                row.errors.linf,
                opt(row.linf_rate),
                row.errors.l2,
                opt(row.l2_rate)
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for line in self.header_lines() {
            let _ = writeln!(out, "<!-- {line} -->");
        }
        out.push_str("| tau | linf error | rate | l2 error | rate |\n");
        out.push_str("|---|---|---|---|---|\n");
        let opt = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        for row in &self.rows {
            let _ = writeln!(
                out,
                "| 1/{} | {} | {} | {} | {} |",
                row.n,
                format_sci(row.errors.linf),
                opt(row.linf_rate),
                format_sci(row.errors.l2),
                opt(row.l2_rate)
            );
        }
        out
    }
}
