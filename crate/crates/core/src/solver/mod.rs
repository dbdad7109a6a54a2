//! Implicit time stepping for the 1D and 2D problems.
//!
//! Each step solves
//!
//! ```text
//! (I - k A) u^n = S + I + rhs_scale f^n
//! ```
//!
//! with `k = rhs_scale * kappa_a / (Gamma(4-a) dx^a)` and the history terms
//! from [`crate::cf_time`]. In 1D the matrix is time independent and is
//! Cholesky-factored once; in 2D it is the Kronecker sum
//! `I - kx (I ⊗ A_a) - ky (A_b ⊗ I)` and is solved matrix-free by CG.

mod cg;
mod one_d;
mod stability;
mod two_d;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use cg::{conjugate_gradient, CgOutcome, LinearOperator};
pub use one_d::{build_step_matrix_1d, solve_1d, solve_1d_with, step_1d, StepSystem1D};
pub use stability::{
    stability_experiment_1d, stability_experiment_2d, StabilityReport, STABILITY_SLACK,
};
pub use two_d::{build_operator_2d, solve_2d, solve_2d_with, step_2d, KroneckerOperator};

use crate::error::{check_space_order, Error, Result};
use crate::manufactured::ManufacturedCase;

/// Initial data selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialData {
    Zero,
    /// `u(·, 0)` of the manufactured case matching the dimension.
    Manufactured,
    /// Explicit interior values, x fastest in 2D.
    Interior(Vec<f64>),
}

/// Forcing selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Forcing {
    Zero,
    Manufactured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec1D {
    pub gamma: f64,
    pub alpha: f64,
    pub x_len: f64,
    pub horizon: f64,
    pub n_cells: usize,
    pub n_steps: usize,
    pub initial: InitialData,
    pub forcing: Forcing,
}

impl ProblemSpec1D {
    /// `example-1` on the unit interval up to `T = 1` with `tau = dx = 1/n`.
    pub fn manufactured(gamma: f64, alpha: f64, n: usize) -> Self {
        ProblemSpec1D {
            gamma,
            alpha,
            x_len: 1.0,
            horizon: 1.0,
            n_cells: n,
            n_steps: n,
            initial: InitialData::Manufactured,
            forcing: Forcing::Manufactured,
        }
    }

    pub fn tau(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn dx(&self) -> f64 {
        self.x_len / self.n_cells as f64
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.gamma, self.horizon, self.n_steps)?;
        check_space_order("alpha", self.alpha)?;
        check_axis("x_len", self.x_len, self.n_cells)?;
        let uses_case = matches!(self.initial, InitialData::Manufactured)
            || self.forcing == Forcing::Manufactured;
        if uses_case {
            check_unit_case(&[self.x_len], self.horizon)?;
        }
        if let InitialData::Interior(v) = &self.initial {
            check_interior(v, self.n_cells - 1)?;
        }
        Ok(())
    }

    pub(crate) fn case(&self) -> ManufacturedCase {
        ManufacturedCase {
            id: crate::manufactured::CaseId::Example1,
            gamma: self.gamma,
            alpha: self.alpha,
            beta: None,
        }
    }

    pub fn grid(&self) -> Grid {
        Grid::Line(Axis::new(self.x_len, self.n_cells))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec2D {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub x_len: f64,
    pub y_len: f64,
    pub horizon: f64,
    pub n_cells: usize,
    pub n_cells_y: usize,
    pub n_steps: usize,
    pub initial: InitialData,
    pub forcing: Forcing,
}

impl ProblemSpec2D {
    /// `example-2` on the unit square up to `T = 1` with `tau = dx = dy = 1/n`.
    pub fn manufactured(gamma: f64, alpha: f64, beta: f64, n: usize) -> Self {
        ProblemSpec2D {
            gamma,
            alpha,
            beta,
            x_len: 1.0,
            y_len: 1.0,
            horizon: 1.0,
            n_cells: n,
            n_cells_y: n,
            n_steps: n,
            initial: InitialData::Manufactured,
            forcing: Forcing::Manufactured,
        }
    }

    pub fn tau(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn unknowns(&self) -> usize {
        (self.n_cells - 1) * (self.n_cells_y - 1)
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.gamma, self.horizon, self.n_steps)?;
        check_space_order("alpha", self.alpha)?;
        check_space_order("beta", self.beta)?;
        check_axis("x_len", self.x_len, self.n_cells)?;
        check_axis("y_len", self.y_len, self.n_cells_y)?;
        let uses_case = matches!(self.initial, InitialData::Manufactured)
            || self.forcing == Forcing::Manufactured;
        if uses_case {
            check_unit_case(&[self.x_len, self.y_len], self.horizon)?;
        }
        if let InitialData::Interior(v) = &self.initial {
            check_interior(v, self.unknowns())?;
        }
        Ok(())
    }

    pub(crate) fn case(&self) -> ManufacturedCase {
        ManufacturedCase {
            id: crate::manufactured::CaseId::Example2,
            gamma: self.gamma,
            alpha: self.alpha,
            beta: Some(self.beta),
        }
    }

    pub fn grid(&self) -> Grid {
        Grid::Rect(
            Axis::new(self.x_len, self.n_cells),
            Axis::new(self.y_len, self.n_cells_y),
        )
    }
}

fn check_common(gamma: f64, horizon: f64, n_steps: usize) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain("gamma", gamma, "(0, 1)"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain("horizon", horizon, "(0, inf)"));
    }
    if n_steps == 0 {
        return Err(Error::Invalid("need at least one time step".into()));
    }
    Ok(())
}

fn check_axis(name: &'static str, len: f64, n_cells: usize) -> Result<()> {
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::domain(name, len, "(0, inf)"));
    }
    if n_cells < 2 {
        return Err(Error::Invalid(format!(
            "need at least 2 cells, got {n_cells}"
        )));
    }
    Ok(())
}

fn check_unit_case(lengths: &[f64], horizon: f64) -> Result<()> {
    if lengths.iter().any(|&l| l != 1.0) || horizon > 1.0 {
        return Err(Error::Invalid(
            "manufactured data is defined on the unit domain for t in [0, 1]".into(),
        ));
    }
    Ok(())
}

fn check_interior(v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Dimension {
            expected,
            actual: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("initial data must be finite".into()));
    }
    Ok(())
}

/// A uniform axis `0 = z_0 < ... < z_N = length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub length: f64,
    pub n_cells: usize,
}

impl Axis {
    pub fn new(length: f64, n_cells: usize) -> Self {
        Axis { length, n_cells }
    }

    pub fn step(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    /// Number of nodes including both boundaries.
    pub fn nodes(&self) -> usize {
        self.n_cells + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    Line(Axis),
    /// x axis, y axis; values are stored x fastest.
    Rect(Axis, Axis),
}

impl Grid {
    /// Total node count including boundaries.
    pub fn len(&self) -> usize {
        match self {
            Grid::Line(x) => x.nodes(),
            Grid::Rect(x, y) => x.nodes() * y.nodes(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinates of flat node `k`; `y = 0` on a line.
    pub fn point(&self, k: usize) -> (f64, f64) {
        match self {
            Grid::Line(x) => (x.node(k), 0.0),
            Grid::Rect(x, y) => {
                let nx = x.nodes();
                (x.node(k % nx), y.node(k / nx))
            }
        }
    }

    /// Whether flat node `k` lies on the boundary.
    pub fn on_boundary(&self, k: usize) -> bool {
        match self {
            Grid::Line(x) => k == 0 || k == x.n_cells,
            Grid::Rect(x, y) => {
                let (i, j) = (k % x.nodes(), k / x.nodes());
                i == 0 || j == 0 || i == x.n_cells || j == y.n_cells
            }
        }
    }

    /// Places interior values (x fastest) into a full-grid vector with zero
    /// boundary entries.
    pub fn embed_interior(&self, interior: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.len()];
        match self {
            Grid::Line(_) => full[1..=interior.len()].copy_from_slice(interior),
            Grid::Rect(x, _) => {
                let nx = x.n_cells - 1;
                for (j, row) in interior.chunks(nx).enumerate() {
                    let start = (j + 1) * x.nodes() + 1;
                    full[start..start + nx].copy_from_slice(row);
                }
            }
        }
        full
    }
}

/// How 2D steps solve their linear system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearSolver2D {
    ConjugateGradient,
    /// Dense Cholesky of the materialized operator; small grids only.
    DenseCholesky,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Keep the full-grid solution of every step.
    pub keep_snapshots: bool,
    pub linear_solver: LinearSolver2D,
    /// Relative residual target for CG.
    pub cg_tolerance: f64,
    /// Defaults to `10 * unknowns`.
    pub cg_max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            keep_snapshots: false,
            linear_solver: LinearSolver2D::ConjugateGradient,
            cg_tolerance: 1e-12,
            cg_max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub grid: Grid,
    /// Final time `n_steps * tau`.
    pub time: f64,
    /// Full-grid solution at the final time, boundaries included.
    pub values: Vec<f64>,
    /// Full-grid solutions `u^1 .. u^N` if requested.
    pub snapshots: Vec<Vec<f64>>,
    pub elapsed: Duration,
    /// CG iterations per step (2D with CG only).
    pub cg_iterations: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut s = ProblemSpec1D::manufactured(0.5, 1.5, 8);
        assert!(s.validate().is_ok());
        s.alpha = 2.0;
        assert!(s.validate().is_err());
        let mut s = ProblemSpec1D::manufactured(0.5, 1.5, 8);
        s.x_len = 2.0;
        assert!(s.validate().is_err());
        s.initial = InitialData::Zero;
        s.forcing = Forcing::Zero;
        assert!(s.validate().is_ok());
        s.initial = InitialData::Interior(vec![0.0; 6]);
        assert!(matches!(s.validate(), Err(Error::Dimension { .. })));
        s.n_steps = 0;
        assert!(s.validate().is_err());

        let mut s = ProblemSpec2D::manufactured(0.3, 1.2, 1.3, 8);
        assert!(s.validate().is_ok());
        s.beta = 1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn grid_embedding() {
        let g = Grid::Rect(Axis::new(1.0, 3), Axis::new(2.0, 4));
        let interior: Vec<f64> = (1..=6).map(|v| v as f64).collect();
        let full = g.embed_interior(&interior);
        assert_eq!(full.len(), 20);
        for (k, v) in full.iter().enumerate() {
            if g.on_boundary(k) {
                assert_eq!(*v, 0.0);
            }
        }
        assert_eq!(full[5], 1.0);
        assert_eq!(full[6], 2.0);
        assert_eq!(full[9], 3.0);
        assert_eq!(g.point(9), (1.0 / 3.0, 1.0));
    }
}
