use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use super::cg::{conjugate_gradient, LinearOperator};
use super::{Forcing, InitialData, LinearSolver2D, ProblemSpec2D, SolveOptions, SolveResult};
use crate::cf_time::{cf_params, history_advance, history_init, CfParams, TimeHistory};
use crate::error::{Error, Result};
use crate::riesz::{assemble_riesz_matrix, RieszOperator};

/// `M = I - kx (I ⊗ A_x) - ky (A_y ⊗ I)` on lexicographic unknowns, x fastest.
#[derive(Debug, Clone)]
pub struct KroneckerOperator {
    ax: RieszOperator,
    ay: RieszOperator,
    kx: f64,
    ky: f64,
}

impl KroneckerOperator {
    pub fn nx(&self) -> usize {
        self.ax.dim()
    }

    pub fn ny(&self) -> usize {
        self.ay.dim()
    }

    pub fn kx(&self) -> f64 {
        self.kx
    }

    pub fn ky(&self) -> f64 {
        self.ky
    }

    pub fn x_operator(&self) -> &RieszOperator {
        &self.ax
    }

    pub fn y_operator(&self) -> &RieszOperator {
        &self.ay
    }

    /// Materializes `M`; intended for small grids.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let (nx, ny) = (self.nx(), self.ny());
        let n = nx * ny;
        let mut storage: Vec<f64> = Vec::new();
        storage
            .try_reserve_exact(n * n)
            .map_err(|_| Error::Allocation(n * n))?;
        storage.resize(n * n, 0.0);
        let mut m = DMatrix::from_vec(n, n, storage);
        let (ax, ay) = (self.ax.matrix(), self.ay.matrix());
        for j in 0..ny {
            for i in 0..nx {
                let r = j * nx + i;
                m[(r, r)] += 1.0;
                for l in 0..nx {
                    m[(r, j * nx + l)] -= self.kx * ax[(i, l)];
                }
                for l in 0..ny {
                    m[(r, l * nx + i)] -= self.ky * ay[(j, l)];
                }
            }
        }
        Ok(m)
    }
}

impl LinearOperator for KroneckerOperator {
    fn dim(&self) -> usize {
        self.nx() * self.ny()
    }

    /// Row-parallel over y lines; each entry is summed in a fixed order, so
    /// the result does not depend on the thread count.
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let nx = self.nx();
        out.par_chunks_mut(nx).enumerate().for_each(|(j, line)| {
            let vj = &v[j * nx..(j + 1) * nx];
            // y term accumulated line by line into `line`
            line.fill(0.0);
            for (a, vl) in self.ay.row(j).iter().zip(v.chunks_exact(nx)) {
                for (o, x) in line.iter_mut().zip(vl) {
                    *o += a * x;
                }
            }
            // x term as a combination of the (symmetric) columns of A_x
            let mut x_term = vec![0.0; nx];
            for (l, &w) in vj.iter().enumerate() {
                for (t, a) in x_term.iter_mut().zip(self.ax.row(l)) {
                    *t += w * a;
                }
            }
            for ((o, t), u) in line.iter_mut().zip(&x_term).zip(vj) {
                *o = u - self.kx * t - self.ky * *o;
            }
        });
    }
}

pub fn build_operator_2d(spec: &ProblemSpec2D, p: &CfParams) -> Result<KroneckerOperator> {
    let ax = assemble_riesz_matrix(spec.alpha, spec.n_cells, spec.x_len)?;
    let ay = assemble_riesz_matrix(spec.beta, spec.n_cells_y, spec.y_len)?;
    let kx = p.rhs_scale() * ax.scale();
    let ky = p.rhs_scale() * ay.scale();
    Ok(KroneckerOperator { ax, ay, kx, ky })
}

enum Backend {
    Cg {
        tolerance: f64,
        max_iterations: usize,
    },
    Dense(Cholesky<f64, Dyn>),
}

/// One implicit step by CG, warm-started from `guess`. Returns the new
/// solution, the updated history and the CG iteration count.
pub fn step_2d(
    op: &KroneckerOperator,
    history: TimeHistory,
    forcing: &[f64],
    guess: &[f64],
    p: &CfParams,
    options: &SolveOptions,
) -> Result<(Vec<f64>, TimeHistory, usize)> {
    let n = op.dim();
    let backend = Backend::Cg {
        tolerance: options.cg_tolerance,
        max_iterations: options.cg_max_iterations.unwrap_or(10 * n),
    };
    step_with(op, &backend, history, forcing, guess, p)
}

fn step_with(
    op: &KroneckerOperator,
    backend: &Backend,
    history: TimeHistory,
    forcing: &[f64],
    guess: &[f64],
    p: &CfParams,
) -> Result<(Vec<f64>, TimeHistory, usize)> {
    let n = op.dim();
    for len in [history.len(), forcing.len(), guess.len()] {
        if len != n {
            return Err(Error::Dimension {
                expected: n,
                actual: len,
            });
        }
    }
    let mut rhs = vec![0.0; n];
    history.carried_rhs(&mut rhs);
    let scale = p.rhs_scale();
    for (r, f) in rhs.iter_mut().zip(forcing) {
        *r += scale * f;
    }
    let (u, iterations) = match backend {
        Backend::Cg {
            tolerance,
            max_iterations,
        } => {
            let mut u = guess.to_vec();
            let out = conjugate_gradient(op, &rhs, &mut u, *tolerance, *max_iterations)?;
            (u, out.iterations)
        }
        Backend::Dense(factor) => {
            let x = factor.solve(&DVector::from_column_slice(&rhs));
            (x.as_slice().to_vec(), 0)
        }
    };
    let history = history_advance(history, &u, p)?;
    Ok((u, history, iterations))
}

pub fn solve_2d(spec: &ProblemSpec2D) -> Result<SolveResult> {
    solve_2d_with(spec, &SolveOptions::default())
}

pub(crate) fn initial_interior_2d(spec: &ProblemSpec2D) -> Vec<f64> {
    let (nx, ny) = (spec.n_cells - 1, spec.n_cells_y - 1);
    match &spec.initial {
        InitialData::Zero => vec![0.0; nx * ny],
        InitialData::Manufactured => {
            let case = spec.case();
            let grid = spec.grid();
            interior_points(&grid, nx, ny)
                .map(|(x, y)| case.initial(x, y))
                .collect()
        }
        InitialData::Interior(v) => v.clone(),
    }
}

fn interior_points(
    grid: &super::Grid,
    nx: usize,
    ny: usize,
) -> impl Iterator<Item = (f64, f64)> + '_ {
    let (dx, dy) = match grid {
        super::Grid::Rect(x, y) => (x.step(), y.step()),
        super::Grid::Line(x) => (x.step(), 0.0),
    };
    (0..ny).flat_map(move |j| (0..nx).map(move |i| ((i + 1) as f64 * dx, (j + 1) as f64 * dy)))
}

pub fn solve_2d_with(spec: &ProblemSpec2D, options: &SolveOptions) -> Result<SolveResult> {
    spec.validate()?;
    let start = Instant::now();
    let tau = spec.tau();
    let p = cf_params(spec.gamma, tau)?;
    let op = build_operator_2d(spec, &p)?;
    let n = op.dim();
    let backend = match options.linear_solver {
        LinearSolver2D::ConjugateGradient => Backend::Cg {
            tolerance: options.cg_tolerance,
            max_iterations: options.cg_max_iterations.unwrap_or(10 * n),
        },
        LinearSolver2D::DenseCholesky => {
            let m = op.to_dense()?;
            Backend::Dense(Cholesky::new(m).ok_or(Error::Factorization(n))?)
        }
    };
    let grid = spec.grid();
    let (nx, ny) = (op.nx(), op.ny());
    let case = spec.case();
    let points: Vec<(f64, f64)> = interior_points(&grid, nx, ny).collect();

    let mut history = history_init(&initial_interior_2d(spec));
    let mut u = history.initial_term().to_vec();
    let mut forcing = vec![0.0; n];
    let mut snapshots = Vec::new();
    let mut cg_iterations = Vec::new();
    for step in 1..=spec.n_steps {
        let t = step as f64 * tau;
        if spec.forcing == Forcing::Manufactured {
            forcing
                .par_iter_mut()
                .zip(&points)
                .for_each(|(f, &(x, y))| *f = case.forcing(x, y, t));
        }
        let (next, h, its) = step_with(&op, &backend, history, &forcing, &u, &p)?;
        history = h;
        u = next;
        if matches!(backend, Backend::Cg { .. }) {
            cg_iterations.push(its);
        }
        if options.keep_snapshots {
            snapshots.push(grid.embed_interior(&u));
        }
    }
    Ok(SolveResult {
        grid,
        time: spec.n_steps as f64 * tau,
        values: grid.embed_interior(&u),
        snapshots,
        elapsed: start.elapsed(),
        cg_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ProblemSpec2D {
        let mut s = ProblemSpec2D::manufactured(0.3, 1.4, 1.7, 6);
        s.n_cells_y = 5;
        s.initial = InitialData::Zero;
        s.forcing = Forcing::Zero;
        s
    }

    #[test]
    fn matvec_matches_dense() {
        let spec = small_spec();
        let p = cf_params(0.3, 0.1).unwrap();
        let op = build_operator_2d(&spec, &p).unwrap();
        let dense = op.to_dense().unwrap();
        assert_eq!(dense.nrows(), 20);
        assert!((dense.transpose() - &dense).amax() < 1e-15);
        let v: Vec<f64> = (0..20).map(|k| ((k * 7 % 11) as f64).sin()).collect();
        let mut out = vec![0.0; 20];
        op.apply(&v, &mut out);
        let reference = &dense * DVector::from_column_slice(&v);
        for (a, b) in out.iter().zip(reference.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn cg_and_dense_agree() {
        let mut spec = ProblemSpec2D::manufactured(0.5, 1.3, 1.8, 8);
        spec.horizon = 0.5;
        spec.n_steps = 4;
        let cg = solve_2d(&spec).unwrap();
        let dense = solve_2d_with(
            &spec,
            &SolveOptions {
                linear_solver: LinearSolver2D::DenseCholesky,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(cg.cg_iterations.len(), 4);
        assert!(dense.cg_iterations.is_empty());
        for (a, b) in cg.values.iter().zip(&dense.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn step_rejects_bad_lengths() {
        let spec = small_spec();
        let p = cf_params(0.3, 0.1).unwrap();
        let op = build_operator_2d(&spec, &p).unwrap();
        let h = history_init(&[0.0; 20]);
        let opts = SolveOptions::default();
        assert!(step_2d(&op, h.clone(), &[0.0; 19], &[0.0; 20], &p, &opts).is_err());
        assert!(step_2d(&op, h, &[0.0; 20], &[0.0; 20], &p, &opts).is_ok());
    }
}
