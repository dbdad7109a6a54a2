use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{Forcing, InitialData, ProblemSpec1D, SolveOptions, SolveResult};
use crate::cf_time::{cf_params, history_advance, history_init, CfParams, TimeHistory};
use crate::error::{Error, Result};
use crate::riesz::{assemble_riesz_matrix, RieszOperator};

/// `M = I - k A` and its Cholesky factor, with `k = rhs_scale * scale(A)`.
#[derive(Debug, Clone)]
pub struct StepSystem1D {
    matrix: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
    kappa: f64,
}

impl StepSystem1D {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Coefficient `k` multiplying `A` in `I - k A`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: rhs.len(),
            });
        }
        let x = self.factor.solve(&DVector::from_column_slice(rhs));
        Ok(x.as_slice().to_vec())
    }
}

pub fn build_step_matrix_1d(op: &RieszOperator, p: &CfParams) -> Result<StepSystem1D> {
    let kappa = p.rhs_scale() * op.scale();
    let n = op.dim();
    let matrix = DMatrix::identity(n, n) - op.matrix() * kappa;
    let factor = Cholesky::new(matrix.clone()).ok_or(Error::Factorization(n))?;
    Ok(StepSystem1D {
        matrix,
        factor,
        kappa,
    })
}

/// One implicit step: solves `M u^n = S + I + rhs_scale f^n` and folds `u^n`
/// into the history.
pub fn step_1d(
    system: &StepSystem1D,
    history: TimeHistory,
    forcing: &[f64],
    p: &CfParams,
) -> Result<(Vec<f64>, TimeHistory)> {
    let n = system.dim();
    if history.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: history.len(),
        });
    }
    if forcing.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: forcing.len(),
        });
    }
    let mut rhs = vec![0.0; n];
    history.carried_rhs(&mut rhs);
    let scale = p.rhs_scale();
    for (r, f) in rhs.iter_mut().zip(forcing) {
        *r += scale * f;
    }
    let u = system.solve(&rhs)?;
    let history = history_advance(history, &u, p)?;
    Ok((u, history))
}

pub fn solve_1d(spec: &ProblemSpec1D) -> Result<SolveResult> {
    solve_1d_with(spec, &SolveOptions::default())
}

pub(crate) fn initial_interior_1d(spec: &ProblemSpec1D) -> Vec<f64> {
    let n = spec.n_cells - 1;
    let dx = spec.dx();
    match &spec.initial {
        InitialData::Zero => vec![0.0; n],
        InitialData::Manufactured => {
            let case = spec.case();
            (1..=n).map(|i| case.initial(i as f64 * dx, 0.0)).collect()
        }
        InitialData::Interior(v) => v.clone(),
    }
}

pub fn solve_1d_with(spec: &ProblemSpec1D, options: &SolveOptions) -> Result<SolveResult> {
    spec.validate()?;
    let start = Instant::now();
    let tau = spec.tau();
    let p = cf_params(spec.gamma, tau)?;
    let op = assemble_riesz_matrix(spec.alpha, spec.n_cells, spec.x_len)?;
    let system = build_step_matrix_1d(&op, &p)?;
    let grid = spec.grid();
    let n = op.dim();
    let dx = spec.dx();
    let case = spec.case();

    let mut history = history_init(&initial_interior_1d(spec));
    let mut forcing = vec![0.0; n];
    let mut u = history.initial_term().to_vec();
    let mut snapshots = Vec::new();
    for step in 1..=spec.n_steps {
        let t = step as f64 * tau;
        if spec.forcing == Forcing::Manufactured {
            for (i, f) in forcing.iter_mut().enumerate() {
                *f = case.forcing((i + 1) as f64 * dx, 0.0, t);
            }
        }
        let (next, h) = step_1d(&system, history, &forcing, &p)?;
        history = h;
        u = next;
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
        cg_iterations: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riesz::dot;

    #[test]
    fn step_matrix_properties() {
        let op = assemble_riesz_matrix(1.5, 4, 1.0).unwrap();
        let p = cf_params(0.5, 0.25).unwrap();
        let sys = build_step_matrix_1d(&op, &p).unwrap();
        let g1 = op.coefficients().get(1);
        for i in 0..3 {
            let d = sys.matrix()[(i, i)];
            assert!((d - (1.0 - sys.kappa() * 2.0 * g1)).abs() < 1e-15);
            assert!(d > 1.0);
        }

        let op = assemble_riesz_matrix(1.7, 40, 1.0).unwrap();
        let sys = build_step_matrix_1d(&op, &p).unwrap();
        let mut state = 12345u64;
        for _ in 0..20 {
            let v: Vec<f64> = (0..39)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            let mv = sys.matrix() * DVector::from_column_slice(&v);
            assert!(dot(mv.as_slice(), &v) >= dot(&v, &v));
        }
    }

    #[test]
    fn kappa_limits() {
        // tau -> 0 leaves (1 - gamma) times the spatial scale
        let op = assemble_riesz_matrix(1.5, 8, 1.0).unwrap();
        let p = cf_params(0.5, 1e-14).unwrap();
        let sys = build_step_matrix_1d(&op, &p).unwrap();
        assert!((sys.kappa() - 0.5 * op.scale()).abs() < 1e-13 * op.scale());
        // a very long domain makes the spatial term negligible
        let op = assemble_riesz_matrix(1.5, 8, 1e12).unwrap();
        let sys = build_step_matrix_1d(&op, &cf_params(0.5, 0.1).unwrap()).unwrap();
        let id = DMatrix::<f64>::identity(7, 7);
        assert!((sys.matrix() - id).amax() < 1e-15);
    }

    #[test]
    fn zero_data_stays_zero() {
        let mut spec = ProblemSpec1D::manufactured(0.5, 1.5, 16);
        spec.initial = InitialData::Zero;
        spec.forcing = Forcing::Zero;
        let out = solve_1d(&spec).unwrap();
        assert!(out.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn one_step_applies_inverse() {
        let v: Vec<f64> = (1..8).map(|i| (i as f64).cos()).collect();
        let spec = ProblemSpec1D {
            gamma: 0.4,
            alpha: 1.6,
            x_len: 1.0,
            horizon: 0.3,
            n_cells: 8,
            n_steps: 1,
            initial: InitialData::Interior(v.clone()),
            forcing: Forcing::Zero,
        };
        let out = solve_1d(&spec).unwrap();
        let p = cf_params(0.4, 0.3).unwrap();
        let sys = build_step_matrix_1d(&assemble_riesz_matrix(1.6, 8, 1.0).unwrap(), &p).unwrap();
        let mu = sys.matrix() * DVector::from_column_slice(&out.values[1..8]);
        for (a, b) in mu.iter().zip(&v) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(out.values[0], 0.0);
        assert_eq!(out.values[8], 0.0);
    }

    #[test]
    fn dimension_checks() {
        let op = assemble_riesz_matrix(1.5, 6, 1.0).unwrap();
        let p = cf_params(0.5, 0.1).unwrap();
        let sys = build_step_matrix_1d(&op, &p).unwrap();
        assert!(step_1d(&sys, history_init(&[0.0; 4]), &[0.0; 5], &p).is_err());
        assert!(step_1d(&sys, history_init(&[0.0; 5]), &[0.0; 4], &p).is_err());
    }

    #[test]
    fn snapshots_recorded() {
        let spec = ProblemSpec1D::manufactured(0.5, 1.5, 8);
        let opts = SolveOptions {
            keep_snapshots: true,
            ..SolveOptions::default()
        };
        let out = solve_1d_with(&spec, &opts).unwrap();
        assert_eq!(out.snapshots.len(), 8);
        assert_eq!(out.snapshots.last().unwrap(), &out.values);
    }
}
