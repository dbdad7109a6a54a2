//! Reference solvers that rebuild the history sum from the stored trajectory
//! at every step instead of carrying it recursively.

#![allow(dead_code)]

use cf_fracdiff::cf_time::{cf_params, history_full_sum_oracle};
use cf_fracdiff::riesz::assemble_riesz_matrix;
use cf_fracdiff::solver::{
    build_operator_2d, build_step_matrix_1d, Forcing, InitialData, LinearOperator, ProblemSpec1D,
    ProblemSpec2D,
};
use nalgebra::{Cholesky, DVector};
use rand::Rng;

/// Interior solutions `u^1 ..= u^N` of a 1D problem.
pub fn full_sum_solve_1d(spec: &ProblemSpec1D) -> Vec<Vec<f64>> {
    spec.validate().unwrap();
    let p = cf_params(spec.gamma, spec.tau()).unwrap();
    let op = assemble_riesz_matrix(spec.alpha, spec.n_cells, spec.x_len).unwrap();
    let sys = build_step_matrix_1d(&op, &p).unwrap();
    let dx = spec.dx();
    let n = spec.n_cells - 1;
    let nodes: Vec<(f64, f64)> = (1..=n).map(|i| (i as f64 * dx, 0.0)).collect();
    let case =
        cf_fracdiff::manufactured::ManufacturedCase::example_1(spec.gamma, spec.alpha).unwrap();
    let u0 = initial(&spec.initial, &nodes, |x, y| case.initial(x, y));
    march(spec.n_steps, &u0, &p, |rhs, t| {
        if spec.forcing == Forcing::Manufactured {
            for (r, &(x, y)) in rhs.iter_mut().zip(&nodes) {
                *r += p.rhs_scale() * case.forcing(x, y, t);
            }
        }
        sys.solve(rhs).unwrap()
    })
}

/// Interior solutions of a 2D problem, solved by dense Cholesky.
pub fn full_sum_solve_2d_dense(spec: &ProblemSpec2D) -> Vec<Vec<f64>> {
    spec.validate().unwrap();
    let p = cf_params(spec.gamma, spec.tau()).unwrap();
    let op = build_operator_2d(spec, &p).unwrap();
    let factor = Cholesky::new(op.to_dense().unwrap()).unwrap();
    let (nx, ny) = (op.nx(), op.ny());
    let (dx, dy) = (
        spec.x_len / spec.n_cells as f64,
        spec.y_len / spec.n_cells_y as f64,
    );
    let nodes: Vec<(f64, f64)> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| ((i + 1) as f64 * dx, (j + 1) as f64 * dy)))
        .collect();
    let case =
        cf_fracdiff::manufactured::ManufacturedCase::example_2(spec.gamma, spec.alpha, spec.beta)
            .unwrap();
    let u0 = initial(&spec.initial, &nodes, |x, y| case.initial(x, y));
    debug_assert_eq!(op.dim(), nodes.len());
    march(spec.n_steps, &u0, &p, |rhs, t| {
        if spec.forcing == Forcing::Manufactured {
            for (r, &(x, y)) in rhs.iter_mut().zip(&nodes) {
                *r += p.rhs_scale() * case.forcing(x, y, t);
            }
        }
        factor
            .solve(&DVector::from_column_slice(rhs))
            .as_slice()
            .to_vec()
    })
}

fn initial(data: &InitialData, nodes: &[(f64, f64)], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    match data {
        InitialData::Zero => vec![0.0; nodes.len()],
        InitialData::Manufactured => nodes.iter().map(|&(x, y)| f(x, y)).collect(),
        InitialData::Interior(v) => v.clone(),
    }
}

fn march(
    n_steps: usize,
    u0: &[f64],
    p: &cf_fracdiff::cf_time::CfParams,
    mut solve: impl FnMut(&mut [f64], f64) -> Vec<f64>,
) -> Vec<Vec<f64>> {
    let mut trajectory: Vec<Vec<f64>> = Vec::with_capacity(n_steps);
    for n in 1..=n_steps {
        let (sum, init) = history_full_sum_oracle(&trajectory, u0, p, n).unwrap();
        let mut rhs: Vec<f64> = sum.iter().zip(&init).map(|(s, i)| s + i).collect();
        let u = solve(&mut rhs, n as f64 * p.tau());
        trajectory.push(u);
    }
    trajectory
}

/// Interior values of a full-grid vector (x fastest, boundary ring dropped).
pub fn interior_of(full: &[f64], nx_nodes: usize, ny_nodes: usize) -> Vec<f64> {
    if ny_nodes == 1 {
        return full[1..nx_nodes - 1].to_vec();
    }
    (1..ny_nodes - 1)
        .flat_map(|j| {
            full[j * nx_nodes + 1..(j + 1) * nx_nodes - 1]
                .iter()
                .copied()
        })
        .collect()
}

/// `max |a - b| / max |b|` over all steps.
pub fn relative_difference(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.len(), y.len());
        for (u, v) in x.iter().zip(y) {
            diff = diff.max((u - v).abs());
            scale = scale.max(v.abs());
        }
    }
    diff / scale
}

pub fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Column-by-column comparison of a matvec against its dense materialization.
pub fn max_column_mismatch(op: &impl LinearOperator, dense: &nalgebra::DMatrix<f64>) -> f64 {
    let n = op.dim();
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    let mut worst: f64 = 0.0;
    for c in 0..n {
        e.fill(0.0);
        e[c] = 1.0;
        op.apply(&e, &mut col);
        for r in 0..n {
            worst = worst.max((col[r] - dense[(r, c)]).abs());
        }
    }
    worst
}
