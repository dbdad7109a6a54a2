//! Conjugate gradients for symmetric positive-definite operators.

use crate::error::{Error, Result};
use crate::riesz::dot;

pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// `out <- M v`.
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `||b - M x|| / ||b||` recomputed from the returned iterate.
    pub relative_residual: f64,
}

/// Solves `M x = b` starting from the contents of `x`.
///
/// Inner products are accumulated sequentially, so repeated runs produce
/// identical iterates.
pub fn conjugate_gradient<M: LinearOperator + ?Sized>(
    op: &M,
    b: &[f64],
    x: &mut [f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<CgOutcome> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: b.len(),
        });
    }
    if x.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: x.len(),
        });
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut p = r.clone();
    let mut q = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let target = tolerance * b_norm;
    let mut iterations = 0;

    while rr.sqrt() > target {
        if iterations == max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: rr.sqrt() / b_norm,
            });
        }
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            // lost positive definiteness
            return Err(Error::NoConvergence {
                iterations,
                residual: rr.sqrt() / b_norm,
            });
        }
        let step = rr / pq;
        for ((xi, pi), (ri, qi)) in x.iter_mut().zip(&p).zip(r.iter_mut().zip(&q)) {
            *xi += step * pi;
            *ri -= step * qi;
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_next;
        iterations += 1;
    }

    op.apply(x, &mut q);
    let true_res = q
        .iter()
        .zip(b)
        .map(|(mi, bi)| (bi - mi) * (bi - mi))
        .sum::<f64>()
        .sqrt()
        / b_norm;
    Ok(CgOutcome {
        iterations,
        relative_residual: true_res,
    })
}
