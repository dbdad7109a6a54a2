//! Perturbation growth under the homogeneous scheme.
//!
//! The scheme is linear, so the difference of two solves that differ only in
//! their initial data is the solve of the homogeneous problem started from
//! that difference. One solve with `f = 0` and `u^0 = E^0` is run and
//! `max_n ||E^n||_inf / ||E^0||_inf` is reported.

use serde::Serialize;

use super::{
    solve_1d_with, solve_2d_with, Forcing, InitialData, ProblemSpec1D, ProblemSpec2D, SolveOptions,
};
use crate::error::{Error, Result};

/// Ratios above `1 + STABILITY_SLACK` count as growth.
pub const STABILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub initial_norm: f64,
    /// `||E^n||_inf / ||E^0||_inf` for `n = 1..=N`.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Step attaining `max_ratio`.
    pub worst_step: usize,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.max_ratio <= 1.0 + STABILITY_SLACK
    }

    fn from_snapshots(initial: &[f64], snapshots: &[Vec<f64>]) -> Result<Self> {
        let e0 = max_abs(initial);
        if e0 == 0.0 {
            return Err(Error::Invalid(
                "perturbation is identically zero; the growth ratio is undefined".into(),
            ));
        }
        let ratios: Vec<f64> = snapshots.iter().map(|s| max_abs(s) / e0).collect();
        let (worst_step, max_ratio) =
            ratios
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, &r)| {
                    if r > acc.1 {
                        (k + 1, r)
                    } else {
                        acc
                    }
                });
        Ok(StabilityReport {
            initial_norm: e0,
            ratios,
            max_ratio,
            worst_step,
        })
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Runs `spec` with zero forcing from the interior perturbation `e0`.
/// The initial data and forcing fields of `spec` are ignored.
pub fn stability_experiment_1d(spec: &ProblemSpec1D, e0: &[f64]) -> Result<StabilityReport> {
    if max_abs(e0) == 0.0 {
        return Err(Error::Invalid(
            "perturbation is identically zero; the growth ratio is undefined".into(),
        ));
    }
    let spec = ProblemSpec1D {
        initial: InitialData::Interior(e0.to_vec()),
        forcing: Forcing::Zero,
        ..spec.clone()
    };
    let out = solve_1d_with(
        &spec,
        &SolveOptions {
            keep_snapshots: true,
            ..SolveOptions::default()
        },
    )?;
    StabilityReport::from_snapshots(e0, &out.snapshots)
}

pub fn stability_experiment_2d(
    spec: &ProblemSpec2D,
    e0: &[f64],
    options: &SolveOptions,
) -> Result<StabilityReport> {
    if max_abs(e0) == 0.0 {
        return Err(Error::Invalid(
            "perturbation is identically zero; the growth ratio is undefined".into(),
        ));
    }
    let spec = ProblemSpec2D {
        initial: InitialData::Interior(e0.to_vec()),
        forcing: Forcing::Zero,
        ..spec.clone()
    };
    let out = solve_2d_with(
        &spec,
        &SolveOptions {
            keep_snapshots: true,
            ..*options
        },
    )?;
    StabilityReport::from_snapshots(e0, &out.snapshots)
}
