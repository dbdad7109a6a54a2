//! Growth of random initial perturbations under the homogeneous scheme,
//! including a single step over the whole horizon.

use cf_fracdiff::solver::{
    stability_experiment_1d, stability_experiment_2d, ProblemSpec1D, ProblemSpec2D, SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!(
        "{:>6} {:>6} {:>5} {:>6} {:>12}",
        "gamma", "alpha", "N_x", "N", "max ratio"
    );
    for (gamma, alpha, n_cells, n_steps) in
        [(0.5, 1.8, 64, 128), (0.1, 1.2, 32, 1), (0.9, 1.5, 48, 8)]
    {
        let spec = ProblemSpec1D {
            n_steps,
            ..ProblemSpec1D::manufactured(gamma, alpha, n_cells)
        };
        let e0: Vec<f64> = (0..n_cells - 1)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let r = stability_experiment_1d(&spec, &e0)?;
        println!(
            "{gamma:>6} {alpha:>6} {n_cells:>5} {n_steps:>6} {:>12.9}",
            r.max_ratio
        );
    }

    let spec = ProblemSpec2D {
        n_steps: 1,
        ..ProblemSpec2D::manufactured(0.3, 1.3, 1.9, 16)
    };
    let e0: Vec<f64> = (0..spec.unknowns())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let r = stability_experiment_2d(&spec, &e0, &SolveOptions::default())?;
    println!(
        "2D, one step of length T: max ratio {:.9} ({})",
        r.max_ratio,
        if r.passed() { "bounded" } else { "grew" }
    );
    Ok(())
}
