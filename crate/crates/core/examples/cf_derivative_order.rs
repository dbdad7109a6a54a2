//! Second-order accuracy of the L1 approximation of the Caputo-Fabrizio
//! derivative, measured against composite Gauss-Legendre quadrature of
//! the defining integral for u(t) = t^3 e^t.

use cf_fracdiff::cf_time::{cf_l1_derivative, cf_params, cf_quadrature_oracle};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = |t: f64| t.powi(3) * t.exp();
    let du = |t: f64| (3.0 * t * t + t.powi(3)) * t.exp();
    for gamma in [0.1, 0.5, 0.9] {
        let exact = cf_quadrature_oracle(du, gamma, 1.0, 4096)?;
        println!("gamma {gamma}: D u(1) = {exact:.15}");
        let mut prev: Option<f64> = None;
        for n in [40usize, 80, 160, 320, 640] {
            let p = cf_params(gamma, 1.0 / n as f64)?;
            let samples: Vec<f64> = (0..=n).map(|k| u(k as f64 / n as f64)).collect();
            let err = (cf_l1_derivative(&samples, &p)? - exact).abs();
            match prev {
                Some(e) => println!(
                    "  tau 1/{n:<4} error {err:.4e} order {:.4}",
                    (e / err).log2()
                ),
                None => println!("  tau 1/{n:<4} error {err:.4e}"),
            }
            prev = Some(err);
        }
    }
    Ok(())
}
