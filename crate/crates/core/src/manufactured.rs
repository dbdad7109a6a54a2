//! Manufactured solutions on the unit interval and unit square.
//!
//! Both cases use the separable profile `w(z) = z^2 (1 - z)^2` with time
//! factor `exp(-sigma t)`:
//!
//! * `example-1`: `u(x, t) = exp(-sigma t) w(x)`
//! * `example-2`: `u(x, y, t) = exp(-sigma t) w(x) w(y)`
//!
//! The forcing is back-solved from the exact Caputo-Fabrizio derivative of
//! `exp(-sigma t)`, which is `-(sigma / (1 - gamma)) t exp(-sigma t)`, and
//! the exact Riesz derivative of `w` expressed through fractional powers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_space_order, Error, Result};
use crate::riesz::riesz_kappa;
use crate::special::gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    #[serde(rename = "example-1")]
    Example1,
    #[serde(rename = "example-2")]
    Example2,
}

impl CaseId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseId::Example1 => "example-1",
            CaseId::Example2 => "example-2",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            CaseId::Example1 => 1,
            CaseId::Example2 => 2,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example-1" => Ok(CaseId::Example1),
            "example-2" => Ok(CaseId::Example2),
            other => Err(Error::Invalid(format!(
                "unknown case '{other}' (expected example-1 or example-2)"
            ))),
        }
    }
}

/// A manufactured case with its fractional orders bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedCase {
    pub id: CaseId,
    pub gamma: f64,
    pub alpha: f64,
    /// y-direction order, `example-2` only.
    pub beta: Option<f64>,
}

impl ManufacturedCase {
    pub fn example_1(gamma: f64, alpha: f64) -> Result<Self> {
        let case = ManufacturedCase {
            id: CaseId::Example1,
            gamma,
            alpha,
            beta: None,
        };
        case.validate()?;
        Ok(case)
    }

    pub fn example_2(gamma: f64, alpha: f64, beta: f64) -> Result<Self> {
        let case = ManufacturedCase {
            id: CaseId::Example2,
            gamma,
            alpha,
            beta: Some(beta),
        };
        case.validate()?;
        Ok(case)
    }

    pub fn validate(&self) -> Result<()> {
        check_time_order(self.gamma)?;
        check_space_order("alpha", self.alpha)?;
        match (self.id, self.beta) {
            (CaseId::Example1, None) => Ok(()),
            (CaseId::Example1, Some(_)) => Err(Error::Invalid(
                "example-1 is one-dimensional and takes no beta".into(),
            )),
            (CaseId::Example2, Some(b)) => check_space_order("beta", b),
            (CaseId::Example2, None) => Err(Error::Invalid("example-2 needs beta".into())),
        }
    }

    /// Exact solution; `y` is ignored for `example-1`.
    pub fn exact(&self, x: f64, y: f64, t: f64) -> f64 {
        match self.id {
            CaseId::Example1 => time_factor(self.gamma, t) * profile(x),
            CaseId::Example2 => time_factor(self.gamma, t) * profile(x) * profile(y),
        }
    }

    pub fn initial(&self, x: f64, y: f64) -> f64 {
        match self.id {
            CaseId::Example1 => profile(x),
            CaseId::Example2 => profile(x) * profile(y),
        }
    }

    pub fn forcing(&self, x: f64, y: f64, t: f64) -> f64 {
        match (self.id, self.beta) {
            (CaseId::Example2, Some(beta)) => {
                forcing_2d_unchecked(x, y, t, self.gamma, self.alpha, beta)
            }
            _ => forcing_1d_unchecked(x, t, self.gamma, self.alpha),
        }
    }
}

fn check_time_order(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("gamma", gamma, "(0, 1)"))
    }
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::domain(name, v, "[0, 1]"))
    }
}

/// `z^2 (1 - z)^2`.
pub fn profile(z: f64) -> f64 {
    let s = z * (1.0 - z);
    s * s
}

fn time_factor(gamma: f64, t: f64) -> f64 {
    let sigma = gamma / (1.0 - gamma);
    (-sigma * t).exp()
}

/// Caputo-Fabrizio derivative of `exp(-sigma t)`.
fn cf_of_time_factor(gamma: f64, t: f64) -> f64 {
    let sigma = gamma / (1.0 - gamma);
    -sigma / (1.0 - gamma) * t * (-sigma * t).exp()
}

/// Sum of the left and right Riemann-Liouville derivatives of `w` on (0, 1):
/// `24/G(5-a) (x^(4-a) + (1-x)^(4-a)) - 12/G(4-a) (x^(3-a) + ..) + 2/G(3-a) (x^(2-a) + ..)`.
fn two_sided_rl_of_profile(x: f64, alpha: f64) -> f64 {
    let both = |p: f64| x.powf(p) + (1.0 - x).powf(p);
    24.0 / gamma(5.0 - alpha) * both(4.0 - alpha) - 12.0 / gamma(4.0 - alpha) * both(3.0 - alpha)
        + 2.0 / gamma(3.0 - alpha) * both(2.0 - alpha)
}

/// Riesz derivative of order `alpha` of `x^2 (1 - x)^2` on (0, 1).
///
/// The powers `2 - alpha > 0` keep the closed form finite up to the
/// endpoints, so `x = 0` and `x = 1` evaluate by continuity.
pub fn riesz_of_quartic_profile(x: f64, alpha: f64) -> Result<f64> {
    check_space_order("alpha", alpha)?;
    check_unit("x", x)?;
    Ok(riesz_of_profile_unchecked(x, alpha))
}

fn riesz_of_profile_unchecked(x: f64, alpha: f64) -> f64 {
    riesz_kappa(alpha) * two_sided_rl_of_profile(x, alpha)
}

pub fn exact_1d(x: f64, t: f64, gamma: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("t", t)?;
    check_time_order(gamma)?;
    Ok(time_factor(gamma, t) * profile(x))
}

pub fn forcing_1d(x: f64, t: f64, gamma: f64, alpha: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("t", t)?;
    check_time_order(gamma)?;
    check_space_order("alpha", alpha)?;
    Ok(forcing_1d_unchecked(x, t, gamma, alpha))
}

pub(crate) fn forcing_1d_unchecked(x: f64, t: f64, gamma: f64, alpha: f64) -> f64 {
    let e = time_factor(gamma, t);
    let c = e / (2.0 * (alpha * PI / 2.0).cos());
    cf_of_time_factor(gamma, t) * profile(x) + c * two_sided_rl_of_profile(x, alpha)
}

pub fn exact_2d(x: f64, y: f64, t: f64, gamma: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    check_unit("t", t)?;
    check_time_order(gamma)?;
    Ok(time_factor(gamma, t) * profile(x) * profile(y))
}

/// Forcing for `example-2`. The y-direction terms use order `beta`.
pub fn forcing_2d(x: f64, y: f64, t: f64, gamma: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_unit("x", x)?;
    check_unit("y", y)?;
    check_unit("t", t)?;
    check_time_order(gamma)?;
    check_space_order("alpha", alpha)?;
    check_space_order("beta", beta)?;
    Ok(forcing_2d_unchecked(x, y, t, gamma, alpha, beta))
}

pub(crate) fn forcing_2d_unchecked(
    x: f64,
    y: f64,
    t: f64,
    gamma: f64,
    alpha: f64,
    beta: f64,
) -> f64 {
    let e = time_factor(gamma, t);
    let (wx, wy) = (profile(x), profile(y));
    cf_of_time_factor(gamma, t) * wx * wy
        + e * wy * two_sided_rl_of_profile(x, alpha) / (2.0 * (alpha * PI / 2.0).cos())
        + e * wx * two_sided_rl_of_profile(y, beta) / (2.0 * (beta * PI / 2.0).cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riesz::{gm_coefficients, modified_row_coefficient};

    #[test]
    fn boundary_and_initial_values() {
        for &t in &[0.0, 0.3, 1.0] {
            assert_eq!(exact_1d(0.0, t, 0.4).unwrap(), 0.0);
            assert_eq!(exact_1d(1.0, t, 0.4).unwrap(), 0.0);
            for &s in &[0.0, 0.25, 0.7, 1.0] {
                for (x, y) in [(0.0, s), (1.0, s), (s, 0.0), (s, 1.0)] {
                    assert_eq!(exact_2d(x, y, t, 0.3).unwrap(), 0.0);
                }
            }
        }
        assert_eq!(exact_1d(0.5, 0.0, 0.9).unwrap(), 0.0625);
        assert_eq!(exact_2d(0.5, 0.5, 0.0, 0.9).unwrap(), 3.90625e-3);
        let case = ManufacturedCase::example_2(0.3, 1.2, 1.3).unwrap();
        for &x in &[0.1, 0.45, 0.8] {
            assert!((case.exact(x, 0.3, 0.0) - case.initial(x, 0.3)).abs() <= 1e-15);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(exact_1d(-0.1, 0.5, 0.5).is_err());
        assert!(exact_1d(0.5, 1.5, 0.5).is_err());
        assert!(forcing_1d(0.5, 0.5, 0.5, 2.0).is_err());
        assert!(forcing_2d(0.5, 1.1, 0.5, 0.5, 1.5, 1.5).is_err());
        assert!(riesz_of_quartic_profile(0.5, 1.0).is_err());
        assert!(ManufacturedCase::example_1(0.5, 1.5).is_ok());
        assert!(ManufacturedCase::example_2(0.5, 1.5, 2.0).is_err());
        assert!("example-3".parse::<CaseId>().is_err());
        assert_eq!("example-2".parse::<CaseId>().unwrap(), CaseId::Example2);
    }

    #[test]
    fn forcing_is_reflection_symmetric() {
        for &x in &[0.0, 0.05, 0.2, 0.37, 0.5] {
            for &(g, a) in &[(0.1, 1.2), (0.5, 1.8), (0.9, 1.5)] {
                let l = forcing_1d(x, 0.6, g, a).unwrap();
                let r = forcing_1d(1.0 - x, 0.6, g, a).unwrap();
                assert!((l - r).abs() <= 1e-14 * l.abs().max(1.0));
                let l = riesz_of_quartic_profile(x, a).unwrap();
                let r = riesz_of_quartic_profile(1.0 - x, a).unwrap();
                assert!((l - r).abs() <= 1e-14 * l.abs().max(1.0));
            }
        }
    }

    #[test]
    fn endpoints_evaluate_by_continuity() {
        let v = riesz_of_quartic_profile(0.0, 1.5).unwrap();
        assert!(v.is_finite());
        let near = riesz_of_quartic_profile(1e-14, 1.5).unwrap();
        assert!((v - near).abs() < 1e-6);
    }

    /// Discrete Riesz operator applied to the profile on a fine grid, row by row.
    fn fine_grid_riesz(x_index: usize, n: usize, alpha: f64) -> f64 {
        let g = gm_coefficients(alpha, n + 1).unwrap();
        let dx = 1.0 / n as f64;
        let sum: f64 = (0..=n)
            .map(|m| modified_row_coefficient(&g, n, x_index, m).unwrap() * profile(m as f64 * dx))
            .sum();
        riesz_kappa(alpha) / (gamma(4.0 - alpha) * dx.powf(alpha)) * sum
    }

    #[test]
    fn closed_form_matches_fine_grid_operator() {
        let n = 4096;
        let exact = riesz_of_quartic_profile(0.5, 1.5).unwrap();
        let fine = fine_grid_riesz(n / 2, n, 1.5);
        assert!(((exact - fine) / exact).abs() < 1e-4, "{exact} vs {fine}");
    }

    #[test]
    fn pde_residual_vanishes_at_second_order() {
        // CF derivative by quadrature, Riesz term by the fine-grid operator
        let residual = |g: f64, a: f64, n: usize, frac: (usize, usize), t: f64| {
            let xi = n * frac.0 / frac.1;
            let x = xi as f64 / n as f64;
            let sigma: f64 = g / (1.0 - g);
            let cf =
                crate::cf_time::cf_quadrature_oracle(|s| -sigma * (-sigma * s).exp(), g, t, 20_000)
                    .unwrap();
            assert!((cf - cf_of_time_factor(g, t)).abs() < 1e-10);
            let riesz = (-sigma * t).exp() * fine_grid_riesz(xi, n, a);
            cf * profile(x) - riesz - forcing_1d(x, t, g, a).unwrap()
        };
        for &(g, a) in &[(0.1, 1.2), (0.5, 1.8), (0.7, 1.5)] {
            for &frac in &[(1, 8), (1, 4), (1, 2), (5, 8)] {
                for &t in &[0.25, 1.0] {
                    let coarse = residual(g, a, 2048, frac, t);
                    let fine = residual(g, a, 4096, frac, t);
                    assert!(fine.abs() < 2e-7, "g {g} a {a} {frac:?} t {t}: {fine:e}");
                    let ratio = coarse / fine;
                    assert!(
                        (3.5..4.5).contains(&ratio),
                        "g {g} a {a} {frac:?} t {t}: ratio {ratio}"
                    );
                }
            }
        }
    }
}
