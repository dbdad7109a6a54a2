//! L1 discretization of the Caputo-Fabrizio derivative
//!
//! ```text
//! D^g u(t) = 1 / (1 - g) * int_0^t u'(s) exp(-s_g (t - s)) ds,   s_g = g / (1 - g)
//! ```
//!
//! on a uniform time grid. Replacing `u'` by piecewise-constant difference
//! quotients integrates the exponential kernel exactly and is second-order
//! accurate. Written as an implicit step, the kernel turns into a history sum
//! that obeys a two-term recursion, so the solver only keeps
//! `S = sum_k u^k exp(-s(n-1-k)tau)(1 - exp(-s tau))` and the decayed initial
//! data `I = u^0 exp(-s(n-1)tau)`.

use crate::error::{Error, Result};

/// Time-step constants derived from the order `gamma` and the step `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfParams {
    gamma: f64,
    sigma: f64,
    tau: f64,
    decay: f64,
    weight: f64,
    rhs_scale: f64,
}

impl CfParams {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `gamma / (1 - gamma)`, in 1/time.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `exp(-sigma tau)`.
    pub fn decay(&self) -> f64 {
        self.decay
    }

    /// `1 - exp(-sigma tau)`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `(1 - gamma) sigma tau / (1 - exp(-sigma tau))`, the factor multiplying
    /// both the forcing and the spatial operator in the implicit step.
    pub fn rhs_scale(&self) -> f64 {
        self.rhs_scale
    }
}

/// Below this `sigma * tau` the step scale switches to its series expansion.
const SMALL_EXPONENT: f64 = 1e-12;

pub fn cf_params(gamma: f64, tau: f64) -> Result<CfParams> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain("gamma", gamma, "(0, 1)"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::domain("tau", tau, "(0, inf)"));
    }
    let sigma = gamma / (1.0 - gamma);
    let x = sigma * tau;
    let decay = (-x).exp();
    let weight = -(-x).exp_m1();
    let rhs_scale = if x < SMALL_EXPONENT {
        (1.0 - gamma) * (1.0 + x / 2.0 + x * x / 12.0)
    } else {
        (1.0 - gamma) * x / weight
    };
    Ok(CfParams {
        gamma,
        sigma,
        tau,
        decay,
        weight,
        rhs_scale,
    })
}

/// Recursive history state at the start of step `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeHistory {
    history_sum: Vec<f64>,
    initial_term: Vec<f64>,
    step_index: usize,
}

impl TimeHistory {
    pub fn history_sum(&self) -> &[f64] {
        &self.history_sum
    }

    pub fn initial_term(&self) -> &[f64] {
        &self.initial_term
    }

    /// The step `n` this state feeds.
    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn len(&self) -> usize {
        self.history_sum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history_sum.is_empty()
    }

    /// `S + I`, the part of the step right-hand side carried over from the past.
    pub fn carried_rhs(&self, out: &mut [f64]) {
        for ((o, s), i) in out
            .iter_mut()
            .zip(&self.history_sum)
            .zip(&self.initial_term)
        {
            *o = s + i;
        }
    }
}

pub fn history_init(u0: &[f64]) -> TimeHistory {
    TimeHistory {
        history_sum: vec![0.0; u0.len()],
        initial_term: u0.to_vec(),
        step_index: 1,
    }
}

/// Folds the freshly computed `u^n` into the history: `S' = d S + w u^n`,
/// `I' = d I` with `d = exp(-sigma tau)` and `w = 1 - d`.
pub fn history_advance(mut h: TimeHistory, u_n: &[f64], p: &CfParams) -> Result<TimeHistory> {
    if u_n.len() != h.len() {
        return Err(Error::Dimension {
            expected: h.len(),
            actual: u_n.len(),
        });
    }
    let (d, w) = (p.decay, p.weight);
    for (s, u) in h.history_sum.iter_mut().zip(u_n) {
        *s = d * *s + w * u;
    }
    for i in h.initial_term.iter_mut() {
        *i *= d;
    }
    h.step_index += 1;
    Ok(h)
}

/// Direct `O(n)` evaluation of the history terms for step `n` from the
/// stored trajectory `u^1 .. u^{n-1}`. Reference for the recursion only.
pub fn history_full_sum_oracle(
    trajectory: &[Vec<f64>],
    u0: &[f64],
    p: &CfParams,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Invalid("step index starts at 1".into()));
    }
    if trajectory.len() < n - 1 {
        return Err(Error::Invalid(format!(
            "step {n} needs {} stored solutions, got {}",
            n - 1,
            trajectory.len()
        )));
    }
    let mut sum = vec![0.0; u0.len()];
    for (k, u) in trajectory.iter().take(n - 1).enumerate() {
        let k = k + 1;
        if u.len() != u0.len() {
            return Err(Error::Dimension {
                expected: u0.len(),
                actual: u.len(),
            });
        }
        let factor = (-p.sigma * (n - 1 - k) as f64 * p.tau).exp() * p.weight;
        for (s, v) in sum.iter_mut().zip(u) {
            *s += v * factor;
        }
    }
    let initial_decay = (-p.sigma * (n - 1) as f64 * p.tau).exp();
    let initial = u0.iter().map(|v| v * initial_decay).collect();
    Ok((sum, initial))
}

/// L1 approximation of the Caputo-Fabrizio derivative at the last sample
/// `t_n`, from samples `u(t_0), ..., u(t_n)` spaced by `p.tau()`.
pub fn cf_l1_derivative(samples: &[f64], p: &CfParams) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Invalid(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let n = samples.len() - 1;
    // the most recent difference carries weight w, older ones decay by d per step
    let mut acc = 0.0;
    let mut factor = p.weight;
    for k in (1..=n).rev() {
        acc += (samples[k] - samples[k - 1]) * factor;
        factor *= p.decay;
    }
    Ok(acc / ((1.0 - p.gamma) * p.sigma * p.tau))
}

// 7-point Gauss-Legendre rule on [-1, 1]
const GL_NODES: [f64; 7] = [
    -0.949_107_912_342_758_5,
    -0.741_531_185_599_394_4,
    -0.405_845_151_377_397_2,
    0.0,
    0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
];
const GL_WEIGHTS: [f64; 7] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
];

fn composite_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for j in 0..panels {
        let mid = a + (j as f64 + 0.5) * h;
        let panel: f64 = GL_NODES
            .iter()
            .zip(&GL_WEIGHTS)
            .map(|(x, w)| w * f(mid + 0.5 * h * x))
            .sum();
        total += 0.5 * h * panel;
    }
    total
}

/// Caputo-Fabrizio derivative of a smooth function at `t`, by composite
/// Gauss-Legendre quadrature of the defining integral with `panels` panels.
///
/// The estimate is compared with one on `panels / 2` panels; if they differ
/// by more than `1e-11` relative (absolute below unit scale) the result is
/// reported as not converged.
pub fn cf_quadrature_oracle(
    derivative: impl Fn(f64) -> f64,
    gamma: f64,
    t: f64,
    panels: usize,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain("gamma", gamma, "(0, 1)"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("t", t, "[0, inf)"));
    }
    if panels < 2 {
        return Err(Error::Invalid("need at least 2 panels".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let sigma = gamma / (1.0 - gamma);
    let integrand = |s: f64| derivative(s) * (-sigma * (t - s)).exp();
    let fine = composite_gauss(&integrand, 0.0, t, panels);
    let coarse = composite_gauss(&integrand, 0.0, t, panels / 2);
    let target = 1e-11;
    let difference = (fine - coarse).abs();
    if difference > target * fine.abs().max(1.0) {
        return Err(Error::Quadrature { target, difference });
    }
    Ok(fine / (1.0 - gamma))
}

/// Diagonal-dominance certificate for the symmetric part of the
/// lower-triangular matrix that represents the discrete history operator
/// over `n_steps` steps (diagonal `b = 1 - exp(-s tau)`, subdiagonals
/// `a_l = -exp(-s (l-1) tau) b^2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryDominance {
    pub n_steps: usize,
    /// `b`.
    pub diagonal: f64,
    /// Largest off-diagonal absolute row sum of the assembled symmetric part.
    pub max_offdiagonal_row_sum: f64,
    /// `b (1 - exp(-s (N-1) tau))`, the closed-form bound on that row sum.
    pub closed_form_bound: f64,
}

impl HistoryDominance {
    /// Symmetric part strictly diagonally dominant with positive diagonal.
    pub fn strictly_dominant(&self) -> bool {
        self.diagonal > 0.0 && self.max_offdiagonal_row_sum < self.diagonal
    }
}

/// Assembles the symmetric part `H = (T + T^T) / 2` of the history matrix
/// for `n_steps` steps and measures its diagonal dominance.
pub fn history_matrix_dominance(p: &CfParams, n_steps: usize) -> Result<HistoryDominance> {
    if n_steps == 0 || n_steps > 4096 {
        return Err(Error::Invalid(format!(
            "history matrix size must be in 1..=4096, got {n_steps}"
        )));
    }
    let b = p.weight;
    let a = |l: usize| -(-p.sigma * (l - 1) as f64 * p.tau).exp() * b * b;
    let mut h = vec![0.0; n_steps * n_steps];
    for r in 0..n_steps {
        h[r * n_steps + r] = b;
        for c in 0..r {
            let v = 0.5 * a(r - c);
            h[r * n_steps + c] = v;
            h[c * n_steps + r] = v;
        }
    }
    let mut max_off: f64 = 0.0;
    for r in 0..n_steps {
        let off: f64 = (0..n_steps)
            .filter(|&c| c != r)
            .map(|c| h[r * n_steps + c].abs())
            .sum();
        max_off = max_off.max(off);
    }
    let closed = b * -(-p.sigma * (n_steps - 1) as f64 * p.tau).exp_m1();
    Ok(HistoryDominance {
        n_steps,
        diagonal: h[0],
        max_offdiagonal_row_sum: max_off,
        closed_form_bound: closed,
    })
}
