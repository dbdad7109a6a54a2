//! Second-order discretization of the Riesz fractional derivative on a
//! uniform grid with homogeneous Dirichlet data.
//!
//! The left and right Riemann-Liouville derivatives are approximated by the
//! shifted stencils
//!
//! ```text
//! delta_+ u_i = h^-a / Gamma(4-a) * sum_{m=0}^{i+1}     g_{i-m+1} u_m
//! delta_- u_i = h^-a / Gamma(4-a) * sum_{m=i-1}^{N}     g_{m-i+1} u_m
//! ```
//!
//! whose sum, restricted to interior unknowns, is the symmetric matrix
//! `A = B + B^T` with `B` upper Hessenberg Toeplitz. The Riesz derivative is
//! then `kappa_a / (Gamma(4-a) h^a) * A u` with `kappa_a = -1 / (2 cos(a pi / 2))`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_space_order, Error, Result};
use crate::special::gamma;

/// Coefficients `g_0 ..= g_M` of the shifted second-order stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct GmCoefficients {
    alpha: f64,
    values: Vec<f64>,
}

impl GmCoefficients {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest index `M` held.
    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, m: usize) -> f64 {
        self.values[m]
    }
}

/// Indices from here on use the binomial series instead of the difference.
const SERIES_FROM: usize = 16;

/// Evaluates `g_0 ..= g_M` from the closed form.
///
/// `g_m` for `m >= 3` is the fourth difference of `k^(3-a)` over
/// `k = m-3 ..= m+1`. Below [`SERIES_FROM`] it is evaluated directly; above,
/// the direct difference loses digits to cancellation (`g_m ~ m^(-1-a)`
/// against terms of size `m^(3-a)`) and the expansion about `c = m - 1`
///
/// ```text
/// g_m = sum_{j even, j >= 4} C(3-a, j) c^(3-a-j) (2^(j+1) - 8)
/// ```
///
/// is summed instead.
pub fn gm_coefficients(alpha: f64, max_index: usize) -> Result<GmCoefficients> {
    check_space_order("alpha", alpha)?;
    if max_index < 3 {
        return Err(Error::Invalid(format!(
            "need at least g_0..g_3, got max index {max_index}"
        )));
    }
    let p = 3.0 - alpha;
    let pow = |k: f64| k.powf(p);
    let mut values = Vec::with_capacity(max_index + 1);
    values.push(1.0);
    values.push(-4.0 + 2f64.powf(p));
    values.push(6.0 - 2f64.powf(5.0 - alpha) + 3f64.powf(p));
    for m in 3..=max_index {
        if m >= SERIES_FROM {
            values.push(fourth_difference_series(p, (m - 1) as f64));
            continue;
        }
        let m = m as f64;
        values.push(
            pow(m + 1.0) - 4.0 * pow(m) + 6.0 * pow(m - 1.0) - 4.0 * pow(m - 2.0) + pow(m - 3.0),
        );
    }
    Ok(GmCoefficients { alpha, values })
}

fn fourth_difference_series(p: f64, c: f64) -> f64 {
    let inv2 = 1.0 / (c * c);
    // C(p, j) c^(p-j), advanced two orders at a time
    let mut term = p * (p - 1.0) * (p - 2.0) * (p - 3.0) / 24.0 * c.powf(p - 4.0);
    let mut sum = 0.0;
    let mut j = 4;
    loop {
        let contribution = term * (2f64.powi(j + 1) - 8.0);
        sum += contribution;
        if contribution.abs() <= 1e-18 * sum.abs() || j > 200 {
            return sum;
        }
        let jf = j as f64;
        term *= (p - jf) * (p - jf - 1.0) / ((jf + 1.0) * (jf + 2.0)) * inv2;
        j += 2;
    }
}

/// Entry `g_{i,m}` of the full row `i` (columns `0..=n_cells`, boundary
/// columns included) of the discrete Riesz operator.
///
/// `n_cells` is the number of grid cells, so rows run over `1..n_cells` and
/// columns over `0..=n_cells`.
pub fn modified_row_coefficient(
    g: &GmCoefficients,
    n_cells: usize,
    i: usize,
    m: usize,
) -> Result<f64> {
    if i == 0 || i >= n_cells || m > n_cells {
        return Err(Error::Index {
            row: i,
            col: m,
            detail: format!("rows 1..{n_cells}, columns 0..={n_cells}"),
        });
    }
    let k = if m + 1 < i {
        i - m + 1
    } else if m > i + 1 {
        m - i + 1
    } else {
        0
    };
    if k > g.max_index() {
        return Err(Error::Index {
            row: i,
            col: m,
            detail: format!("needs g_{k} but only g_0..g_{} available", g.max_index()),
        });
    }
    Ok(if m + 1 < i || m > i + 1 {
        g.get(k)
    } else if m == i {
        2.0 * g.get(1)
    } else {
        g.get(0) + g.get(2)
    })
}

/// `kappa_a = -1 / (2 cos(a pi / 2))`, positive on (1, 2).
pub fn riesz_kappa(alpha: f64) -> f64 {
    -1.0 / (2.0 * (alpha * PI / 2.0).cos())
}

/// Assembled Riesz operator on the interior nodes of a uniform grid.
#[derive(Debug, Clone)]
pub struct RieszOperator {
    coeffs: GmCoefficients,
    n_cells: usize,
    dx: f64,
    matrix: DMatrix<f64>,
    scale: f64,
}

impl RieszOperator {
    pub fn alpha(&self) -> f64 {
        self.coeffs.alpha
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Number of interior unknowns, `n_cells - 1`.
    pub fn dim(&self) -> usize {
        self.n_cells - 1
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// `A = B + B^T`, dimensionless.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `kappa_a / (Gamma(4-a) dx^a)`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Toeplitz symbol of `B`: `g_0 ..= g_{n_cells+1}`. The first column of
    /// `B` is `(g_1, g_0, 0, ...)` and its first row `(g_1, g_2, ..., g_{N-1})`.
    pub fn coefficients(&self) -> &GmCoefficients {
        &self.coeffs
    }

    /// Row `i` (0-based, interior numbering) of `A`. `A` is symmetric, so this
    /// is also the contiguous column `i` of the column-major storage.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.matrix.as_slice()[i * n..(i + 1) * n]
    }

    /// `out <- A v` with a fixed summation order.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), v);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Assembles `A = B + B^T` for `n_cells` uniform cells on `(0, domain_length)`.
pub fn assemble_riesz_matrix(
    alpha: f64,
    n_cells: usize,
    domain_length: f64,
) -> Result<RieszOperator> {
    check_space_order("alpha", alpha)?;
    if n_cells < 2 {
        return Err(Error::Invalid(format!(
            "need at least 2 cells, got {n_cells}"
        )));
    }
    if !(domain_length > 0.0 && domain_length.is_finite()) {
        return Err(Error::domain("domain_length", domain_length, "(0, inf)"));
    }
    // g up to n_cells + 1 so the quadratic-form bound can be evaluated later
    let coeffs = gm_coefficients(alpha, (n_cells + 1).max(3))?;
    let n = n_cells - 1;
    let mut storage: Vec<f64> = Vec::new();
    storage
        .try_reserve_exact(n * n)
        .map_err(|_| Error::Allocation(n * n))?;
    storage.resize(n * n, 0.0);
    let mut b = DMatrix::from_vec(n, n, storage);
    for c in 0..n {
        for r in 0..n.min(c + 2) {
            b[(r, c)] = coeffs.values[c + 1 - r];
        }
    }
    let matrix = &b + b.transpose();
    let dx = domain_length / n_cells as f64;
    let scale = riesz_kappa(alpha) / (gamma(4.0 - alpha) * dx.powf(alpha));
    Ok(RieszOperator {
        coeffs,
        n_cells,
        dx,
        matrix,
        scale,
    })
}

/// Outcome of a single coefficient clause.
#[derive(Debug, Clone, PartialEq)]
pub struct ClauseResult {
    pub name: &'static str,
    pub description: String,
    pub passed: bool,
    /// Largest violation margin observed (positive means violated).
    pub worst_margin: f64,
    /// Where the worst margin occurred, human readable.
    pub worst_at: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub alpha: f64,
    pub n_cells: usize,
    pub clauses: Vec<ClauseResult>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, name: &str) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

/// Settings for the randomized quadratic-form clauses.
#[derive(Debug, Clone, Copy)]
pub struct LemmaCheckOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for LemmaCheckOptions {
    fn default() -> Self {
        LemmaCheckOptions {
            samples: 100,
            seed: 0x5eed,
        }
    }
}

struct Worst {
    margin: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::NEG_INFINITY,
            at: String::new(),
        }
    }

    fn update(&mut self, margin: f64, at: impl FnOnce() -> String) {
        if margin > self.margin {
            self.margin = margin;
            self.at = at();
        }
    }

    fn finish(self, name: &'static str, description: &str, strict: bool) -> ClauseResult {
        let passed = if strict {
            self.margin < 0.0
        } else {
            self.margin <= 0.0
        };
        ClauseResult {
            name,
            description: description.to_string(),
            passed,
            worst_margin: self.margin,
            worst_at: self.at,
        }
    }
}

/// Evaluates the sign, dominance, partial-sum and quadratic-form properties
/// of the coefficients and of the assembled operator.
///
/// Clauses (each reports its worst margin, positive = violated):
///
/// * `signs`: `g_{i,i} < 0` and `g_{i,m} > 0` for `m != i` over full rows.
/// * `generator-signs`: `g_1 < 0`, `g_0 + g_2 > 0`, `g_k > 0` for `k >= 3`.
/// * `row-sum`: `sum_m g_{i,m} < 0` over full rows.
/// * `row-dominance`: `-g_{i,i} > sum_{m != i} g_{i,m}`.
/// * `partial-sum-negative`: `sum_{m=0}^{i+1} g_m < 0` for `1 <= i < N`.
/// * `partial-sum-bound`: `sum_{m=0}^{i+1} g_m <= 1 / (i^a Gamma(1-a))` for `1 <= i < N`.
/// * `partial-sum-bound-at-n`: the same bound at `i = N` only.
/// * `quadratic-form`: `(A v, v) <= 2 (sum_{k=0}^{N+1} g_k) ||v||^2 < 0` on random `v`.
/// * `scaled-coercivity`: `-(A v, v) / dx^a >= -2 / (Gamma(1-a) L^a) ||v||^2 > 0`.
pub fn check_coefficient_lemmas(
    g: &GmCoefficients,
    op: &RieszOperator,
    options: LemmaCheckOptions,
) -> Result<LemmaReport> {
    if g.alpha != op.alpha() {
        return Err(Error::Invalid(format!(
            "coefficients for alpha = {} but operator for alpha = {}",
            g.alpha,
            op.alpha()
        )));
    }
    let n_cells = op.n_cells();
    if g.max_index() < n_cells + 1 {
        return Err(Error::Invalid(format!(
            "need g_0..g_{} for {n_cells} cells, have g_0..g_{}",
            n_cells + 1,
            g.max_index()
        )));
    }
    let alpha = g.alpha;
    let mut clauses = Vec::new();

    let mut signs = Worst::new();
    let mut row_sum = Worst::new();
    let mut dominance = Worst::new();
    for i in 1..n_cells {
        let mut total = 0.0;
        let mut off = 0.0;
        let mut diag = 0.0;
        for m in 0..=n_cells {
            let v = modified_row_coefficient(g, n_cells, i, m)?;
            total += v;
            if m == i {
                diag = v;
                signs.update(v, || format!("g_({i},{m})"));
            } else {
                off += v;
                signs.update(-v, || format!("g_({i},{m})"));
            }
        }
        row_sum.update(total, || format!("row {i}"));
        dominance.update(off + diag, || format!("row {i}"));
    }
    clauses.push(signs.finish("signs", "g_(i,i) < 0 and g_(i,m) > 0 for m != i", true));

    let mut gen = Worst::new();
    gen.update(g.get(1), || "g_1".into());
    gen.update(-(g.get(0) + g.get(2)), || "g_0 + g_2".into());
    for k in 3..=g.max_index() {
        gen.update(-g.get(k), || format!("g_{k}"));
    }
    clauses.push(gen.finish(
        "generator-signs",
        "g_0 > 0, g_1 < 0, g_0 + g_2 > 0, g_k > 0 for k >= 3",
        true,
    ));
    clauses.push(row_sum.finish("row-sum", "sum_m g_(i,m) < 0", true));
    clauses.push(dominance.finish("row-dominance", "-g_(i,i) > sum_(m != i) g_(i,m)", true));

    let gamma_1ma = gamma(1.0 - alpha);
    let bound_at = |i: usize| 1.0 / ((i as f64).powf(alpha) * gamma_1ma);
    let mut partial = 0.0;
    let mut negative = Worst::new();
    let mut bound = Worst::new();
    let mut bound_n = Worst::new();
    for (k, &v) in g.values.iter().enumerate().take(n_cells + 2) {
        partial += v;
        if k < 2 {
            continue;
        }
        let i = k - 1;
        if i < n_cells {
            negative.update(partial, || format!("i = {i}"));
            bound.update(partial - bound_at(i), || format!("i = {i}"));
        } else {
            bound_n.update(partial - bound_at(i), || format!("i = {i}"));
        }
    }
    clauses.push(negative.finish(
        "partial-sum-negative",
        "sum_(m=0)^(i+1) g_m < 0 for 1 <= i < N",
        true,
    ));
    clauses.push(bound.finish(
        "partial-sum-bound",
        "sum_(m=0)^(i+1) g_m <= 1 / (i^a Gamma(1-a)) for 1 <= i < N",
        false,
    ));
    clauses.push(bound_n.finish(
        "partial-sum-bound-at-n",
        "sum_(m=0)^(N+1) g_m <= 1 / (N^a Gamma(1-a))",
        false,
    ));

    // quadratic forms with the discrete inner product (u, v) = dx sum u_i v_i
    let full_sum: f64 = g.values[..n_cells + 2].iter().sum();
    let dx = op.dx();
    let length = dx * n_cells as f64;
    let coercivity = -2.0 / (gamma_1ma * length.powf(alpha));
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let n = op.dim();
    let mut v = vec![0.0; n];
    let mut av = vec![0.0; n];
    let mut quad = Worst::new();
    let mut coercive = Worst::new();
    quad.update(2.0 * full_sum, || "2 sum g_k".into());
    for s in 0..options.samples {
        for x in v.iter_mut() {
            *x = rng.random_range(-1.0..1.0);
        }
        op.apply(&v, &mut av);
        let form = dx * dot(&av, &v);
        let norm2 = dx * dot(&v, &v);
        if norm2 == 0.0 {
            continue;
        }
        quad.update(form - 2.0 * full_sum * norm2, || format!("sample {s}"));
        coercive.update(coercivity * norm2 + form / dx.powf(alpha), || {
            format!("sample {s}")
        });
    }
    coercive.update(-coercivity, || "bound sign".into());
    clauses.push(quad.finish(
        "quadratic-form",
        "(A v, v) <= 2 (sum_(k=0)^(N+1) g_k) ||v||^2 < 0",
        false,
    ));
    clauses.push(coercive.finish(
        "scaled-coercivity",
        "-(A v, v) / dx^a >= -2 / (Gamma(1-a) L^a) ||v||^2 > 0",
        false,
    ));

    Ok(LemmaReport {
        alpha,
        n_cells,
        clauses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_orders_outside_open_interval() {
        for &a in &[1.0, 2.0, 0.5, 2.5, f64::NAN] {
            assert!(matches!(gm_coefficients(a, 10), Err(Error::Domain { .. })));
            assert!(assemble_riesz_matrix(a, 8, 1.0).is_err());
        }
        assert!(gm_coefficients(1.5, 2).is_err());
    }

    #[test]
    fn large_index_coefficients_match_extended_precision() {
        // 60-digit evaluation of the fourth difference
        for &(a, m, expected) in &[
            (1.5, 1000, 1.783_238_536_427_49e-8),
            (1.2, 4096, 3.904_947_242_795_12e-9),
            (1.8, 16, 0.000_177_402_414_737_523_03),
            (1.9, 300, 1.244_375_656_622_430_9e-8),
        ] {
            let g = gm_coefficients(a, m).unwrap().get(m);
            assert!(
                ((g - expected) / expected).abs() < 1e-13,
                "a {a} m {m}: {g:e}"
            );
        }
        // both evaluations agree where they meet
        let p = 3.0 - 1.37;
        let direct = |m: f64| {
            (m + 1.0).powf(p) - 4.0 * m.powf(p) + 6.0 * (m - 1.0).powf(p) - 4.0 * (m - 2.0).powf(p)
                + (m - 3.0).powf(p)
        };
        let s = fourth_difference_series(p, (SERIES_FROM - 1) as f64);
        assert!(((s - direct(SERIES_FROM as f64)) / s).abs() < 1e-10);
    }

    #[test]
    fn leading_coefficients() {
        let g = gm_coefficients(1.2, 10).unwrap();
        assert_eq!(g.get(0), 1.0);
        // -4 + 2^1.8, mpmath at 30 digits
        assert!((g.get(1) - -0.517_797_746_815_503_4).abs() < 1e-15);
        let g = gm_coefficients(1.5, 12).unwrap();
        let frozen = [
            1.0,
            -1.171_572_875_253_81,
            -0.117_556_076_278_128_51,
            0.185_953_057_650_613_06,
            0.043_545_924_753_979_37,
        ];
        for (k, want) in frozen.iter().enumerate() {
            assert!((g.get(k) - want).abs() < 1e-14, "g_{k}");
        }
        // partial sum to i+1 = 11 and its bound at i = 10
        let s: f64 = g.values()[..12].iter().sum();
        assert!((s - -0.011_068_895_023_760_016).abs() < 1e-13);
        let bound = 1.0 / (10f64.powf(1.5) * gamma(-0.5));
        assert!((bound - -0.008_920_620_580_763_856).abs() < 1e-14);
        assert!(s < 0.0 && s <= bound);
    }

    #[test]
    fn row_rule_cases() {
        let g = gm_coefficients(1.7, 12).unwrap();
        let n = 10;
        assert_eq!(
            modified_row_coefficient(&g, n, 5, 5).unwrap(),
            2.0 * g.get(1)
        );
        assert_eq!(
            modified_row_coefficient(&g, n, 5, 4).unwrap(),
            g.get(0) + g.get(2)
        );
        assert_eq!(
            modified_row_coefficient(&g, n, 5, 6).unwrap(),
            g.get(0) + g.get(2)
        );
        assert_eq!(modified_row_coefficient(&g, n, 5, 1).unwrap(), g.get(5));
        assert_eq!(modified_row_coefficient(&g, n, 5, 10).unwrap(), g.get(6));
        assert!(modified_row_coefficient(&g, n, 0, 1).is_err());
        assert!(modified_row_coefficient(&g, n, 10, 1).is_err());
        assert!(modified_row_coefficient(&g, n, 3, 11).is_err());
    }

    #[test]
    fn small_matrix_by_hand() {
        let op = assemble_riesz_matrix(1.5, 4, 1.0).unwrap();
        let g = op.coefficients().values().to_vec();
        let a = op.matrix();
        assert_eq!(a.nrows(), 3);
        let d = 2.0 * g[1];
        let o = g[0] + g[2];
        let c = g[3];
        let expected = [[d, o, c], [o, d, o], [c, o, d]];
        for r in 0..3 {
            for col in 0..3 {
                assert_eq!(a[(r, col)], expected[r][col], "({r},{col})");
            }
        }
        assert_eq!(op.dx(), 0.25);
        let scale = riesz_kappa(1.5) / (gamma(2.5) * 0.25f64.powf(1.5));
        assert!((op.scale() - scale).abs() < 1e-13 * scale);
    }

    #[test]
    fn matrix_matches_row_rule_and_is_symmetric() {
        for &(alpha, n) in &[(1.1, 7), (1.5, 16), (1.93, 33)] {
            let op = assemble_riesz_matrix(alpha, n, 2.0).unwrap();
            let g = op.coefficients();
            let a = op.matrix();
            assert_eq!(a, &a.transpose());
            for i in 1..n {
                for m in 1..n {
                    let rule = modified_row_coefficient(g, n, i, m).unwrap();
                    assert_eq!(a[(i - 1, m - 1)], rule);
                }
            }
            assert!(op.scale() > 0.0);
        }
    }

    #[test]
    fn row_view_is_matrix_row() {
        let op = assemble_riesz_matrix(1.4, 9, 1.0).unwrap();
        for i in 0..op.dim() {
            for (j, v) in op.row(i).iter().enumerate() {
                assert_eq!(*v, op.matrix()[(i, j)]);
            }
        }
    }

    #[test]
    fn lemma_clauses_pass_for_moderate_orders() {
        for &(alpha, n) in &[(1.2, 128), (1.5, 256)] {
            let op = assemble_riesz_matrix(alpha, n, 1.0).unwrap();
            let g = op.coefficients().clone();
            let report = check_coefficient_lemmas(&g, &op, LemmaCheckOptions::default()).unwrap();
            for c in &report.clauses {
                assert!(c.passed, "alpha {alpha}: {c:?}");
            }
        }
    }

    #[test]
    fn partial_sum_bound_fails_at_small_rows_for_large_orders() {
        // g_0 + g_1 + g_2 = 3 - 3 * 2^1.2 + 3^1.2 = -0.1550 > 1 / Gamma(-0.8) = -0.1743
        let op = assemble_riesz_matrix(1.8, 512, 1.0).unwrap();
        let g = op.coefficients().clone();
        let report = check_coefficient_lemmas(&g, &op, LemmaCheckOptions::default()).unwrap();
        let clause = report.clause("partial-sum-bound").unwrap();
        assert!(!clause.passed);
        assert_eq!(clause.worst_at, "i = 1");
        assert!((clause.worst_margin - (-0.154_997_31 + 0.174_259_91)).abs() < 1e-7);
        for name in [
            "signs",
            "generator-signs",
            "row-sum",
            "row-dominance",
            "partial-sum-negative",
            "partial-sum-bound-at-n",
            "quadratic-form",
            "scaled-coercivity",
        ] {
            assert!(report.clause(name).unwrap().passed, "{name}");
        }
    }

    #[test]
    fn diagonal_clause_is_negative() {
        let g = gm_coefficients(1.3, 20).unwrap();
        assert!(modified_row_coefficient(&g, 10, 4, 4).unwrap() < 0.0);
    }

    #[test]
    fn mismatched_orders_are_rejected() {
        let op = assemble_riesz_matrix(1.3, 16, 1.0).unwrap();
        let g = gm_coefficients(1.4, 17).unwrap();
        assert!(check_coefficient_lemmas(&g, &op, LemmaCheckOptions::default()).is_err());
    }
}
