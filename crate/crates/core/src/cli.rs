//! Command-line front end.
//!
//! Every subcommand takes the same set of optional parameters ([`RunConfig`]).
//! Values come from `--config FILE` (JSON) first and command-line flags
//! override them field by field.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{convergence_study_with, error_norms, format_sci};
use crate::cf_time::{cf_params, history_matrix_dominance};
use crate::error::Error;
use crate::manufactured::{CaseId, ManufacturedCase};
use crate::riesz::{assemble_riesz_matrix, check_coefficient_lemmas, LemmaCheckOptions};
use crate::solver::{
    solve_1d_with, solve_2d_with, stability_experiment_1d, stability_experiment_2d, Forcing,
    InitialData, LinearSolver2D, ProblemSpec1D, ProblemSpec2D, SolveOptions, SolveResult,
    STABILITY_SLACK,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

pub const THREADS_ENV: &str = "CF_FRACDIFF_THREADS";

const EXIT_HELP: &str = "\
Exit status:
  0  success, or all checks passed
  2  configuration error (bad flag, unreadable config, parameter out of range)
  3  solver failure (factorization, CG non-convergence, allocation)
  4  verification failure (stability growth or a coefficient clause failed)

Environment:
  CF_FRACDIFF_THREADS  worker threads, 0 or unset for automatic";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Markdown,
}

/// Initial data or forcing source for `solve1d` / `solve2d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    Zero,
    Manufactured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Cg,
    Dense,
}

/// Parameters shared by all subcommands. Unset fields take per-subcommand
/// defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Time order gamma in (0, 1).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Space order in x, in (1, 2).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Space order in y, in (1, 2).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Cells in x (also the default step count and y cell count).
    #[arg(long, alias = "n")]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cells_y: Option<usize>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    /// Final time T.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_len: Option<f64>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_len: Option<f64>,
    /// Manufactured case for `converge` and `stability`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseId>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<DataKind>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<DataKind>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    /// Refinements as `40,80,160` or `1/40,1/80,1/160`; tau = dx = 1/n.
    #[arg(long = "taus", value_delimiter = ',', value_parser = parse_refinement)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinements: Option<Vec<usize>>,
    /// Seed for random perturbations and test vectors.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of random perturbations for `stability`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Random vectors per quadratic-form check in `verify-coeffs`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverKind>,
    /// Relative residual target for CG.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg_tolerance: Option<f64>,
}

fn parse_refinement(s: &str) -> Result<usize, String> {
    let t = s.trim();
    let digits = t.strip_prefix("1/").unwrap_or(t);
    digits
        .parse::<usize>()
        .map_err(|_| format!("expected N or 1/N, got '{s}'"))
}

impl RunConfig {
    /// Field-wise override: values set in `other` win.
    pub fn merged(self, other: RunConfig) -> RunConfig {
        RunConfig {
            gamma: other.gamma.or(self.gamma),
            alpha: other.alpha.or(self.alpha),
            beta: other.beta.or(self.beta),
            n_cells: other.n_cells.or(self.n_cells),
            n_cells_y: other.n_cells_y.or(self.n_cells_y),
            n_steps: other.n_steps.or(self.n_steps),
            horizon: other.horizon.or(self.horizon),
            x_len: other.x_len.or(self.x_len),
            y_len: other.y_len.or(self.y_len),
            case: other.case.or(self.case),
            initial: other.initial.or(self.initial),
            forcing: other.forcing.or(self.forcing),
            output: other.output.or(self.output),
            format: other.format.or(self.format),
            refinements: other.refinements.or(self.refinements),
            seed: other.seed.or(self.seed),
            trials: other.trials.or(self.trials),
            samples: other.samples.or(self.samples),
            solver: other.solver.or(self.solver),
            cg_tolerance: other.cg_tolerance.or(self.cg_tolerance),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
    }

    fn require_gamma(&self) -> Result<f64, CliError> {
        self.gamma
            .ok_or_else(|| CliError::config("--gamma is required"))
    }

    fn require_alpha(&self) -> Result<f64, CliError> {
        self.alpha
            .ok_or_else(|| CliError::config("--alpha is required"))
    }

    fn require_beta(&self) -> Result<f64, CliError> {
        self.beta
            .ok_or_else(|| CliError::config("--beta is required in two dimensions"))
    }

    fn data(kind: Option<DataKind>) -> DataKind {
        kind.unwrap_or(DataKind::Manufactured)
    }

    pub fn problem_1d(&self) -> Result<ProblemSpec1D, CliError> {
        let n_cells = self.n_cells.unwrap_or(64);
        let spec = ProblemSpec1D {
            gamma: self.require_gamma()?,
            alpha: self.require_alpha()?,
            x_len: self.x_len.unwrap_or(1.0),
            horizon: self.horizon.unwrap_or(1.0),
            n_cells,
            n_steps: self.n_steps.unwrap_or(n_cells),
            initial: match Self::data(self.initial) {
                DataKind::Zero => InitialData::Zero,
                DataKind::Manufactured => InitialData::Manufactured,
            },
            forcing: match Self::data(self.forcing) {
                DataKind::Zero => Forcing::Zero,
                DataKind::Manufactured => Forcing::Manufactured,
            },
        };
        spec.validate().map_err(CliError::from_config)?;
        Ok(spec)
    }

    pub fn problem_2d(&self) -> Result<ProblemSpec2D, CliError> {
        let n_cells = self.n_cells.unwrap_or(32);
        let spec = ProblemSpec2D {
            gamma: self.require_gamma()?,
            alpha: self.require_alpha()?,
            beta: self.require_beta()?,
            x_len: self.x_len.unwrap_or(1.0),
            y_len: self.y_len.unwrap_or(1.0),
            horizon: self.horizon.unwrap_or(1.0),
            n_cells,
            n_cells_y: self.n_cells_y.unwrap_or(n_cells),
            n_steps: self.n_steps.unwrap_or(n_cells),
            initial: match Self::data(self.initial) {
                DataKind::Zero => InitialData::Zero,
                DataKind::Manufactured => InitialData::Manufactured,
            },
            forcing: match Self::data(self.forcing) {
                DataKind::Zero => Forcing::Zero,
                DataKind::Manufactured => Forcing::Manufactured,
            },
        };
        spec.validate().map_err(CliError::from_config)?;
        Ok(spec)
    }

    pub fn manufactured_case(&self) -> Result<ManufacturedCase, CliError> {
        let gamma = self.require_gamma()?;
        let alpha = self.require_alpha()?;
        let case = match self.case.unwrap_or(CaseId::Example1) {
            CaseId::Example1 => ManufacturedCase::example_1(gamma, alpha),
            CaseId::Example2 => ManufacturedCase::example_2(gamma, alpha, self.require_beta()?),
        };
        case.map_err(CliError::from_config)
    }

    pub fn solve_options(&self) -> Result<SolveOptions, CliError> {
        let mut opts = SolveOptions::default();
        if let Some(tol) = self.cg_tolerance {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(CliError::config(format!(
                    "--cg-tolerance {tol} not in (0, 1)"
                )));
            }
            opts.cg_tolerance = tol;
        }
        opts.linear_solver = match self.solver.unwrap_or(SolverKind::Cg) {
            SolverKind::Cg => LinearSolver2D::ConjugateGradient,
            SolverKind::Dense => LinearSolver2D::DenseCholesky,
        };
        Ok(opts)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cf-fracdiff",
    version,
    about = "Riesz space-fractional diffusion with a Caputo-Fabrizio time derivative",
    after_help = EXIT_HELP
)]
struct Cli {
    /// JSON file with RunConfig fields; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the merged configuration as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve in 1D and write the final field as CSV (x,u).
    Solve1d(RunConfig),
    /// Solve in 2D and write the final field as CSV (x,y,u).
    Solve2d(RunConfig),
    /// Refinement study of a manufactured case.
    Converge(RunConfig),
    /// Growth of random initial perturbations under the homogeneous scheme.
    Stability(RunConfig),
    /// Check the coefficient and history-matrix properties.
    VerifyCoeffs(RunConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }

    fn from_config(e: Error) -> Self {
        CliError::config(e.to_string())
    }

    fn solver(e: Error) -> Self {
        CliError {
            code: EXIT_SOLVER,
            message: e.to_string(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::config(format!("cannot write {}: {e}", path.display()))
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit status. Diagnostics go to the process stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with_io<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::config(format!("{THREADS_ENV}='{v}' is not a count")))?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    let (command, flags) = match cli.command {
        Command::Solve1d(c) => ("solve1d", c),
        Command::Solve2d(c) => ("solve2d", c),
        Command::Converge(c) => ("converge", c),
        Command::Stability(c) => ("stability", c),
        Command::VerifyCoeffs(c) => ("verify-coeffs", c),
    };
    let cfg = base.merged(flags);
    if cli.print_config {
        let json = serde_json::to_string_pretty(&cfg)
            .map_err(|e| CliError::config(format!("serialize config: {e}")))?;
        let _ = writeln!(out, "{json}");
        return Ok(EXIT_OK);
    }
    let pool = thread_pool()?;
    let (code, text) = pool.install(|| match command {
        "solve1d" => cmd_solve1d(&cfg),
        "solve2d" => cmd_solve2d(&cfg),
        "converge" => cmd_converge(&cfg),
        "stability" => cmd_stability(&cfg),
        _ => cmd_verify(&cfg),
    })?;
    emit(&cfg, &text, out)?;
    Ok(code)
}

fn emit(cfg: &RunConfig, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::config(format!("stdout: {e}"))),
    }
}

fn field_csv(result: &SolveResult, header: &[String], two_d: bool) -> String {
    let mut s = String::new();
    for line in header {
        let _ = writeln!(s, "# {line}");
    }
    s.push_str(if two_d { "x,y,u\n" } else { "x,u\n" });
    for (k, u) in result.values.iter().enumerate() {
        let (x, y) = result.grid.point(k);
        if two_d {
            let _ = writeln!(s, "{x},{y},{u:e}");
        } else {
            let _ = writeln!(s, "{x},{u:e}");
        }
    }
    s
}

fn is_manufactured(initial: &InitialData, forcing: Forcing) -> bool {
    matches!(initial, InitialData::Manufactured) && forcing == Forcing::Manufactured
}

fn cmd_solve1d(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let spec = cfg.problem_1d()?;
    let result = solve_1d_with(&spec, &cfg.solve_options()?).map_err(CliError::solver)?;
    let mut header = vec![format!(
        "solve1d gamma {} alpha {} n_cells {} n_steps {} T {}",
        spec.gamma, spec.alpha, spec.n_cells, spec.n_steps, spec.horizon
    )];
    if is_manufactured(&spec.initial, spec.forcing) {
        let case =
            ManufacturedCase::example_1(spec.gamma, spec.alpha).map_err(CliError::from_config)?;
        let t = result.time;
        let e = error_norms(&result.values, |x, y| case.exact(x, y, t), &result.grid)
            .map_err(CliError::solver)?;
        header.push(format!("linf_error {:e} l2_error {:e}", e.linf, e.l2));
    }
    Ok((EXIT_OK, field_csv(&result, &header, false)))
}

fn cmd_solve2d(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let spec = cfg.problem_2d()?;
    let result = solve_2d_with(&spec, &cfg.solve_options()?).map_err(CliError::solver)?;
    let mut header = vec![format!(
        "solve2d gamma {} alpha {} beta {} n_cells {} n_cells_y {} n_steps {} T {}",
        spec.gamma, spec.alpha, spec.beta, spec.n_cells, spec.n_cells_y, spec.n_steps, spec.horizon
    )];
    if is_manufactured(&spec.initial, spec.forcing) {
        let case = ManufacturedCase::example_2(spec.gamma, spec.alpha, spec.beta)
            .map_err(CliError::from_config)?;
        let t = result.time;
        let e = error_norms(&result.values, |x, y| case.exact(x, y, t), &result.grid)
            .map_err(CliError::solver)?;
        header.push(format!("linf_error {:e} l2_error {:e}", e.linf, e.l2));
    }
    Ok((EXIT_OK, field_csv(&result, &header, true)))
}

fn cmd_converge(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let case = cfg.manufactured_case()?;
    let refinements = cfg.refinements.clone().unwrap_or_else(|| match case.id {
        CaseId::Example1 => vec![40, 80, 160, 320],
        CaseId::Example2 => vec![10, 20, 40, 80],
    });
    let table = convergence_study_with(&case, &refinements, &cfg.solve_options()?).map_err(
        |e| match e {
            Error::Invalid(_) | Error::Domain { .. } => CliError::from_config(e),
            other => CliError::solver(other),
        },
    )?;
    let text = match cfg.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Markdown => table.to_markdown(),
    };
    Ok((EXIT_OK, text))
}

/// Uniform perturbation in `[-1, 1)` per interior node.
pub fn random_perturbation(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn cmd_stability(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let seed = cfg.seed.unwrap_or(0);
    let trials = cfg.trials.unwrap_or(1);
    if trials == 0 {
        return Err(CliError::config("--trials must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeroed = RunConfig {
        initial: Some(DataKind::Zero),
        forcing: Some(DataKind::Zero),
        ..cfg.clone()
    };
    let mut text = String::new();
    let _ = writeln!(text, "# seed {seed}");
    let two_d = cfg.case == Some(CaseId::Example2);
    let mut worst: f64 = 0.0;
    if two_d {
        let spec = zeroed.problem_2d()?;
        let _ = writeln!(
            text,
            "# stability 2d gamma {} alpha {} beta {} n_cells {} n_cells_y {} n_steps {} T {}",
            spec.gamma,
            spec.alpha,
            spec.beta,
            spec.n_cells,
            spec.n_cells_y,
            spec.n_steps,
            spec.horizon
        );
        let opts = cfg.solve_options()?;
        text.push_str("trial,max_ratio,worst_step\n");
        for k in 0..trials {
            let e0 = random_perturbation(&mut rng, spec.unknowns());
            let r = stability_experiment_2d(&spec, &e0, &opts).map_err(CliError::solver)?;
            let _ = writeln!(text, "{k},{},{}", r.max_ratio, r.worst_step);
            worst = worst.max(r.max_ratio);
        }
    } else {
        let spec = zeroed.problem_1d()?;
        let _ = writeln!(
            text,
            "# stability 1d gamma {} alpha {} n_cells {} n_steps {} T {}",
            spec.gamma, spec.alpha, spec.n_cells, spec.n_steps, spec.horizon
        );
        text.push_str("trial,max_ratio,worst_step\n");
        for k in 0..trials {
            let e0 = random_perturbation(&mut rng, spec.n_cells - 1);
            let r = stability_experiment_1d(&spec, &e0).map_err(CliError::solver)?;
            let _ = writeln!(text, "{k},{},{}", r.max_ratio, r.worst_step);
            worst = worst.max(r.max_ratio);
        }
    }
    let passed = worst <= 1.0 + STABILITY_SLACK;
    let _ = writeln!(
        text,
        "# max_ratio {worst} bound 1+{STABILITY_SLACK:e} {}",
        if passed { "PASS" } else { "FAIL" }
    );
    Ok((if passed { EXIT_OK } else { EXIT_VERIFICATION }, text))
}

fn cmd_verify(cfg: &RunConfig) -> Result<(i32, String), CliError> {
    let alpha = cfg.require_alpha()?;
    let n_cells = cfg.n_cells.unwrap_or(256);
    let gamma = cfg.gamma.unwrap_or(0.5);
    let n_steps = cfg.n_steps.unwrap_or(n_cells);
    let horizon = cfg.horizon.unwrap_or(1.0);
    let options = LemmaCheckOptions {
        samples: cfg.samples.unwrap_or(100),
        seed: cfg.seed.unwrap_or(LemmaCheckOptions::default().seed),
    };
    let op = assemble_riesz_matrix(alpha, n_cells, 1.0).map_err(CliError::from_config)?;
    let report =
        check_coefficient_lemmas(op.coefficients(), &op, options).map_err(CliError::from_config)?;
    let p = cf_params(gamma, horizon / n_steps as f64).map_err(CliError::from_config)?;
    let dominance = history_matrix_dominance(&p, n_steps).map_err(CliError::from_config)?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "# verify-coeffs alpha {alpha} n_cells {n_cells} samples {} seed {}",
        options.samples, options.seed
    );
    for c in &report.clauses {
        let _ = writeln!(
            text,
            "{} {:<22} margin {} at {}  ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            format_sci(c.worst_margin),
            c.worst_at,
            c.description
        );
    }
    let dom_ok = dominance.strictly_dominant();
    let _ = writeln!(
        text,
        "{} {:<22} diagonal {} max off-diagonal row sum {} bound {}  (gamma {gamma}, {} steps)",
        if dom_ok { "PASS" } else { "FAIL" },
        "history-dominance",
        format_sci(dominance.diagonal),
        format_sci(dominance.max_offdiagonal_row_sum),
        format_sci(dominance.closed_form_bound),
        dominance.n_steps
    );
    let passed = report.all_passed() && dom_ok;
    let _ = writeln!(text, "# overall {}", if passed { "PASS" } else { "FAIL" });
    Ok((if passed { EXIT_OK } else { EXIT_VERIFICATION }, text))
}
