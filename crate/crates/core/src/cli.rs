//! Command-line front end.
//!
//! ```text
//! gdopt run <PROBLEM> [flags]     solve one problem
//! gdopt bench <PROBLEM> [flags]   compare heuristics over several precisions
//! gdopt list                      list built-in problems
//! gdopt export <PROBLEM>          print a problem as a TOML problem file
//! gdopt flow <PROBLEM>            dump the validated flow at a parameter point
//! ```
//!
//! `PROBLEM` is a built-in name or a path to a problem file.
//!
//! Exit codes: 0 success, 1 I/O or other error, 2 usage error, 3 problem
//! parse or validation error, 4 integration failure, 5 branch limit reached.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bnb::{
    solve_with_observer, BoundForm, Event, FailurePolicy, Heuristic, Problem, SmearNorm, SolveError, SolverConfig,
    Status,
};
use crate::interval::IntervalBox;
use crate::ivp::integrate;
use crate::problem_file::ProblemFile;
use crate::problems;
use crate::report::{BenchReport, BenchRow, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PROBLEM: i32 = 3;
pub const EXIT_INTEGRATION: i32 = 4;
pub const EXIT_LIMIT: i32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "gdopt",
    version,
    about = "Guaranteed global optimization of parametrized ODEs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a problem with one heuristic.
    Run {
        problem: String,
        #[arg(long, value_enum, default_value = "lf")]
        heuristic: HeuristicArg,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[command(flatten)]
        common: SolverArgs,
        /// Write progress events as JSON lines to this path (`-` for stdout).
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Run several heuristics at several precisions.
    Bench {
        problem: String,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "lf,smear")]
        heuristics: Vec<HeuristicArg>,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3")]
        epsilons: Vec<f64>,
        #[command(flatten)]
        common: SolverArgs,
    },
    /// List built-in problems.
    List,
    /// Print a problem as a TOML problem file.
    Export {
        problem: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the validated flow as CSV at a parameter point (default: box midpoint).
    Flow {
        problem: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Taylor order of the integrator.
    #[arg(long)]
    pub order: Option<usize>,
    /// Initial integration step.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub max_branches: Option<usize>,
    /// Width tolerance for equality constraints at box midpoints.
    #[arg(long, default_value_t = 1e-3)]
    pub feas_tol: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub smear_mode: SmearModeArg,
    #[arg(long, value_enum, default_value = "mean-value")]
    pub bounds: BoundsArg,
    /// Quadrature windows per step (default: the problem's recommendation).
    #[arg(long)]
    pub quadrature: Option<usize>,
    /// Keep nodes whose integration fails instead of aborting.
    #[arg(long)]
    pub keep_failed: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: FormatArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeuristicArg {
    #[value(alias = "round-robin")]
    Rr,
    #[value(alias = "largest-first")]
    Lf,
    #[value(alias = "s")]
    Smear,
}

impl From<HeuristicArg> for Heuristic {
    fn from(h: HeuristicArg) -> Self {
        match h {
            HeuristicArg::Rr => Heuristic::RoundRobin,
            HeuristicArg::Lf => Heuristic::LargestFirst,
            HeuristicArg::Smear => Heuristic::Smear,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmearModeArg {
    Auto,
    Terminal,
    Horizon,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundsArg {
    Natural,
    MeanValue,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormatArg {
    Json,
    Csv,
    Table,
}

/// An error with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::new(EXIT_IO, format!("{}: {e}", path.display()))
}

/// A resolved problem reference.
pub struct LoadedProblem {
    pub name: String,
    pub problem: Problem,
    pub quadrature_subdivisions: usize,
}

/// Resolves a built-in name, or else reads a problem file.
pub fn load_problem(reference: &str) -> Result<LoadedProblem, CliError> {
    if let Some(entry) = problems::by_name(reference) {
        return Ok(LoadedProblem {
            name: entry.name.to_string(),
            problem: entry.problem,
            quadrature_subdivisions: entry.quadrature_subdivisions,
        });
    }
    let path = Path::new(reference);
    if !path.exists() {
        if path.extension().is_some() || reference.contains(std::path::MAIN_SEPARATOR) {
            return Err(CliError::new(EXIT_IO, format!("{reference}: no such file")));
        }
        return Err(CliError::new(
            EXIT_PROBLEM,
            format!("unknown problem '{reference}': not a built-in name or an existing file"),
        ));
    }
    let file = ProblemFile::load(path).map_err(|e| match e {
        crate::problem_file::ProblemFileError::Io { .. } => CliError::new(EXIT_IO, e.to_string()),
        _ => CliError::new(EXIT_PROBLEM, format!("{reference}: {e}")),
    })?;
    let problem = file
        .to_problem()
        .map_err(|e| CliError::new(EXIT_PROBLEM, format!("{reference}: {e}")))?;
    Ok(LoadedProblem {
        name: file.name.clone().unwrap_or_else(|| reference.to_string()),
        problem,
        quadrature_subdivisions: file.quadrature_subdivisions.unwrap_or(1),
    })
}

fn solver_config(args: &SolverArgs, loaded: &LoadedProblem, heuristic: Heuristic, epsilon: f64) -> SolverConfig {
    let mut cfg = SolverConfig::default().with_heuristic(heuristic).with_epsilon(epsilon);
    if let Some(order) = args.order {
        cfg.integrator.order = order;
    }
    cfg.integrator.step = args.step;
    cfg.max_branches = args.max_branches;
    cfg.feasibility_tol = args.feas_tol;
    cfg.smear_norm = match args.smear_mode {
        SmearModeArg::Auto => SmearNorm::Auto,
        SmearModeArg::Terminal => SmearNorm::Terminal,
        SmearModeArg::Horizon => SmearNorm::Horizon,
    };
    cfg.bounds = match args.bounds {
        BoundsArg::Natural => BoundForm::Natural,
        BoundsArg::MeanValue => BoundForm::MeanValue,
    };
    cfg.quadrature_subdivisions = args.quadrature.unwrap_or(loaded.quadrature_subdivisions);
    if args.keep_failed {
        cfg.on_failure = FailurePolicy::Keep;
    }
    cfg
}

fn solve_error(e: SolveError) -> CliError {
    match e {
        SolveError::InvalidEpsilon(_) => CliError::new(EXIT_USAGE, e.to_string()),
        SolveError::Integration { .. } | SolveError::Setup(_) => CliError::new(EXIT_INTEGRATION, e.to_string()),
        SolveError::Sensitivity(_) => CliError::new(EXIT_PROBLEM, e.to_string()),
    }
}

fn run_once(loaded: &LoadedProblem, cfg: &SolverConfig, events: Option<&mut dyn Write>) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let sol = match events {
        None => solve_with_observer(&loaded.problem, cfg, |_| {}),
        Some(w) => {
            let mut failed = None;
            let sol = solve_with_observer(&loaded.problem, cfg, |e: &Event| {
                if failed.is_none() {
                    let line = serde_json::to_string(e).expect("events serialize");
                    if let Err(err) = writeln!(w, "{line}") {
                        failed = Some(err);
                    }
                }
            });
            if let Some(err) = failed {
                return Err(CliError::new(EXIT_IO, format!("writing events: {err}")));
            }
            sol
        }
    }
    .map_err(solve_error)?;
    Ok(RunReport::new(&loaded.name, cfg, &sol, start.elapsed().as_secs_f64()))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::new(EXIT_IO, format!("stdout: {e}"))),
    }
}

/// Executes a parsed command, writing results to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Run {
            problem,
            heuristic,
            epsilon,
            common,
            events,
        } => {
            let loaded = load_problem(&problem)?;
            let cfg = solver_config(&common, &loaded, heuristic.into(), epsilon);
            let report = match events.as_deref() {
                None => run_once(&loaded, &cfg, None)?,
                Some(p) if p == Path::new("-") => run_once(&loaded, &cfg, Some(&mut *stdout))?,
                Some(p) => {
                    let mut w = BufWriter::new(File::create(p).map_err(|e| io_error(p, e))?);
                    let report = run_once(&loaded, &cfg, Some(&mut w))?;
                    w.flush().map_err(|e| io_error(p, e))?;
                    report
                }
            };
            let text = match common.format {
                FormatArg::Json => report.to_json() + "\n",
                FormatArg::Csv => report.to_csv(),
                FormatArg::Table => report.to_table(),
            };
            emit(&text, common.out.as_deref(), stdout)?;
            Ok(if report.status == Status::BranchLimit {
                EXIT_LIMIT
            } else {
                EXIT_OK
            })
        }
        Command::Bench {
            problem,
            heuristics,
            epsilons,
            common,
        } => {
            let loaded = load_problem(&problem)?;
            let mut rows = Vec::new();
            let mut limited = false;
            for &epsilon in &epsilons {
                let mut runs = Vec::new();
                for &h in &heuristics {
                    let cfg = solver_config(&common, &loaded, h.into(), epsilon);
                    let report = run_once(&loaded, &cfg, None)?;
                    limited |= report.status == Status::BranchLimit;
                    runs.push(report);
                }
                rows.push(BenchRow::new(epsilon, runs));
            }
            let report = BenchReport {
                problem: loaded.name,
                rows,
            };
            let text = match common.format {
                FormatArg::Json => report.to_json() + "\n",
                FormatArg::Csv => report.to_csv(),
                FormatArg::Table => report.to_table(),
            };
            emit(&text, common.out.as_deref(), stdout)?;
            Ok(if limited { EXIT_LIMIT } else { EXIT_OK })
        }
        Command::List => {
            let mut text = String::new();
            for e in problems::catalog() {
                text.push_str(&format!("{:<18} {}\n", e.name, e.description));
            }
            emit(&text, None, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Export { problem, out } => {
            let file = match problems::by_name(&problem) {
                Some(entry) => ProblemFile::from_catalog(&entry),
                None => {
                    let loaded = load_problem(&problem)?;
                    ProblemFile {
                        quadrature_subdivisions: Some(loaded.quadrature_subdivisions),
                        ..ProblemFile::from_problem(Some(&loaded.name), &loaded.problem)
                    }
                }
            };
            emit(&file.to_toml(), out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Flow {
            problem,
            point,
            order,
            step,
            out,
        } => {
            let loaded = load_problem(&problem)?;
            let p = match point {
                Some(v) if v.len() == loaded.problem.n_params() => IntervalBox::from_points(&v),
                Some(v) => {
                    return Err(CliError::new(
                        EXIT_USAGE,
                        format!(
                            "--point has {} values, the problem has {} parameters",
                            v.len(),
                            loaded.problem.n_params()
                        ),
                    ))
                }
                None => loaded.problem.pbox.midpoint_box(),
            };
            let mut cfg = crate::ivp::IntegratorConfig::default();
            if let Some(order) = order {
                cfg.order = order;
            }
            cfg.step = step;
            let flow =
                integrate(&loaded.problem.sys, &p, &cfg).map_err(|e| CliError::new(EXIT_INTEGRATION, e.to_string()))?;
            let mut buf = Vec::new();
            flow.write_csv(&mut buf)
                .map_err(|e| CliError::new(EXIT_IO, e.to_string()))?;
            emit(&String::from_utf8_lossy(&buf), out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (Result<i32, CliError>, String) {
        let cli = Cli::try_parse_from(std::iter::once("gdopt").chain(args.iter().copied())).unwrap();
        let mut out = Vec::new();
        let res = execute(cli, &mut out);
        (res, String::from_utf8(out).unwrap())
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "gdopt",
            "run",
            "polynomial",
            "--heuristic",
            "largest-first",
            "--epsilon",
            "1e-4",
            "--smear-mode",
            "terminal",
            "--format",
            "table",
            "--max-branches",
            "10",
        ])
        .unwrap();
        match cli.command {
            Command::Run {
                heuristic,
                epsilon,
                common,
                ..
            } => {
                assert_eq!(heuristic, HeuristicArg::Lf);
                assert_eq!(epsilon, 1e-4);
                assert_eq!(common.smear_mode, SmearModeArg::Terminal);
                assert_eq!(common.max_branches, Some(10));
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["gdopt", "run", "x", "--heuristic", "best"]).is_err());
    }

    #[test]
    fn run_reports_and_limits() {
        let (code, out) = run(&["run", "linear_growth", "--epsilon", "1e-3"]);
        assert_eq!(code.unwrap(), EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["problem"], "linear_growth");
        let (code, _) = run(&["run", "linear_growth", "--epsilon", "1e-6", "--max-branches", "2"]);
        assert_eq!(code.unwrap(), EXIT_LIMIT);
    }

    #[test]
    fn unknown_problem_is_a_problem_error() {
        let (res, _) = run(&["run", "no_such_problem"]);
        assert_eq!(res.unwrap_err().code, EXIT_PROBLEM);
    }

    #[test]
    fn list_and_export() {
        let (_, out) = run(&["list"]);
        assert!(out.contains("singular_control") && out.contains("endpoint"));
        let (_, out) = run(&["export", "endpoint"]);
        let file = ProblemFile::from_toml(&out).unwrap();
        assert_eq!(file.constraints.len(), 1);
    }

    #[test]
    fn flow_dump() {
        let (code, out) = run(&["flow", "linear_growth", "--point", "0.5"]);
        assert_eq!(code.unwrap(), EXIT_OK);
        assert!(out.lines().count() > 10);
        let (res, _) = run(&["flow", "linear_growth", "--point", "0.5,1"]);
        assert_eq!(res.unwrap_err().code, EXIT_USAGE);
    }
}
