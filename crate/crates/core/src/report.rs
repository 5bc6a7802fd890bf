//! Run and benchmark reports in JSON, CSV and table form.
//!
//! Struct fields serialize in declaration order, floats in shortest
//! round-trip form and intervals as `[lo, hi]` pairs, so two identical runs
//! produce identical documents apart from `wall_time_s`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bnb::{BoundForm, Heuristic, SmearNorm, Solution, SolverConfig, SolverStats, Status};
use crate::interval::{Interval, IntervalBox};

/// Solver settings echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub epsilon: f64,
    pub heuristic: Heuristic,
    pub order: usize,
    pub step: Option<f64>,
    pub max_branches: Option<usize>,
    pub feasibility_tol: f64,
    pub smear_norm: SmearNorm,
    pub bounds: BoundForm,
    pub quadrature_subdivisions: usize,
}

impl From<&SolverConfig> for ConfigEcho {
    fn from(cfg: &SolverConfig) -> Self {
        ConfigEcho {
            epsilon: cfg.epsilon,
            heuristic: cfg.heuristic,
            order: cfg.integrator.order,
            step: cfg.integrator.step,
            max_branches: cfg.max_branches,
            feasibility_tol: cfg.feasibility_tol,
            smear_norm: cfg.smear_norm,
            bounds: cfg.bounds,
            quadrature_subdivisions: cfg.quadrature_subdivisions,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub problem: String,
    pub status: Status,
    pub psol: IntervalBox,
    pub csol: Interval,
    /// Best proven upper bound on the optimum.
    pub incumbent: f64,
    pub branch_count: usize,
    pub node_count: usize,
    pub stats: SolverStats,
    pub accepted_boxes: usize,
    pub config: ConfigEcho,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(problem: &str, cfg: &SolverConfig, sol: &Solution, wall_time_s: f64) -> Self {
        RunReport {
            problem: problem.to_string(),
            status: sol.status,
            psol: sol.psol.clone(),
            csol: sol.csol,
            incumbent: sol.incumbent,
            branch_count: sol.branch_count,
            node_count: sol.stats.nodes_processed,
            stats: sol.stats.clone(),
            accepted_boxes: sol.accepted.len(),
            config: cfg.into(),
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut out = csv_header(self.psol.dim(), false);
        csv_row(&mut out, self.config.epsilon, self, None);
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem      {}", self.problem);
        let _ = writeln!(out, "status       {}", status_name(self.status));
        let _ = writeln!(out, "heuristic    {}", self.config.heuristic.short_name());
        let _ = writeln!(out, "epsilon      {:e}", self.config.epsilon);
        let _ = writeln!(out, "solution     {}", format_box(&self.psol));
        let _ = writeln!(out, "cost         {}", self.csol);
        let _ = writeln!(out, "upper bound  {}", self.incumbent);
        let _ = writeln!(out, "branches     {}", self.branch_count);
        let _ = writeln!(out, "nodes        {}", self.node_count);
        let _ = writeln!(out, "time         {:.3} s", self.wall_time_s);
        out
    }
}

/// One precision of a benchmark: a run per heuristic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub epsilon: f64,
    pub runs: Vec<RunReport>,
    /// `100 · (LF - S) / LF` when both heuristics ran; negative is a loss.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_percent: Option<f64>,
}

impl BenchRow {
    pub fn new(epsilon: f64, runs: Vec<RunReport>) -> Self {
        let count = |h| runs.iter().find(|r| r.config.heuristic == h).map(|r| r.branch_count);
        let gain_percent = match (count(Heuristic::LargestFirst), count(Heuristic::Smear)) {
            (Some(lf), Some(s)) => Some(relative_gain(lf, s)),
            _ => None,
        };
        BenchRow {
            epsilon,
            runs,
            gain_percent,
        }
    }
}

/// `100 · (baseline - candidate) / baseline`.
pub fn relative_gain(baseline: usize, candidate: usize) -> f64 {
    if baseline == 0 {
        0.0
    } else {
        100.0 * (baseline as f64 - candidate as f64) / baseline as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub problem: String,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        let dim = self
            .rows
            .first()
            .and_then(|r| r.runs.first())
            .map_or(0, |r| r.psol.dim());
        let mut out = csv_header(dim, true);
        for row in &self.rows {
            for run in &row.runs {
                csv_row(&mut out, row.epsilon, run, Some(row.gain_percent));
            }
        }
        out
    }

    /// Precision, solution box, cost, one branch column per heuristic and
    /// the gain column when both largest first and smear ran.
    pub fn to_table(&self) -> String {
        let heuristics: Vec<Heuristic> = self
            .rows
            .first()
            .map(|r| r.runs.iter().map(|x| x.config.heuristic).collect())
            .unwrap_or_default();
        let with_gain = self.rows.iter().any(|r| r.gain_percent.is_some());
        let mut header = vec!["Prec.".to_string(), "Optimal solution".into(), "Cost".into()];
        header.extend(heuristics.iter().map(|h| format!("Branches ({})", h.short_name())));
        if with_gain {
            header.push("Gain".into());
        }
        let mut rows = vec![header];
        for row in &self.rows {
            let Some(first) = row.runs.first() else { continue };
            let mut cells = vec![
                format!("{:e}", row.epsilon),
                format_box(&first.psol),
                format!("{:.5}", first.incumbent),
            ];
            cells.extend(row.runs.iter().map(|r| r.branch_count.to_string()));
            if with_gain {
                cells.push(row.gain_percent.map_or("-".into(), |g| format!("{g:.0}%")));
            }
            rows.push(cells);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| {
                rows.iter()
                    .map(|r| r.get(c).map_or(0, |s| s.chars().count()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        for (i, r) in rows.iter().enumerate() {
            let line: Vec<String> = r.iter().zip(&widths).map(|(s, &w)| format!("{s:<w$}")).collect();
            let _ = writeln!(out, "{}", line.join(" | ").trim_end());
            if i == 0 {
                let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
                let _ = writeln!(out, "{}", rule.join("-+-"));
            }
        }
        out
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Completed => "completed",
        Status::BranchLimit => "branch limit reached",
    }
}

fn round_down(x: f64) -> f64 {
    (x * 1e4).floor() / 1e4
}

fn round_up(x: f64) -> f64 {
    (x * 1e4).ceil() / 1e4
}

/// `([lo, hi] ; ...)` rounded outward to four decimals.
pub fn format_box(b: &IntervalBox) -> String {
    if b.is_empty() {
        return "(empty)".into();
    }
    let parts: Vec<String> = b
        .iter()
        .map(|x| format!("[{}, {}]", round_down(x.lo()), round_up(x.hi())))
        .collect();
    format!("({})", parts.join(" ; "))
}

fn csv_header(dim: usize, gain: bool) -> String {
    let mut cols = vec![
        "epsilon".to_string(),
        "heuristic".into(),
        "status".into(),
        "branches".into(),
        "nodes".into(),
        "cost_lo".into(),
        "cost_hi".into(),
        "incumbent".into(),
    ];
    for j in 1..=dim {
        cols.push(format!("p{j}_lo"));
        cols.push(format!("p{j}_hi"));
    }
    cols.push("wall_time_s".into());
    if gain {
        cols.push("gain_percent".into());
    }
    cols.join(",") + "\n"
}

fn csv_row(out: &mut String, epsilon: f64, r: &RunReport, gain: Option<Option<f64>>) {
    let mut cells = vec![
        epsilon.to_string(),
        r.config.heuristic.short_name().to_string(),
        format!("{:?}", r.status).to_lowercase(),
        r.branch_count.to_string(),
        r.node_count.to_string(),
        r.csol.lo().to_string(),
        r.csol.hi().to_string(),
        r.incumbent.to_string(),
    ];
    for x in r.psol.iter() {
        cells.push(x.lo().to_string());
        cells.push(x.hi().to_string());
    }
    cells.push(r.wall_time_s.to_string());
    if let Some(g) = gain {
        cells.push(g.map_or(String::new(), |g| g.to_string()));
    }
    let _ = writeln!(out, "{}", cells.join(","));
}
