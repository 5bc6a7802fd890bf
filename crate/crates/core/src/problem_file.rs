//! TOML problem files.
//!
//! ```toml
//! name = "polynomial"
//! states = 2
//! params = 3
//! rhs = ["p1*y1^2 + p2*y2 - 2*p3^2", "-3*p1*y1 - p1*p2*y2 + y1*y2*p3 + 1.0"]
//! initial_state = [0.0, 1.0]
//! tspan = [0.0, 1.0]
//! parameter_box = [[0.95, 1.0], [0.95, 1.0], [0.95, 1.0]]
//!
//! [cost]
//! phi = "(y1 + y2)^2"
//!
//! [[constraints]]
//! expr = "y1"
//! target = 1.0
//! ```
//!
//! An interval is written as a number, a `[lo, hi]` pair, or a constant
//! expression string such as `"-sqrt(5)"`, which is enclosed rigorously.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bnb::{EndpointConstraint, Problem, ProblemError};
use crate::expr::{parse, EvalContext, Expr, ParseError};
use crate::interval::{Interval, IntervalBox};
use crate::objective::CostSpec;
use crate::problems::ProblemCatalogEntry;
use crate::sensitivity::OdeSystem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntervalSpec {
    Number(f64),
    Pair([f64; 2]),
    Expression(String),
}

impl From<Interval> for IntervalSpec {
    fn from(x: Interval) -> Self {
        if x.is_point() {
            IntervalSpec::Number(x.lo())
        } else {
            IntervalSpec::Pair([x.lo(), x.hi()])
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSection {
    pub expr: String,
    pub target: IntervalSpec,
}

/// The on-disk form of a [`Problem`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub states: usize,
    pub params: usize,
    pub rhs: Vec<String>,
    pub initial_state: Vec<IntervalSpec>,
    pub tspan: [f64; 2],
    pub parameter_box: Vec<IntervalSpec>,
    /// Quadrature windows per step for the integral cost.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_subdivisions: Option<usize>,
    pub cost: CostSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintSection>,
}

#[derive(Debug, Error)]
pub enum ProblemFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: at character {}: {}", .error.position + 1, .error.message)]
    Expression { field: String, error: ParseError },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("invalid problem: {0}")]
    Problem(#[from] ProblemError),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ProblemFileError {
    ProblemFileError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

fn expression(field: String, src: &str) -> Result<Expr, ProblemFileError> {
    parse(src).map_err(|error| ProblemFileError::Expression { field, error })
}

fn interval(field: String, spec: &IntervalSpec) -> Result<Interval, ProblemFileError> {
    let x = match spec {
        IntervalSpec::Number(v) => Interval::point(*v),
        IntervalSpec::Pair([lo, hi]) => {
            if !(lo <= hi) {
                return Err(invalid(field, format!("lower bound {lo} exceeds upper bound {hi}")));
            }
            Interval::new(*lo, *hi)
        }
        IntervalSpec::Expression(src) => {
            let e = expression(field.clone(), src)?;
            if e.max_indices() != (0, 0) || e.depends_on(crate::expr::Var::Time) {
                return Err(invalid(field, "must be a constant expression"));
            }
            e.eval_interval(&EvalContext::new(Interval::ZERO, &[], &[]))
        }
    };
    if x.is_empty() || !x.is_bounded() {
        return Err(invalid(field, "must be a non-empty bounded interval"));
    }
    Ok(x)
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

impl ProblemFile {
    pub fn from_toml(text: &str) -> Result<Self, ProblemFileError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
            ProblemFileError::Syntax {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProblemFileError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ProblemFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem files always serialize")
    }

    /// Validates and builds the problem.
    pub fn to_problem(&self) -> Result<Problem, ProblemFileError> {
        let (n, m) = (self.states, self.params);
        if self.rhs.len() != n {
            return Err(invalid(
                "rhs",
                format!("expected {n} expressions, got {}", self.rhs.len()),
            ));
        }
        if self.initial_state.len() != n {
            return Err(invalid(
                "initial_state",
                format!("expected {n} entries, got {}", self.initial_state.len()),
            ));
        }
        if self.parameter_box.len() != m {
            return Err(invalid(
                "parameter_box",
                format!("expected {m} entries, got {}", self.parameter_box.len()),
            ));
        }
        if self.quadrature_subdivisions == Some(0) {
            return Err(invalid("quadrature_subdivisions", "must be at least 1"));
        }
        let rhs = self
            .rhs
            .iter()
            .enumerate()
            .map(|(i, s)| expression(format!("rhs[{i}]"), s))
            .collect::<Result<Vec<_>, _>>()?;
        let y0 = self
            .initial_state
            .iter()
            .enumerate()
            .map(|(i, s)| interval(format!("initial_state[{i}]"), s))
            .collect::<Result<IntervalBox, _>>()?;
        let pbox = self
            .parameter_box
            .iter()
            .enumerate()
            .map(|(i, s)| interval(format!("parameter_box[{i}]"), s))
            .collect::<Result<IntervalBox, _>>()?;
        let sys =
            OdeSystem::new(rhs, y0, m, (self.tspan[0], self.tspan[1])).map_err(|e| invalid("ode", e.to_string()))?;
        let cost = CostSpec {
            phi: self
                .cost
                .phi
                .as_deref()
                .map(|s| expression("cost.phi".into(), s))
                .transpose()?,
            g: self
                .cost
                .g
                .as_deref()
                .map(|s| expression("cost.g".into(), s))
                .transpose()?,
        };
        let constraints = self
            .constraints
            .iter()
            .enumerate()
            .map(|(k, c)| {
                Ok(EndpointConstraint {
                    expr: expression(format!("constraints[{k}].expr"), &c.expr)?,
                    target: match c.target {
                        // an unbounded side is allowed for inequality targets
                        IntervalSpec::Pair([lo, hi]) if lo <= hi => Interval::new(lo, hi),
                        ref spec => interval(format!("constraints[{k}].target"), spec)?,
                    },
                })
            })
            .collect::<Result<Vec<_>, ProblemFileError>>()?;
        Ok(Problem::new(sys, cost, constraints, pbox)?)
    }

    /// The file form of `prob`; expressions are rendered, intervals written exactly.
    pub fn from_problem(name: Option<&str>, prob: &Problem) -> Self {
        let spec = |b: &IntervalBox| b.iter().map(|&x| IntervalSpec::from(x)).collect();
        let (t0, tf) = prob.sys.tspan();
        ProblemFile {
            name: name.map(str::to_string),
            states: prob.sys.n_states(),
            params: prob.n_params(),
            rhs: prob.sys.rhs().iter().map(Expr::to_string).collect(),
            initial_state: spec(prob.sys.initial_state()),
            tspan: [t0, tf],
            parameter_box: spec(&prob.pbox),
            quadrature_subdivisions: None,
            cost: CostSection {
                phi: prob.cost.phi.as_ref().map(Expr::to_string),
                g: prob.cost.g.as_ref().map(Expr::to_string),
            },
            constraints: prob
                .constraints
                .iter()
                .map(|c| ConstraintSection {
                    expr: c.expr.to_string(),
                    target: c.target.into(),
                })
                .collect(),
        }
    }

    pub fn from_catalog(entry: &ProblemCatalogEntry) -> Self {
        ProblemFile {
            quadrature_subdivisions: Some(entry.quadrature_subdivisions),
            ..Self::from_problem(Some(entry.name), &entry.problem)
        }
    }
}
