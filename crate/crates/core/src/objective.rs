//! Interval evaluation of `J(p) = phi(y(tf), p) + ∫ g(t, y, p) dt` from a flow.
//!
//! The terminal part is `phi(R(tf), [p])`. The integral uses the rectangle
//! rule on the integrator's own steps: each step `[t_i, t_{i+1}]` (optionally
//! split into equal sub-windows) contributes `(t_{i+1} - t_i) · g([t_i,
//! t_{i+1}], enclosure over the window, [p])`. Window enclosures come from
//! the panel expansions and never exceed the a-priori enclosure.

use thiserror::Error;

use crate::expr::{DiffError, Expr, Var};
use crate::interval::{Interval, IntervalBox};
use crate::ivp::FlowEnclosure;
use crate::tape::Tape;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("cost has neither a terminal nor an integral part")]
    Missing,
    #[error("terminal cost may not depend on t")]
    TerminalTime,
    #[error("cost references y{state} but the system has {n} states")]
    StateOutOfRange { state: usize, n: usize },
    #[error("cost references p{param} but the system has {m} parameters")]
    ParamOutOfRange { param: usize, m: usize },
}

/// Terminal and integral parts of the cost; at least one is present.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSpec {
    pub phi: Option<Expr>,
    pub g: Option<Expr>,
}

impl CostSpec {
    pub fn terminal(phi: Expr) -> Self {
        CostSpec {
            phi: Some(phi),
            g: None,
        }
    }

    pub fn integral(g: Expr) -> Self {
        CostSpec { phi: None, g: Some(g) }
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<(), CostError> {
        if self.phi.is_none() && self.g.is_none() {
            return Err(CostError::Missing);
        }
        if self.phi.as_ref().is_some_and(|e| e.depends_on(Var::Time)) {
            return Err(CostError::TerminalTime);
        }
        for e in self.phi.iter().chain(self.g.iter()) {
            let (ns, ms) = e.max_indices();
            if ns > n {
                return Err(CostError::StateOutOfRange { state: ns, n });
            }
            if ms > m {
                return Err(CostError::ParamOutOfRange { param: ms, m });
            }
        }
        Ok(())
    }
}

/// A [`CostSpec`] compiled for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CostEvaluator {
    phi: Option<Tape>,
    g: Option<Tape>,
    subdivisions: usize,
}

impl CostEvaluator {
    /// `subdivisions` splits every integration step into that many equal
    /// quadrature windows (1 = the steps themselves).
    pub fn new(spec: &CostSpec, subdivisions: usize) -> Self {
        let compile = |e: &Option<Expr>| e.as_ref().map(|e| Tape::new(std::slice::from_ref(e), 0));
        CostEvaluator {
            phi: compile(&spec.phi),
            g: compile(&spec.g),
            subdivisions: subdivisions.max(1),
        }
    }

    pub fn has_integral(&self) -> bool {
        self.g.is_some()
    }

    pub fn terminal(&self, flow: &FlowEnclosure, p: &IntervalBox) -> Interval {
        match &self.phi {
            None => Interval::ZERO,
            Some(tape) => {
                let y = flow.final_state();
                tape.eval(Interval::point(flow.tf()), y.components(), p.components())[0]
            }
        }
    }

    pub fn continuous(&self, flow: &FlowEnclosure, p: &IntervalBox) -> Interval {
        let Some(tape) = &self.g else {
            return Interval::ZERO;
        };
        let mut total = Interval::ZERO;
        for panel in &flow.panels {
            for_each_window(panel.t0, panel.t1, self.subdivisions, |a, b| {
                let y = panel.enclose_window(a, b);
                let g = tape.eval(Interval::new(a, b), y.components(), p.components())[0];
                let dt = Interval::point(b) - Interval::point(a);
                total = total + dt * g;
            });
        }
        total
    }

    pub fn cost(&self, flow: &FlowEnclosure, p: &IntervalBox) -> Interval {
        self.terminal(flow, p) + self.continuous(flow, p)
    }
}

/// Total derivatives `dE/dp_j = Σ_i ∂E/∂y_i · s_ij + ∂E/∂p_j`, written over
/// the sensitivity-augmented state.
pub fn parameter_gradient(e: &Expr, n: usize, m: usize) -> Result<Vec<Expr>, DiffError> {
    let partials = (0..n)
        .map(|i| e.differentiate(Var::State(i)))
        .collect::<Result<Vec<_>, _>>()?;
    (0..m)
        .map(|j| {
            let direct = e.differentiate(Var::Param(j))?;
            Ok(partials.iter().enumerate().fold(direct, |acc, (i, d)| {
                Expr::add(acc, Expr::mul(d.clone(), Expr::sens(i, j)))
            }))
        })
        .collect()
}

/// Mean-value enclosure `value(c) + Σ_j grad_j · (p_j - c_j)` of a function
/// over `p`, given an enclosure of its value at the point `c ∈ p` and of its
/// gradient over `p`.
pub fn mean_value_form(center_value: Interval, center: &[f64], grad: &[Interval], p: &IntervalBox) -> Interval {
    grad.iter()
        .zip(center)
        .zip(p.iter())
        .fold(center_value, |acc, ((g, &c), pj)| acc + *g * (*pj - Interval::point(c)))
}

/// Encloses the parameter gradient of the cost from a flow of the
/// sensitivity-augmented system.
#[derive(Clone, Debug)]
pub struct CostGradient {
    phi: Option<Tape>,
    g: Option<Tape>,
    subdivisions: usize,
    m: usize,
}

impl CostGradient {
    pub fn new(spec: &CostSpec, n: usize, m: usize, subdivisions: usize) -> Result<Self, DiffError> {
        let compile = |e: &Option<Expr>| -> Result<Option<Tape>, DiffError> {
            e.as_ref()
                .map(|e| parameter_gradient(e, n, m).map(|grad| Tape::new(&grad, n)))
                .transpose()
        };
        Ok(CostGradient {
            phi: compile(&spec.phi)?,
            g: compile(&spec.g)?,
            subdivisions: subdivisions.max(1),
            m,
        })
    }

    /// `∇J` over `p`; `flow` must integrate the augmented system over `p`.
    pub fn eval(&self, flow: &FlowEnclosure, p: &IntervalBox) -> Vec<Interval> {
        let mut grad = match &self.phi {
            Some(tape) => tape.eval(
                Interval::point(flow.tf()),
                flow.final_state().components(),
                p.components(),
            ),
            None => vec![Interval::ZERO; self.m],
        };
        if let Some(tape) = &self.g {
            for panel in &flow.panels {
                for_each_window(panel.t0, panel.t1, self.subdivisions, |a, b| {
                    let y = panel.enclose_window(a, b);
                    let d = tape.eval(Interval::new(a, b), y.components(), p.components());
                    let dt = Interval::point(b) - Interval::point(a);
                    for (acc, dj) in grad.iter_mut().zip(d) {
                        *acc = *acc + dt * dj;
                    }
                });
            }
        }
        grad
    }
}

/// Splits `[t0, t1]` into `k` equal windows; the outer endpoints are exact.
fn for_each_window(t0: f64, t1: f64, k: usize, mut f: impl FnMut(f64, f64)) {
    let span = t1 - t0;
    let mut a = t0;
    for s in 1..=k {
        let b = if s == k {
            t1
        } else {
            t0 + span * (s as f64) / (k as f64)
        };
        f(a, b);
        a = b;
    }
}

/// `phi(R(tf; [p]), [p])`, or `[0, 0]` without a terminal part.
pub fn eval_terminal(spec: &CostSpec, flow: &FlowEnclosure, p: &IntervalBox) -> Interval {
    CostEvaluator::new(spec, 1).terminal(flow, p)
}

/// Rectangle-rule enclosure of `∫ g` over the flow's steps.
pub fn eval_continuous(spec: &CostSpec, flow: &FlowEnclosure, p: &IntervalBox) -> Interval {
    CostEvaluator::new(spec, 1).continuous(flow, p)
}

pub fn eval_cost(spec: &CostSpec, flow: &FlowEnclosure, p: &IntervalBox) -> Interval {
    CostEvaluator::new(spec, 1).cost(flow, p)
}
