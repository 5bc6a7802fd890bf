//! Interval Branch & Bound over the parameter box.
//!
//! The loop is the plain textbook algorithm:
//!
//! 0. `c̄ = ∞`, `L = ∅`, `Q = {([p], -∞)}`.
//! 1. Pop the first box of `Q` (FIFO).
//! 2. Reject it if an endpoint constraint is provably violated. Otherwise
//!    evaluate the cost at the box midpoint and, if the midpoint is
//!    feasible, set `c̄ = min(c̄, sup J(mid))`.
//! 3. Drop every queued box whose lower bound exceeds `c̄`.
//! 4. If the box is narrower than `ε`, store it in `L`; otherwise bisect it
//!    along the dimension picked by the heuristic and queue both halves with
//!    their own lower bounds `inf J([p_i])`.
//! 5. Repeat while `Q` is non-empty.
//! 6. Drop stored boxes whose lower bound exceeds `c̄`; the hull of the rest
//!    is the solution box and the hull of their cost enclosures the cost.
//!
//! A popped box whose lower bound already exceeds `c̄` is dropped before
//! step 2, which is what step 3 would have done had it run after the box was
//! queued.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::expr::Expr;
use crate::interval::{Interval, IntervalBox};
use crate::ivp::{FlowEnclosure, IntegrationError, Integrator, IntegratorConfig};
use crate::objective::{mean_value_form, parameter_gradient, CostError, CostEvaluator, CostGradient, CostSpec};
use crate::sensitivity::{sensitivity_block, OdeSystem, SystemError};
use crate::tape::Tape;

/// `expr(y(tf), p) ∈ target`.
#[derive(Clone, Debug, PartialEq)]
pub struct EndpointConstraint {
    pub expr: Expr,
    pub target: Interval,
}

impl EndpointConstraint {
    pub fn equality(expr: Expr, value: f64) -> Self {
        EndpointConstraint {
            expr,
            target: Interval::point(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("parameter box has dimension {got}, system has {expected} parameters")]
    ParamDimension { expected: usize, got: usize },
    #[error("parameter box must be non-empty with finite bounds")]
    UnboundedParams,
    #[error("invalid cost: {0}")]
    Cost(#[from] CostError),
    #[error("constraint {index} is invalid: {reason}")]
    Constraint { index: usize, reason: String },
    #[error(transparent)]
    System(#[from] SystemError),
}

/// `min J(p)` over `pbox` subject to the ODE and endpoint constraints.
#[derive(Clone, Debug)]
pub struct Problem {
    pub sys: OdeSystem,
    pub cost: CostSpec,
    pub constraints: Vec<EndpointConstraint>,
    pub pbox: IntervalBox,
}

impl Problem {
    pub fn new(
        sys: OdeSystem,
        cost: CostSpec,
        constraints: Vec<EndpointConstraint>,
        pbox: IntervalBox,
    ) -> Result<Self, ProblemError> {
        let (n, m) = (sys.n_states(), sys.n_params());
        if pbox.dim() != m {
            return Err(ProblemError::ParamDimension {
                expected: m,
                got: pbox.dim(),
            });
        }
        if pbox.is_empty() || pbox.iter().any(|c| !c.is_bounded()) {
            return Err(ProblemError::UnboundedParams);
        }
        cost.validate(n, m)?;
        for (index, c) in constraints.iter().enumerate() {
            let (ns, ms) = c.expr.max_indices();
            let reason = if c.target.is_empty() {
                Some("empty target".to_string())
            } else if ns > n || ms > m {
                Some("references an undeclared state or parameter".to_string())
            } else if c.expr.depends_on(crate::expr::Var::Time) {
                Some("endpoint constraints may not depend on t".to_string())
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(ProblemError::Constraint { index, reason });
            }
        }
        Ok(Problem {
            sys,
            cost,
            constraints,
            pbox,
        })
    }

    pub fn n_params(&self) -> usize {
        self.sys.n_params()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Heuristic {
    RoundRobin,
    LargestFirst,
    Smear,
}

impl Heuristic {
    pub fn short_name(&self) -> &'static str {
        match self {
            Heuristic::RoundRobin => "RR",
            Heuristic::LargestFirst => "LF",
            Heuristic::Smear => "S",
        }
    }
}

/// Which sensitivity norm the smear rule uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmearNorm {
    /// Terminal when the cost has no integral part, horizon otherwise.
    Auto,
    /// `‖s_i(tf)‖∞` from the final tight enclosure.
    Terminal,
    /// `max_j ‖R̃_j(s_i)‖∞` over all a-priori enclosures.
    Horizon,
}

/// What to do when a node cannot be integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    Abort,
    /// Keep the node with an unbounded cost so it is never discarded unsoundly.
    Keep,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Boxes narrower than this are stored as solutions.
    pub epsilon: f64,
    pub heuristic: Heuristic,
    pub integrator: IntegratorConfig,
    /// Quadrature windows per integration step for the integral cost.
    pub quadrature_subdivisions: usize,
    pub max_branches: Option<usize>,
    /// Midpoint enclosures of equality constraints must be this narrow to
    /// count as feasible.
    pub feasibility_tol: f64,
    pub smear_norm: SmearNorm,
    pub on_failure: FailurePolicy,
    /// Keep every discarded box in the solution (for coverage checks).
    pub record_partition: bool,
    pub bounds: BoundForm,
}

/// How node bounds are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    /// Natural interval evaluation on the flow of the whole box.
    Natural,
    /// Natural bounds intersected with the mean-value form
    /// `J(c) + ∇J([p])·([p] - c)` around the box midpoint `c`.
    MeanValue,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-3,
            heuristic: Heuristic::LargestFirst,
            integrator: IntegratorConfig::default(),
            quadrature_subdivisions: 1,
            max_branches: None,
            feasibility_tol: 1e-3,
            smear_norm: SmearNorm::Auto,
            on_failure: FailurePolicy::Abort,
            record_partition: false,
            bounds: BoundForm::MeanValue,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_heuristic(mut self, heuristic: Heuristic) -> Self {
        self.heuristic = heuristic;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("integration failed on parameter box {pbox}: {source}")]
    Integration {
        pbox: IntervalBox,
        #[source]
        source: IntegrationError,
    },
    #[error("integrator setup failed: {0}")]
    Setup(IntegrationError),
    #[error("sensitivity system: {0}")]
    Sensitivity(#[from] SystemError),
}

/// A queued box with its lower bound `inf J([p])`.
#[derive(Clone, Debug)]
pub struct BnbNode {
    pub pbox: IntervalBox,
    pub lower_bound: f64,
    pub depth: usize,
    /// Enclosure of `J` over the box.
    pub cost: Interval,
    /// Enclosures of the endpoint constraint expressions over the box.
    pub constraints: Vec<Interval>,
    /// Values at the box midpoint, `None` if that integration failed.
    midpoint: Option<NodeValues>,
    /// Smear values `σ_i`, when the smear heuristic is active.
    sigma: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    /// Stopped at the branch limit; unexplored boxes are part of `psol`.
    BranchLimit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolverStats {
    pub nodes_processed: usize,
    pub integrations: usize,
    pub sensitivity_integrations: usize,
    pub infeasible: usize,
    pub pruned: usize,
    pub incumbent_updates: usize,
    pub max_queue: usize,
    pub stored: usize,
    pub integration_failures: usize,
}

#[derive(Clone, Debug)]
pub struct Solution {
    /// Hull of the accepted boxes (empty when the problem is infeasible).
    pub psol: IntervalBox,
    /// Hull of the accepted boxes' cost enclosures.
    pub csol: Interval,
    /// Best proven upper bound `c̄`.
    pub incumbent: f64,
    pub branch_count: usize,
    pub stats: SolverStats,
    pub status: Status,
    /// The accepted boxes and their cost enclosures.
    pub accepted: Vec<(IntervalBox, Interval)>,
    /// Discarded boxes, only filled with `record_partition`.
    pub discarded: Vec<IntervalBox>,
}

/// Machine-readable progress events.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    NodePopped {
        depth: usize,
        pbox: IntervalBox,
        lower_bound: f64,
        queue: usize,
    },
    Infeasible {
        pbox: IntervalBox,
    },
    Pruned {
        pbox: IntervalBox,
        lower_bound: f64,
    },
    IncumbentUpdated {
        value: f64,
    },
    Purged {
        count: usize,
    },
    Bisected {
        dimension: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        sigma: Option<Vec<f64>>,
    },
    Stored {
        pbox: IntervalBox,
        lower_bound: f64,
    },
}

/// Round robin: dimension `depth mod m`, skipping degenerate components.
pub fn choose_dimension_round_robin(depth: usize, pbox: &IntervalBox) -> usize {
    let m = pbox.dim();
    (0..m)
        .map(|k| (depth + k) % m)
        .find(|&i| pbox[i].width() > 0.0)
        .unwrap_or(depth % m)
}

/// Largest first: argmax width, ties to the lowest index.
pub fn choose_dimension_largest_first(pbox: &IntervalBox) -> usize {
    argmax(pbox.iter().map(|c| c.width()))
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Smear values `σ_i = norm_i · w(p_i)`; zero-width dimensions get `σ_i = 0`.
pub fn smear_values(norms: &[f64], pbox: &IntervalBox) -> Vec<f64> {
    norms
        .iter()
        .zip(pbox.iter())
        .map(|(&n, c)| {
            let w = c.width();
            if w > 0.0 {
                n * w
            } else {
                0.0
            }
        })
        .collect()
}

/// Smear choice from per-parameter sensitivity norms: argmax `σ_i`, ties to
/// the lowest index, largest-first when every `σ_i` is zero.
pub fn choose_dimension_smear_from_norms(norms: &[f64], pbox: &IntervalBox) -> usize {
    choose_dimension_from_sigma(&smear_values(norms, pbox), pbox)
}

fn choose_dimension_from_sigma(sigma: &[f64], pbox: &IntervalBox) -> usize {
    if sigma.iter().all(|&s| !(s > 0.0)) {
        return choose_dimension_largest_first(pbox);
    }
    argmax(sigma.iter().map(|&s| if s.is_nan() { f64::NEG_INFINITY } else { s }))
}

/// Per-parameter infinity norms of the sensitivity blocks of an augmented flow.
pub fn sensitivity_norms(flow: &FlowEnclosure, n: usize, m: usize, norm: SmearNorm) -> Vec<f64> {
    (0..m)
        .map(|j| match norm {
            SmearNorm::Terminal => sensitivity_block(flow.final_state(), n, j).inf_norm(),
            SmearNorm::Horizon | SmearNorm::Auto => flow
                .panels
                .iter()
                .map(|p| sensitivity_block(&p.enclosure, n, j).inf_norm())
                .fold(0.0, f64::max),
        })
        .collect()
}

/// Smear choice for a node from its sensitivity-augmented flow.
pub fn choose_dimension_smear(
    node_box: &IntervalBox,
    augmented_flow: &FlowEnclosure,
    n: usize,
    norm: SmearNorm,
) -> usize {
    if node_box.dim() == 1 {
        return 0;
    }
    let norms = sensitivity_norms(augmented_flow, n, node_box.dim(), norm);
    choose_dimension_smear_from_norms(&norms, node_box)
}

/// `None` when some constraint enclosure misses its target: the box holds no
/// feasible point. Otherwise the box itself (no contraction).
pub fn filter_constraints(
    constraints: &[EndpointConstraint],
    values: &[Interval],
    pbox: &IntervalBox,
) -> Option<IntervalBox> {
    let infeasible = constraints
        .iter()
        .zip(values)
        .any(|(c, v)| v.intersect(&c.target).is_empty());
    if infeasible {
        None
    } else {
        Some(pbox.clone())
    }
}

fn midpoint_feasible(constraints: &[EndpointConstraint], values: &[Interval], tol: f64) -> bool {
    constraints
        .iter()
        .zip(values)
        .all(|(c, v)| !v.intersect(&c.target).is_empty() && (v.subset(&c.target) || v.width() <= tol))
}

struct Evaluator<'a> {
    prob: &'a Problem,
    cfg: &'a SolverConfig,
    base: Integrator,
    augmented: Option<Integrator>,
    cost: CostEvaluator,
    constraints: Option<Tape>,
    gradients: Option<Gradients>,
    smear_norm: SmearNorm,
}

struct Gradients {
    cost: CostGradient,
    /// Row-major `k × m` constraint gradients.
    constraints: Option<Tape>,
}

#[derive(Clone, Debug)]
struct NodeValues {
    cost: Interval,
    constraints: Vec<Interval>,
}

impl<'a> Evaluator<'a> {
    fn new(prob: &'a Problem, cfg: &'a SolverConfig) -> Result<Self, SolveError> {
        let (n, m) = (prob.sys.n_states(), prob.n_params());
        let base = Integrator::new(&prob.sys, &cfg.integrator).map_err(SolveError::Setup)?;
        let constraint_exprs: Vec<Expr> = prob.constraints.iter().map(|c| c.expr.clone()).collect();
        let constraints = (!constraint_exprs.is_empty()).then(|| Tape::new(&constraint_exprs, n));
        let gradients = if cfg.bounds == BoundForm::MeanValue && m > 0 {
            let cost = CostGradient::new(&prob.cost, n, m, cfg.quadrature_subdivisions);
            let rows: Result<Vec<Vec<Expr>>, _> =
                constraint_exprs.iter().map(|e| parameter_gradient(e, n, m)).collect();
            match (cost, rows) {
                (Ok(cost), Ok(rows)) => {
                    let flat: Vec<Expr> = rows.into_iter().flatten().collect();
                    let constraints = (!flat.is_empty()).then(|| Tape::new(&flat, n));
                    Some(Gradients { cost, constraints })
                }
                // Not differentiable: natural bounds only.
                _ => None,
            }
        } else {
            None
        };
        let smear = cfg.heuristic == Heuristic::Smear && m > 1;
        let augmented = if smear || gradients.is_some() {
            let aug = prob.sys.augment()?;
            Some(Integrator::new(&aug, &cfg.integrator).map_err(SolveError::Setup)?)
        } else {
            None
        };
        let smear_norm = match cfg.smear_norm {
            SmearNorm::Auto if prob.cost.g.is_none() => SmearNorm::Terminal,
            SmearNorm::Auto => SmearNorm::Horizon,
            other => other,
        };
        Ok(Evaluator {
            prob,
            cfg,
            base,
            augmented,
            cost: CostEvaluator::new(&prob.cost, cfg.quadrature_subdivisions),
            constraints,
            gradients,
            smear_norm,
        })
    }

    fn values_from(&self, flow: &FlowEnclosure, pbox: &IntervalBox) -> NodeValues {
        let cost = self.cost.cost(flow, pbox);
        let constraints = match &self.constraints {
            None => Vec::new(),
            Some(t) => t.eval(
                Interval::point(flow.tf()),
                flow.final_state().components(),
                pbox.components(),
            ),
        };
        NodeValues { cost, constraints }
    }

    fn point_values(&self, p: &IntervalBox, stats: &mut SolverStats) -> Option<NodeValues> {
        stats.integrations += 1;
        self.base.integrate(p).ok().map(|flow| self.values_from(&flow, p))
    }

    /// Bounds over `pbox`, plus smear values when needed.
    fn box_values(
        &self,
        pbox: &IntervalBox,
        midpoint: Option<&NodeValues>,
        stats: &mut SolverStats,
    ) -> Result<(NodeValues, Option<Vec<f64>>), IntegrationError> {
        let Some(aug) = &self.augmented else {
            stats.integrations += 1;
            let flow = self.base.integrate(pbox)?;
            return Ok((self.values_from(&flow, pbox), None));
        };
        stats.integrations += 1;
        stats.sensitivity_integrations += 1;
        let flow = aug.integrate(pbox)?;
        let (n, m) = (self.prob.sys.n_states(), pbox.dim());
        let mut values = self.values_from(&flow, pbox);
        let sigma = (self.cfg.heuristic == Heuristic::Smear && m > 1)
            .then(|| smear_values(&sensitivity_norms(&flow, n, m, self.smear_norm), pbox));
        if let (Some(grads), Some(mid)) = (&self.gradients, midpoint) {
            let center: Vec<f64> = pbox.iter().map(Interval::midpoint).collect();
            let tighten = |natural: Interval, at_mid: Interval, grad: &[Interval]| {
                let mv = natural.intersect(&mean_value_form(at_mid, &center, grad, pbox));
                if mv.is_empty() {
                    natural
                } else {
                    mv
                }
            };
            let grad = grads.cost.eval(&flow, pbox);
            values.cost = tighten(values.cost, mid.cost, &grad);
            if let Some(tape) = &grads.constraints {
                let rows = tape.eval(
                    Interval::point(flow.tf()),
                    flow.final_state().components(),
                    pbox.components(),
                );
                for (k, c) in values.constraints.iter_mut().enumerate() {
                    *c = tighten(*c, mid.constraints[k], &rows[k * m..(k + 1) * m]);
                }
            }
        }
        Ok((values, sigma))
    }

    fn node(&self, pbox: IntervalBox, depth: usize, stats: &mut SolverStats) -> Result<BnbNode, SolveError> {
        let midpoint = self.point_values(&pbox.midpoint_box(), stats);
        match self.box_values(&pbox, midpoint.as_ref(), stats) {
            Ok((v, sigma)) => Ok(BnbNode {
                lower_bound: v.cost.lo(),
                cost: v.cost,
                constraints: v.constraints,
                midpoint,
                sigma,
                pbox,
                depth,
            }),
            Err(source) => {
                stats.integration_failures += 1;
                match self.cfg.on_failure {
                    FailurePolicy::Abort => Err(SolveError::Integration { pbox, source }),
                    FailurePolicy::Keep => Ok(BnbNode {
                        lower_bound: f64::NEG_INFINITY,
                        cost: Interval::ENTIRE,
                        constraints: vec![Interval::ENTIRE; self.prob.constraints.len()],
                        midpoint,
                        sigma: None,
                        pbox,
                        depth,
                    }),
                }
            }
        }
    }

    fn choose(&self, node: &BnbNode) -> (usize, Option<Vec<f64>>) {
        match self.cfg.heuristic {
            Heuristic::RoundRobin => (choose_dimension_round_robin(node.depth, &node.pbox), None),
            Heuristic::LargestFirst => (choose_dimension_largest_first(&node.pbox), None),
            Heuristic::Smear => match &node.sigma {
                Some(sigma) => (choose_dimension_from_sigma(sigma, &node.pbox), Some(sigma.clone())),
                // One parameter, or sensitivities unavailable.
                None => (choose_dimension_largest_first(&node.pbox), None),
            },
        }
    }
}

/// Runs the Branch & Bound.
pub fn solve(prob: &Problem, cfg: &SolverConfig) -> Result<Solution, SolveError> {
    solve_with_observer(prob, cfg, |_| {})
}

/// [`solve`] reporting every step to `observer`.
pub fn solve_with_observer(
    prob: &Problem,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&Event),
) -> Result<Solution, SolveError> {
    if !(cfg.epsilon > 0.0) {
        return Err(SolveError::InvalidEpsilon(cfg.epsilon));
    }
    let eval = Evaluator::new(prob, cfg)?;
    let mut stats = SolverStats::default();
    let mut discarded = Vec::new();
    let record = |b: &IntervalBox, discarded: &mut Vec<IntervalBox>| {
        if cfg.record_partition {
            discarded.push(b.clone());
        }
    };

    // Step 0
    let mut incumbent = f64::INFINITY;
    let mut stored: Vec<BnbNode> = Vec::new();
    let mut queue: VecDeque<BnbNode> = VecDeque::new();
    let mut root = eval.node(prob.pbox.clone(), 0, &mut stats)?;
    // Q starts with ([p], ∞)... its bound is only used for purging, so the
    // computed value is equivalent.
    root.depth = 0;
    queue.push_back(root);
    let mut branch_count = 0;
    let mut status = Status::Completed;

    // Step 1
    while let Some(node) = queue.pop_front() {
        if cfg.max_branches.is_some_and(|limit| branch_count >= limit) {
            queue.push_front(node);
            status = Status::BranchLimit;
            break;
        }
        stats.nodes_processed += 1;
        observer(&Event::NodePopped {
            depth: node.depth,
            pbox: node.pbox.clone(),
            lower_bound: node.lower_bound,
            queue: queue.len(),
        });
        if node.lower_bound > incumbent {
            stats.pruned += 1;
            observer(&Event::Pruned {
                pbox: node.pbox.clone(),
                lower_bound: node.lower_bound,
            });
            record(&node.pbox, &mut discarded);
            continue;
        }

        // Step 2
        if filter_constraints(&prob.constraints, &node.constraints, &node.pbox).is_none() {
            stats.infeasible += 1;
            observer(&Event::Infeasible {
                pbox: node.pbox.clone(),
            });
            record(&node.pbox, &mut discarded);
            continue;
        }
        if let Some(v) = &node.midpoint {
            if midpoint_feasible(&prob.constraints, &v.constraints, cfg.feasibility_tol) && v.cost.hi() < incumbent {
                incumbent = v.cost.hi();
                stats.incumbent_updates += 1;
                observer(&Event::IncumbentUpdated { value: incumbent });

                // Step 3
                let before = queue.len();
                queue.retain(|q| {
                    let keep = q.lower_bound <= incumbent;
                    if !keep && cfg.record_partition {
                        discarded.push(q.pbox.clone());
                    }
                    keep
                });
                let purged = before - queue.len();
                stats.pruned += purged;
                if purged > 0 {
                    observer(&Event::Purged { count: purged });
                }
            }
        }
        if node.lower_bound > incumbent {
            stats.pruned += 1;
            observer(&Event::Pruned {
                pbox: node.pbox.clone(),
                lower_bound: node.lower_bound,
            });
            record(&node.pbox, &mut discarded);
            continue;
        }

        // Step 4
        if node.pbox.width() < cfg.epsilon {
            stats.stored += 1;
            observer(&Event::Stored {
                pbox: node.pbox.clone(),
                lower_bound: node.lower_bound,
            });
            stored.push(node);
            continue;
        }
        let (dim, sigma) = eval.choose(&node);
        let dim = if node.pbox[dim].width() > 0.0 {
            dim
        } else {
            choose_dimension_largest_first(&node.pbox)
        };
        branch_count += 1;
        observer(&Event::Bisected { dimension: dim, sigma });
        let (left, right) = node.pbox.bisect(dim);
        for child in [left, right] {
            let child = eval.node(child, node.depth + 1, &mut stats)?;
            queue.push_back(child);
        }
        stats.max_queue = stats.max_queue.max(queue.len());
        // Step 5: loop
    }

    // Step 6
    let mut accepted = Vec::new();
    for node in stored.into_iter().chain(queue) {
        if node.lower_bound > incumbent {
            record(&node.pbox, &mut discarded);
        } else {
            accepted.push((node.pbox, node.cost));
        }
    }
    let psol = accepted
        .iter()
        .map(|(b, _)| b.clone())
        .reduce(|a, b| a.hull(&b))
        .unwrap_or_else(|| IntervalBox::filled(prob.n_params(), Interval::EMPTY));
    let csol = accepted.iter().fold(Interval::EMPTY, |acc, (_, c)| acc.hull(c));
    Ok(Solution {
        psol,
        csol,
        incumbent,
        branch_count,
        stats,
        status,
        accepted,
        discarded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn bx(bounds: &[(f64, f64)]) -> IntervalBox {
        IntervalBox::from_bounds(bounds)
    }

    #[test]
    fn largest_first_and_ties() {
        assert_eq!(
            choose_dimension_largest_first(&bx(&[(0.0, 3.0), (0.0, 1.0), (0.0, 2.0)])),
            0
        );
        assert_eq!(choose_dimension_largest_first(&bx(&[(0.0, 1.0), (5.0, 6.0)])), 0);
        assert_eq!(choose_dimension_largest_first(&bx(&[(0.0, 1.0), (5.0, 7.0)])), 1);
    }

    #[test]
    fn round_robin_cycles_with_depth() {
        let b = bx(&[(0.0, 1.0); 3]);
        assert_eq!(choose_dimension_round_robin(4, &b), 1);
        assert_eq!(choose_dimension_round_robin(0, &b), 0);
        assert_eq!(choose_dimension_round_robin(5, &b), 2);
        let degenerate = bx(&[(0.0, 1.0), (2.0, 2.0), (0.0, 1.0)]);
        assert_eq!(choose_dimension_round_robin(1, &degenerate), 2);
    }

    #[test]
    fn smear_rules() {
        let b = bx(&[(0.0, 1.0), (0.0, 2.0), (0.0, 0.5)]);
        // equal norms reduce to largest width
        assert_eq!(choose_dimension_smear_from_norms(&[3.0, 3.0, 3.0], &b), 1);
        assert_eq!(choose_dimension_smear_from_norms(&[10.0, 1.0, 1.0], &b), 0);
        // σ = (1, 2, 2): tie to the lowest index
        assert_eq!(choose_dimension_smear_from_norms(&[1.0, 1.0, 4.0], &b), 1);
        // all zero: largest first
        assert_eq!(choose_dimension_smear_from_norms(&[0.0, 0.0, 0.0], &b), 1);
        // zero-width dimensions are excluded
        let d = bx(&[(1.0, 1.0), (0.0, 0.1)]);
        assert_eq!(choose_dimension_smear_from_norms(&[100.0, 1.0], &d), 1);
    }

    #[test]
    fn constraint_filtering() {
        let c = vec![EndpointConstraint::equality(parse("y1").unwrap(), 1.0)];
        let b = bx(&[(0.0, 1.0)]);
        assert!(filter_constraints(&c, &[Interval::new(1.2, 1.4)], &b).is_none());
        assert_eq!(filter_constraints(&c, &[Interval::new(0.9, 1.4)], &b), Some(b.clone()));
        assert_eq!(filter_constraints(&[], &[], &b), Some(b));
    }

    #[test]
    fn midpoint_feasibility_needs_narrow_enclosure() {
        let c = vec![EndpointConstraint::equality(parse("y1").unwrap(), 1.0)];
        assert!(midpoint_feasible(&c, &[Interval::new(0.9999, 1.0001)], 1e-3));
        assert!(!midpoint_feasible(&c, &[Interval::new(0.9, 1.1)], 1e-3));
        assert!(!midpoint_feasible(&c, &[Interval::new(1.0001, 1.0002)], 1e-3));
        let ineq = vec![EndpointConstraint {
            expr: parse("y1").unwrap(),
            target: Interval::new(0.0, f64::INFINITY),
        }];
        assert!(midpoint_feasible(&ineq, &[Interval::new(0.5, 3.0)], 1e-3));
    }

    fn toy() -> Problem {
        let sys = OdeSystem::new(
            vec![parse("p1").unwrap()],
            IntervalBox::from_points(&[0.0]),
            1,
            (0.0, 1.0),
        )
        .unwrap();
        Problem::new(
            sys,
            CostSpec::terminal(parse("y1^2").unwrap()),
            vec![],
            bx(&[(-1.0, 1.0)]),
        )
        .unwrap()
    }

    #[test]
    fn toy_problem_finds_zero() {
        for h in [Heuristic::RoundRobin, Heuristic::LargestFirst, Heuristic::Smear] {
            let sol = solve(&toy(), &SolverConfig::default().with_heuristic(h).with_epsilon(1e-3)).unwrap();
            assert!(sol.psol[0].contains(0.0), "{h:?}: {}", sol.psol);
            assert_eq!(sol.csol.lo(), 0.0);
            assert!(sol.incumbent >= 0.0);
            assert_eq!(sol.status, Status::Completed);
            assert!(sol.psol[0].width() < 0.01);
        }
    }

    #[test]
    fn branch_limit_keeps_unexplored_boxes() {
        let cfg = SolverConfig {
            max_branches: Some(3),
            ..SolverConfig::default().with_epsilon(1e-6)
        };
        let sol = solve(&toy(), &cfg).unwrap();
        assert_eq!(sol.status, Status::BranchLimit);
        assert_eq!(sol.branch_count, 3);
        assert!(sol.psol[0].contains(0.0));
    }

    #[test]
    fn partition_is_complete() {
        let cfg = SolverConfig {
            record_partition: true,
            ..SolverConfig::default().with_epsilon(1e-2)
        };
        let prob = toy();
        let sol = solve(&prob, &cfg).unwrap();
        let covered: f64 = sol
            .accepted
            .iter()
            .map(|(b, _)| b.volume())
            .chain(sol.discarded.iter().map(IntervalBox::volume))
            .sum();
        assert!((covered - prob.pbox.volume()).abs() < 1e-12, "{covered}");
    }

    #[test]
    fn events_report_monotone_incumbent() {
        let mut values = Vec::new();
        let mut bisections = 0;
        let sol = solve_with_observer(&toy(), &SolverConfig::default().with_epsilon(1e-2), |e| match e {
            Event::IncumbentUpdated { value } => values.push(*value),
            Event::Bisected { .. } => bisections += 1,
            _ => {}
        })
        .unwrap();
        assert!(!values.is_empty());
        assert!(values.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(bisections, sol.branch_count);
        let line = serde_json::to_string(&Event::Bisected {
            dimension: 1,
            sigma: Some(vec![0.5, 1.0]),
        })
        .unwrap();
        assert_eq!(line, r#"{"event":"bisected","dimension":1,"sigma":[0.5,1.0]}"#);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(
            solve(&toy(), &SolverConfig::default().with_epsilon(0.0)),
            Err(SolveError::InvalidEpsilon(_))
        ));
        let sys = OdeSystem::new(
            vec![parse("p1").unwrap()],
            IntervalBox::from_points(&[0.0]),
            1,
            (0.0, 1.0),
        )
        .unwrap();
        let cost = CostSpec::terminal(parse("y1").unwrap());
        assert!(Problem::new(sys.clone(), cost.clone(), vec![], bx(&[(0.0, f64::INFINITY)])).is_err());
        assert!(Problem::new(sys.clone(), cost.clone(), vec![], bx(&[(0.0, 1.0), (0.0, 1.0)])).is_err());
        let bad = EndpointConstraint::equality(parse("y1*t").unwrap(), 0.0);
        assert!(Problem::new(sys, cost, vec![bad], bx(&[(0.0, 1.0)])).is_err());
    }
}
