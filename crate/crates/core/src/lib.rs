//! Guaranteed global optimization of parametrized ODEs.
//!
//! The crate computes interval enclosures of the globally optimal parameters
//! and of the optimal cost of problems
//!
//! ```text
//! min_p  J(p) = phi(y(tf; p), p) + ∫ g(t, y(t; p), p) dt
//! s.t.   y' = f(t, y, p),  y(t0) = y0,  endpoint constraints c(y(tf), p) ∈ target
//! ```
//!
//! by running an interval Branch & Bound over the parameter box. Each node is
//! evaluated with a validated Taylor-series integrator, so every reported
//! enclosure is rigorous with respect to truncation and rounding errors. The
//! bisection dimension is picked by round robin, largest first, or the
//! sensitivity-based smear rule, which weighs each parameter width by the
//! infinity norm of the forward sensitivity `∂y/∂p_i`.
//!
//! Layers, bottom up:
//!
//! - [`interval`]: outward-rounded interval arithmetic and boxes.
//! - [`expr`]: symbolic expressions, parsing, differentiation.
//! - [`sensitivity`]: ODE systems and their forward sensitivity augmentation.
//! - [`ivp`]: validated integration producing a [`ivp::FlowEnclosure`].
//! - [`objective`]: interval evaluation of the cost from a flow.
//! - [`bnb`]: the Branch & Bound solver and bisection heuristics.
//! - [`problems`]: built-in case studies and synthetic test problems.
//! - [`problem_file`], [`report`], [`cli`]: file formats and the command line.

// `!(x > 0.0)` style checks deliberately reject NaN along with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bnb;
pub mod cli;
pub mod expr;
pub mod interval;
pub mod ivp;
pub mod objective;
pub mod problem_file;
pub mod problems;
pub mod report;
pub mod sensitivity;
pub mod tape;

pub use bnb::{solve, Heuristic, Problem, Solution, SolverConfig};
pub use expr::{parse, Expr, Var};
pub use interval::{Interval, IntervalBox};
pub use ivp::{integrate, FlowEnclosure, IntegratorConfig};
pub use objective::CostSpec;
pub use sensitivity::{AugmentedSystem, OdeSystem};
