//! Symbolic expressions over time, states, parameters and sensitivities.
//!
//! Expressions are immutable trees. The smart constructors ([`Expr::add`],
//! [`Expr::mul`], ...) apply a conservative simplification: identities
//! (`x + 0`, `1 * x`, ...), zero absorption, and constant folding when the
//! folded value is exactly representable. Nothing else is rewritten.

mod diff;
mod parse;
mod render;

use std::fmt;

use crate::interval::Interval;

pub use diff::DiffError;
pub use parse::ParseError;

/// A variable an expression can be differentiated with respect to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Time,
    State(usize),
    Param(usize),
    /// Sensitivity of state `state` with respect to parameter `param`.
    Sens {
        state: usize,
        param: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, PartialEq)]
pub enum Expr {
    /// A real constant, stored as an enclosure. Thin unless it came from a
    /// decimal literal with no exact binary representation.
    Const(Interval),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    PowInt(Box<Expr>, u32),
}

/// Interval values of the variables an expression may reference.
///
/// `y` holds the `base_dim` states, optionally followed by sensitivity
/// states in parameter-major order: `y[base_dim * (1 + j) + i]` is
/// `∂y_i/∂p_j`.
#[derive(Clone, Copy, Debug)]
pub struct EvalContext<'a> {
    pub t: Interval,
    pub y: &'a [Interval],
    pub p: &'a [Interval],
    pub base_dim: usize,
}

impl<'a> EvalContext<'a> {
    pub fn new(t: Interval, y: &'a [Interval], p: &'a [Interval]) -> Self {
        EvalContext {
            t,
            y,
            p,
            base_dim: y.len(),
        }
    }

    pub fn with_base_dim(mut self, base_dim: usize) -> Self {
        self.base_dim = base_dim;
        self
    }

    fn var(&self, v: Var) -> Interval {
        match v {
            Var::Time => self.t,
            Var::State(i) => self.y[i],
            Var::Param(j) => self.p[j],
            Var::Sens { state, param } => self.y[sens_index(self.base_dim, state, param)],
        }
    }
}

/// Position of `∂y_state/∂p_param` in an augmented state vector.
pub fn sens_index(base_dim: usize, state: usize, param: usize) -> usize {
    base_dim * (1 + param) + state
}

impl Expr {
    pub fn constant(x: f64) -> Expr {
        Expr::Const(Interval::point(x))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn time() -> Expr {
        Expr::Var(Var::Time)
    }

    pub fn state(i: usize) -> Expr {
        Expr::Var(Var::State(i))
    }

    pub fn param(j: usize) -> Expr {
        Expr::Var(Var::Param(j))
    }

    pub fn sens(state: usize, param: usize) -> Expr {
        Expr::Var(Var::Sens { state, param })
    }

    fn as_point(&self) -> Option<f64> {
        match self {
            Expr::Const(c) if c.is_point() => Some(c.lo()),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_point() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_point() == Some(1.0)
    }

    // Folds only when interval evaluation of the constant operation is exact.
    fn fold(value: Interval) -> Option<Expr> {
        if value.is_point() && value.lo().is_finite() {
            Some(Expr::Const(value))
        } else {
            None
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        if let Expr::Const(c) = a {
            return Expr::Const(-c);
        }
        if let Expr::Unary(UnaryOp::Neg, inner) = a {
            return *inner;
        }
        Expr::Unary(UnaryOp::Neg, Box::new(a))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_point(), b.as_point()) {
            if let Some(e) = Expr::fold(Interval::point(x) + Interval::point(y)) {
                return e;
            }
        }
        Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        if let (Some(x), Some(y)) = (a.as_point(), b.as_point()) {
            if let Some(e) = Expr::fold(Interval::point(x) - Interval::point(y)) {
                return e;
            }
        }
        Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_point(), b.as_point()) {
            if let Some(e) = Expr::fold(Interval::point(x) * Interval::point(y)) {
                return e;
            }
        }
        Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_one() {
            return a;
        }
        if a.is_zero() && b.as_point().is_some_and(|y| y != 0.0) {
            return Expr::zero();
        }
        if let (Some(x), Some(y)) = (a.as_point(), b.as_point()) {
            if y != 0.0 {
                if let Some(e) = Expr::fold(Interval::point(x) / Interval::point(y)) {
                    return e;
                }
            }
        }
        Expr::Binary(BinaryOp::Div, Box::new(a), Box::new(b))
    }

    pub fn powi(a: Expr, k: u32) -> Expr {
        match k {
            0 => return Expr::one(),
            1 => return a,
            _ => {}
        }
        if let Some(x) = a.as_point() {
            if let Some(e) = Expr::fold(Interval::point(x).powi(k)) {
                return e;
            }
        }
        Expr::PowInt(Box::new(a), k)
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if op == UnaryOp::Neg {
            return Expr::neg(a);
        }
        if let Some(x) = a.as_point() {
            if let Some(e) = Expr::fold(apply_unary(op, Interval::point(x))) {
                return e;
            }
        }
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => Expr::add(a, b),
            BinaryOp::Sub => Expr::sub(a, b),
            BinaryOp::Mul => Expr::mul(a, b),
            BinaryOp::Div => Expr::div(a, b),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::unary(UnaryOp::Sin, a)
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::unary(UnaryOp::Cos, a)
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::unary(UnaryOp::Exp, a)
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::unary(UnaryOp::Sqrt, a)
    }

    pub fn abs(a: Expr) -> Expr {
        Expr::unary(UnaryOp::Abs, a)
    }

    /// Natural interval extension: every variable is replaced by its interval.
    pub fn eval_interval(&self, ctx: &EvalContext<'_>) -> Interval {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => ctx.var(*v),
            Expr::Unary(op, a) => apply_unary(*op, a.eval_interval(ctx)),
            Expr::Binary(op, a, b) => apply_binary(*op, a.eval_interval(ctx), b.eval_interval(ctx)),
            Expr::PowInt(a, k) => a.eval_interval(ctx).powi(*k),
        }
    }

    /// Evaluation at a point, still outward rounded so the true value is enclosed.
    pub fn eval_point(&self, t: f64, y: &[f64], p: &[f64]) -> Interval {
        let yi: Vec<Interval> = y.iter().map(|&v| Interval::point(v)).collect();
        let pi: Vec<Interval> = p.iter().map(|&v| Interval::point(v)).collect();
        self.eval_interval(&EvalContext::new(Interval::point(t), &yi, &pi))
    }

    /// Plain floating-point evaluation (no enclosure guarantee).
    pub fn eval_f64(&self, t: f64, y: &[f64], p: &[f64], base_dim: usize) -> f64 {
        match self {
            Expr::Const(c) => c.midpoint(),
            Expr::Var(v) => match *v {
                Var::Time => t,
                Var::State(i) => y[i],
                Var::Param(j) => p[j],
                Var::Sens { state, param } => y[sens_index(base_dim, state, param)],
            },
            Expr::Unary(op, a) => {
                let x = a.eval_f64(t, y, p, base_dim);
                match op {
                    UnaryOp::Neg => -x,
                    UnaryOp::Sin => x.sin(),
                    UnaryOp::Cos => x.cos(),
                    UnaryOp::Exp => x.exp(),
                    UnaryOp::Sqrt => x.sqrt(),
                    UnaryOp::Abs => x.abs(),
                }
            }
            Expr::Binary(op, a, b) => {
                let (x, z) = (a.eval_f64(t, y, p, base_dim), b.eval_f64(t, y, p, base_dim));
                match op {
                    BinaryOp::Add => x + z,
                    BinaryOp::Sub => x - z,
                    BinaryOp::Mul => x * z,
                    BinaryOp::Div => x / z,
                }
            }
            Expr::PowInt(a, k) => a.eval_f64(t, y, p, base_dim).powi(*k as i32),
        }
    }

    /// Calls `f` on every variable occurrence.
    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Unary(_, a) | Expr::PowInt(a, _) => a.visit_vars(f),
            Expr::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        let mut found = false;
        self.visit_vars(&mut |w| found |= w == v);
        found
    }

    /// Largest state/parameter index referenced, as `(states, params)` counts.
    pub fn max_indices(&self) -> (usize, usize) {
        let (mut n, mut m) = (0, 0);
        self.visit_vars(&mut |v| match v {
            Var::State(i) => n = n.max(i + 1),
            Var::Param(j) => m = m.max(j + 1),
            Var::Sens { state, param } => {
                n = n.max(state + 1);
                m = m.max(param + 1);
            }
            Var::Time => {}
        });
        (n, m)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) | Expr::PowInt(a, _) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Replaces variables according to `f`; `None` keeps the variable.
    pub fn substitute(&self, f: &impl Fn(Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => f(*v).unwrap_or_else(|| self.clone()),
            Expr::Unary(op, a) => Expr::unary(*op, a.substitute(f)),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.substitute(f), b.substitute(f)),
            Expr::PowInt(a, k) => Expr::powi(a.substitute(f), *k),
        }
    }
}

pub(crate) fn apply_unary(op: UnaryOp, x: Interval) -> Interval {
    match op {
        UnaryOp::Neg => -x,
        UnaryOp::Sin => x.sin(),
        UnaryOp::Cos => x.cos(),
        UnaryOp::Exp => x.exp(),
        UnaryOp::Sqrt => x.sqrt(),
        UnaryOp::Abs => x.abs(),
    }
}

pub(crate) fn apply_binary(op: BinaryOp, x: Interval, y: Interval) -> Interval {
    match op {
        BinaryOp::Add => x + y,
        BinaryOp::Sub => x - y,
        BinaryOp::Mul => x * y,
        BinaryOp::Div => x / y,
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse::parse(s)
    }
}

pub use parse::parse;
