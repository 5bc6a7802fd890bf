//! Flattened expression DAG with interval evaluation and Taylor-mode
//! coefficient propagation.
//!
//! A [`Tape`] compiles a list of output expressions once; structurally equal
//! subtrees are shared. Evaluating the tape over intervals is the natural
//! inclusion function of the outputs. For an ODE right-hand side `f`, the
//! tape also produces the normalized Taylor coefficients `y_[i] = y^(i)/i!`
//! of the solution through the standard recurrences for products, quotients
//! and elementary functions.

use std::collections::HashMap;

use crate::expr::{sens_index, BinaryOp, Expr, UnaryOp, Var};
use crate::interval::{Interval, IntervalBox};

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(Interval),
    Time,
    State(usize),
    Param(usize),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    PowInt(usize, u32),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Const(u64, u64),
    Time,
    State(usize),
    Param(usize),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    PowInt(usize, u32),
}

#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<usize>,
    /// Scratch slot per node (sin/cos companions and power chains).
    scratch_offset: Vec<usize>,
    scratch_len: usize,
    n_states: usize,
    n_params: usize,
}

struct Builder {
    ops: Vec<Op>,
    index: HashMap<Key, usize>,
    base_dim: usize,
}

impl Builder {
    fn push(&mut self, key: Key, op: Op) -> usize {
        *self.index.entry(key).or_insert_with(|| {
            self.ops.push(op);
            self.ops.len() - 1
        })
    }

    fn add(&mut self, e: &Expr) -> usize {
        match e {
            Expr::Const(c) => self.push(Key::Const(c.lo().to_bits(), c.hi().to_bits()), Op::Const(*c)),
            Expr::Var(v) => match *v {
                Var::Time => self.push(Key::Time, Op::Time),
                Var::State(i) => self.push(Key::State(i), Op::State(i)),
                Var::Param(j) => self.push(Key::Param(j), Op::Param(j)),
                Var::Sens { state, param } => {
                    let i = sens_index(self.base_dim, state, param);
                    self.push(Key::State(i), Op::State(i))
                }
            },
            Expr::Unary(op, a) => {
                let a = self.add(a);
                self.push(Key::Unary(*op, a), Op::Unary(*op, a))
            }
            Expr::Binary(op, a, b) => {
                let a = self.add(a);
                let b = self.add(b);
                self.push(Key::Binary(*op, a, b), Op::Binary(*op, a, b))
            }
            Expr::PowInt(a, k) => {
                let a = self.add(a);
                self.push(Key::PowInt(a, *k), Op::PowInt(a, *k))
            }
        }
    }
}

impl Tape {
    /// Compiles `outputs`. Sensitivity variables are resolved against
    /// `base_dim` (see [`crate::expr::EvalContext`]).
    pub fn new(outputs: &[Expr], base_dim: usize) -> Tape {
        let mut b = Builder {
            ops: Vec::new(),
            index: HashMap::new(),
            base_dim,
        };
        let outputs: Vec<usize> = outputs.iter().map(|e| b.add(e)).collect();
        let mut scratch_offset = Vec::with_capacity(b.ops.len());
        let mut scratch_len = 0;
        let (mut n_states, mut n_params) = (0, 0);
        for op in &b.ops {
            scratch_offset.push(scratch_len);
            match op {
                Op::Unary(UnaryOp::Sin | UnaryOp::Cos, _) => scratch_len += 1,
                Op::PowInt(_, k) if *k >= 2 => scratch_len += (*k as usize) - 2,
                Op::State(i) => n_states = n_states.max(i + 1),
                Op::Param(j) => n_params = n_params.max(j + 1),
                _ => {}
            }
        }
        Tape {
            ops: b.ops,
            outputs,
            scratch_offset,
            scratch_len,
            n_states,
            n_params,
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Number of state slots referenced (including sensitivity slots).
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Interval evaluation of all outputs.
    pub fn eval(&self, t: Interval, y: &[Interval], p: &[Interval]) -> Vec<Interval> {
        let mut vals = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Time => t,
                Op::State(i) => y[i],
                Op::Param(j) => p[j],
                Op::Unary(u, a) => crate::expr::apply_unary(u, vals[a]),
                Op::Binary(b, x, z) => crate::expr::apply_binary(b, vals[x], vals[z]),
                Op::PowInt(a, k) => Interval::powi(&vals[a], k),
            };
            vals.push(v);
        }
        self.outputs.iter().map(|&o| vals[o]).collect()
    }

    pub fn eval_box(&self, t: Interval, y: &IntervalBox, p: &IntervalBox) -> IntervalBox {
        IntervalBox::new(self.eval(t, y.components(), p.components()))
    }

    /// Normalized Taylor coefficients `y_[0..=order]` of the solution of
    /// `y' = outputs(t, y, p)` through `(t0, y0)`.
    ///
    /// The tape outputs must be the right-hand side, one per state. `t0` and
    /// `y0` may be intervals; the coefficients then enclose those of every
    /// solution through a point of `t0 × y0 × p`.
    pub fn ode_taylor_coefficients(
        &self,
        t0: Interval,
        y0: &[Interval],
        p: &[Interval],
        order: usize,
    ) -> Vec<Vec<Interval>> {
        let dim = self.outputs.len();
        debug_assert_eq!(dim, y0.len());
        let nodes = self.ops.len();
        let width = order + 1;
        let mut coef = vec![Interval::ZERO; nodes * width];
        let mut scratch = vec![Interval::ZERO; self.scratch_len * width];
        let mut ycoef: Vec<Vec<Interval>> = Vec::with_capacity(width);
        ycoef.push(y0.to_vec());

        for i in 0..order {
            for (n, op) in self.ops.iter().enumerate() {
                let v = self.coefficient(n, *op, i, t0, &ycoef, p, &coef, &mut scratch, width);
                coef[n * width + i] = v;
            }
            let denom = Interval::point((i + 1) as f64);
            let next: Vec<Interval> = self.outputs.iter().map(|&o| coef[o * width + i] / denom).collect();
            ycoef.push(next);
        }
        ycoef
    }

    #[allow(clippy::too_many_arguments)]
    fn coefficient(
        &self,
        n: usize,
        op: Op,
        i: usize,
        t0: Interval,
        ycoef: &[Vec<Interval>],
        p: &[Interval],
        coef: &[Interval],
        scratch: &mut [Interval],
        width: usize,
    ) -> Interval {
        let c = |node: usize, k: usize| coef[node * width + k];
        let inv = |k: usize| Interval::point(k as f64);
        match op {
            Op::Const(v) => {
                if i == 0 {
                    v
                } else {
                    Interval::ZERO
                }
            }
            Op::Time => match i {
                0 => t0,
                1 => Interval::ONE,
                _ => Interval::ZERO,
            },
            Op::Param(j) => {
                if i == 0 {
                    p[j]
                } else {
                    Interval::ZERO
                }
            }
            Op::State(s) => ycoef[i][s],
            Op::Unary(UnaryOp::Neg, a) => -c(a, i),
            Op::Binary(BinaryOp::Add, a, b) => c(a, i) + c(b, i),
            Op::Binary(BinaryOp::Sub, a, b) => c(a, i) - c(b, i),
            Op::Binary(BinaryOp::Mul, a, b) => {
                if i == 0 && a == b {
                    return c(a, 0).sqr();
                }
                (0..=i).fold(Interval::ZERO, |acc, j| acc + c(a, j) * c(b, i - j))
            }
            Op::Binary(BinaryOp::Div, a, b) => {
                let sum = (1..=i).fold(Interval::ZERO, |acc, j| acc + c(b, j) * c(n, i - j));
                (c(a, i) - sum) / c(b, 0)
            }
            Op::PowInt(a, k) => {
                if k == 0 {
                    return if i == 0 { Interval::ONE } else { Interval::ZERO };
                }
                if k == 1 {
                    return c(a, i);
                }
                // Chain u^2, ..., u^k; intermediate powers live in scratch.
                let base = self.scratch_offset[n];
                let mut prev: Option<usize> = None;
                let mut result = Interval::ZERO;
                for m in 2..=k {
                    let value = if i == 0 {
                        c(a, 0).powi(m)
                    } else {
                        (0..=i).fold(Interval::ZERO, |acc, j| {
                            let lhs = match prev {
                                None => c(a, j),
                                Some(slot) => scratch[slot * width + j],
                            };
                            acc + lhs * c(a, i - j)
                        })
                    };
                    if m == k {
                        result = value;
                    } else {
                        let slot = base + (m as usize - 2);
                        scratch[slot * width + i] = value;
                        prev = Some(slot);
                    }
                }
                result
            }
            Op::Unary(UnaryOp::Exp, a) => {
                if i == 0 {
                    return c(a, 0).exp();
                }
                let sum = (1..=i).fold(Interval::ZERO, |acc, j| acc + inv(j) * c(a, j) * c(n, i - j));
                sum / inv(i)
            }
            Op::Unary(f @ (UnaryOp::Sin | UnaryOp::Cos), a) => {
                // Node holds f, scratch holds its companion (cos for sin, sin for cos).
                let slot = self.scratch_offset[n];
                let comp = |k: usize, s: &[Interval]| s[slot * width + k];
                if i == 0 {
                    let (sv, cv) = (c(a, 0).sin(), c(a, 0).cos());
                    let (main, other) = if f == UnaryOp::Sin { (sv, cv) } else { (cv, sv) };
                    scratch[slot * width] = other;
                    return main;
                }
                let (mut s_sum, mut c_sum) = (Interval::ZERO, Interval::ZERO);
                for j in 1..=i {
                    let (sin_prev, cos_prev) = if f == UnaryOp::Sin {
                        (c(n, i - j), comp(i - j, scratch))
                    } else {
                        (comp(i - j, scratch), c(n, i - j))
                    };
                    let ju = inv(j) * c(a, j);
                    s_sum = s_sum + ju * cos_prev;
                    c_sum = c_sum + ju * sin_prev;
                }
                let s_i = s_sum / inv(i);
                let c_i = -(c_sum / inv(i));
                if f == UnaryOp::Sin {
                    scratch[slot * width + i] = c_i;
                    s_i
                } else {
                    scratch[slot * width + i] = s_i;
                    c_i
                }
            }
            Op::Unary(UnaryOp::Sqrt, a) => {
                if i == 0 {
                    return c(a, 0).sqrt();
                }
                let sum = (1..i).fold(Interval::ZERO, |acc, j| acc + c(n, j) * c(n, i - j));
                (c(a, i) - sum) / (Interval::point(2.0) * c(n, 0))
            }
            Op::Unary(UnaryOp::Abs, a) => {
                let u0 = c(a, 0);
                if i == 0 {
                    u0.abs()
                } else if u0.lo() > 0.0 {
                    c(a, i)
                } else if u0.hi() < 0.0 {
                    -c(a, i)
                } else {
                    Interval::ENTIRE
                }
            }
        }
    }
}
