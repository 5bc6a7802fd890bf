//! Validated integration of interval initial value problems.
//!
//! Each step from `(t_j, [y_j])` works in two stages:
//!
//! 1. **A-priori enclosure.** A box `[ỹ_j]` with
//!    `[y_j] + [0, h] · f([t_j, t_j + h], [ỹ_j], [p]) ⊆ [ỹ_j]` is searched by
//!    Picard iteration with ε-inflation. The inclusion proves existence and
//!    uniqueness of every solution on the step and encloses all of them.
//!    When no such box is found the step is halved, down to `hmin`.
//! 2. **Tightening.** `[y_{j+1}]` is the interval Taylor polynomial of order
//!    `k - 1` around `(t_j, [y_j])` plus the Lagrange remainder
//!    `h^k · y_[k]([t_j, t_j + h], [ỹ_j])`, intersected with `[ỹ_j]`.
//!
//! Every panel keeps its Taylor coefficients and remainder, so enclosures at
//! any time inside the panel (`R(t)`) or over a sub-window are obtained by
//! re-evaluating the same expansion at a shorter step, without integrating
//! again. Boxes are propagated directly (no coordinate preconditioning), so
//! the wrapping effect grows with the horizon.

use std::io::Write;

use thiserror::Error;

use crate::interval::{Interval, IntervalBox};
use crate::sensitivity::Dynamics;
use crate::tape::Tape;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("no a-priori enclosure found at t = {t} with step {h} (minimum step reached)")]
    StepFailure { t: f64, h: f64 },
    #[error("step limit of {max_steps} reached at t = {t}")]
    MaxSteps { t: f64, max_steps: usize },
    #[error("tight enclosure does not meet the a-priori enclosure at t = {t}")]
    EmptyIntersection { t: f64 },
    #[error("parameter box has dimension {got}, system expects {expected}")]
    ParamDimension { expected: usize, got: usize },
    #[error("parameter box is empty")]
    EmptyParams,
    #[error("time {t} outside [{t0}, {tf}]")]
    OutOfRange { t: f64, t0: f64, tf: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
}

/// Integrator settings.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Taylor order `k` (2..=10).
    pub order: usize,
    /// Initial step `h0`; `None` uses `(tf - t0) / 50`.
    pub step: Option<f64>,
    /// Minimal step; `None` uses `h0 / 4096`.
    pub min_step: Option<f64>,
    /// Relative inflation `α` applied between Picard iterations.
    pub inflation: f64,
    /// Absolute inflation `δ`.
    pub inflation_abs: f64,
    pub max_picard_iterations: usize,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            order: 4,
            step: None,
            min_step: None,
            inflation: 0.1,
            inflation_abs: 1e-10,
            max_picard_iterations: 10,
            max_steps: 100_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = Some(h);
        self
    }

    fn resolve(&self, t0: f64, tf: f64) -> Result<(f64, f64), IntegrationError> {
        if !(2..=10).contains(&self.order) {
            return Err(IntegrationError::InvalidConfig(format!(
                "order {} not in 2..=10",
                self.order
            )));
        }
        let span = tf - t0;
        let h0 = self.step.unwrap_or(span / 50.0);
        let hmin = self.min_step.unwrap_or(h0 / 4096.0);
        if !(h0 > 0.0 && hmin > 0.0 && hmin <= h0 && h0 <= span) {
            return Err(IntegrationError::InvalidConfig(format!(
                "need 0 < hmin ({hmin}) <= h0 ({h0}) <= tf - t0 ({span})"
            )));
        }
        if !(self.inflation > 0.0) || self.inflation_abs < 0.0 || self.max_picard_iterations == 0 {
            return Err(IntegrationError::InvalidConfig(
                "inflation must be positive and at least one Picard iteration allowed".into(),
            ));
        }
        Ok((h0, hmin))
    }
}

/// One integration step `[t0, t1]`.
#[derive(Clone, Debug)]
pub struct Panel {
    pub t0: f64,
    pub t1: f64,
    /// A-priori enclosure of every solution over `[t0, t1]`.
    pub enclosure: IntervalBox,
    /// Taylor coefficients `y_[0..k]` at `(t0, [y(t0)])`.
    coeffs: Vec<IntervalBox>,
    /// `y_[k]` over `([t0, t1], enclosure)`.
    remainder: IntervalBox,
}

impl Panel {
    /// Enclosure of the flow for every `t0 + τ` with `τ ∈ tau ⊆ [0, t1 - t0]`.
    fn expand(&self, tau: Interval) -> IntervalBox {
        let dim = self.enclosure.dim();
        (0..dim)
            .map(|c| {
                let mut acc = self.remainder[c];
                for coeff in self.coeffs.iter().rev() {
                    acc = coeff[c] + tau * acc;
                }
                acc.intersect(&self.enclosure[c])
            })
            .collect()
    }

    /// Enclosure over the sub-window `[a, b]` of the panel.
    pub fn enclose_window(&self, a: f64, b: f64) -> IntervalBox {
        let lo = (Interval::point(a) - Interval::point(self.t0)).lo().max(0.0);
        let hi = (Interval::point(b) - Interval::point(self.t0)).hi();
        self.expand(Interval::new(lo, hi))
    }
}

/// The materialized enclosure functions of one validated integration.
#[derive(Clone, Debug)]
pub struct FlowEnclosure {
    /// Tight enclosures `(t_j, [y_j])`, starting at `t0` and ending at `tf`.
    pub grid: Vec<(f64, IntervalBox)>,
    /// A-priori enclosures, one per step, tiling `[t0, tf]`.
    pub panels: Vec<Panel>,
    /// The parameter box this flow was computed for.
    pub params: IntervalBox,
}

impl FlowEnclosure {
    pub fn t0(&self) -> f64 {
        self.grid[0].0
    }

    pub fn tf(&self) -> f64 {
        self.grid[self.grid.len() - 1].0
    }

    pub fn dim(&self) -> usize {
        self.grid[0].1.dim()
    }

    /// Tight enclosure at the final time.
    pub fn final_state(&self) -> &IntervalBox {
        &self.grid[self.grid.len() - 1].1
    }

    fn check_time(&self, t: f64) -> Result<(), IntegrationError> {
        if t < self.t0() || t > self.tf() || t.is_nan() {
            return Err(IntegrationError::OutOfRange {
                t,
                t0: self.t0(),
                tf: self.tf(),
            });
        }
        Ok(())
    }

    /// `R(t)`: enclosure of every trajectory at time `t`.
    pub fn query_r(&self, t: f64) -> Result<IntervalBox, IntegrationError> {
        self.check_time(t)?;
        let j = self.grid.partition_point(|(tj, _)| *tj < t);
        if j < self.grid.len() && self.grid[j].0 == t {
            return Ok(self.grid[j].1.clone());
        }
        // grid[j-1].0 < t < grid[j].0, inside panel j-1
        let panel = &self.panels[j - 1];
        Ok(panel.enclose_window(t, t))
    }

    /// `R̃([tlo, thi])`: hull of the a-priori enclosures of the panels covering the window.
    pub fn query_rtilde(&self, tlo: f64, thi: f64) -> Result<IntervalBox, IntegrationError> {
        self.check_time(tlo)?;
        self.check_time(thi)?;
        if tlo > thi {
            return Err(IntegrationError::OutOfRange {
                t: tlo,
                t0: self.t0(),
                tf: thi,
            });
        }
        let mut hull: Option<IntervalBox> = None;
        for p in &self.panels {
            let overlaps = if tlo == thi {
                p.t0 <= tlo && tlo <= p.t1
            } else {
                p.t0 < thi && p.t1 > tlo
            };
            if overlaps {
                hull = Some(match hull {
                    None => p.enclosure.clone(),
                    Some(h) => h.hull(&p.enclosure),
                });
                if tlo == thi {
                    break;
                }
            }
        }
        Ok(hull.expect("panels tile the time span"))
    }

    /// Tighter window enclosure: the panel expansions evaluated on each
    /// overlapped part of `[tlo, thi]`, then hulled.
    pub fn enclose_window(&self, tlo: f64, thi: f64) -> Result<IntervalBox, IntegrationError> {
        self.check_time(tlo)?;
        self.check_time(thi)?;
        let mut hull: Option<IntervalBox> = None;
        for p in self.panels.iter().filter(|p| p.t0 <= thi && p.t1 >= tlo) {
            let part = p.enclose_window(tlo.max(p.t0), thi.min(p.t1));
            hull = Some(match hull {
                None => part,
                Some(h) => h.hull(&part),
            });
        }
        Ok(hull.expect("panels tile the time span"))
    }

    /// Writes `t, y1_lo, y1_hi, ...` rows for the grid.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for i in 1..=self.dim() {
            write!(w, ",y{i}_lo,y{i}_hi")?;
        }
        writeln!(w)?;
        for (t, y) in &self.grid {
            write!(w, "{t:?}")?;
            for c in y.iter() {
                write!(w, ",{:?},{:?}", c.lo(), c.hi())?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// A system compiled for repeated integration over different parameter boxes.
#[derive(Clone, Debug)]
pub struct Integrator {
    tape: Tape,
    y0: IntervalBox,
    t0: f64,
    tf: f64,
    n_params: usize,
    h0: f64,
    hmin: f64,
    cfg: IntegratorConfig,
}

impl Integrator {
    pub fn new<D: Dynamics + ?Sized>(sys: &D, cfg: &IntegratorConfig) -> Result<Self, IntegrationError> {
        let (t0, tf) = sys.tspan();
        let (h0, hmin) = cfg.resolve(t0, tf)?;
        Ok(Integrator {
            tape: Tape::new(sys.rhs(), sys.base_dim()),
            y0: sys.initial_state().clone(),
            t0,
            tf,
            n_params: sys.n_params(),
            h0,
            hmin,
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.y0.dim()
    }

    /// A-priori enclosure for a step of at most `h` from `(tj, yj)`.
    ///
    /// Returns the enclosure and the accepted step end `t_{j+1}`.
    pub fn a_priori_enclosure(
        &self,
        yj: &IntervalBox,
        p: &IntervalBox,
        tj: f64,
        h: f64,
    ) -> Result<(IntervalBox, f64), IntegrationError> {
        let mut h = h;
        loop {
            let t1 = self.step_end(tj, h);
            if let Some(enc) = self.picard(yj, p, tj, t1) {
                return Ok((enc, t1));
            }
            h *= 0.5;
            if h < self.hmin {
                return Err(IntegrationError::StepFailure { t: tj, h });
            }
        }
    }

    fn step_end(&self, tj: f64, h: f64) -> f64 {
        let t1 = tj + h;
        // Snap to tf when the leftover would be a sliver.
        if t1 >= self.tf || self.tf - t1 < 1e-9 * (self.tf - self.t0) {
            self.tf
        } else {
            t1
        }
    }

    fn picard(&self, yj: &IntervalBox, p: &IntervalBox, tj: f64, t1: f64) -> Option<IntervalBox> {
        let window = Interval::new(tj, t1);
        let h = Interval::new(0.0, (Interval::point(t1) - Interval::point(tj)).hi());
        let apply = |enc: &IntervalBox| -> IntervalBox {
            let f = self.tape.eval(window, enc.components(), p.components());
            yj.iter().zip(f).map(|(y, fy)| *y + h * fy).collect()
        };
        let inflate = |b: &IntervalBox| -> IntervalBox {
            b.iter()
                .map(|c| c.inflate(self.cfg.inflation * c.width() + self.cfg.inflation_abs))
                .collect()
        };
        let mut enc = inflate(&apply(yj));
        for _ in 0..self.cfg.max_picard_iterations {
            let next = apply(&enc);
            if next.iter().any(|c| !c.is_bounded()) {
                return None;
            }
            if next.subset(&enc) {
                // Contraction holds; a few more applications only shrink it.
                let mut tight = next;
                for _ in 0..2 {
                    let again = apply(&tight).intersect(&tight);
                    if again.is_empty() {
                        break;
                    }
                    tight = again;
                }
                return Some(tight);
            }
            enc = inflate(&enc.hull(&next));
        }
        None
    }

    /// Tight enclosure at `t1` given a valid a-priori enclosure over `[tj, t1]`.
    pub fn tighten_step(
        &self,
        yj: &IntervalBox,
        p: &IntervalBox,
        tj: f64,
        t1: f64,
        enclosure: &IntervalBox,
    ) -> Result<Panel, IntegrationError> {
        let k = self.cfg.order;
        let point_coeffs =
            self.tape
                .ode_taylor_coefficients(Interval::point(tj), yj.components(), p.components(), k - 1);
        let window = Interval::new(tj, t1);
        let mut rem = self
            .tape
            .ode_taylor_coefficients(window, enclosure.components(), p.components(), k);
        let panel = Panel {
            t0: tj,
            t1,
            enclosure: enclosure.clone(),
            coeffs: point_coeffs.into_iter().map(IntervalBox::new).collect(),
            remainder: IntervalBox::new(rem.pop().expect("order k coefficient")),
        };
        Ok(panel)
    }

    /// Integrates over the full time span for the parameter box `p`.
    pub fn integrate(&self, p: &IntervalBox) -> Result<FlowEnclosure, IntegrationError> {
        if p.dim() != self.n_params {
            return Err(IntegrationError::ParamDimension {
                expected: self.n_params,
                got: p.dim(),
            });
        }
        if p.is_empty() {
            return Err(IntegrationError::EmptyParams);
        }
        let mut grid = vec![(self.t0, self.y0.clone())];
        let mut panels = Vec::new();
        let mut t = self.t0;
        let mut y = self.y0.clone();
        let mut h = self.h0;
        while t < self.tf {
            if panels.len() >= self.cfg.max_steps {
                return Err(IntegrationError::MaxSteps {
                    t,
                    max_steps: self.cfg.max_steps,
                });
            }
            let (enc, t1) = self.a_priori_enclosure(&y, p, t, h.min(self.tf - t))?;
            let panel = self.tighten_step(&y, p, t, t1, &enc)?;
            let h_exact = Interval::point(t1) - Interval::point(t);
            let next = panel.expand(h_exact.intersect(&Interval::new(0.0, h_exact.hi())));
            if next.is_empty() {
                return Err(IntegrationError::EmptyIntersection { t: t1 });
            }
            let accepted = t1 - t;
            // One re-expansion after a halving.
            h = (2.0 * accepted).min(self.h0);
            t = t1;
            y = next;
            grid.push((t, y.clone()));
            panels.push(panel);
        }
        Ok(FlowEnclosure {
            grid,
            panels,
            params: p.clone(),
        })
    }
}

/// Compiles `sys` and integrates it once.
pub fn integrate<D: Dynamics + ?Sized>(
    sys: &D,
    p: &IntervalBox,
    cfg: &IntegratorConfig,
) -> Result<FlowEnclosure, IntegrationError> {
    Integrator::new(sys, cfg)?.integrate(p)
}
