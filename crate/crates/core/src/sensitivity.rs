//! ODE systems and their forward sensitivity augmentation.
//!
//! For `y' = f(t, y, p)` the sensitivity `s_j = ∂y/∂p_j` solves
//! `s_j' = (∂f/∂y) s_j + ∂f/∂p_j` with `s_j(t0) = ∂y0/∂p_j`. The augmented
//! system stacks the `n` states and the `m` sensitivity blocks in
//! parameter-major order: slot `n * (1 + j) + i` holds `∂y_i/∂p_j`.
//! Smoothness of `f` in `y` and `p` is the caller's responsibility.

use thiserror::Error;

use crate::expr::{sens_index, DiffError, Expr, Var};
use crate::interval::{Interval, IntervalBox};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("expected {expected} initial values, got {got}")]
    InitialDimension { expected: usize, got: usize },
    #[error("right-hand side {index} references state y{state} but the system has {n} states")]
    StateOutOfRange { index: usize, state: usize, n: usize },
    #[error("right-hand side {index} references parameter p{param} but the system has {m} parameters")]
    ParamOutOfRange { index: usize, param: usize, m: usize },
    #[error("right-hand side {index} references a sensitivity variable")]
    SensitivityInBase { index: usize },
    #[error("time span [{t0}, {tf}] must satisfy t0 < tf")]
    TimeSpan { t0: f64, tf: f64 },
    #[error("initial state is empty")]
    EmptyInitialState,
    #[error("differentiation failed: {0}")]
    Differentiation(#[from] DiffError),
}

/// The parametrized initial value problem `y' = f(t, y, p)`, `y(t0) ∈ y0`.
#[derive(Clone, Debug)]
pub struct OdeSystem {
    n: usize,
    m: usize,
    rhs: Vec<Expr>,
    y0: IntervalBox,
    t0: f64,
    tf: f64,
}

impl OdeSystem {
    pub fn new(rhs: Vec<Expr>, y0: IntervalBox, n_params: usize, tspan: (f64, f64)) -> Result<Self, SystemError> {
        let n = rhs.len();
        if y0.dim() != n {
            return Err(SystemError::InitialDimension {
                expected: n,
                got: y0.dim(),
            });
        }
        if y0.is_empty() {
            return Err(SystemError::EmptyInitialState);
        }
        let (t0, tf) = tspan;
        if !(t0 < tf) || !t0.is_finite() || !tf.is_finite() {
            return Err(SystemError::TimeSpan { t0, tf });
        }
        for (index, e) in rhs.iter().enumerate() {
            let mut err = None;
            e.visit_vars(&mut |v| match v {
                Var::State(state) if state >= n => {
                    err.get_or_insert(SystemError::StateOutOfRange {
                        index,
                        state: state + 1,
                        n,
                    });
                }
                Var::Param(param) if param >= n_params => {
                    err.get_or_insert(SystemError::ParamOutOfRange {
                        index,
                        param: param + 1,
                        m: n_params,
                    });
                }
                Var::Sens { .. } => {
                    err.get_or_insert(SystemError::SensitivityInBase { index });
                }
                _ => {}
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        Ok(OdeSystem {
            n,
            m: n_params,
            rhs,
            y0,
            t0,
            tf,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn n_params(&self) -> usize {
        self.m
    }

    pub fn rhs(&self) -> &[Expr] {
        &self.rhs
    }

    pub fn initial_state(&self) -> &IntervalBox {
        &self.y0
    }

    pub fn tspan(&self) -> (f64, f64) {
        (self.t0, self.tf)
    }

    /// Builds the sensitivity-augmented system.
    pub fn augment(&self) -> Result<AugmentedSystem, SystemError> {
        let (n, m) = (self.n, self.m);
        let mut rhs = self.rhs.clone();
        let mut jac = Vec::with_capacity(n);
        for f in &self.rhs {
            let row: Result<Vec<Expr>, DiffError> = (0..n).map(|k| f.differentiate(Var::State(k))).collect();
            jac.push(row?);
        }
        for j in 0..m {
            for (i, f) in self.rhs.iter().enumerate() {
                let mut acc = f.differentiate(Var::Param(j))?;
                for (k, d) in jac[i].iter().enumerate() {
                    acc = Expr::add(acc, Expr::mul(d.clone(), Expr::sens(k, j)));
                }
                rhs.push(acc);
            }
        }
        // y0 carries no parameter dependence, so s_j(t0) = 0.
        let mut y0 = self.y0.clone().into_inner();
        y0.extend(std::iter::repeat_n(Interval::ZERO, n * m));
        Ok(AugmentedSystem {
            base: self.clone(),
            rhs,
            y0: IntervalBox::new(y0),
        })
    }
}

/// States followed by forward sensitivities, integrated jointly.
#[derive(Clone, Debug)]
pub struct AugmentedSystem {
    base: OdeSystem,
    rhs: Vec<Expr>,
    y0: IntervalBox,
}

impl AugmentedSystem {
    pub fn base(&self) -> &OdeSystem {
        &self.base
    }

    /// All `n (1 + m)` right-hand sides.
    pub fn rhs(&self) -> &[Expr] {
        &self.rhs
    }

    /// Right-hand side of `∂y_state/∂p_param`, both indices 0-based.
    pub fn sensitivity_rhs(&self, state: usize, param: usize) -> &Expr {
        &self.rhs[sens_index(self.base.n, state, param)]
    }

    pub fn initial_state(&self) -> &IntervalBox {
        &self.y0
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

/// Extracts the `n` sensitivity components `∂y/∂p_param` from an augmented state box.
pub fn sensitivity_block(augmented: &IntervalBox, n: usize, param: usize) -> IntervalBox {
    let start = sens_index(n, 0, param);
    IntervalBox::new(augmented.components()[start..start + n].to_vec())
}

/// What the integrator needs from a system: right-hand sides, initial box,
/// time span, and the layout used to resolve sensitivity variables.
pub trait Dynamics {
    fn rhs(&self) -> &[Expr];
    fn initial_state(&self) -> &IntervalBox;
    fn tspan(&self) -> (f64, f64);
    fn base_dim(&self) -> usize;
    fn n_params(&self) -> usize;
}

impl Dynamics for OdeSystem {
    fn rhs(&self) -> &[Expr] {
        &self.rhs
    }
    fn initial_state(&self) -> &IntervalBox {
        &self.y0
    }
    fn tspan(&self) -> (f64, f64) {
        (self.t0, self.tf)
    }
    fn base_dim(&self) -> usize {
        self.n
    }
    fn n_params(&self) -> usize {
        self.m
    }
}

impl Dynamics for AugmentedSystem {
    fn rhs(&self) -> &[Expr] {
        &self.rhs
    }
    fn initial_state(&self) -> &IntervalBox {
        &self.y0
    }
    fn tspan(&self) -> (f64, f64) {
        self.base.tspan()
    }
    fn base_dim(&self) -> usize {
        self.base.n
    }
    fn n_params(&self) -> usize {
        self.base.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use rand::{Rng, SeedableRng};

    fn system(rhs: &[&str], y0: &[f64], m: usize) -> OdeSystem {
        OdeSystem::new(
            rhs.iter().map(|s| parse(s).unwrap()).collect(),
            IntervalBox::from_points(y0),
            m,
            (0.0, 1.0),
        )
        .unwrap()
    }

    /// Evaluates augmented rhs component `idx` against a closed form at random points.
    fn check(aug: &AugmentedSystem, idx: usize, reference: impl Fn(f64, &[f64], &[f64]) -> f64) {
        let n = aug.base().n_states();
        let m = aug.base().n_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let t: f64 = rng.gen_range(0.0..1.0);
            let y: Vec<f64> = (0..n * (1 + m)).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let got = aug.rhs()[idx].eval_f64(t, &y, &p, n);
            let want = reference(t, &y, &p);
            assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "{got} vs {want}");
        }
    }

    #[test]
    fn polynomial_sensitivities_match_hand_derived_forms() {
        let sys = system(
            &["p1*y1^2 + p2*y2 - 2*p3^2", "-3*p1*y1 - p1*p2*y2 + y1*y2*p3 + 1.0"],
            &[0.0, 1.0],
            3,
        );
        let aug = sys.augment().unwrap();
        assert_eq!(aug.dim(), 8);
        let (n, s1, s2) = (2, |j: usize| 2 + 2 * j, |j: usize| 3 + 2 * j);
        // with respect to p1
        check(&aug, sens_index(n, 0, 0), |_, y, p| {
            2.0 * p[0] * y[s1(0)] * y[0] + p[1] * y[s2(0)] + y[0] * y[0]
        });
        check(&aug, sens_index(n, 1, 0), |_, y, p| {
            -p[1] * y[1] + y[s1(0)] * (-3.0 * p[0] + p[2] * y[1]) + y[s2(0)] * (-p[0] * p[1] + p[2] * y[0]) - 3.0 * y[0]
        });
        // with respect to p2
        check(&aug, sens_index(n, 0, 1), |_, y, p| {
            2.0 * p[0] * y[s1(1)] * y[0] + p[1] * y[s2(1)] + y[1]
        });
        check(&aug, sens_index(n, 1, 1), |_, y, p| {
            -p[0] * y[1] + y[s1(1)] * (-3.0 * p[0] + p[2] * y[1]) + y[s2(1)] * (-p[0] * p[1] + p[2] * y[0])
        });
        // with respect to p3
        check(&aug, sens_index(n, 0, 2), |_, y, p| {
            2.0 * p[0] * y[s1(2)] * y[0] + p[1] * y[s2(2)] - 4.0 * p[2]
        });
        check(&aug, sens_index(n, 1, 2), |_, y, p| {
            y[s1(2)] * (-3.0 * p[0] + p[2] * y[1]) + y[s2(2)] * (-p[0] * p[1] + p[2] * y[0]) + y[0] * y[1]
        });
    }

    #[test]
    fn endpoint_control_sensitivities_match_hand_derived_forms() {
        let sys = system(&["u1*(1-t)+u2*t", "y1^2 + (u1*(1-t)+u2*t)^2"], &[1.0, 0.0], 2);
        let aug = sys.augment().unwrap();
        check(&aug, 2, |t, _, _| -t + 1.0);
        check(&aug, 3, |t, y, p| {
            2.0 * y[2] * y[0] + (-2.0 * t + 2.0) * (t * p[1] + p[0] * (-t + 1.0))
        });
        check(&aug, 4, |t, _, _| t);
        check(&aug, 5, |t, y, p| {
            2.0 * y[4] * y[0] + 2.0 * t * (t * p[1] + p[0] * (-t + 1.0))
        });
    }

    #[test]
    fn parameter_free_rhs_has_homogeneous_sensitivity() {
        let sys = system(&["y1"], &[1.0], 1);
        let aug = sys.augment().unwrap();
        assert_eq!(aug.rhs()[1], Expr::sens(0, 0));
        assert_eq!(aug.initial_state()[1], Interval::ZERO);
    }

    #[test]
    fn augmentation_keeps_base_rhs() {
        let sys = system(&["p1*y1^2 + sin(y2)", "y1*p2"], &[0.0, 1.0], 2);
        let aug = sys.augment().unwrap();
        assert_eq!(&aug.rhs()[..2], sys.rhs());
        assert_eq!(aug.base().rhs(), sys.rhs());
    }

    #[test]
    fn abs_in_rhs_is_reported() {
        let sys = system(&["abs(y1) - p1"], &[1.0], 1);
        assert!(matches!(
            sys.augment(),
            Err(SystemError::Differentiation(DiffError::Abs))
        ));
    }

    #[test]
    fn validation_errors() {
        let bad = OdeSystem::new(
            vec![parse("y2").unwrap()],
            IntervalBox::from_points(&[0.0]),
            0,
            (0.0, 1.0),
        );
        assert!(matches!(bad, Err(SystemError::StateOutOfRange { .. })));
        let bad = OdeSystem::new(
            vec![parse("p2").unwrap()],
            IntervalBox::from_points(&[0.0]),
            1,
            (0.0, 1.0),
        );
        assert!(matches!(bad, Err(SystemError::ParamOutOfRange { .. })));
        let bad = OdeSystem::new(
            vec![parse("y1").unwrap()],
            IntervalBox::from_points(&[0.0]),
            0,
            (1.0, 1.0),
        );
        assert!(matches!(bad, Err(SystemError::TimeSpan { .. })));
    }
}
