use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffError {
    #[error("cannot differentiate through abs(...)")]
    Abs,
}

impl Expr {
    /// Exact symbolic partial derivative with respect to `wrt`.
    ///
    /// Other variables are treated as independent; the result is simplified
    /// by the smart constructors only.
    pub fn differentiate(&self, wrt: Var) -> Result<Expr, DiffError> {
        Ok(match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(v) => {
                if *v == wrt {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Unary(op, a) => {
                if !a.depends_on(wrt) {
                    return Ok(Expr::zero());
                }
                let da = a.differentiate(wrt)?;
                let a = (**a).clone();
                match op {
                    UnaryOp::Neg => Expr::neg(da),
                    UnaryOp::Sin => Expr::mul(Expr::cos(a), da),
                    UnaryOp::Cos => Expr::neg(Expr::mul(Expr::sin(a), da)),
                    UnaryOp::Exp => Expr::mul(Expr::exp(a), da),
                    UnaryOp::Sqrt => Expr::div(da, Expr::mul(Expr::constant(2.0), Expr::sqrt(a))),
                    UnaryOp::Abs => return Err(DiffError::Abs),
                }
            }
            Expr::Binary(op, a, b) => {
                let da = a.differentiate(wrt)?;
                let db = b.differentiate(wrt)?;
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => Expr::add(da, db),
                    BinaryOp::Sub => Expr::sub(da, db),
                    BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinaryOp::Div => {
                        // (da*b - a*db) / b^2, or da/b when b is constant in wrt
                        if db.is_zero() {
                            Expr::div(da, b)
                        } else {
                            Expr::div(Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)), Expr::powi(b, 2))
                        }
                    }
                }
            }
            Expr::PowInt(a, k) => {
                let da = a.differentiate(wrt)?;
                if da.is_zero() {
                    return Ok(Expr::zero());
                }
                let a = (**a).clone();
                Expr::mul(Expr::mul(Expr::constant(*k as f64), Expr::powi(a, k - 1)), da)
            }
        })
    }
}
