use std::fmt;

use super::{BinaryOp, Expr, UnaryOp, Var};

// Binding strength: sums 1, products 2, unary minus 3, powers 4, atoms 5.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if c.midpoint() < 0.0 || c.midpoint().is_sign_negative() => 3,
        Expr::Const(_) | Expr::Var(_) => 5,
        Expr::Unary(UnaryOp::Neg, _) => 3,
        Expr::Unary(..) => 5,
        Expr::PowInt(..) => 4,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if precedence(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Time => write!(f, "t"),
            Var::State(i) => write!(f, "y{}", i + 1),
            Var::Param(j) => write!(f, "p{}", j + 1),
            Var::Sens { state, param } => write!(f, "s{}_{}", state + 1, param + 1),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{:?}", c.midpoint()),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                write!(f, "-")?;
                write_child(f, a, 3)
            }
            Expr::Unary(op, a) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Abs => "abs",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            Expr::PowInt(a, k) => {
                write_child(f, a, 5)?;
                write!(f, "^{k}")
            }
            Expr::Binary(op, a, b) => {
                let (sym, prec) = match op {
                    BinaryOp::Add => ("+", 1),
                    BinaryOp::Sub => ("-", 1),
                    BinaryOp::Mul => ("*", 2),
                    BinaryOp::Div => ("/", 2),
                };
                write_child(f, a, prec)?;
                write!(f, " {sym} ")?;
                write_child(f, b, prec + 1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;
    use proptest::prelude::*;

    #[test]
    fn renders_readably() {
        let e = parse("p1*y1^2 + p2*y2 - 2*p3^2").unwrap();
        assert_eq!(e.to_string(), "p1 * y1^2 + p2 * y2 - 2.0 * p3^2");
        assert_eq!(parse("y1 - (y2 - y3)").unwrap().to_string(), "y1 - (y2 - y3)");
        assert_eq!(parse("(-2)^2").unwrap().to_string(), "(-2.0)^2");
        assert_eq!(parse("-(y1+1)").unwrap().to_string(), "-(y1 + 1.0)");
    }

    fn arb_source() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            Just("t".to_string()),
            (1usize..4).prop_map(|i| format!("y{i}")),
            (1usize..4).prop_map(|i| format!("p{i}")),
            (0u32..200).prop_map(|k| format!("{}", k as f64 / 8.0)),
            Just("0.1".to_string()),
            Just("0.0005".to_string()),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), 0usize..4).prop_map(|(a, b, op)| {
                    let sym = ["+", "-", "*", "/"][op];
                    format!("({a}) {sym} ({b})")
                }),
                (inner.clone(), 0usize..5)
                    .prop_map(|(a, f)| format!("{}({a})", ["sin", "cos", "exp", "sqrt", "abs"][f])),
                (inner.clone(), 0u32..5).prop_map(|(a, k)| format!("({a})^{k}")),
                inner.prop_map(|a| format!("-({a})")),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(src in arb_source()) {
            let e = parse(&src).unwrap();
            let again = parse(&e.to_string()).unwrap();
            prop_assert_eq!(e, again);
        }
    }
}
