//! Parsing, evaluating and differentiating right-hand-side expressions.
//!
//! Run with `cargo run --example expressions`.

use gdopt::expr::EvalContext;
use gdopt::{parse, Interval, Var};

fn main() {
    let f = parse("p1*y1^2 + p2*y2 - 2*p3^2").expect("valid expression");
    println!("f = {f}");

    // Variables are 1-based in text and 0-based in `Var`.
    for j in 0..3 {
        let df = f.differentiate(Var::Param(j)).expect("differentiable");
        println!("df/dp{} = {df}", j + 1);
    }
    println!("df/dy1 = {}", f.differentiate(Var::State(0)).unwrap());

    let y = [Interval::new(0.0, 0.5), Interval::new(1.0, 1.1)];
    let p = [Interval::new(0.95, 1.0); 3];
    let range = f.eval_interval(&EvalContext::new(Interval::ZERO, &y, &p));
    println!("f over the box: {range}");
    println!("f at a point: {}", f.eval_f64(0.0, &[0.25, 1.05], &[1.0, 1.0, 1.0], 2));

    match parse("p1 * (y1 +") {
        Ok(_) => unreachable!(),
        Err(e) => println!("parse error: {e}"),
    }
}
