//! Interval enclosures of a cost with terminal and integral parts.
//!
//! Run with `cargo run --example cost_evaluation`.

use gdopt::objective::CostEvaluator;
use gdopt::{integrate, parse, CostSpec, IntegratorConfig, IntervalBox, OdeSystem};

fn main() {
    let sys = OdeSystem::new(
        vec![parse("-y1 + p1").unwrap()],
        IntervalBox::from_points(&[0.0]),
        1,
        (0.0, 1.0),
    )
    .unwrap();
    let spec = CostSpec {
        phi: Some(parse("(y1 - 0.5)^2").unwrap()),
        g: Some(parse("0.1*p1^2").unwrap()),
    };
    for width in [0.5, 0.1, 0.01] {
        let pbox = IntervalBox::from_bounds(&[(1.0, 1.0 + width)]);
        let flow = integrate(&sys, &pbox, &IntegratorConfig::default()).unwrap();
        for subdivisions in [1, 4] {
            let eval = CostEvaluator::new(&spec, subdivisions);
            println!(
                "p in {pbox}, {subdivisions} window(s) per step: terminal {}, integral {}, total {}",
                eval.terminal(&flow, &pbox),
                eval.continuous(&flow, &pbox),
                eval.cost(&flow, &pbox)
            );
        }
    }
}
