//! Forward sensitivity equations and their validated enclosure.
//!
//! Run with `cargo run --example sensitivity`.

use gdopt::sensitivity::sensitivity_block;
use gdopt::{integrate, parse, IntegratorConfig, IntervalBox, OdeSystem};

fn main() {
    let sys = OdeSystem::new(
        vec![parse("y2").unwrap(), parse("-p1*y1 - p2*y2").unwrap()],
        IntervalBox::from_points(&[1.0, 0.0]),
        2,
        (0.0, 1.0),
    )
    .unwrap();
    let aug = sys.augment().unwrap();
    println!("augmented dimension {}", aug.dim());
    for j in 0..2 {
        for i in 0..2 {
            println!("d/dt s{}_{} = {}", i + 1, j + 1, aug.sensitivity_rhs(i, j));
        }
    }

    let pbox = IntervalBox::from_bounds(&[(2.0, 2.1), (0.1, 0.2)]);
    let flow = integrate(&aug, &pbox, &IntegratorConfig::default()).unwrap();
    for j in 0..2 {
        let s = sensitivity_block(flow.final_state(), 2, j);
        println!("dy(1)/dp{} over the box: {s}", j + 1);
    }
}
