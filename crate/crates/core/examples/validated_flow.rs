//! Validated integration: rigorous enclosures of every trajectory for a
//! parameter box, queried at points and windows, and written as CSV.
//!
//! Run with `cargo run --example validated_flow > flow.csv`.

use gdopt::{integrate, parse, IntegratorConfig, IntervalBox, OdeSystem};

fn main() {
    // Damped pendulum with uncertain stiffness.
    let sys = OdeSystem::new(
        vec![parse("y2").unwrap(), parse("-p1*sin(y1) - 0.1*y2").unwrap()],
        IntervalBox::from_points(&[1.0, 0.0]),
        1,
        (0.0, 2.0),
    )
    .unwrap();
    let cfg = IntegratorConfig::default().with_order(5);
    let flow = integrate(&sys, &IntervalBox::from_bounds(&[(1.9, 2.0)]), &cfg).unwrap();
    eprintln!("{} steps, final enclosure {}", flow.panels.len(), flow.final_state());
    eprintln!("R(1.0) = {}", flow.query_r(1.0).unwrap());
    eprintln!("enclosure over [0.5, 0.6] = {}", flow.enclose_window(0.5, 0.6).unwrap());
    flow.write_csv(std::io::stdout().lock()).unwrap();
}
