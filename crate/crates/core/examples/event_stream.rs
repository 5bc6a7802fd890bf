//! Observing the solver: every pop, prune, bisection and incumbent update is
//! reported as an event, serializable as JSON lines.
//!
//! Run with `cargo run --example event_stream`.

use std::collections::BTreeMap;

use gdopt::bnb::{solve_with_observer, Event};
use gdopt::{problems, Heuristic, SolverConfig};

fn main() {
    let entry = problems::linear_growth();
    let cfg = SolverConfig::default()
        .with_heuristic(Heuristic::Smear)
        .with_epsilon(1e-2);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut shown = 0;
    let sol = solve_with_observer(&entry.problem, &cfg, |event| {
        let line = serde_json::to_string(event).expect("serializable event");
        if shown < 8 {
            println!("{line}");
            shown += 1;
        }
        if let Event::IncumbentUpdated { value } = event {
            eprintln!("new incumbent {value}");
        }
        let kind: serde_json::Value = serde_json::from_str(&line).unwrap();
        *counts.entry(kind["event"].as_str().unwrap().to_string()).or_default() += 1;
    })
    .expect("solve");
    println!("event counts: {counts:?}");
    println!("solution {} cost {}", sol.psol, sol.csol);
}
