//! Two controls with the endpoint constraint `y1(tf) = 1`: boxes whose
//! endpoint enclosure misses the target are discarded as infeasible.
//!
//! Run with `cargo run --release --example endpoint_constraint`.

use gdopt::{problems, solve, Heuristic, SolverConfig};

fn main() {
    let entry = problems::endpoint_control();
    println!("{}", entry.description);
    for h in [Heuristic::LargestFirst, Heuristic::Smear] {
        let sol = solve(
            &entry.problem,
            &SolverConfig::default().with_heuristic(h).with_epsilon(1e-3),
        )
        .expect("solve");
        println!(
            "{}: solution {}, cost {}, {} branches, {} infeasible boxes",
            h.short_name(),
            sol.psol,
            sol.csol,
            sol.branch_count,
            sol.stats.infeasible
        );
    }
    println!(
        "known optimum {:?} with cost {}",
        entry.reference.optimizer, entry.reference.optimum
    );
}
