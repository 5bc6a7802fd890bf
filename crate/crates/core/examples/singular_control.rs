//! Constant-control approximation of a singular control problem: the solver
//! returns guaranteed enclosures of the optimal control and the optimal cost.
//!
//! Run with `cargo run --release --example singular_control [epsilon]`.

use gdopt::bnb::SolveError;
use gdopt::{problems, solve, Heuristic, SolverConfig};

fn main() -> Result<(), SolveError> {
    let epsilon = std::env::args().nth(1).map_or(1e-3, |s| s.parse().expect("epsilon"));
    let entry = problems::singular_control();
    println!("{}", entry.description);
    let cfg = SolverConfig {
        quadrature_subdivisions: entry.quadrature_subdivisions,
        ..SolverConfig::default()
            .with_heuristic(Heuristic::LargestFirst)
            .with_epsilon(epsilon)
    };
    let sol = solve(&entry.problem, &cfg)?;
    println!("optimal control in {}", sol.psol);
    println!("optimal cost in {} (best found {})", sol.csol, sol.incumbent);
    println!("{} branches, {} integrations", sol.branch_count, sol.stats.integrations);
    Ok(())
}
