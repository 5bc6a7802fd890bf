//! Round robin, largest first and smear bisection on the polynomial problem,
//! with the branch-count gain of smear over largest first.
//!
//! Run with `cargo run --release --example heuristic_comparison`.

use gdopt::report::relative_gain;
use gdopt::{problems, solve, Heuristic, SolverConfig};

fn main() {
    let entry = problems::polynomial();
    println!("{}", entry.description);
    for epsilon in [1e-2, 1e-3] {
        let mut branches = Vec::new();
        for h in [Heuristic::RoundRobin, Heuristic::LargestFirst, Heuristic::Smear] {
            let sol = solve(
                &entry.problem,
                &SolverConfig::default().with_heuristic(h).with_epsilon(epsilon),
            )
            .expect("solve");
            println!(
                "eps {epsilon:.0e} {:>2}: {:>5} branches, cost {} , solution {}",
                h.short_name(),
                sol.branch_count,
                sol.csol,
                sol.psol
            );
            branches.push(sol.branch_count);
        }
        println!(
            "eps {epsilon:.0e} smear gain over LF: {:.1}%",
            relative_gain(branches[1], branches[2])
        );
    }
}
