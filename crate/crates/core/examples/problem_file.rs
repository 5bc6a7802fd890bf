//! Defining a problem in a TOML file, solving it, and exporting a built-in
//! problem in the same format.
//!
//! Run with `cargo run --release --example problem_file`.

use gdopt::problem_file::ProblemFile;
use gdopt::report::RunReport;
use gdopt::{problems, solve, SolverConfig};

const HARVEST: &str = r#"
name = "harvest"
states = 1
params = 1
rhs = ["y1*(1 - y1) - p1*y1"]
initial_state = [0.5]
tspan = [0, 1]
parameter_box = [[0, 0.5]]

[cost]
phi = "-(p1*y1)"
g = "p1^2"
"#;

fn main() {
    let file = ProblemFile::from_toml(HARVEST).expect("valid problem file");
    let problem = file.to_problem().expect("consistent problem");
    let cfg = SolverConfig::default().with_epsilon(1e-3);
    let sol = solve(&problem, &cfg).expect("solve");
    println!("{}", RunReport::new("harvest", &cfg, &sol, 0.0).to_table());

    let exported = ProblemFile::from_catalog(&problems::polynomial()).to_toml();
    println!("built-in problem as a file:\n{exported}");
}
