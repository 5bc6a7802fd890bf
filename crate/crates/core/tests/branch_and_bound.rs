//! Solver-level properties: soundness against sampling oracles, determinism,
//! and the smear choice at the root against finite-difference sensitivities.

mod common;

use gdopt::bnb::{solve_with_observer, BoundForm, Event, Status};
use gdopt::problems;
use gdopt::{solve, Heuristic, SolverConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn smear_root_choice_matches_finite_difference_sensitivities() {
    let prob = problems::polynomial().problem;
    let mid: Vec<f64> = prob.pbox.iter().map(|x| x.midpoint()).collect();
    let y0 = [0.0, 1.0];
    let yf = |p: &[f64]| common::rk4(prob.sys.rhs(), &y0, p, (0.0, 1.0), 2000).pop().unwrap().1;
    let h = 1e-5;
    let sigma: Vec<f64> = (0..3)
        .map(|j| {
            let (mut a, mut b) = (mid.clone(), mid.clone());
            a[j] += h;
            b[j] -= h;
            let (ya, yb) = (yf(&a), yf(&b));
            let norm = ya
                .iter()
                .zip(&yb)
                .map(|(u, v)| ((u - v) / (2.0 * h)).abs())
                .fold(0.0, f64::max);
            norm * prob.pbox[j].width()
        })
        .collect();
    let expected = (0..3).max_by(|&a, &b| sigma[a].total_cmp(&sigma[b])).unwrap();
    assert_eq!(expected, 2, "oracle sigma {sigma:?}");

    let cfg = SolverConfig {
        max_branches: Some(1),
        ..SolverConfig::default()
            .with_heuristic(Heuristic::Smear)
            .with_epsilon(1e-3)
    };
    let mut first = None;
    solve_with_observer(&prob, &cfg, |e| {
        if let (None, Event::Bisected { dimension, .. }) = (&first, e) {
            first = Some(*dimension);
        }
    })
    .unwrap();
    assert_eq!(first, Some(expected));
}

#[test]
fn repeated_solves_are_identical() {
    let prob = problems::polynomial().problem;
    let cfg = SolverConfig::default()
        .with_heuristic(Heuristic::Smear)
        .with_epsilon(1e-2);
    let a = solve(&prob, &cfg).unwrap();
    let b = solve(&prob, &cfg).unwrap();
    assert_eq!(a.branch_count, b.branch_count);
    assert_eq!(a.psol, b.psol);
    assert_eq!(a.csol, b.csol);
}

#[test]
fn natural_bounds_are_sound_but_need_more_branches() {
    let prob = problems::linear_growth().problem;
    let base = SolverConfig::default().with_epsilon(1e-3);
    let natural = solve(
        &prob,
        &SolverConfig {
            bounds: BoundForm::Natural,
            ..base.clone()
        },
    )
    .unwrap();
    let mean = solve(&prob, &base).unwrap();
    assert_eq!(natural.status, Status::Completed);
    assert!(natural.csol.hi() >= mean.csol.lo() && mean.csol.hi() >= natural.csol.lo());
    assert!(natural.branch_count >= mean.branch_count);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn enclosures_contain_the_sampled_optimum(seed in 0u64..10_000, h in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prob = common::random_problem(&mut rng);
        prop_assume!(prob.n_params() == 1);
        let heuristic = [Heuristic::RoundRobin, Heuristic::LargestFirst, Heuristic::Smear][h];
        let cfg = SolverConfig {
            quadrature_subdivisions: 4,
            ..SolverConfig::default().with_heuristic(heuristic).with_epsilon(1e-3)
        };
        let sol = solve(&prob, &cfg).unwrap();
        let (p_star, j_star) = common::grid_minimize(|q| common::point_cost(&prob, q, 200), &prob.pbox, 101, 8);
        prop_assert!(sol.csol.lo() <= j_star + 1e-6, "csol {:?} J* {j_star}", sol.csol);
        prop_assert!(sol.incumbent >= sol.csol.lo());
        prop_assert!(j_star <= sol.csol.hi() + 1e-6, "csol {:?} J* {j_star}", sol.csol);
        prop_assert!(sol.psol[0].inflate(1e-3).contains(p_star[0]), "psol {:?} p* {p_star:?}", sol.psol);
    }
}
