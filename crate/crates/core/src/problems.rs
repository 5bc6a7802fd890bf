//! Built-in problems: three benchmark case studies and a few synthetic
//! problems with known optima.

use crate::bnb::{EndpointConstraint, Problem};
use crate::expr::parse;
use crate::interval::{Interval, IntervalBox};
use crate::objective::CostSpec;
use crate::sensitivity::OdeSystem;

/// One reference results row at a given precision.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceRow {
    pub epsilon: f64,
    pub solution: Vec<(f64, f64)>,
    pub cost: f64,
    pub branches_largest_first: usize,
    pub branches_smear: usize,
}

/// Known answers for a catalog problem.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Reference {
    pub optimizer: Vec<f64>,
    pub optimum: f64,
    /// Reported solution box and cost upper bound, when known.
    pub reported_box: Option<Vec<(f64, f64)>>,
    pub reported_cost_bound: Option<f64>,
    pub reported_branches: Option<usize>,
    pub rows: Vec<ReferenceRow>,
}

#[derive(Clone, Debug)]
pub struct ProblemCatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub problem: Problem,
    pub reference: Reference,
    /// Quadrature windows per step that give usefully tight integral costs.
    pub quadrature_subdivisions: usize,
    pub notes: &'static str,
}

fn system(rhs: &[&str], y0: IntervalBox, m: usize, tspan: (f64, f64)) -> OdeSystem {
    let rhs = rhs.iter().map(|s| parse(s).expect("catalog expression")).collect();
    OdeSystem::new(rhs, y0, m, tspan).expect("catalog system")
}

fn expr(s: &str) -> crate::expr::Expr {
    parse(s).expect("catalog expression")
}

/// Luus' singular control problem: one control `u = p1`, integral cost.
pub fn singular_control() -> ProblemCatalogEntry {
    let sqrt5 = Interval::point(5.0).sqrt();
    let y0 = IntervalBox::new(vec![Interval::ZERO, Interval::point(-1.0), -sqrt5]);
    let sys = system(&["y2", "-y3*u1 + 16*t - 8", "u1"], y0, 1, (0.0, 1.0));
    let cost = CostSpec::integral(expr("y1^2 + y2^2 + 0.0005*(y2 + 16*t - 8 - 0.1*y3*u1^2)^2"));
    let problem = Problem::new(sys, cost, vec![], IntervalBox::from_bounds(&[(-4.0, 10.0)])).expect("catalog problem");
    ProblemCatalogEntry {
        name: "singular_control",
        description: "singular control, u in [-4,10], integral cost",
        problem,
        reference: Reference {
            optimizer: vec![4.07],
            optimum: 0.497,
            reported_box: Some(vec![(3.9003, 4.2165)]),
            reported_cost_bound: Some(0.5044),
            reported_branches: Some(10376),
            rows: vec![],
        },
        quadrature_subdivisions: 4,
        notes: "y0 = (0, -1, -sqrt 5) with sqrt 5 enclosed by a one-ulp interval",
    }
}

/// Three-parameter polynomial system with a terminal cost.
pub fn polynomial() -> ProblemCatalogEntry {
    let sys = system(
        &["p1*y1^2 + p2*y2 - 2*p3^2", "-3*p1*y1 - p1*p2*y2 + y1*y2*p3 + 1.0"],
        IntervalBox::from_points(&[0.0, 1.0]),
        3,
        (0.0, 1.0),
    );
    let cost = CostSpec::terminal(expr("(y1 + y2)^2"));
    let problem =
        Problem::new(sys, cost, vec![], IntervalBox::from_bounds(&[(0.95, 1.0); 3])).expect("catalog problem");
    let row = |epsilon, solution: [(f64, f64); 3], cost, lf, s| ReferenceRow {
        epsilon,
        solution: solution.to_vec(),
        cost,
        branches_largest_first: lf,
        branches_smear: s,
    };
    ProblemCatalogEntry {
        name: "polynomial",
        description: "polynomial ODE, p in [0.95,1]^3, terminal cost (y1+y2)^2",
        problem,
        reference: Reference {
            optimizer: vec![0.95, 1.0, 1.0],
            optimum: 0.71875,
            reported_box: None,
            reported_cost_bound: None,
            reported_branches: None,
            rows: vec![
                row(1e-2, [(0.95, 1.0), (0.95, 1.0), (0.969, 1.0)], 0.72805, 399, 357),
                row(1e-3, [(0.95, 0.977), (0.992, 1.0), (0.996, 1.0)], 0.71991, 4331, 3154),
                row(1e-4, [(0.95, 0.954), (0.998, 1.0), (0.998, 1.0)], 0.71889, 8999, 6460),
                row(1e-5, [(0.95, 0.951), (0.999, 1.0), (0.999, 1.0)], 0.71875, 16864, 12154),
            ],
        },
        quadrature_subdivisions: 1,
        notes: "the optimum value is the smallest reference cost",
    }
}

/// Two-control problem with the endpoint constraint `y1(tf) = 1`.
pub fn endpoint_control() -> ProblemCatalogEntry {
    let sys = system(
        &["u1*(1-t) + u2*t", "y1^2 + (u1*(1-t) + u2*t)^2"],
        IntervalBox::from_points(&[1.0, 0.0]),
        2,
        (0.0, 1.0),
    );
    let cost = CostSpec::terminal(expr("y2"));
    let constraint = EndpointConstraint::equality(expr("y1"), 1.0);
    let problem = Problem::new(sys, cost, vec![constraint], IntervalBox::from_bounds(&[(-1.0, 1.0); 2]))
        .expect("catalog problem");
    let row = |epsilon, solution: [(f64, f64); 2], lf, s| ReferenceRow {
        epsilon,
        solution: solution.to_vec(),
        cost: 0.924249,
        branches_largest_first: lf,
        branches_smear: s,
    };
    ProblemCatalogEntry {
        name: "endpoint",
        description: "two-control problem with endpoint constraint y1(tf) = 1",
        problem,
        reference: Reference {
            optimizer: vec![-0.4545, 0.4545],
            optimum: 0.924242,
            reported_box: Some(vec![(-0.462448, -0.446724), (0.446716, 0.46244)]),
            reported_cost_bound: Some(0.924249),
            reported_branches: None,
            rows: vec![
                row(1e-3, [(-0.511, -0.399), (0.398, 0.510)], 1243, 1250),
                row(1e-4, [(-0.469, -0.439), (0.439, 0.469)], 5362, 5369),
                row(1e-5, [(-0.462, -0.446), (0.446, 0.462)], 19283, 19290),
            ],
        },
        quadrature_subdivisions: 1,
        notes: "the optimizer is (-5/11, 5/11) with cost 61/66",
    }
}

/// `y' = p1·y, y(0) = 1`, minimize `(y(1) - 2)^2`: optimum 0 at `ln 2`.
pub fn linear_growth() -> ProblemCatalogEntry {
    let sys = system(&["p1*y1"], IntervalBox::from_points(&[1.0]), 1, (0.0, 1.0));
    let cost = CostSpec::terminal(expr("(y1 - 2)^2"));
    let problem = Problem::new(sys, cost, vec![], IntervalBox::from_bounds(&[(-1.0, 1.0)])).expect("catalog problem");
    ProblemCatalogEntry {
        name: "linear_growth",
        description: "y' = p y, minimize (y(1) - 2)^2",
        problem,
        reference: Reference {
            optimizer: vec![std::f64::consts::LN_2],
            optimum: 0.0,
            ..Reference::default()
        },
        quadrature_subdivisions: 1,
        notes: "y(1) = exp(p)",
    }
}

/// Double integrator with a quadratic terminal target: optimum 0 at (0.5, 0.25).
pub fn drift() -> ProblemCatalogEntry {
    let sys = system(&["p1", "p2 - y1"], IntervalBox::from_points(&[0.0, 0.0]), 2, (0.0, 1.0));
    let cost = CostSpec::terminal(expr("(y1 - 0.5)^2 + y2^2"));
    let problem =
        Problem::new(sys, cost, vec![], IntervalBox::from_bounds(&[(-1.0, 1.0); 2])).expect("catalog problem");
    ProblemCatalogEntry {
        name: "drift",
        description: "y1' = p1, y2' = p2 - y1, minimize (y1(1) - 0.5)^2 + y2(1)^2",
        problem,
        reference: Reference {
            optimizer: vec![0.5, 0.25],
            optimum: 0.0,
            ..Reference::default()
        },
        quadrature_subdivisions: 1,
        notes: "y1(1) = p1, y2(1) = p2 - p1/2",
    }
}

/// Tracking `y = t` with `y' = p1`: integral cost `(p1 - 1)^2 / 3`.
pub fn tracking() -> ProblemCatalogEntry {
    let sys = system(&["p1"], IntervalBox::from_points(&[0.0]), 1, (0.0, 1.0));
    let cost = CostSpec::integral(expr("(y1 - t)^2"));
    let problem = Problem::new(sys, cost, vec![], IntervalBox::from_bounds(&[(0.0, 2.0)])).expect("catalog problem");
    ProblemCatalogEntry {
        name: "tracking",
        description: "y' = p, minimize the integral of (y - t)^2",
        problem,
        reference: Reference {
            optimizer: vec![1.0],
            optimum: 0.0,
            ..Reference::default()
        },
        quadrature_subdivisions: 2,
        notes: "J(p) = (p - 1)^2 / 3",
    }
}

/// Every built-in problem.
pub fn catalog() -> Vec<ProblemCatalogEntry> {
    vec![
        singular_control(),
        polynomial(),
        endpoint_control(),
        linear_growth(),
        drift(),
        tracking(),
    ]
}

/// Looks a problem up by name; `endpoint_control` is accepted for `endpoint`.
pub fn by_name(name: &str) -> Option<ProblemCatalogEntry> {
    let name = if name == "endpoint_control" { "endpoint" } else { name };
    catalog().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    fn rhs_at(e: &ProblemCatalogEntry, t: f64, y: &[f64], p: &[f64]) -> Vec<f64> {
        e.problem
            .sys
            .rhs()
            .iter()
            .map(|f| f.eval_f64(t, y, p, y.len()))
            .collect()
    }

    #[test]
    fn formulas_match_hand_coded_numerics() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sc = singular_control();
        let pol = polynomial();
        let ep = endpoint_control();
        for _ in 0..50 {
            let t: f64 = rng.gen_range(0.0..1.0);
            let y: [f64; 3] = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            let u: f64 = rng.gen_range(-4.0..10.0);

            let f = rhs_at(&sc, t, &y, &[u]);
            let want = [y[1], -y[2] * u + 16.0 * t - 8.0, u];
            assert!(f.iter().zip(want).all(|(a, b)| close(*a, b)));
            let g = sc.problem.cost.g.as_ref().unwrap().eval_f64(t, &y, &[u], 3);
            let inner = y[1] + 16.0 * t - 8.0 - 0.1 * y[2] * u * u;
            assert!(close(g, y[0] * y[0] + y[1] * y[1] + 0.0005 * inner * inner));

            let p = [
                rng.gen_range(0.95..1.0),
                rng.gen_range(0.95..1.0),
                rng.gen_range(0.95..1.0),
            ];
            let f = rhs_at(&pol, t, &y[..2], &p);
            let want = [
                p[0] * y[0] * y[0] + p[1] * y[1] - 2.0 * p[2] * p[2],
                -3.0 * p[0] * y[0] - p[0] * p[1] * y[1] + y[0] * y[1] * p[2] + 1.0,
            ];
            assert!(f.iter().zip(want).all(|(a, b)| close(*a, b)));
            let phi = pol.problem.cost.phi.as_ref().unwrap().eval_f64(1.0, &y[..2], &p, 2);
            assert!(close(phi, (y[0] + y[1]).powi(2)));

            let (u1, u2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let f = rhs_at(&ep, t, &y[..2], &[u1, u2]);
            let v = u1 * (1.0 - t) + u2 * t;
            let want = [v, y[0] * y[0] + v * v];
            assert!(f.iter().zip(want).all(|(a, b)| close(*a, b)));
        }
    }

    #[test]
    fn initial_states_and_boxes() {
        let sc = singular_control();
        let y0 = sc.problem.sys.initial_state();
        assert!(y0[2].contains(-5f64.sqrt()));
        assert!(y0[2].width() > 0.0 && y0[2].width() < 1e-15);
        assert_eq!(sc.problem.pbox, IntervalBox::from_bounds(&[(-4.0, 10.0)]));
        assert_eq!(polynomial().problem.pbox.dim(), 3);
        let ep = endpoint_control();
        assert_eq!(ep.problem.constraints.len(), 1);
        assert_eq!(ep.problem.constraints[0].target, Interval::point(1.0));
    }

    #[test]
    fn lookup() {
        assert_eq!(catalog().len(), 6);
        assert!(by_name("polynomial").is_some());
        assert_eq!(by_name("endpoint_control").unwrap().name, "endpoint");
        assert!(by_name("nope").is_none());
        for e in catalog() {
            assert!(e.problem.pbox.contains_point(&e.reference.optimizer), "{}", e.name);
        }
    }
}
