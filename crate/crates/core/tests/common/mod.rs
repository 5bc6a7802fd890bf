//! Shared oracles for the integration tests.
#![allow(dead_code)]

use gdopt::bnb::Problem;
use gdopt::expr::Expr;
use gdopt::{parse, CostSpec, IntervalBox, OdeSystem};
use rand::Rng;

/// Classical RK4 with `steps` fixed steps; returns the trajectory samples.
pub fn rk4(rhs: &[Expr], y0: &[f64], p: &[f64], (t0, tf): (f64, f64), steps: usize) -> Vec<(f64, Vec<f64>)> {
    let n = y0.len();
    let f = |t: f64, y: &[f64]| -> Vec<f64> { rhs.iter().map(|e| e.eval_f64(t, y, p, n)).collect() };
    let h = (tf - t0) / steps as f64;
    let mut y = y0.to_vec();
    let mut out = vec![(t0, y.clone())];
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let k1 = f(t, &y);
        let y2: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k1[i]).collect();
        let k2 = f(t + 0.5 * h, &y2);
        let y3: Vec<f64> = (0..n).map(|i| y[i] + 0.5 * h * k2[i]).collect();
        let k3 = f(t + 0.5 * h, &y3);
        let y4: Vec<f64> = (0..n).map(|i| y[i] + h * k3[i]).collect();
        let k4 = f(t + h, &y4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push((t0 + (k + 1) as f64 * h, y.clone()));
    }
    out
}

/// Point cost of a problem by RK4 and trapezoidal quadrature.
pub fn point_cost(prob: &Problem, p: &[f64], steps: usize) -> f64 {
    let y0: Vec<f64> = prob.sys.initial_state().iter().map(|x| x.midpoint()).collect();
    let traj = rk4(prob.sys.rhs(), &y0, p, prob.sys.tspan(), steps);
    let n = y0.len();
    let cost: &CostSpec = &prob.cost;
    let mut j = 0.0;
    if let Some(phi) = &cost.phi {
        let (tf, yf) = traj.last().unwrap();
        j += phi.eval_f64(*tf, yf, p, n);
    }
    if let Some(g) = &cost.g {
        for w in traj.windows(2) {
            let (ta, ya) = (&w[0].0, &w[0].1);
            let (tb, yb) = (&w[1].0, &w[1].1);
            j += 0.5 * (tb - ta) * (g.eval_f64(*ta, ya, p, n) + g.eval_f64(*tb, yb, p, n));
        }
    }
    j
}

/// Dense-grid search refined by repeated zooming around the best point.
pub fn grid_minimize(f: impl Fn(&[f64]) -> f64, pbox: &IntervalBox, points: usize, rounds: usize) -> (Vec<f64>, f64) {
    let m = pbox.dim();
    let mut lo: Vec<f64> = pbox.iter().map(|x| x.lo()).collect();
    let mut hi: Vec<f64> = pbox.iter().map(|x| x.hi()).collect();
    let mut best = (lo.clone(), f64::INFINITY);
    for _ in 0..rounds {
        let total = points.pow(m as u32);
        for idx in 0..total {
            let mut rem = idx;
            let q: Vec<f64> = (0..m)
                .map(|d| {
                    let k = rem % points;
                    rem /= points;
                    lo[d] + (hi[d] - lo[d]) * k as f64 / (points - 1) as f64
                })
                .collect();
            let v = f(&q);
            if v < best.1 {
                best = (q, v);
            }
        }
        for d in 0..m {
            let step = 2.0 * (hi[d] - lo[d]) / (points - 1) as f64;
            let (a, b) = (pbox[d].lo(), pbox[d].hi());
            lo[d] = (best.0[d] - step).max(a);
            hi[d] = (best.0[d] + step).min(b);
        }
    }
    best
}

fn coef(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    // two decimals keep the rendered expressions readable
    (rng.gen_range(lo..hi) * 100.0).round() / 100.0
}

/// Small random problems with a unique minimizer: linear or mildly
/// quadratic dynamics, monotone in the parameters, with quadratic costs.
pub fn random_problem(rng: &mut impl Rng) -> Problem {
    let family = rng.gen_range(0..5);
    let (a, b, r) = (coef(rng, -1.0, 1.0), coef(rng, 0.5, 1.5), coef(rng, -0.8, 0.8));
    let s = |v: f64| format!("({v})");
    let (rhs, y0, m, phi, g): (Vec<String>, Vec<f64>, usize, Option<String>, Option<String>) = match family {
        0 => (
            vec![format!("{}*y1 + {}*p1", s(a), s(b))],
            vec![0.0],
            1,
            Some(format!("(y1 - {})^2", s(r))),
            None,
        ),
        1 => (
            vec![format!("{}*y1 + {}*y1^2 + p1", s(a), s(coef(rng, -0.3, 0.3)))],
            vec![0.0],
            1,
            Some(format!("(y1 - {})^2", s(r))),
            None,
        ),
        2 => {
            let c = coef(rng, -1.0, 1.0);
            (
                vec![
                    format!("{}*y1 + p1", s(a)),
                    format!("{}*y1 + {}*y2 + {}*p2", s(c), s(coef(rng, -1.0, 1.0)), s(b)),
                ],
                vec![0.0, 0.0],
                2,
                Some(format!("(y1 - {})^2 + (y2 - {})^2", s(r), s(coef(rng, -0.8, 0.8)))),
                None,
            )
        }
        3 => (
            vec![format!("{}*y1 + {}*p1", s(a), s(b))],
            vec![0.0],
            1,
            None,
            Some(format!("(y1 - {}*t)^2", s(r))),
        ),
        _ => (
            vec![format!("{}*y1 + p1", s(a)), format!("p2 - y1")],
            vec![0.0, 0.0],
            2,
            Some(format!("(y2 - {})^2", s(r))),
            Some("0.5*(y1 - 0.25)^2".to_string()),
        ),
    };
    let sys = OdeSystem::new(
        rhs.iter().map(|e| parse(e).unwrap()).collect(),
        IntervalBox::from_points(&y0),
        m,
        (0.0, 1.0),
    )
    .unwrap();
    let cost = CostSpec {
        phi: phi.map(|e| parse(&e).unwrap()),
        g: g.map(|e| parse(&e).unwrap()),
    };
    Problem::new(sys, cost, vec![], IntervalBox::from_bounds(&vec![(-1.0, 1.0); m])).unwrap()
}
