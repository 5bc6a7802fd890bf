//! Validated integration against closed-form and RK4 references.

mod common;

use gdopt::ivp::Integrator;
use gdopt::{integrate, parse, IntegratorConfig, IntervalBox, OdeSystem};
use proptest::prelude::*;

// Rounding slack of the floating-point reference formula.
const TOL: f64 = 1e-12;

fn scalar_linear(a: f64, tf: f64) -> OdeSystem {
    OdeSystem::new(
        vec![parse(&format!("({a})*y1 + p1")).unwrap()],
        IntervalBox::from_points(&[1.0]),
        1,
        (0.0, tf),
    )
    .unwrap()
}

// y' = a y + p, y(0) = 1
fn exact(a: f64, p: f64, t: f64) -> f64 {
    if a == 0.0 {
        1.0 + p * t
    } else {
        (1.0 + p / a) * (a * t).exp() - p / a
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encloses_closed_form_at_grid_and_between(
        a in -2.0f64..2.0,
        plo in -1.0f64..1.0,
        w in 0.0f64..0.5,
        frac in 0.0f64..1.0,
        tq in 0.0f64..1.0,
    ) {
        let sys = scalar_linear(a, 1.0);
        let pbox = IntervalBox::from_bounds(&[(plo, plo + w)]);
        let flow = integrate(&sys, &pbox, &IntegratorConfig::default()).unwrap();
        let p = plo + frac * w;
        for (t, y) in &flow.grid {
            prop_assert!(y[0].inflate(TOL).contains(exact(a, p, *t)), "t={t} y={:?}", y[0]);
        }
        let r = flow.query_r(tq).unwrap();
        prop_assert!(r[0].inflate(TOL).contains(exact(a, p, tq)));
        let rt = flow.query_rtilde(0.0, tq).unwrap();
        prop_assert!(rt[0].inflate(TOL).contains(exact(a, p, 0.5 * tq)));
    }

    #[test]
    fn sub_box_solutions_stay_inside_parent_enclosure(
        a in -1.5f64..1.5,
        plo in -1.0f64..1.0,
        w in 0.01f64..0.5,
        f1 in 0.0f64..1.0,
        f2 in 0.0f64..1.0,
    ) {
        let sys = scalar_linear(a, 1.0);
        let parent = integrate(&sys, &IntervalBox::from_bounds(&[(plo, plo + w)]), &IntegratorConfig::default()).unwrap();
        let (s, e) = (f1.min(f2), f1.max(f2));
        let child = integrate(&sys, &IntervalBox::from_bounds(&[(plo + s * w, plo + e * w)]), &IntegratorConfig::default()).unwrap();
        let p = plo + 0.5 * (s + e) * w;
        let truth = exact(a, p, 1.0);
        prop_assert!(parent.final_state()[0].inflate(TOL).contains(truth));
        prop_assert!(child.final_state()[0].inflate(TOL).contains(truth));
    }
}

#[test]
fn nonlinear_system_contains_rk4_reference() {
    let rhs = vec![parse("y2").unwrap(), parse("-p1*sin(y1) - 0.1*y2").unwrap()];
    let sys = OdeSystem::new(rhs.clone(), IntervalBox::from_points(&[1.0, 0.0]), 1, (0.0, 2.0)).unwrap();
    let flow = integrate(&sys, &IntervalBox::from_points(&[2.0]), &IntegratorConfig::default()).unwrap();
    let traj = common::rk4(&rhs, &[1.0, 0.0], &[2.0], (0.0, 2.0), 4000);
    for (t, y) in traj.iter().step_by(400) {
        let r = flow.query_r(*t).unwrap();
        for i in 0..2 {
            assert!(r[i].inflate(1e-9).contains(y[i]), "t={t} i={i} r={:?} y={}", r[i], y[i]);
        }
    }
}

#[test]
fn point_parameters_give_tight_enclosures() {
    let sys = scalar_linear(-0.5, 1.0);
    let flow = integrate(&sys, &IntervalBox::from_points(&[0.3]), &IntegratorConfig::default()).unwrap();
    assert!(flow.final_state()[0].width() < 1e-8);
}

#[test]
fn higher_order_is_not_wider_on_a_smooth_problem() {
    let sys = scalar_linear(0.7, 1.0);
    let p = IntervalBox::from_points(&[0.2]);
    let lo = Integrator::new(&sys, &IntegratorConfig::default().with_order(2))
        .unwrap()
        .integrate(&p)
        .unwrap();
    let hi = Integrator::new(&sys, &IntegratorConfig::default().with_order(6))
        .unwrap()
        .integrate(&p)
        .unwrap();
    assert!(hi.final_state()[0].width() <= lo.final_state()[0].width());
}

#[test]
fn csv_has_one_row_per_grid_point() {
    let sys = scalar_linear(0.1, 1.0);
    let flow = integrate(&sys, &IntervalBox::from_points(&[0.0]), &IntegratorConfig::default()).unwrap();
    let mut buf = Vec::new();
    flow.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("t,y1_lo,y1_hi"));
    assert_eq!(text.lines().count(), flow.grid.len() + 1);
}
