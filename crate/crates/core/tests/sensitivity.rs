//! Forward sensitivities against central finite differences of RK4 solutions.

mod common;

use gdopt::sensitivity::sensitivity_block;
use gdopt::{integrate, parse, IntegratorConfig, IntervalBox, OdeSystem};
use proptest::prelude::*;

fn system() -> OdeSystem {
    let rhs = ["p1*y1^2 + p2*y2 - 2*p3^2", "-3*p1*y1 - p1*p2*y2 + y1*y2*p3 + 1.0"];
    OdeSystem::new(
        rhs.iter().map(|s| parse(s).unwrap()).collect(),
        IntervalBox::from_points(&[0.0, 1.0]),
        3,
        (0.0, 1.0),
    )
    .unwrap()
}

fn final_state(sys: &OdeSystem, p: &[f64]) -> Vec<f64> {
    common::rk4(sys.rhs(), &[0.0, 1.0], p, (0.0, 1.0), 2000)
        .pop()
        .unwrap()
        .1
}

fn fd(sys: &OdeSystem, p: &[f64], j: usize) -> Vec<f64> {
    let h = 1e-5;
    let (mut a, mut b) = (p.to_vec(), p.to_vec());
    a[j] += h;
    b[j] -= h;
    let (ya, yb) = (final_state(sys, &a), final_state(sys, &b));
    ya.iter().zip(&yb).map(|(u, v)| (u - v) / (2.0 * h)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn point_sensitivities_match_finite_differences(
        p1 in 0.9f64..1.0, p2 in 0.9f64..1.0, p3 in 0.9f64..1.0,
    ) {
        let sys = system();
        let aug = sys.augment().unwrap();
        let p = [p1, p2, p3];
        let flow = integrate(&aug, &IntervalBox::from_points(&p), &IntegratorConfig::default()).unwrap();
        for j in 0..3 {
            let s = sensitivity_block(flow.final_state(), 2, j);
            for (i, d) in fd(&sys, &p, j).into_iter().enumerate() {
                prop_assert!((s[i].midpoint() - d).abs() < 1e-6, "p={p:?} i={i} j={j} s={:?} fd={d}", s[i]);
            }
        }
    }
}

#[test]
fn box_sensitivities_enclose_point_values() {
    let sys = system();
    let aug = sys.augment().unwrap();
    let pbox = IntervalBox::from_bounds(&[(0.95, 1.0); 3]);
    let flow = integrate(&aug, &pbox, &IntegratorConfig::default()).unwrap();
    for p in [
        [0.95, 0.95, 0.95],
        [1.0, 0.97, 0.96],
        [0.975, 0.975, 0.975],
        [1.0, 1.0, 1.0],
    ] {
        for j in 0..3 {
            let s = sensitivity_block(flow.final_state(), 2, j);
            for (i, d) in fd(&sys, &p, j).into_iter().enumerate() {
                assert!(
                    s[i].inflate(1e-6).contains(d),
                    "p={p:?} i={i} j={j} s={:?} fd={d}",
                    s[i]
                );
            }
        }
    }
}

#[test]
fn augmented_rhs_has_the_variational_form() {
    let sys = OdeSystem::new(
        vec![parse("p1*y1").unwrap()],
        IntervalBox::from_points(&[1.0]),
        1,
        (0.0, 1.0),
    )
    .unwrap();
    let aug = sys.augment().unwrap();
    assert_eq!(aug.dim(), 2);
    // d/dt s = p1 s + y1, checked by evaluation at a point
    let v = aug.sensitivity_rhs(0, 0).eval_f64(0.0, &[2.0, 3.0], &[5.0], 1);
    assert_eq!(v, 5.0 * 3.0 + 2.0);
}
