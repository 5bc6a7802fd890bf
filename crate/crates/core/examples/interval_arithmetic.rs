//! Outward-rounded interval arithmetic and boxes.
//!
//! Run with `cargo run --example interval_arithmetic`.

use gdopt::{Interval, IntervalBox};

fn main() {
    let a = Interval::new(-2.0, 5.0);
    let b = Interval::new(-8.0, 12.0);
    println!("{a} + {b} = {}", a + b);
    println!("{a} * {b} = {}", a * b);
    println!("{a} / [2, 4] = {}", a / Interval::new(2.0, 4.0));
    println!("{a}^2 = {} (tighter than a*a = {})", a.sqr(), a * a);

    // 0.1 is not a float; `around` encloses the real number.
    let tenth = Interval::around(0.1);
    let sum = (0..10).fold(Interval::ZERO, |acc, _| acc + tenth);
    println!("ten times 0.1 = {sum}, contains 1: {}", sum.contains(1.0));

    println!("exp([0, 1]) = {}", Interval::new(0.0, 1.0).exp());
    println!("sin([0, 4]) = {}", Interval::new(0.0, 4.0).sin());

    let pbox = IntervalBox::from_bounds(&[(0.0, 1.0), (0.0, 0.25)]);
    let (left, right) = pbox.bisect(0);
    println!("bisecting {pbox} along dimension 0: {left} and {right}");
    println!("widest side {}, midpoint {:?}", pbox.width(), pbox.midpoint());
}
