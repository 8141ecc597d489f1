//! Problems and closed forms shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::E;

use fuzzy_bvp::{Condition, FuzzyBvp, LinearOde, TimeGrid, TriangularFuzzyNumber};

pub fn tri(l: f64, m: f64, r: f64) -> TriangularFuzzyNumber {
    TriangularFuzzyNumber::new(l, m, r).unwrap()
}

/// `x″ − 3x′ + 2x = 4t − 6` on `[0, 1]`.
pub fn ode1() -> LinearOde {
    LinearOde::parse(&["-3", "2"], "4*t - 6").unwrap()
}

/// `x″ + 16x = 47 − 8t²` on `[0, 2]`.
pub fn ode2() -> LinearOde {
    LinearOde::parse(&["0", "16"], "47 - 8*t^2").unwrap()
}

pub fn example1_with_steps(steps: usize) -> FuzzyBvp {
    FuzzyBvp::new(
        ode1(),
        vec![
            Condition::new(0.0, tri(1.5, 2.0, 3.0)),
            Condition::new(1.0, tri(2.0, 3.0, 4.0)),
        ],
        TimeGrid::with_steps(0.0, 1.0, steps).unwrap(),
    )
    .unwrap()
}

pub fn example1() -> FuzzyBvp {
    example1_with_steps(1000)
}

pub fn example2() -> FuzzyBvp {
    FuzzyBvp::new(
        ode2(),
        vec![
            Condition::new(0.0, tri(2.0, 3.0, 3.5)),
            Condition::new(2.0, tri(0.5, 1.0, 1.5)),
        ],
        TimeGrid::with_steps(0.0, 2.0, 1000).unwrap(),
    )
    .unwrap()
}

fn d1() -> f64 {
    E * E - E
}

pub fn w1_ex1(t: f64) -> [f64; 2] {
    [
        ((2.0 + t).exp() - (1.0 + 2.0 * t).exp()) / d1(),
        ((2.0 * t).exp() - t.exp()) / d1(),
    ]
}

pub fn xcr_ex1(t: f64) -> f64 {
    let [a, b] = w1_ex1(t);
    2.0 * t + 2.0 * a + b
}

/// Ex1 crisp solution with boundary values `a` and `b`.
pub fn crisp_ex1(t: f64, a: f64, b: f64) -> f64 {
    let [w1, w2] = w1_ex1(t);
    // Particular part 2t contributes 0 at t = 0 and 2 at t = 1.
    2.0 * t + w1 * a + w2 * (b - 2.0)
}

pub fn w_ex2(t: f64) -> [f64; 2] {
    let s8 = 8f64.sin();
    [(8.0 - 4.0 * t).sin() / s8, (4.0 * t).sin() / s8]
}

pub fn xcr_ex2(t: f64) -> f64 {
    3.0 - 0.5 * t * t
}

/// `max |f(t) − g(t)|` over the nodes of `grid`.
pub fn sup_err(grid: &TimeGrid, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
    grid.nodes().map(|t| (f(t) - g(t)).abs()).fold(0.0, f64::max)
}
