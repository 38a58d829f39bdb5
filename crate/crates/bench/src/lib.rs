//! Shared fixtures for the criterion benches.

use std::sync::Arc;

use maxwell_feec::harness::build_operators;
use maxwell_feec::{BoundaryMode, ExactSolution, Example, Lf4, Lf4Options, OperatorSet};

/// Operators for Example 1 on the `n x n` unit-square mesh.
pub fn operators(r: usize, n: usize) -> Arc<OperatorSet> {
    let sol = ExactSolution::new(Example::Example1);
    build_operators(r, n, sol.params).expect("operator assembly")
}

/// An LF4 stepper past its bootstrap, ready for regular steps.
pub fn started_lf4(ops: Arc<OperatorSet>, dt: f64) -> Lf4 {
    let sol = ExactSolution::new(Example::Example1);
    let bc = BoundaryMode::Homogeneous;
    let [p, e, h] = bc.project(&ops, &sol, 0.0).expect("projection");
    let mut s = Lf4::build(ops, dt, bc, Lf4Options::default()).expect("factorization");
    s.init(p, e, h).expect("init");
    s.bootstrap().expect("bootstrap");
    s
}
