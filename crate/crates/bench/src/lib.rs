//! Shared fixtures for the criterion benchmarks.

use borninfeld::field::{assemble_problem, BoundaryRule, BoxSpec, DiscreteProblem};
use borninfeld::{Charge, ChargeConfig};

/// Unit dipole on `[-2, 2]^3` with spacing `h`.
pub fn dipole_problem(h: f64, m: usize) -> DiscreteProblem {
    let cfg = ChargeConfig::new(
        3,
        vec![
            Charge::new(vec![-1.0, 0.0, 0.0], 1.0),
            Charge::new(vec![1.0, 0.0, 0.0], -1.0),
        ],
    )
    .expect("valid charges");
    assemble_problem(
        &cfg,
        &BoxSpec::cube(2.0, h),
        m,
        BoundaryRule::RadialSuperposition,
    )
    .expect("valid box")
}

/// A smooth nodal vector matching the problem's boundary data.
pub fn trial_field(p: &DiscreteProblem) -> Vec<f64> {
    (0..p.grid.len())
        .map(|i| {
            let n = p.grid.node(i);
            if p.grid.is_boundary(n) {
                p.boundary[i]
            } else {
                let x = p.grid.position(n);
                0.1 * (x[0] * 1.3).sin() * (x[1] * 0.7).cos() * (1.0 + 0.2 * x[2])
            }
        })
        .collect()
}
