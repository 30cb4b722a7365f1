//! Finite-element solver for the order-m energy with point charges in a box
//! of `R^3`, and reports on the computed fields.

use crate::error::Result;

mod energy;
pub mod grid;
pub mod reports;
pub mod solver;

pub use grid::{
    assemble_problem, assemble_uncharged, BoundaryRule, BoxSpec, DiscreteProblem, Grid, GridCharge,
};
pub use reports::{
    compare_solutions, embedding_check, extremum_report, gradient_sup, gradient_sup_beyond,
    segment_report, ComparisonReport, ExtremumKind, GradientSup, SegmentReport,
};
pub use solver::{minimize_energy, minimize_energy_with, GridField, InitialGuess, SolverOptions};

/// Energy and gradient of the discrete functional, exposed for checks that
/// need the raw objective (finite differences, convexity).
pub fn energy_and_gradient(problem: &DiscreteProblem, u: &[f64]) -> Result<(f64, Vec<f64>)> {
    if u.len() != problem.grid.len() {
        return crate::error::invalid("nodal vector does not match the grid");
    }
    let mut grad = vec![0.0; u.len()];
    let value = energy::Energy::new(problem).value_and_gradient(u, &mut grad);
    Ok((value, grad))
}

/// Discrete energy of `u` (boundary entries are taken as given).
pub fn energy_value(problem: &DiscreteProblem, u: &[f64]) -> Result<f64> {
    if u.len() != problem.grid.len() {
        return crate::error::invalid("nodal vector does not match the grid");
    }
    Ok(energy::Energy::new(problem).value(u))
}

/// Smallest relative error, over the step sizes `steps`, between the
/// directional derivative `grad I(u) . d` and its centred finite difference.
pub fn directional_derivative_error(
    problem: &DiscreteProblem,
    u: &[f64],
    d: &[f64],
    steps: &[f64],
) -> Result<f64> {
    if d.len() != u.len() {
        return crate::error::invalid("direction does not match the grid");
    }
    let (_, grad) = energy_and_gradient(problem, u)?;
    let exact: f64 = grad.iter().zip(d).map(|(g, v)| g * v).sum();
    let energy = energy::Energy::new(problem);
    let mut shifted = vec![0.0; u.len()];
    let mut at = |s: f64| {
        for ((w, a), b) in shifted.iter_mut().zip(u).zip(d) {
            *w = a + s * b;
        }
        energy.value(&shifted)
    };
    let mut best = f64::INFINITY;
    for &eps in steps {
        let fd = (at(eps) - at(-eps)) / (2.0 * eps);
        best = best.min((fd - exact).abs() / exact.abs().max(f64::MIN_POSITIVE));
    }
    Ok(best)
}
