//! Limited-memory BFGS for the discrete energy, with a derivative-based line
//! search that stays reliable once energy differences reach round-off.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::profile::log_grid;
use crate::radial::approx_radial_profile;

use super::energy::Energy;
use super::grid::{DiscreteProblem, GRID_DIM};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Boundary data with zero interior.
    ZeroExtension,
    /// Linear superposition of the order-m single-charge approximants.
    RadialSuperposition,
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Bound on `max_i |dI/du_i|` over interior nodes.
    pub tol: f64,
    pub max_iter: usize,
    pub memory: usize,
    pub init: InitialGuess,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            memory: 12,
            init: InitialGuess::RadialSuperposition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridField {
    pub problem: DiscreteProblem,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub energy: f64,
    /// Stationarity residual `max_i |dI/du_i|` over interior nodes.
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub tol: f64,
    /// Energy of the zero-extension of the boundary data.
    pub zero_extension_energy: f64,
}

impl GridField {
    pub fn value_at_node(&self, n: [usize; 3]) -> f64 {
        self.values[self.problem.grid.index(n)]
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete Dirichlet integral `||grad u||_2^2`.
    pub fn dirichlet(&self) -> f64 {
        Energy::new(&self.problem).dirichlet(&self.values)
    }
}

/// Minimizes the discrete energy of `problem` with default options apart from
/// `tol` and `max_iter`. A run that hits `max_iter` returns a field with
/// `converged = false`.
pub fn minimize_energy(problem: &DiscreteProblem, tol: f64, max_iter: usize) -> Result<GridField> {
    minimize_energy_with(
        problem,
        &SolverOptions {
            tol,
            max_iter,
            ..SolverOptions::default()
        },
    )
}

pub fn minimize_energy_with(problem: &DiscreteProblem, opts: &SolverOptions) -> Result<GridField> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return invalid(format!("tolerance must be positive, got {}", opts.tol));
    }
    if opts.memory == 0 {
        return invalid("L-BFGS memory must be at least 1");
    }
    let energy = Energy::new(problem);
    let n = problem.grid.len();

    let mut zero_ext = vec![0.0; n];
    energy.impose_boundary(&mut zero_ext);
    let zero_extension_energy = energy.value(&zero_ext);

    let mut x = match &opts.init {
        InitialGuess::ZeroExtension => zero_ext,
        InitialGuess::RadialSuperposition => superposition_guess(problem)?,
        InitialGuess::Values(v) => {
            if v.len() != n {
                return invalid("initial guess does not match the grid");
            }
            v.clone()
        }
    };
    energy.impose_boundary(&mut x);

    let mut g = vec![0.0; n];
    let mut f = energy.value_and_gradient(&x, &mut g);
    let mut evaluations = 1;
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;
    let mut grad_norm = max_abs(&g);

    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut stalls = 0;
    while grad_norm > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let mut d = two_loop(&g, &history);
        let mut slope = dot(&g, &d);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let first = if history.is_empty() {
            1.0 / norm2(&g).max(f64::MIN_POSITIVE)
        } else {
            1.0
        };
        let search = line_search(&energy, &x, f, slope, &d, first, &mut x_new, &mut g_new);
        evaluations += search.evaluations;
        let Some((step, f_new)) = search.accepted else {
            // no acceptable step along d; retry from steepest descent
            stalls += 1;
            history.clear();
            if stalls > 2 {
                break;
            }
            continue;
        };
        stalls = 0;

        let s: Vec<f64> = d.iter().map(|v| step * v).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 0.0 {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        f = f_new;
        grad_norm = max_abs(&g);
    }

    let f = energy.value(&x);
    Ok(GridField {
        problem: problem.clone(),
        values: x,
        energy: f,
        grad_norm,
        iterations,
        evaluations,
        converged: grad_norm <= opts.tol,
        tol: opts.tol,
        zero_extension_energy,
    })
}

struct SearchOutcome {
    accepted: Option<(f64, f64)>,
    evaluations: usize,
}

/// Finds a step satisfying the Wolfe conditions, or their approximate form
/// `f(a) <= f(0) + eps |f(0)|` with `sigma phi'(0) <= phi'(a) <= (2 delta - 1) phi'(0)`
/// once the sufficient-decrease test is swamped by round-off.
#[allow(clippy::too_many_arguments)]
fn line_search(
    energy: &Energy<'_>,
    x: &[f64],
    f0: f64,
    slope0: f64,
    d: &[f64],
    first: f64,
    x_new: &mut [f64],
    g_new: &mut [f64],
) -> SearchOutcome {
    const DELTA: f64 = 1e-4;
    const SIGMA: f64 = 0.9;
    const MAX_EVALS: usize = 40;
    let noise = 1e-12 * (1.0 + f0.abs());

    let mut lo = (0.0, slope0);
    let mut hi: Option<(f64, f64)> = None;
    let mut alpha = first;
    for evals in 1..=MAX_EVALS {
        for ((xn, xi), di) in x_new.iter_mut().zip(x).zip(d) {
            *xn = xi + alpha * di;
        }
        let fa = energy.value_and_gradient(x_new, g_new);
        let slope = dot(g_new, d);
        let armijo = fa <= f0 + DELTA * alpha * slope0;
        let curvature = slope >= SIGMA * slope0;
        let approx = fa <= f0 + noise && slope <= (2.0 * DELTA - 1.0) * slope0 && curvature;
        if fa.is_finite() && ((armijo && curvature && slope <= -SIGMA * slope0) || approx) {
            return SearchOutcome {
                accepted: Some((alpha, fa)),
                evaluations: evals,
            };
        }
        if !fa.is_finite() || slope > 0.0 || (!armijo && fa > f0 + noise) {
            hi = Some((alpha, if fa.is_finite() { slope } else { f64::INFINITY }));
        } else {
            lo = (alpha, slope);
        }
        alpha = match hi {
            None => 4.0 * alpha,
            Some((ah, sh)) => {
                let (al, sl) = lo;
                // secant zero of phi' inside the bracket, kept away from the ends
                let guess = if sh.is_finite() && sh > sl {
                    al - sl * (ah - al) / (sh - sl)
                } else {
                    0.5 * (al + ah)
                };
                let width = ah - al;
                guess.clamp(al + 0.1 * width, ah - 0.1 * width)
            }
        };
        if let Some((ah, _)) = hi {
            if ah - lo.0 <= 1e-14 * ah {
                break;
            }
        }
    }
    SearchOutcome {
        accepted: None,
        evaluations: MAX_EVALS,
    }
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        axpy(-a, y, &mut q);
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        axpy(a - b, s, &mut q);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

fn superposition_guess(problem: &DiscreteProblem) -> Result<Vec<f64>> {
    let grid = &problem.grid;
    let mut u = vec![0.0; grid.len()];
    if problem.charges.is_empty() {
        return Ok(u);
    }
    let h = grid.h;
    let lo = grid.lo;
    let hi = grid.hi();
    let diag = (0..3).map(|d| (hi[d] - lo[d]).powi(2)).sum::<f64>().sqrt();
    let r_min = 0.3 * h;
    let radii = log_grid(r_min, diag * 1.01, 600);
    for c in &problem.charges {
        let prof = approx_radial_profile(c.strength, problem.m, GRID_DIM, &radii)?;
        let centre = grid.position(c.node);
        let inner = prof.origin_value.unwrap_or(prof.samples[0].u);
        for (idx, v) in u.iter_mut().enumerate() {
            let x = grid.position(grid.node(idx));
            let r = (0..3)
                .map(|d| (x[d] - centre[d]).powi(2))
                .sum::<f64>()
                .sqrt();
            *v += if r < r_min {
                inner
            } else {
                prof.interpolate(r).unwrap_or(0.0)
            };
        }
    }
    Ok(u)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
