//! Single-charge solutions of the order-m approximating problem
//! `-sum_h alpha_h Delta_{2h} u = a delta_0`, their singularity asymptotics, and
//! the cone-plus-tail extremals of the inhomogeneous inequality.
//!
//! For a charge at the origin the divergence theorem over balls gives
//! `omega_{N-1} r^{N-1} g(|u'(r)|) = |a|` with `g(t) = sum_h alpha_h t^{2h-1}`,
//! so each radius only needs a scalar root solve.

use serde::Serialize;

use crate::constants::{guarantee_bound, sphere_measure};
use crate::error::{invalid, Result};
use crate::profile::{
    accumulate_from_infinity, validate_grid, ProfileKind, RadialProfile, RadialSample,
};
use crate::quad::{integrate, integrate_decaying, QuadConfig};
use crate::series::{taylor_coefficients, CoefficientTable};

const MAX_NEWTON: usize = 100;

/// Root `t >= 0` of `g(t) = target` for the flux polynomial of `table`.
///
/// `g` is increasing and convex on `t >= 0`, so Newton started from an upper
/// bound decreases monotonically onto the root. Bisection takes over if Newton
/// stalls or leaves the bracket.
pub fn solve_flux(table: &CoefficientTable, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    let q = (2 * table.order() - 1) as f64;
    // g(t) >= alpha_1 t and g(t) >= alpha_m t^{2m-1}
    let mut hi = target.min((target / table.leading()).powf(1.0 / q));
    let mut lo = 0.0f64;
    let mut t = hi;
    for _ in 0..MAX_NEWTON {
        let residual = table.flux(t) - target;
        if residual == 0.0 {
            return t;
        }
        if residual > 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
        let next = t - residual / table.flux_derivative(t);
        if !(next > lo && next < hi) || !next.is_finite() {
            break;
        }
        if (t - next).abs() <= 4.0 * f64::EPSILON * t {
            return next;
        }
        t = next;
    }
    // bisection fallback on [lo, hi]
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if table.flux(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `|u'(r)|` for the order-m single-charge approximant of strength `a`.
pub fn flux_gradient_magnitude(r: f64, a: f64, m: usize, dim: usize) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid(format!("radius must be positive, got {r}"));
    }
    if a == 0.0 || !a.is_finite() {
        return invalid("charge strength must be nonzero and finite");
    }
    if dim < 3 {
        return invalid(format!("N must be at least 3, got {dim}"));
    }
    let table = taylor_coefficients(m)?;
    let omega = sphere_measure(dim)?;
    Ok(solve_flux(&table, flux_target(a, omega, dim, r)))
}

fn flux_target(a: f64, omega: f64, dim: usize, r: f64) -> f64 {
    a.abs() / (omega * r.powi(dim as i32 - 1))
}

/// Sampled single-charge approximant of order `m` with `u(inf) = 0`.
///
/// `u(0+)` is finite exactly when `2m > N`; it is then computed by integrating
/// `|u'|` over `(0, r_0]` after the substitution `s = r_0 y^k` that removes the
/// algebraic singularity at the origin.
pub fn approx_radial_profile(a: f64, m: usize, dim: usize, rgrid: &[f64]) -> Result<RadialProfile> {
    if a == 0.0 || !a.is_finite() {
        return invalid("charge strength must be nonzero and finite");
    }
    if dim < 3 {
        return invalid(format!("N must be at least 3, got {dim}"));
    }
    validate_grid(rgrid)?;
    let table = taylor_coefficients(m)?;
    let omega = sphere_measure(dim)?;
    let speed = |s: f64| solve_flux(&table, flux_target(a, omega, dim, s));
    let cfg = QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-13,
        max_subdivisions: 200,
    };
    let magnitudes = accumulate_from_infinity(speed, rgrid, &cfg)?;
    let sign = a.signum();

    let mut warnings = Vec::new();
    let origin_value = if 2 * m > dim {
        let r0 = rgrid[0];
        let p = (dim as f64 - 1.0) / (2.0 * m as f64 - 1.0);
        let k = 1.0 / (1.0 - p);
        let inner = integrate(
            |y: f64| {
                if y <= 0.0 {
                    return 0.0;
                }
                let s = r0 * y.powf(k);
                speed(s) * r0 * k * y.powf(k - 1.0)
            },
            0.0,
            1.0,
            &cfg,
        )?;
        Some(sign * (magnitudes[0] + inner.value))
    } else {
        warnings.push(format!("u(0+) is infinite for 2m <= N (m={m}, N={dim})"));
        None
    };
    if (2 * m) as f64 <= guarantee_bound(dim) {
        warnings.push(format!(
            "m={m} is outside the guaranteed range 2m > {} for N={dim}",
            guarantee_bound(dim)
        ));
    }

    let samples = rgrid
        .iter()
        .zip(&magnitudes)
        .map(|(&r, &u)| RadialSample {
            r,
            u: sign * u,
            du: -sign * speed(r),
        })
        .collect();
    Ok(RadialProfile {
        dim,
        strength: a,
        kind: ProfileKind::Approximant { m },
        samples,
        origin_value,
        warnings,
    })
}

/// Log-log least-squares power law `y ~ coefficient * r^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub exponent: f64,
    /// Signed for the potential fit (`K`), positive for the gradient fit (`K'`).
    pub coefficient: f64,
    /// Maximum absolute deviation of the data from the fitted line in log-log.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityFit {
    pub u_fit: FitResult,
    pub du_fit: FitResult,
    /// Whether the profile's order lies in the range where the growth laws are proven.
    pub guaranteed: bool,
    /// Whether `u(0+)` was subtracted before fitting (finite central value).
    pub centered: bool,
}

pub const MIN_FIT_SAMPLES: usize = 8;

fn fit_power_law(points: &[(f64, f64)], window: (f64, f64), sign: f64) -> FitResult {
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|(r, y)| (r.ln(), y.abs().ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = logs
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    FitResult {
        exponent: slope,
        coefficient: sign * intercept.exp(),
        residual,
        window,
        samples: points.len(),
    }
}

/// Fits `u(r) - u(0+) ~ K r^e` and `|u'(r)| ~ K' r^e'` on the samples inside `window`.
///
/// When `u(0+)` is infinite (e.g. the Newtonian case `m = 1`) the potential
/// itself is fitted.
pub fn fit_singularity(profile: &RadialProfile, window: (f64, f64)) -> Result<SingularityFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return invalid(format!("invalid fit window ({lo}, {hi})"));
    }
    let inside: Vec<&RadialSample> = profile
        .samples
        .iter()
        .filter(|s| s.r >= lo && s.r <= hi)
        .collect();
    if inside.len() < MIN_FIT_SAMPLES {
        return invalid(format!(
            "fit window holds {} samples, need at least {MIN_FIT_SAMPLES}",
            inside.len()
        ));
    }
    let origin = profile.origin_value.unwrap_or(0.0);
    let u_points: Vec<(f64, f64)> = inside.iter().map(|s| (s.r, s.u - origin)).collect();
    if u_points.iter().any(|p| p.1 == 0.0) || inside.iter().any(|s| s.du == 0.0) {
        return invalid("profile vanishes inside the fit window");
    }
    let u_sign = u_points[0].1.signum();
    let du_points: Vec<(f64, f64)> = inside.iter().map(|s| (s.r, s.du)).collect();
    let guaranteed = match profile.kind {
        ProfileKind::Approximant { m } => (2 * m) as f64 > guarantee_bound(profile.dim),
        ProfileKind::ExactBornInfeld => true,
    };
    Ok(SingularityFit {
        u_fit: fit_power_law(&u_points, window, u_sign),
        du_fit: fit_power_law(&du_points, window, 1.0),
        guaranteed,
        centered: profile.origin_value.is_some(),
    })
}

/// Cone-plus-tail candidate `u(r) = s (1 - r/s)` on `(0, sR)`, `c1 s^{N-1} r^{2-N}`
/// beyond, with `c1 = R^{N-2}(1 - R)`; `scale = s` applies `u -> s u(./s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeTailCandidate {
    pub dim: usize,
    pub radius: f64,
    pub c1: f64,
    pub scale: f64,
}

impl ConeTailCandidate {
    /// Admissible for `(N-2)/(N-1) <= R <= 1`, where the tail slope never exceeds 1.
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        if dim < 3 {
            return invalid(format!("N must be at least 3, got {dim}"));
        }
        let n = dim as f64;
        let lower = (n - 2.0) / (n - 1.0);
        if !(lower..=1.0).contains(&radius) {
            return invalid(format!(
                "R = {radius} outside the admissible interval [{lower}, 1]"
            ));
        }
        Ok(Self {
            dim,
            radius,
            c1: radius.powi(dim as i32 - 2) * (1.0 - radius),
            scale: 1.0,
        })
    }

    pub fn rescaled(&self, t: f64) -> Self {
        Self {
            scale: self.scale * t,
            ..*self
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        let x = r / self.scale;
        let base = if x < self.radius {
            1.0 - x
        } else {
            self.c1 * x.powi(2 - self.dim as i32)
        };
        self.scale * base
    }

    pub fn slope(&self, r: f64) -> f64 {
        let x = r / self.scale;
        if x < self.radius {
            -1.0
        } else {
            -(self.dim as f64 - 2.0) * self.c1 * x.powi(1 - self.dim as i32)
        }
    }
}

/// `E(R) = R^N / N + (N-2) R^{N-2} (1-R)^2`, the radial Dirichlet integral of the candidate.
pub fn cone_tail_energy(radius: f64, dim: usize) -> Result<f64> {
    let c = ConeTailCandidate::new(dim, radius)?;
    let n = dim as f64;
    Ok(radius.powi(dim as i32) / n + (n - 2.0) * c.c1 * c.c1 / radius.powi(dim as i32 - 2))
}

/// Radial function entering the ratio `omega int u'^2 r^{N-1} dr / sup|u|^N`.
pub trait RadialFunction {
    fn dim(&self) -> usize;
    fn sup_abs(&self) -> f64;
    fn max_slope(&self) -> f64;
    /// `int_0^inf u'(r)^2 r^{N-1} dr`.
    fn dirichlet_integral(&self) -> Result<f64>;
}

impl RadialFunction for ConeTailCandidate {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sup_abs(&self) -> f64 {
        self.scale
    }

    fn max_slope(&self) -> f64 {
        1.0
    }

    fn dirichlet_integral(&self) -> Result<f64> {
        let k = self.dim as i32 - 1;
        let knot = self.radius * self.scale;
        let cfg = QuadConfig::with_abs_tol(1e-13);
        let integrand = |r: f64| self.slope(r).powi(2) * r.powi(k);
        let head = integrate(integrand, 0.0, knot, &cfg)?;
        let tail = integrate_decaying(|s| integrand(knot + s), 0.0, &cfg)?;
        Ok(head.value + tail.value)
    }
}

impl RadialFunction for RadialProfile {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sup_abs(&self) -> f64 {
        let sampled = self.samples.iter().map(|s| s.u.abs()).fold(0.0, f64::max);
        self.origin_value.map_or(sampled, |v| v.abs().max(sampled))
    }

    fn max_slope(&self) -> f64 {
        self.samples.iter().map(|s| s.du.abs()).fold(0.0, f64::max)
    }

    /// Trapezoid rule in `log r` over the samples, a `|u'| <= 1` cap on
    /// `(0, r_0)` and a Newtonian `r^{1-N}` tail beyond the last radius.
    fn dirichlet_integral(&self) -> Result<f64> {
        let s = &self.samples;
        if s.len() < 2 {
            return invalid("need at least two samples");
        }
        let n = self.dim as f64;
        let k = self.dim as i32;
        let weight = |x: &RadialSample| x.du * x.du * x.r.powi(k);
        let mut total = weight(&s[0]) / n;
        for w in s.windows(2) {
            total += 0.5 * (weight(&w[0]) + weight(&w[1])) * (w[1].r / w[0].r).ln();
        }
        total += weight(&s[s.len() - 1]) / (n - 2.0);
        Ok(total)
    }
}

/// `omega_{N-1} int u'^2 r^{N-1} dr / sup|u|^N`, bounded below by `C_bar(N)`
/// on weakly spacelike functions.
pub fn spacelike_ratio<F: RadialFunction>(f: &F) -> Result<f64> {
    let sup = f.sup_abs();
    if sup == 0.0 {
        return invalid("zero function");
    }
    if f.max_slope() > 1.0 + 1e-12 {
        return invalid(format!(
            "slope {} exceeds the light-cone bound 1",
            f.max_slope()
        ));
    }
    let dim = f.dim();
    Ok(sphere_measure(dim)? * f.dirichlet_integral()? / sup.powi(dim as i32))
}

/// `C_bar(N) = omega_{N-1} E((N-2)/(N-1))`.
pub fn cbar_from_energy(dim: usize) -> Result<f64> {
    let n = dim as f64;
    Ok(sphere_measure(dim)? * cone_tail_energy((n - 2.0) / (n - 1.0), dim)?)
}
