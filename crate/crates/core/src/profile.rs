//! Sampled radial profiles of single-charge solutions, and the exact
//! Born-Infeld profile obtained from the integrated flux identity
//! `r^{N-1} u' / sqrt(1 - u'^2) = -a / omega_{N-1}`.

use serde::Serialize;

use crate::constants::sphere_measure;
use crate::error::{invalid, Result};
use crate::quad::{integrate, integrate_decaying, shape_constant_a, QuadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    ExactBornInfeld,
    Approximant { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSample {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub dim: usize,
    pub strength: f64,
    pub kind: ProfileKind,
    pub samples: Vec<RadialSample>,
    /// `u(0+)` when it is finite.
    pub origin_value: Option<f64>,
    pub warnings: Vec<String>,
}

impl RadialProfile {
    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.r)
    }

    /// Linear interpolation of `u` at radius `r`; `None` outside the sampled range.
    pub fn interpolate(&self, r: f64) -> Option<f64> {
        let s = &self.samples;
        if s.is_empty() || r < s[0].r || r > s[s.len() - 1].r {
            return None;
        }
        let i = s.partition_point(|x| x.r <= r);
        if i == s.len() {
            return Some(s[s.len() - 1].u);
        }
        let (lo, hi) = (&s[i - 1], &s[i]);
        let w = (r - lo.r) / (hi.r - lo.r);
        Some(lo.u + w * (hi.u - lo.u))
    }

    /// Profile with every `u` and `du` negated, as produced by `-a`.
    pub fn negated(&self) -> Self {
        Self {
            strength: -self.strength,
            samples: self
                .samples
                .iter()
                .map(|s| RadialSample {
                    r: s.r,
                    u: -s.u,
                    du: -s.du,
                })
                .collect(),
            origin_value: self.origin_value.map(|v| -v),
            ..self.clone()
        }
    }
}

pub(crate) fn validate_grid(rgrid: &[f64]) -> Result<()> {
    if rgrid.is_empty() {
        return invalid("radius grid is empty");
    }
    if rgrid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return invalid("radii must be positive and finite");
    }
    if rgrid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("radii must be strictly increasing");
    }
    Ok(())
}

/// Evaluates `u(r_i) = int_{r_i}^inf speed(s) ds` on an increasing grid: a tail
/// integral from the last radius plus panel integrals between neighbours.
pub(crate) fn accumulate_from_infinity<F: Fn(f64) -> f64>(
    speed: F,
    rgrid: &[f64],
    cfg: &QuadConfig,
) -> Result<Vec<f64>> {
    let n = rgrid.len();
    let mut u = vec![0.0; n];
    u[n - 1] = integrate_decaying(&speed, rgrid[n - 1], cfg)?.value;
    let panel_cfg = QuadConfig {
        abs_tol: cfg.abs_tol / n as f64,
        rel_tol: cfg.rel_tol.max(1e-13),
        ..*cfg
    };
    for i in (0..n - 1).rev() {
        u[i] = u[i + 1] + integrate(&speed, rgrid[i], rgrid[i + 1], &panel_cfg)?.value;
    }
    Ok(u)
}

/// Logarithmically spaced radii, `count >= 2` points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Exact single-charge Born-Infeld potential centred at the origin:
/// `u'(r) = -(a/omega) / sqrt(r^{2(N-1)} + (a/omega)^2)`, `u(inf) = 0`.
pub fn exact_radial_profile(a: f64, dim: usize, rgrid: &[f64]) -> Result<RadialProfile> {
    if a == 0.0 || !a.is_finite() {
        return invalid("charge strength must be nonzero and finite");
    }
    if dim < 3 {
        return invalid(format!("N must be at least 3, got {dim}"));
    }
    validate_grid(rgrid)?;
    let omega = sphere_measure(dim)?;
    let c = a.abs() / omega;
    let p = 2 * (dim as i32 - 1);
    let speed = |s: f64| c / (s.powi(p) + c * c).sqrt();
    let magnitudes = accumulate_from_infinity(speed, rgrid, &QuadConfig::with_abs_tol(1e-12))?;

    let sign = a.signum();
    let samples: Vec<RadialSample> = rgrid
        .iter()
        .zip(&magnitudes)
        .map(|(&r, &u)| RadialSample {
            r,
            u: sign * u,
            // round toward zero so that |du| < 1 survives when 1 - |du| < 2^-53
            du: -sign * speed(r).min(1.0 - f64::EPSILON / 2.0),
        })
        .collect();

    let origin = sign * a.abs().powf(1.0 / (dim as f64 - 1.0)) * shape_constant_a(dim)?;
    let mut warnings = Vec::new();
    // u is asymptotically linear at the origin with slope du(0+) = -sign(a);
    // the check only applies when the grid starts well inside the core radius
    let core = c.powf(1.0 / (dim as f64 - 1.0));
    if samples.len() >= 2 && samples[1].r < 1e-2 * core {
        let (s0, s1) = (&samples[0], &samples[1]);
        let extrapolated = s0.u - s0.r * (s1.u - s0.u) / (s1.r - s0.r);
        if (extrapolated - origin).abs() > 1e-5 {
            let msg = format!(
                "extrapolated u(0+) = {extrapolated:.8} differs from closed form {origin:.8}"
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }

    Ok(RadialProfile {
        dim,
        strength: a,
        kind: ProfileKind::ExactBornInfeld,
        samples,
        origin_value: Some(origin),
        warnings,
    })
}
