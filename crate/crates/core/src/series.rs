//! Taylor expansion of the Born-Infeld Lagrangian density
//! `1 - sqrt(1 - t^2) = sum_{h>=1} (alpha_h / 2h) t^{2h}`.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Coefficients `alpha_1..alpha_m` with `alpha_1 = 1` and
/// `alpha_h = (2h-3)!!/(2h-2)!!` for `h >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTable {
    alphas: Vec<f64>,
}

impl CoefficientTable {
    pub fn order(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `alpha_h` for `1 <= h <= m`.
    pub fn alpha(&self, h: usize) -> f64 {
        self.alphas[h - 1]
    }

    /// Highest-order coefficient `alpha_m`.
    pub fn leading(&self) -> f64 {
        *self.alphas.last().expect("table is never empty")
    }

    /// Energy density `W(t) = sum_h (alpha_h / 2h) t^{2h}`.
    pub fn density(&self, t: f64) -> f64 {
        self.density_sq(t * t)
    }

    /// [`Self::density`] as a function of `t^2`.
    pub fn density_sq(&self, t2: f64) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.alphas.iter().enumerate().rev() {
            acc = acc * t2 + a / (2.0 * (i + 1) as f64);
        }
        acc * t2
    }

    /// Flux magnitude `g(t) = W'(t) = sum_h alpha_h t^{2h-1}`.
    pub fn flux(&self, t: f64) -> f64 {
        self.flux_weight(t * t) * t
    }

    /// `g(t)/t = sum_h alpha_h t^{2h-2}` as a function of `t^2`; the scalar
    /// weight multiplying the gradient in the flux vector.
    pub fn flux_weight(&self, t2: f64) -> f64 {
        let mut acc = 0.0;
        for a in self.alphas.iter().rev() {
            acc = acc * t2 + a;
        }
        acc
    }

    /// Derivative of [`Self::flux_weight`] with respect to `t^2`.
    pub fn flux_weight_derivative(&self, t2: f64) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.alphas.iter().enumerate().skip(1).rev() {
            acc = acc * t2 + a * i as f64;
        }
        acc
    }

    /// `g'(t) = sum_h (2h-1) alpha_h t^{2h-2}`.
    pub fn flux_derivative(&self, t: f64) -> f64 {
        let t2 = t * t;
        let mut acc = 0.0;
        for (i, a) in self.alphas.iter().enumerate().rev() {
            acc = acc * t2 + a * (2 * i + 1) as f64;
        }
        acc
    }
}

/// Coefficients up to order `m`, via `alpha_{h+1} = alpha_h (2h-1)/(2h)`.
pub fn taylor_coefficients(m: usize) -> Result<CoefficientTable> {
    if m < 1 {
        return invalid("approximation order m must be at least 1");
    }
    let mut alphas = Vec::with_capacity(m);
    alphas.push(1.0);
    if m >= 2 {
        alphas.push(0.5);
    }
    for h in 2..m {
        let prev = alphas[h - 1];
        alphas.push(prev * (2 * h - 1) as f64 / (2 * h) as f64);
    }
    Ok(CoefficientTable { alphas })
}

/// Partial sum `sum_{h=1..m} (alpha_h / 2h) t^{2h}` for `t` in `[0, 1]`.
pub fn lagrangian_partial_sum(t: f64, m: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return invalid(format!("t must lie in [0, 1], got {t}"));
    }
    Ok(taylor_coefficients(m)?.density(t))
}

/// Closed form `1 - sqrt(1 - t^2)`, written to avoid cancellation for small `t`.
pub fn lagrangian_exact(t: f64) -> f64 {
    let t2 = t * t;
    t2 / (1.0 + (1.0 - t2).sqrt())
}
