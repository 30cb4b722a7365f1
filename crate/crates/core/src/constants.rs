//! Closed-form constants: sphere measures, the best constant of the
//! inhomogeneous inequality `||grad u||_2^2 >= C ||u||_inf^N`, and the local
//! asymptotics of the order-m approximants at a charge.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::series::taylor_coefficients;

/// Surface measure `omega_{N-1} = 2 pi^{N/2} / Gamma(N/2)` of the unit sphere in `R^N`.
pub fn sphere_measure(dim: usize) -> Result<f64> {
    if dim < 2 {
        return invalid(format!("sphere measure needs N >= 2, got {dim}"));
    }
    // omega_{N-1} = 2 pi / (N - 2) * omega_{N-3}
    let (mut n, mut omega) = if dim.is_multiple_of(2) {
        (2, 2.0 * PI)
    } else {
        (3, 4.0 * PI)
    };
    while n < dim {
        omega *= 2.0 * PI / n as f64;
        n += 2;
    }
    Ok(omega)
}

/// `C_bar = (2/N) ((N-2)/(N-1))^{N-1} omega_{N-1}`.
pub fn best_constant_cbar(dim: usize) -> Result<f64> {
    if dim < 3 {
        return invalid(format!("best constant needs N >= 3, got {dim}"));
    }
    let n = dim as f64;
    Ok(2.0 / n * ((n - 2.0) / (n - 1.0)).powi(dim as i32 - 1) * sphere_measure(dim)?)
}

/// Lower bound on `2m` for which the growth laws at a charge are guaranteed:
/// `max(N, 2N/(N-2))`.
pub fn guarantee_bound(dim: usize) -> f64 {
    let n = dim as f64;
    n.max(2.0 * n / (n - 2.0))
}

/// Predicted behaviour of the order-m approximant near a charge of strength `a`:
/// `u(x) - u(x_k) ~ K |x - x_k|^{(2m-N)/(2m-1)}` and
/// `|grad u(x)| ~ K' |x - x_k|^{(1-N)/(2m-1)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsSpec {
    pub m: usize,
    pub dim: usize,
    pub strength: f64,
    /// Coefficient of the fundamental solution of `-Delta_{2m}`.
    pub kappa: f64,
    pub gamma: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K_prime")]
    pub k_prime: f64,
    pub u_exponent: f64,
    pub grad_exponent: f64,
    /// Hoelder exponent `1 - N/(2m)`.
    pub holder: f64,
    /// False when `2m <= max(N, 2N/(N-2))`; the numbers are then formal.
    pub guaranteed: bool,
}

/// Builds the asymptotic constants for order `m`, dimension `dim` and strength `a`.
///
/// Outside the guaranteed range this returns [`Error::GuaranteeOutOfRange`]
/// unless `allow_unguaranteed` is set, in which case the values are returned
/// with `guaranteed = false`. `2m > N` is always required since the exponent
/// `(2m-N)/(2m-1)` must be positive for the constants to exist.
pub fn asymptotics_spec(
    m: usize,
    dim: usize,
    a: f64,
    allow_unguaranteed: bool,
) -> Result<AsymptoticsSpec> {
    if dim < 3 {
        return invalid(format!("N must be at least 3, got {dim}"));
    }
    if a == 0.0 || !a.is_finite() {
        return invalid("charge strength must be nonzero and finite");
    }
    if 2 * m <= dim {
        return invalid(format!(
            "need 2m > N for a finite value at the charge (m={m}, N={dim})"
        ));
    }
    let bound = guarantee_bound(dim);
    let guaranteed = (2 * m) as f64 > bound;
    if !guaranteed && !allow_unguaranteed {
        return Err(Error::GuaranteeOutOfRange { m, dim, bound });
    }

    let alpha_m = taylor_coefficients(m)?.leading();
    let (mf, n) = (m as f64, dim as f64);
    let q = 2.0 * mf - 1.0;
    let ratio = (2.0 * mf - n) / q;
    // N |B_1| = omega_{N-1}
    let omega = sphere_measure(dim)?;
    let kappa = -omega.powf(-1.0 / q) / ratio;
    let gamma = a.signum() * (a.abs() / alpha_m).powf(1.0 / q);
    let k = gamma * kappa;
    Ok(AsymptoticsSpec {
        m,
        dim,
        strength: a,
        kappa,
        gamma,
        k,
        k_prime: ratio * k.abs(),
        u_exponent: ratio,
        grad_exponent: (1.0 - n) / q,
        holder: 1.0 - n / (2.0 * mf),
        guaranteed,
    })
}
