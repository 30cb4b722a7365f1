//! Adaptive Gauss-Kronrod quadrature on finite intervals and on `[r0, inf)`
//! for integrands with algebraic decay, plus the two quadrature-defined
//! constants `A(N)` and `C_tilde(N)`.

use serde::Serialize;

use crate::constants::sphere_measure;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_subdivisions: 60,
        }
    }
}

impl QuadConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_k = kronrod.abs();
    let mut fvals = [(0.0, 0.0); 10];
    for (j, fv) in fvals.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *fv = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, (f1, f2)) in fvals.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = kronrod * half;
    let res_abs = abs_k * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        a,
        b,
        value: result,
        error: err,
    }
}

/// Globally adaptive GK21 on `[a, b]`: the panel with the largest error
/// estimate is bisected until the summed estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return invalid("integration bounds must be finite");
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut panels = vec![gk21(&f, a, b)];
    let mut evaluations = 21;
    loop {
        let value: CompensatedSum = panels.iter().map(|p| p.value).collect();
        let value = value.value();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(Error::AccuracyFailure {
                estimate: value,
                error_bound: f64::INFINITY,
            });
        }
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        let exhausted = panels.len() > cfg.max_subdivisions;
        let degenerate = mid <= p.a.min(p.b) || mid >= p.a.max(p.b);
        if exhausted || degenerate {
            return Err(Error::AccuracyFailure {
                estimate: value,
                error_bound: error,
            });
        }
        panels[worst] = gk21(&f, p.a, mid);
        panels.push(gk21(&f, mid, p.b));
        evaluations += 42;
    }
}

/// Integral of `f` over `[r0, inf)` where `|f(s)| = O(s^{-p})`, `p > 1`.
///
/// `[r0, r0 + 1]` is integrated directly; the tail is mapped onto `[0, 1)` with
/// `s = r0 + 1 + tau / (1 - tau)`. Each piece gets half of the tolerance.
pub fn integrate_decaying<F: Fn(f64) -> f64>(
    f: F,
    r0: f64,
    cfg: &QuadConfig,
) -> Result<Quadrature> {
    if !(r0 >= 0.0 && r0.is_finite()) {
        return invalid(format!(
            "lower bound must be finite and non-negative, got {r0}"
        ));
    }
    let split = r0 + 1.0;
    let half = QuadConfig {
        abs_tol: 0.5 * cfg.abs_tol,
        ..*cfg
    };
    let head = integrate(&f, r0, split, &half)?;
    let tail = integrate(
        |tau: f64| {
            let w = 1.0 - tau;
            f(split + tau / w) / (w * w)
        },
        0.0,
        1.0,
        &half,
    )
    .map_err(|e| match e {
        Error::AccuracyFailure {
            estimate,
            error_bound,
        } => Error::AccuracyFailure {
            estimate: estimate + head.value,
            error_bound: error_bound + head.error,
        },
        other => other,
    })?;
    Ok(Quadrature {
        value: head.value + tail.value,
        error: head.error + tail.error,
        evaluations: head.evaluations + tail.evaluations,
    })
}

/// `int_0^inf ds / sqrt(s^{2(N-1)} + 1)`.
pub(crate) fn profile_integral(dim: usize, cfg: &QuadConfig) -> Result<Quadrature> {
    let p = 2 * (dim as i32 - 1);
    integrate_decaying(|s| 1.0 / (s.powi(p) + 1.0).sqrt(), 0.0, cfg)
}

/// `A(N) = omega_{N-1}^{-1/(N-1)} int_0^inf ds / sqrt(s^{2(N-1)} + 1)`.
pub fn shape_constant_a(dim: usize) -> Result<f64> {
    shape_constant_a_with(dim, &QuadConfig::with_abs_tol(1e-11))
}

pub fn shape_constant_a_with(dim: usize, cfg: &QuadConfig) -> Result<f64> {
    if dim < 3 {
        return invalid(format!("A(N) needs N >= 3, got {dim}"));
    }
    let omega = sphere_measure(dim)?;
    Ok(omega.powf(-1.0 / (dim as f64 - 1.0)) * profile_integral(dim, cfg)?.value)
}

/// Refined constant of `int (1 - sqrt(1 - |grad u|^2)) >= C_tilde ||u||_inf^N`,
/// evaluated on the extremal radial profile.
pub fn refined_constant_ctilde(dim: usize) -> Result<f64> {
    if dim < 3 {
        return invalid(format!("C_tilde needs N >= 3, got {dim}"));
    }
    let cfg = QuadConfig::with_abs_tol(1e-11);
    let k = dim as i32 - 1;
    // r^{N-1} (1 - x / sqrt(x^2 + 1)) with x = r^{N-1}, rewritten without cancellation
    let numerator = integrate_decaying(
        |r| {
            let x = r.powi(k);
            let root = (x * x + 1.0).sqrt();
            x / (root * (root + x))
        },
        0.0,
        &cfg,
    )?;
    let denominator = profile_integral(dim, &cfg)?;
    Ok(sphere_measure(dim)? * numerator.value / denominator.value.powi(dim as i32))
}
