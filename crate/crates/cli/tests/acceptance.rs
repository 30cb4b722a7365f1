//! Acceptance checks, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line; run with
//! `cargo test -p borninfeld-cli --test acceptance -- --nocapture`.
//!
//! Criteria hold a shared lock so that wall-clock limits are measured
//! without interference from each other.

use std::f64::consts::PI;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use borninfeld::conditions::{check_global, check_refined, check_two_charge};
use borninfeld::field::{
    assemble_problem, compare_solutions, directional_derivative_error, embedding_check,
    extremum_report, minimize_energy, BoundaryRule, BoxSpec, GridField,
};
use borninfeld::profile::log_grid;
use borninfeld::radial::cone_tail_energy;
use borninfeld::{
    approx_radial_profile, asymptotics_spec, best_constant_cbar, exact_radial_profile,
    fit_singularity, refined_constant_ctilde, shape_constant_a, Charge, ChargeConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::beta::beta;
use statrs::function::gamma::gamma;

static SERIAL: Mutex<()> = Mutex::new(());

const SOLVER_TOL: f64 = 1e-9;
const MAX_ITER: usize = 20_000;

struct Outcome {
    id: u32,
    checks: Vec<(String, bool)>,
    elapsed: Duration,
    limit: Duration,
}

impl Outcome {
    fn new(id: u32, limit_secs: u64) -> Self {
        Self {
            id,
            checks: Vec::new(),
            elapsed: Duration::ZERO,
            limit: Duration::from_secs(limit_secs),
        }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool) {
        self.checks.push((label.into(), ok));
    }

    fn finish(mut self, started: Instant) {
        self.elapsed = started.elapsed();
        let in_time = self.elapsed < self.limit;
        let failed: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.1)
            .map(|c| c.0.as_str())
            .collect();
        let pass = failed.is_empty() && in_time;
        println!(
            "criterion {}: {} ({} checks, {:.2} s of {} s){}",
            self.id,
            if pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            self.elapsed.as_secs_f64(),
            self.limit.as_secs(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failed.join("; "))
            }
        );
        assert!(
            failed.is_empty(),
            "criterion {} failed: {failed:?}",
            self.id
        );
        assert!(
            in_time,
            "criterion {} took {:?}, limit {:?}",
            self.id, self.elapsed, self.limit
        );
    }
}

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// `A(N) = omega^{-1/(N-1)} B(1/2k, 1/2 - 1/2k) / 2k` with `2k = 2(N-1)`.
fn a_oracle(dim: usize) -> f64 {
    let k2 = 2.0 * (dim as f64 - 1.0);
    let omega = 2.0 * PI.powf(dim as f64 / 2.0) / gamma(dim as f64 / 2.0);
    omega.powf(-1.0 / (dim as f64 - 1.0)) * beta(1.0 / k2, 0.5 - 1.0 / k2) / k2
}

/// Composite Simpson in `theta` after `r = tan(theta)`.
fn simpson_tan<F: Fn(f64) -> f64>(f: F, at_end: f64, panels: usize) -> f64 {
    let g = |th: f64| {
        if th >= PI / 2.0 {
            return at_end;
        }
        let r = th.tan();
        f(r) * (1.0 + r * r)
    };
    let h = PI / 2.0 / panels as f64;
    let mut acc = g(0.0) + g(PI / 2.0);
    for i in 1..panels {
        acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

fn sig4(x: f64, target: f64) -> bool {
    (x - target).abs() <= 0.5e-4 * target.abs().max(1.0)
}

#[test]
fn criterion_1_exact_constants() {
    let _guard = serial();
    let started = Instant::now();
    let mut out = Outcome::new(1, 1);
    let cbar = best_constant_cbar(3).unwrap();
    let omega = 4.0 * PI;
    out.check("C_bar(3) = 2 pi / 3", (cbar - 2.0 * PI / 3.0).abs() < 1e-12);
    let e = cone_tail_energy(0.5, 3).unwrap();
    out.check(
        "cone-tail energy at 1/2 times omega",
        (e * omega - 2.0 * PI / 3.0).abs() < 1e-10,
    );
    let n = 10_000;
    let step = 0.5 / (n - 1) as f64;
    let (argmin, _) = (0..n)
        .map(|i| {
            let r = 0.5 + step * i as f64;
            (r, cone_tail_energy(r, 3).unwrap())
        })
        .fold((f64::NAN, f64::INFINITY), |best, p| {
            if p.1 < best.1 {
                p
            } else {
                best
            }
        });
    out.check(
        format!("argmin {argmin} at 1/2"),
        (argmin - 0.5).abs() <= step,
    );
    out.finish(started);
}

#[test]
fn criterion_2_quadrature_constants() {
    let _guard = serial();
    let started = Instant::now();
    let mut out = Outcome::new(2, 5);
    let omega = 4.0 * PI;
    let a3 = shape_constant_a(3).unwrap();
    let oracle = gamma(0.25).powi(2) / (4.0 * PI.sqrt() * omega.sqrt());
    out.check(
        format!("A(3) = {a3} vs {oracle}"),
        (a3 - oracle).abs() < 1e-8,
    );
    out.check(
        "Beta and Gamma oracles agree",
        (a_oracle(3) - oracle).abs() < 1e-12,
    );

    let ct = refined_constant_ctilde(3).unwrap();
    let num = simpson_tan(
        |r| {
            let x = r * r;
            let root = (x * x + 1.0).sqrt();
            x / (root * (root + x))
        },
        0.5,
        100_000,
    );
    let ct_oracle = omega * num / (a_oracle(3) * omega.sqrt()).powi(3);
    out.check(
        format!("C_tilde(3) = {ct} vs Simpson {ct_oracle}"),
        (ct - ct_oracle).abs() < 1e-7 * ct_oracle,
    );
    out.check(
        format!("C_tilde / omega = {}", ct / omega),
        (ct / omega - 0.097).abs() <= 0.001,
    );
    out.check(
        "C_tilde >= C_bar / 2",
        ct >= best_constant_cbar(3).unwrap() / 2.0,
    );
    out.finish(started);
}

#[test]
fn criterion_3_dipole_thresholds() {
    let _guard = serial();
    let started = Instant::now();
    let mut out = Outcome::new(3, 1);
    let omega = 4.0 * PI;
    // (N / omega)^{1/(N-1)} (N-1)/(N-2) (|a1| + |a2|)
    let global = (3.0 / omega).sqrt() * 2.0 * 2.0;
    // (|a1| + |a2|) / sqrt(C_tilde) with C_tilde = 0.097 omega
    let refined = 2.0 / (0.097 * omega).sqrt();
    // A(3) (|a1|^{1/2} + |a2|^{1/2})
    let two = 2.0 * a_oracle(3);
    out.check(format!("global {global}"), sig4(global, 1.95441));
    out.check(format!("refined {refined}"), sig4(refined, 1.81150));
    out.check(format!("two-charge {two}"), sig4(two, 1.04605));

    let cfg = ChargeConfig::new(
        3,
        vec![
            Charge::new(vec![0.0; 3], 1.0),
            Charge::new(vec![2.0, 0.0, 0.0], -1.0),
        ],
    )
    .unwrap();
    let g = check_global(&cfg).unwrap().lhs;
    let r = check_refined(&cfg, 0.097 * omega).unwrap().lhs;
    let t = check_two_charge(&cfg).unwrap().lhs;
    out.check(
        format!("library global {g}"),
        sig4(g, 1.95441) && (g - global).abs() < 1e-10,
    );
    out.check(
        format!("library refined {r}"),
        sig4(r, 1.81150) && (r - refined).abs() < 1e-10,
    );
    out.check(
        format!("library two-charge {t}"),
        sig4(t, 1.04605) && (t - two).abs() < 1e-8,
    );
    out.check("two-charge < refined < global", t < r && r < g);
    out.finish(started);
}

#[test]
fn criterion_4_exact_radial_solution() {
    let _guard = serial();
    let started = Instant::now();
    let mut out = Outcome::new(4, 5);
    let omega = 4.0 * PI;
    for a in [1.0, -2.5] {
        let radii = log_grid(0.1, 1e3, 1000);
        let p = exact_radial_profile(a, 3, &radii).unwrap();
        let worst = p
            .samples
            .iter()
            .map(|s| (s.r * s.r * s.du / (1.0 - s.du * s.du).sqrt() + a / omega).abs())
            .fold(0.0, f64::max);
        out.check(
            format!("flux identity a={a}: {worst:.2e}"),
            worst < 1e-10 && p.samples.len() == 1000,
        );
    }
    let radii = log_grid(1e-8, 1e3, 2000);
    let p = exact_radial_profile(1.0, 3, &radii).unwrap();
    let near = exact_radial_profile(1.0, 3, &[1e-6, 1e-5]).unwrap();
    let origin = near.samples[0].u + near.samples[0].r;
    out.check(
        format!("u(0+) = {origin} vs A(3)"),
        (origin - a_oracle(3)).abs() < 1e-6,
    );
    let reported = p.origin_value.unwrap();
    out.check("reported u(0+)", (reported - a_oracle(3)).abs() < 1e-6);
    out.check(
        "|du| < 1 everywhere",
        p.samples.iter().all(|s| s.du.abs() < 1.0),
    );
    out.check(
        format!("|du(1e-6)| = {}", near.samples[0].du.abs()),
        near.samples[0].du.abs() > 1.0 - 1e-4,
    );
    out.finish(started);
}

#[test]
fn criterion_5_approximant_asymptotics() {
    let _guard = serial();
    let started = Instant::now();
    let mut out = Outcome::new(5, 30);
    let radii = log_grid(1e-7, 1e-3, 300);
    for a in [1.0, -1.0] {
        let spec = asymptotics_spec(4, 3, a, false).unwrap();
        let fit = fit_singularity(
            &approx_radial_profile(a, 4, 3, &radii).unwrap(),
            (1e-6, 1e-4),
        )
        .unwrap();
        let (u, g) = (&fit.u_fit, &fit.du_fit);
        out.check(
            format!("a={a}: u exponent {}", u.exponent),
            (u.exponent / (5.0 / 7.0) - 1.0).abs() < 0.01,
        );
        out.check(
            format!("a={a}: |K| {}", u.coefficient.abs()),
            (u.coefficient.abs() / 1.1515 - 1.0).abs() < 0.02,
        );
        out.check(
            format!("a={a}: |K| vs K_4 {}", spec.k.abs()),
            (u.coefficient.abs() / spec.k.abs() - 1.0).abs() < 0.02,
        );
        out.check(
            format!("a={a}: gradient exponent {}", g.exponent),
            (g.exponent / (-2.0 / 7.0) - 1.0).abs() < 0.01,
        );
        out.check(
            format!("a={a}: K' {}", g.coefficient),
            (g.coefficient / 0.8225 - 1.0).abs() < 0.02,
        );
        out.check(format!("a={a}: sign of K"), u.coefficient * a < 0.0);
    }
    let ks: Vec<f64> = (4..=64)
        .map(|m| asymptotics_spec(m, 3, 1.0, false).unwrap().k.abs())
        .collect();
    let tail = &ks[ks.len() / 2..];
    out.check(
        "|K_m| approaches 1 monotonically in the tail",
        tail.windows(2)
            .all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()),
    );
    out.check(
        format!("|K_64| = {}", ks[ks.len() - 1]),
        (ks[ks.len() - 1] - 1.0).abs() < (ks[0] - 1.0).abs(),
    );
    out.finish(started);
}

fn radial_error(h: f64) -> (f64, GridField) {
    let cfg = ChargeConfig::new(3, vec![Charge::new(vec![0.0; 3], 1.0)]).unwrap();
    let problem = assemble_problem(
        &cfg,
        &BoxSpec::cube(4.0, h),
        2,
        BoundaryRule::RadialSuperposition,
    )
    .unwrap();
    let field = minimize_energy(&problem, SOLVER_TOL, MAX_ITER).unwrap();
    let grid = &problem.grid;
    let mut nodes: Vec<(usize, f64)> = (0..grid.len())
        .map(|i| {
            let x = grid.position(grid.node(i));
            (i, (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
        })
        .filter(|&(_, r)| (0.5..=2.0).contains(&r))
        .collect();
    nodes.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut radii: Vec<f64> = nodes.iter().map(|n| n.1).collect();
    radii.dedup();
    let oracle = approx_radial_profile(1.0, 2, 3, &radii).unwrap();
    let err = nodes
        .iter()
        .map(|&(i, r)| {
            let k = radii.partition_point(|&x| x < r);
            (field.values[i] - oracle.samples[k].u).abs()
        })
        .fold(0.0, f64::max);
    (err, field)
}

#[test]
fn criterion_6_grid_refinement() {
    let _guard = serial();
    let started = Instant::now();
    let mut out = Outcome::new(6, 300);
    let (coarse, fc) = radial_error(0.25);
    let (fine, ff) = radial_error(0.125);
    out.check("both solves converged", fc.converged && ff.converged);
    out.check("negative energies", fc.energy < 0.0 && ff.energy < 0.0);
    out.check(
        format!(
            "error {coarse:.4e} -> {fine:.4e}, factor {:.3}",
            coarse / fine
        ),
        coarse / fine >= 1.5,
    );
    out.finish(started);
}

/// Node-aligned positions at least 8 spacings apart and 4 from the boundary.
fn random_positions(rng: &mut ChaCha8Rng, count: usize, h: f64, reach: f64) -> Vec<[f64; 3]> {
    let steps = (reach / h).round() as i64;
    loop {
        let pts: Vec<[f64; 3]> = (0..count)
            .map(|_| [(); 3].map(|_| rng.gen_range(-steps..=steps) as f64 * h))
            .collect();
        let spaced = (0..count).all(|j| {
            (j + 1..count).all(|l| {
                let d2: f64 = (0..3).map(|c| (pts[j][c] - pts[l][c]).powi(2)).sum();
                d2.sqrt() >= 8.0 * h
            })
        });
        if spaced {
            return pts;
        }
    }
}

fn random_strength(rng: &mut ChaCha8Rng) -> f64 {
    let a = rng.gen_range(0.3..1.2);
    if rng.gen_bool(0.5) {
        a
    } else {
        -a
    }
}

fn config(pos: &[[f64; 3]], strengths: &[f64]) -> ChargeConfig {
    ChargeConfig::new(
        3,
        pos.iter()
            .zip(strengths)
            .map(|(p, &a)| Charge::new(p.to_vec(), a))
            .collect(),
    )
    .unwrap()
}

#[test]
fn criterion_7_property_suite() {
    let _guard = serial();
    let started = Instant::now();
    let mut out = Outcome::new(7, 600);
    let h = 0.125;
    let spec = BoxSpec::cube(2.0, h);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let solve = |cfg: &ChargeConfig, m: usize, rule: BoundaryRule| {
        let p = assemble_problem(cfg, &spec, m, rule).unwrap();
        minimize_energy(&p, SOLVER_TOL, MAX_ITER).unwrap()
    };
    let mut fields: Vec<GridField> = Vec::new();

    let mut comparison_pass = 0;
    let mut comparison_notes = Vec::new();
    for pair in 0..20 {
        let count = if pair < 5 { 1 } else { 1 + pair % 3 };
        let pos = random_positions(&mut rng, count, h, 1.5);
        let a1: Vec<f64> = (0..count).map(|_| random_strength(&mut rng)).collect();
        let a2: Vec<f64> = a1
            .iter()
            .map(|&a| {
                let b = a - rng.gen_range(0.1..0.6);
                if b.abs() < 0.05 {
                    b - 0.1
                } else {
                    b
                }
            })
            .collect();
        let rule = if pair % 2 == 0 {
            BoundaryRule::Zero
        } else {
            BoundaryRule::RadialSuperposition
        };
        let f1 = solve(&config(&pos, &a1), 2, rule);
        let f2 = solve(&config(&pos, &a2), 2, rule);
        match compare_solutions(&f1, &f2) {
            Ok(rep) if rep.pass && f1.converged && f2.converged => comparison_pass += 1,
            other => comparison_notes.push(format!("pair {pair}: {other:?}")),
        }
        fields.push(f1);
        fields.push(f2);
    }
    out.check(
        format!(
            "comparison {comparison_pass}/20 {}",
            comparison_notes.join(" ")
        ),
        comparison_pass == 20,
    );

    let mut extremum_pass = 0;
    for k in 0..10 {
        let count = 2 + k % 2;
        let pos = random_positions(&mut rng, count, h, 1.5);
        let mut strengths: Vec<f64> = (0..count).map(|_| random_strength(&mut rng)).collect();
        if count == 2 {
            strengths[1] = -strengths[0].signum() * strengths[1].abs();
        }
        let m = if k < 5 { 2 } else { 4 };
        let f = solve(
            &config(&pos, &strengths),
            m,
            BoundaryRule::RadialSuperposition,
        );
        if f.converged && extremum_report(&f).is_ok_and(|r| r.iter().all(|c| c.matches_sign)) {
            extremum_pass += 1;
        }
        fields.push(f);
    }
    out.check(
        format!("extremum classification {extremum_pass}/10"),
        extremum_pass == 10,
    );

    let positive = fields.iter().filter(|f| f.energy >= 0.0).count();
    out.check(
        format!(
            "negative energy on {} solves ({positive} not)",
            fields.len()
        ),
        positive == 0,
    );

    let mut worst_fd = 0.0f64;
    for f in fields.iter().rev().take(10) {
        let grid = &f.problem.grid;
        for _ in 0..2 {
            let mut u = f.values.clone();
            let mut d = vec![0.0; u.len()];
            for i in 0..u.len() {
                if !grid.is_boundary(grid.node(i)) {
                    u[i] += 0.02 * rng.gen_range(-1.0..1.0);
                    d[i] = rng.gen_range(-1.0..1.0);
                }
            }
            let err = directional_derivative_error(&f.problem, &u, &d, &[1e-4, 1e-5, 1e-6, 1e-7])
                .unwrap();
            worst_fd = worst_fd.max(err);
        }
    }
    out.check(
        format!("finite differences at 20 points, worst {worst_fd:.2e}"),
        worst_fd < 1e-5,
    );

    let singles: Vec<&GridField> = fields
        .iter()
        .filter(|f| f.problem.charges.len() == 1)
        .collect();
    let mut failing = Vec::new();
    for f in &singles {
        let c = embedding_check(f).unwrap();
        if !c.pass {
            failing.push(format!(
                "a={:.3} ratio {:.3} C_bar",
                f.problem.charges[0].strength,
                c.ratio / c.cbar
            ));
        }
    }
    out.check(
        format!(
            "discrete inequality on {} single-charge fields ({} below 0.95 C_bar: {})",
            singles.len(),
            failing.len(),
            failing.join(", ")
        ),
        failing.is_empty() && !singles.is_empty(),
    );
    out.finish(started);
}

#[test]
fn criterion_8_determinism() {
    let _guard = serial();
    let started = Instant::now();
    let mut out = Outcome::new(8, 120);
    let dir = tempfile::TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"dim": 3, "charges": [{"pos": [-1, 0, 0], "a": 1}, {"pos": [1, 0.5, 0], "a": -0.7}],
            "box": {"lo": [-2, -2, -2], "hi": [2, 2, 2], "h": 0.25}, "order_m": 3, "seed": 11}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let commands: [&[&str]; 4] = [
        &["solve", cfg, "--seed", "5"],
        &["check", cfg],
        &["radial", "--a", "-1.5", "--m", "4"],
        &["constants", "--dim", "4", "--m", "5,9"],
    ];
    for args in commands {
        let mut runs = Vec::new();
        for k in 0..2 {
            let out_dir = dir.path().join(format!("{}-{k}", args[0]));
            let status = Command::new(env!("CARGO_BIN_EXE_borninfeld"))
                .args(args)
                .arg("--out")
                .arg(&out_dir)
                .output()
                .unwrap()
                .status;
            let mut files: Vec<_> = std::fs::read_dir(&out_dir)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            let bytes: Vec<Vec<u8>> = files.iter().map(|p| std::fs::read(p).unwrap()).collect();
            runs.push((
                status.code(),
                files
                    .iter()
                    .map(|p| p.file_name().unwrap().to_owned())
                    .collect::<Vec<_>>(),
                bytes,
            ));
        }
        out.check(
            format!("{} byte-identical", args[0]),
            runs[0] == runs[1] && runs[0].0.is_some(),
        );
    }
    out.finish(started);
}
