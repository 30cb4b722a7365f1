//! `borninfeld` command-line front end.
//!
//! Exit codes: 0 success or certificate found, 1 inconclusive, 2 invalid
//! input, 3 quadrature accuracy failure, 4 solver did not converge.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use borninfeld::conditions::{certify, CertificateReport};
use borninfeld::constants::guarantee_bound;
use borninfeld::field::reports::{ChargeExtremum, EmbeddingCheck};
use borninfeld::field::{
    self, assemble_problem, embedding_check, extremum_report, gradient_sup, minimize_energy,
    segment_report, GradientSup, SegmentReport,
};
use borninfeld::profile::log_grid;
use borninfeld::quad::{shape_constant_a_with, QuadConfig};
use borninfeld::{
    approx_radial_profile, asymptotics_spec, best_constant_cbar, exact_radial_profile,
    fit_singularity, refined_constant_ctilde, sphere_measure, AsymptoticsSpec, RadialProfile,
    SingularityFit,
};
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use config::RunConfig;
use output::Sink;

#[derive(Parser, Debug)]
#[command(
    name = "borninfeld",
    version,
    about = "Born-Infeld electrostatics with point charges"
)]
struct Cli {
    /// Directory for report.json and CSV outputs. The report goes to stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Solver residual for `solve`, absolute quadrature tolerance for `constants`.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for the randomized self-checks in `solve`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Report asymptotic constants outside the range where they are proven.
    #[arg(long, global = true)]
    override_guarantee: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sphere measure, C_bar, A(N), C_tilde and per-order asymptotic constants.
    Constants {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Approximation orders, comma separated.
        #[arg(long = "m", value_delimiter = ',')]
        orders: Vec<usize>,
        /// Charge strength used for gamma and K.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        a: f64,
    },
    /// Sufficient conditions for classical solvability of a configuration.
    Check { config: PathBuf },
    /// Single-charge radial profile (exact, or order-m approximant) and singularity fit.
    Radial {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Approximation order; the exact Born-Infeld profile when omitted.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        r_min: f64,
        #[arg(long, default_value_t = 1e3)]
        r_max: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        /// Fit window `LO HI`.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [1e-6, 1e-4])]
        fit_window: Vec<f64>,
    },
    /// Grid solve of the order-m energy for a three-dimensional configuration.
    Solve { config: PathBuf },
}

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Input(anyhow::Error),
    Core(borninfeld::Error),
    Output(anyhow::Error),
}

impl From<borninfeld::Error> for CliError {
    fn from(e: borninfeld::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use borninfeld::Error as E;
        match self {
            CliError::Core(E::AccuracyFailure { .. }) => 3,
            CliError::Core(E::NotConverged { .. }) => 4,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(msg) => write!(f, "{msg}"),
            CliError::Input(e) | CliError::Output(e) => write!(f, "{e:#}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

enum Outcome {
    Success,
    Inconclusive,
    NotConverged,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Inconclusive) => ExitCode::from(1),
        Ok(Outcome::NotConverged) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Invalid(format!(
                "--tol must be positive, got {tol}"
            )));
        }
    }
    let sink = Sink::new(cli.out.clone()).map_err(CliError::Output)?;
    match &cli.command {
        Command::Constants { dim, orders, a } => constants(cli, &sink, *dim, orders, *a),
        Command::Check { config } => check(&sink, &RunConfig::load(config)?),
        Command::Radial {
            a,
            dim,
            m,
            r_min,
            r_max,
            samples,
            fit_window,
        } => radial(
            &sink,
            *a,
            *dim,
            *m,
            (*r_min, *r_max, *samples),
            (fit_window[0], fit_window[1]),
        ),
        Command::Solve { config } => solve(cli, &sink, &RunConfig::load(config)?),
    }
}

#[derive(Serialize)]
struct ConstantsReport {
    command: &'static str,
    dim: usize,
    sphere_measure: f64,
    cbar: f64,
    shape_constant_a: f64,
    ctilde: f64,
    ctilde_over_omega: f64,
    guarantee_bound: f64,
    orders: Vec<AsymptoticsSpec>,
}

fn constants(
    cli: &Cli,
    sink: &Sink,
    dim: usize,
    orders: &[usize],
    a: f64,
) -> Result<Outcome, CliError> {
    if dim < 3 {
        return Err(CliError::Invalid(format!(
            "--dim must be at least 3, got {dim}"
        )));
    }
    let omega = sphere_measure(dim)?;
    let quad = cli
        .tol
        .map_or(QuadConfig::with_abs_tol(1e-11), QuadConfig::with_abs_tol);
    let ctilde = refined_constant_ctilde(dim)?;
    let orders = orders
        .iter()
        .map(|&m| asymptotics_spec(m, dim, a, cli.override_guarantee))
        .collect::<Result<Vec<_>, _>>()?;
    let report = ConstantsReport {
        command: "constants",
        dim,
        sphere_measure: omega,
        cbar: best_constant_cbar(dim)?,
        shape_constant_a: shape_constant_a_with(dim, &quad)?,
        ctilde,
        ctilde_over_omega: ctilde / omega,
        guarantee_bound: guarantee_bound(dim),
        orders,
    };
    sink.report(&report).map_err(CliError::Output)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct CheckReport<'a> {
    command: &'static str,
    config: &'a RunConfig,
    certificates: CertificateReport,
}

fn check(sink: &Sink, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let charges = cfg.charge_config()?;
    let certificates = certify(&charges)?;
    let certified = certificates.certified;
    summarize_certificates(&certificates);
    sink.report(&CheckReport {
        command: "check",
        config: cfg,
        certificates,
    })
    .map_err(CliError::Output)?;
    Ok(if certified {
        Outcome::Success
    } else {
        Outcome::Inconclusive
    })
}

fn summarize_certificates(c: &CertificateReport) {
    eprintln!(
        "global: {:?} (lhs {:.6}, rhs {:.6}); refined: {:?}; certified: {}",
        c.global.level, c.global.lhs, c.global.rhs, c.refined.level, c.certified
    );
    for s in &c.segments {
        eprintln!(
            "  segment {}-{}: {:?} margin {:.6}",
            s.j, s.l, s.level, s.margin
        );
    }
}

#[derive(Serialize)]
struct RadialReport {
    command: &'static str,
    strength: f64,
    dim: usize,
    order_m: Option<usize>,
    guaranteed: bool,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    asymptotics: Option<AsymptoticsSpec>,
    origin_value: Option<f64>,
    samples: usize,
    r_range: (f64, f64),
    fit: Option<SingularityFit>,
    warnings: Vec<String>,
}

fn radial(
    sink: &Sink,
    a: f64,
    dim: usize,
    m: Option<usize>,
    (r_min, r_max, samples): (f64, f64, usize),
    window: (f64, f64),
) -> Result<Outcome, CliError> {
    if !(r_min > 0.0 && r_max > r_min) || samples < 2 {
        return Err(CliError::Invalid(format!(
            "need 0 < r-min < r-max and at least 2 samples, got ({r_min}, {r_max}, {samples})"
        )));
    }
    let radii = log_grid(r_min, r_max, samples);
    let profile: RadialProfile = match m {
        Some(m) => approx_radial_profile(a, m, dim, &radii)?,
        None => exact_radial_profile(a, dim, &radii)?,
    };
    let guaranteed = m.is_none_or(|m| (2 * m) as f64 > guarantee_bound(dim));
    let asymptotics = match m {
        Some(m) if 2 * m > dim => Some(asymptotics_spec(m, dim, a, true)?),
        _ => None,
    };
    let fit = if window.0 >= r_min && window.1 <= r_max {
        Some(fit_singularity(&profile, window)?)
    } else {
        log::warn!("fit window {window:?} outside the sampled range; no fit reported");
        None
    };
    sink.csv(
        "profile.csv",
        &["r", "u", "du"],
        profile.samples.iter().map(|s| vec![s.r, s.u, s.du]),
    )
    .map_err(CliError::Output)?;
    sink.report(&RadialReport {
        command: "radial",
        strength: a,
        dim,
        order_m: m,
        guaranteed,
        asymptotics,
        origin_value: profile.origin_value,
        samples,
        r_range: (r_min, r_max),
        fit,
        status: if guaranteed {
            "guaranteed"
        } else {
            "unguaranteed"
        },
        warnings: profile.warnings.clone(),
    })
    .map_err(CliError::Output)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct SolverSummary {
    energy: f64,
    zero_extension_energy: f64,
    grad_norm: f64,
    tol: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct GradientCheck {
    seed: u64,
    points: usize,
    max_relative_error: f64,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    command: &'static str,
    config: &'a RunConfig,
    problem: &'a field::DiscreteProblem,
    solver: SolverSummary,
    extremum: Option<Vec<ChargeExtremum>>,
    segments: Option<Vec<SegmentReport>>,
    gradient_sup: GradientSup,
    #[serde(skip_serializing_if = "Option::is_none")]
    embedding: Option<EmbeddingCheck>,
    gradient_check: GradientCheck,
    certificates: CertificateReport,
}

const GRADIENT_CHECK_POINTS: usize = 3;

fn solve(cli: &Cli, sink: &Sink, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let charges = cfg.charge_config()?;
    let spec = cfg
        .grid_box
        .ok_or_else(|| CliError::Invalid("solve needs a \"box\" entry".into()))?;
    let problem = assemble_problem(&charges, &spec, cfg.order_m, cfg.boundary_rule)?;
    for w in &problem.warnings {
        log::warn!("{w}");
    }
    let tol = cli.tol.unwrap_or(cfg.tolerances.solver);
    let field = minimize_energy(&problem, tol, cfg.tolerances.max_iter)?;

    let (extremum, segments) = if field.converged {
        (
            Some(extremum_report(&field)?),
            Some(segment_report(&field)?),
        )
    } else {
        log::warn!(
            "solver stopped at residual {:.3e} above tolerance {tol:.3e}",
            field.grad_norm
        );
        (None, None)
    };
    let embedding = match problem.charges.len() {
        1 => Some(embedding_check(&field)?),
        _ => None,
    };
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let gradient_check = gradient_check(&field, seed)?;

    let grid = &problem.grid;
    sink.csv(
        "field.csv",
        &["x", "y", "z", "u"],
        (0..grid.len()).map(|i| {
            let x = grid.position(grid.node(i));
            vec![x[0], x[1], x[2], field.values[i]]
        }),
    )
    .map_err(CliError::Output)?;

    let report = SolveReport {
        command: "solve",
        config: cfg,
        problem: &problem,
        solver: SolverSummary {
            energy: field.energy,
            zero_extension_energy: field.zero_extension_energy,
            grad_norm: field.grad_norm,
            tol,
            iterations: field.iterations,
            evaluations: field.evaluations,
            converged: field.converged,
        },
        extremum,
        segments,
        gradient_sup: gradient_sup(&field),
        embedding,
        gradient_check,
        certificates: certify(&charges)?,
    };
    sink.report(&report).map_err(CliError::Output)?;
    if let Some(dir) = sink.describe() {
        eprintln!(
            "energy {:.10e}, residual {:.3e} after {} iterations; outputs in {}",
            field.energy,
            field.grad_norm,
            field.iterations,
            dir.display()
        );
    }
    Ok(if field.converged {
        Outcome::Success
    } else {
        Outcome::NotConverged
    })
}

/// Finite-difference check of the objective gradient at perturbed copies of the solution.
fn gradient_check(f: &field::GridField, seed: u64) -> Result<GradientCheck, CliError> {
    let grid = &f.problem.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..GRADIENT_CHECK_POINTS {
        let mut u = f.values.clone();
        let mut d = vec![0.0; u.len()];
        for i in 0..u.len() {
            if !grid.is_boundary(grid.node(i)) {
                u[i] += 0.1 * rng.gen_range(-1.0..1.0);
                d[i] = rng.gen_range(-1.0..1.0);
            }
        }
        let err =
            field::directional_derivative_error(&f.problem, &u, &d, &[1e-4, 1e-5, 1e-6, 1e-7])?;
        worst = worst.max(err);
    }
    Ok(GradientCheck {
        seed,
        points: GRADIENT_CHECK_POINTS,
        max_relative_error: worst,
    })
}
