//! Electrostatic Born-Infeld equation with point charges.
//!
//! The crate covers the quantitative side of the problem
//! `-div(grad u / sqrt(1 - |grad u|^2)) = sum_k a_k delta_{x_k}` in `R^N`:
//!
//! * [`series`] and [`constants`]: Taylor coefficients of the Lagrangian and
//!   closed-form constants (sphere measures, the best constant `C_bar`,
//!   asymptotic constants of the order-m approximants);
//! * [`quad`] and [`profile`]: adaptive quadrature on half-lines, the
//!   constants `A(N)` and `C_tilde(N)`, and the exact single-charge profile;
//! * [`conditions`]: sufficient conditions for classical solvability;
//! * [`radial`]: single-charge approximants, singularity fits and the
//!   cone-plus-tail extremals;
//! * [`field`]: a finite-element grid solver for the order-m energy with
//!   several charges, plus property harnesses.

pub mod charges;
pub mod conditions;
pub mod constants;
pub mod error;
pub mod field;
pub mod profile;
pub mod quad;
pub mod radial;
pub mod series;

pub use charges::{Charge, ChargeConfig};
pub use conditions::{Verdict, VerdictLevel};
pub use constants::{asymptotics_spec, best_constant_cbar, sphere_measure, AsymptoticsSpec};
pub use error::{Error, Result};
pub use profile::{exact_radial_profile, ProfileKind, RadialProfile, RadialSample};
pub use quad::{integrate_decaying, refined_constant_ctilde, shape_constant_a, QuadConfig};
pub use radial::{approx_radial_profile, fit_singularity, FitResult, SingularityFit};
pub use series::{taylor_coefficients, CoefficientTable};
