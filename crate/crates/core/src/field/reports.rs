//! Post-processing of converged grid fields: the comparison principle, the
//! nature of the charge nodes, linearity along segments and gradient bounds.

use serde::Serialize;

use crate::charges::euclidean;
use crate::constants::best_constant_cbar;
use crate::error::{invalid, Error, Result};

use super::energy::{tet_centroid, Energy};
use super::grid::GRID_DIM;
use super::solver::GridField;

/// Multiple of the solver tolerance allowed in the comparison check.
pub const COMPARISON_SLACK: f64 = 10.0;
/// Points sampled along each charge segment.
pub const SEGMENT_SAMPLES: usize = 256;
/// Fraction of `C_bar` required in the discrete inequality check.
pub const EMBEDDING_FRACTION: f64 = 0.95;

fn require_converged(field: &GridField) -> Result<()> {
    if field.converged {
        Ok(())
    } else {
        Err(Error::NotConverged {
            grad_norm: field.grad_norm,
            tol: field.tol,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `max_x (u2 - u1)(x) - sup_boundary (phi2 - phi1)`.
    pub excess: f64,
    pub boundary_gap: f64,
    pub worst_node: [usize; 3],
    pub threshold: f64,
    pub pass: bool,
}

/// Checks `u2 <= u1 + sup_boundary(phi2 - phi1)` for fields whose charges
/// satisfy `rho2 <= rho1` nodewise.
pub fn compare_solutions(f1: &GridField, f2: &GridField) -> Result<ComparisonReport> {
    let (p1, p2) = (&f1.problem, &f2.problem);
    if !p1.grid.same_geometry(&p2.grid) {
        return invalid("fields live on different grids");
    }
    let grid = &p1.grid;
    let (rho1, rho2) = (p1.nodal_charges(), p2.nodal_charges());
    if let Some(i) = (0..grid.len()).find(|&i| rho2[i] > rho1[i]) {
        return invalid(format!(
            "charges are not ordered at node {:?}: {} > {}",
            grid.node(i),
            rho2[i],
            rho1[i]
        ));
    }
    let mut boundary_gap = f64::NEG_INFINITY;
    let mut excess = f64::NEG_INFINITY;
    let mut worst = 0;
    for i in 0..grid.len() {
        let d = f2.values[i] - f1.values[i];
        if grid.is_boundary(grid.node(i)) {
            boundary_gap = boundary_gap.max(p2.boundary[i] - p1.boundary[i]);
        }
        if d > excess {
            excess = d;
            worst = i;
        }
    }
    let excess = excess - boundary_gap;
    let threshold = COMPARISON_SLACK * f1.tol.max(f2.tol);
    Ok(ComparisonReport {
        excess,
        boundary_gap,
        worst_node: grid.node(worst),
        threshold,
        pass: excess <= threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtremumKind {
    Max,
    Min,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeExtremum {
    /// Index into the grid charges of the problem.
    pub charge: usize,
    pub node: [usize; 3],
    pub strength: f64,
    pub kind: ExtremumKind,
    /// Gap to the closest neighbour value, positive when the node is a strict
    /// maximum (a > 0) or strict minimum (a < 0).
    pub margin: f64,
    pub matches_sign: bool,
}

/// Classifies each charge node against its 26 neighbours.
pub fn extremum_report(field: &GridField) -> Result<Vec<ChargeExtremum>> {
    require_converged(field)?;
    let grid = &field.problem.grid;
    let mut out = Vec::with_capacity(field.problem.charges.len());
    for (k, c) in field.problem.charges.iter().enumerate() {
        let centre = field.value_at_node(c.node);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if (dx, dy, dz) == (0, 0, 0) {
                        continue;
                    }
                    let n = [
                        (c.node[0] as i64 + dx) as usize,
                        (c.node[1] as i64 + dy) as usize,
                        (c.node[2] as i64 + dz) as usize,
                    ];
                    let v = field.values[grid.index(n)];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        let kind = if centre > hi {
            ExtremumKind::Max
        } else if centre < lo {
            ExtremumKind::Min
        } else {
            ExtremumKind::Neither
        };
        let margin = if c.strength > 0.0 {
            centre - hi
        } else {
            lo - centre
        };
        let expected = if c.strength > 0.0 {
            ExtremumKind::Max
        } else {
            ExtremumKind::Min
        };
        out.push(ChargeExtremum {
            charge: k,
            node: c.node,
            strength: c.strength,
            kind,
            margin,
            matches_sign: kind == expected,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentReport {
    pub j: usize,
    pub l: usize,
    pub distance: f64,
    /// Largest deviation of `u` from the chord between the two charge values.
    pub defect: f64,
    /// `|u(x_j) - u(x_l)| / |x_j - x_l|`.
    pub ratio: f64,
    pub threshold: f64,
    pub near_light: bool,
}

/// Ratio above which a segment is flagged as close to a light ray:
/// `1 - 10h`, but never below `0.9`.
pub fn near_light_threshold(h: f64) -> f64 {
    1.0 - (10.0 * h).min(0.1)
}

/// Linearity defect and light-ray ratio along each pair of charges.
pub fn segment_report(field: &GridField) -> Result<Vec<SegmentReport>> {
    require_converged(field)?;
    let grid = &field.problem.grid;
    let charges = &field.problem.charges;
    let threshold = near_light_threshold(grid.h);
    let mut out = Vec::new();
    for j in 0..charges.len() {
        for l in j + 1..charges.len() {
            let (xj, xl) = (
                grid.position(charges[j].node),
                grid.position(charges[l].node),
            );
            let (uj, ul) = (
                field.value_at_node(charges[j].node),
                field.value_at_node(charges[l].node),
            );
            let distance = euclidean(&xj, &xl);
            let mut defect = 0.0f64;
            for s in 1..SEGMENT_SAMPLES {
                let t = s as f64 / SEGMENT_SAMPLES as f64;
                let x = [0, 1, 2].map(|d| xj[d] + t * (xl[d] - xj[d]));
                let u = interpolate(field, &x).expect("segment lies inside the box");
                defect = defect.max((u - (uj + t * (ul - uj))).abs());
            }
            let ratio = (uj - ul).abs() / distance;
            out.push(SegmentReport {
                j,
                l,
                distance,
                defect,
                ratio,
                threshold,
                near_light: ratio > threshold,
            });
        }
    }
    Ok(out)
}

/// Trilinear interpolation of the nodal values; `None` outside the box.
pub fn interpolate(field: &GridField, x: &[f64]) -> Option<f64> {
    let grid = &field.problem.grid;
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for d in 0..GRID_DIM {
        let s = (x[d] - grid.lo[d]) / grid.h;
        let last = (grid.shape[d] - 1) as f64;
        if !(s >= -1e-12 && s <= last + 1e-12) {
            return None;
        }
        let s = s.clamp(0.0, last);
        let i = (s.floor() as usize).min(grid.shape[d] - 2);
        base[d] = i;
        frac[d] = s - i as f64;
    }
    let mut acc = 0.0;
    for corner in 0..8 {
        let mut w = 1.0;
        let mut n = base;
        for d in 0..3 {
            if (corner >> d) & 1 == 1 {
                w *= frac[d];
                n[d] += 1;
            } else {
                w *= 1.0 - frac[d];
            }
        }
        if w != 0.0 {
            acc += w * field.values[grid.index(n)];
        }
    }
    Some(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientSup {
    pub value: f64,
    /// Centroid of the tetrahedron attaining the sup.
    pub location: [f64; 3],
    /// Distance from that centroid to the nearest charge (`inf` without charges).
    #[serde(serialize_with = "crate::conditions::serialize_extended")]
    pub charge_distance: f64,
}

/// Largest elementwise gradient magnitude.
pub fn gradient_sup(field: &GridField) -> GradientSup {
    gradient_sup_beyond(field, 0.0)
}

/// Largest elementwise gradient magnitude over elements whose centroid is
/// farther than `distance` from every charge.
pub fn gradient_sup_beyond(field: &GridField, distance: f64) -> GradientSup {
    let grid = &field.problem.grid;
    let centres: Vec<[f64; 3]> = field
        .problem
        .charges
        .iter()
        .map(|c| grid.position(c.node))
        .collect();
    let energy = Energy::new(&field.problem);
    let mut best = GradientSup {
        value: 0.0,
        location: grid.lo,
        charge_distance: f64::INFINITY,
    };
    energy.for_each_tet(&field.values, |cell, t, g| {
        let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        if norm <= best.value {
            return;
        }
        let off = tet_centroid(t);
        let x = [0, 1, 2].map(|d| grid.lo[d] + grid.h * (cell[d] as f64 + off[d]));
        let dist = centres
            .iter()
            .map(|c| euclidean(c, &x))
            .fold(f64::INFINITY, f64::min);
        if dist > distance {
            best = GradientSup {
                value: norm,
                location: x,
                charge_distance: dist,
            };
        }
    });
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingCheck {
    pub dirichlet: f64,
    pub sup_abs: f64,
    /// `||grad u||^2 / ||u||_inf^3`.
    pub ratio: f64,
    pub cbar: f64,
    pub pass: bool,
}

/// Discrete form of `||grad u||_2^2 >= C_bar ||u||_inf^N`, accepted at
/// [`EMBEDDING_FRACTION`] of `C_bar`.
pub fn embedding_check(field: &GridField) -> Result<EmbeddingCheck> {
    let sup_abs = field.sup_abs();
    if sup_abs == 0.0 {
        return invalid("the inequality is vacuous for the zero field");
    }
    let dirichlet = field.dirichlet();
    let cbar = best_constant_cbar(GRID_DIM)?;
    let ratio = dirichlet / sup_abs.powi(GRID_DIM as i32);
    Ok(EmbeddingCheck {
        dirichlet,
        sup_abs,
        ratio,
        cbar,
        pass: ratio >= EMBEDDING_FRACTION * cbar,
    })
}
