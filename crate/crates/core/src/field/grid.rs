//! Uniform grids on axis-aligned boxes in `R^3` and assembly of the discrete
//! Dirichlet problem.

use serde::{Deserialize, Serialize};

use crate::charges::{euclidean, Charge, ChargeConfig};
use crate::error::{invalid, Result};
use crate::profile::exact_radial_profile;
use crate::series::{taylor_coefficients, CoefficientTable};

pub const GRID_DIM: usize = 3;
/// Minimum number of grid spacings between the two closest charges.
pub const MIN_SPACINGS_BETWEEN_CHARGES: f64 = 8.0;
/// Minimum number of grid spacings between a charge and the boundary.
pub const MIN_BOUNDARY_SPACINGS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub h: f64,
}

impl BoxSpec {
    pub fn cube(half_width: f64, h: f64) -> Self {
        Self {
            lo: [-half_width; 3],
            hi: [half_width; 3],
            h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryRule {
    Zero,
    /// Sum of exact single-charge Born-Infeld potentials centred at each charge.
    #[default]
    RadialSuperposition,
}

/// Node lattice `lo + h * (i, j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub lo: [f64; 3],
    pub h: f64,
    pub shape: [usize; 3],
}

impl Grid {
    pub fn from_box(spec: &BoxSpec) -> Result<Self> {
        if !(spec.h > 0.0 && spec.h.is_finite()) {
            return invalid(format!("grid spacing must be positive, got {}", spec.h));
        }
        let mut shape = [0; 3];
        for (d, edge) in shape.iter_mut().enumerate() {
            let len = spec.hi[d] - spec.lo[d];
            if !(len > 0.0 && len.is_finite()) {
                return invalid(format!("box edge {d} has non-positive length"));
            }
            let cells = (len / spec.h).round();
            if (cells * spec.h - len).abs() > 1e-9 * len.max(1.0) {
                return invalid(format!(
                    "h = {} does not divide box edge {d} of length {len}",
                    spec.h
                ));
            }
            if cells < 2.0 {
                return invalid("box needs at least two cells per edge");
            }
            *edge = cells as usize + 1;
        }
        Ok(Self {
            lo: spec.lo,
            h: spec.h,
            shape,
        })
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, n: [usize; 3]) -> usize {
        n[0] + self.shape[0] * (n[1] + self.shape[1] * n[2])
    }

    pub fn node(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.shape[0];
        let rest = idx / self.shape[0];
        [i, rest % self.shape[1], rest / self.shape[1]]
    }

    pub fn position(&self, n: [usize; 3]) -> [f64; 3] {
        [
            self.lo[0] + self.h * n[0] as f64,
            self.lo[1] + self.h * n[1] as f64,
            self.lo[2] + self.h * n[2] as f64,
        ]
    }

    pub fn is_boundary(&self, n: [usize; 3]) -> bool {
        (0..3).any(|d| n[d] == 0 || n[d] + 1 == self.shape[d])
    }

    pub fn cell_count(&self) -> usize {
        self.shape.iter().map(|s| s - 1).product()
    }

    pub fn hi(&self) -> [f64; 3] {
        self.position([self.shape[0] - 1, self.shape[1] - 1, self.shape[2] - 1])
    }

    /// Nearest node to `x`, `None` outside the box.
    pub fn snap(&self, x: &[f64]) -> Option<[usize; 3]> {
        let mut n = [0; 3];
        for d in 0..3 {
            let s = ((x[d] - self.lo[d]) / self.h).round();
            if s < 0.0 || s >= self.shape[d] as f64 {
                return None;
            }
            n[d] = s as usize;
        }
        Some(n)
    }

    pub fn same_geometry(&self, other: &Grid) -> bool {
        self.shape == other.shape && self.lo == other.lo && self.h == other.h
    }
}

/// A charge placed on a grid node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCharge {
    /// Indices into the original charge list (several after a merge).
    pub sources: Vec<usize>,
    pub node: [usize; 3],
    pub strength: f64,
    pub snap_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteProblem {
    pub grid: Grid,
    pub m: usize,
    #[serde(skip)]
    pub coefficients: CoefficientTable,
    pub boundary_rule: BoundaryRule,
    /// Nodal values; only boundary entries are used.
    #[serde(skip)]
    pub boundary: Vec<f64>,
    pub charges: Vec<GridCharge>,
    pub warnings: Vec<String>,
}

impl DiscreteProblem {
    /// Charge strength at every node.
    pub fn nodal_charges(&self) -> Vec<f64> {
        let mut rho = vec![0.0; self.grid.len()];
        for c in &self.charges {
            rho[self.grid.index(c.node)] += c.strength;
        }
        rho
    }

    /// Same geometry, order and boundary data with different charges.
    pub fn with_charges(&self, charges: Vec<GridCharge>) -> Self {
        Self {
            charges,
            ..self.clone()
        }
    }

    /// Same geometry and order with different boundary values.
    pub fn with_boundary(&self, boundary: Vec<f64>) -> Result<Self> {
        if boundary.len() != self.grid.len() {
            return invalid("boundary vector does not match the grid");
        }
        Ok(Self {
            boundary,
            ..self.clone()
        })
    }

    pub fn boundary_sup(&self) -> f64 {
        let mut sup = 0.0f64;
        for idx in 0..self.grid.len() {
            if self.grid.is_boundary(self.grid.node(idx)) {
                sup = sup.max(self.boundary[idx].abs());
            }
        }
        sup
    }
}

/// Builds the discrete problem for `config` (which must be three-dimensional).
pub fn assemble_problem(
    config: &ChargeConfig,
    spec: &BoxSpec,
    m: usize,
    rule: BoundaryRule,
) -> Result<DiscreteProblem> {
    if config.dim() != GRID_DIM {
        return invalid(format!(
            "grid solves are three-dimensional, got N = {}",
            config.dim()
        ));
    }
    assemble(config.charges(), spec, m, rule)
}

/// A problem with no charges and zero boundary data.
pub fn assemble_uncharged(spec: &BoxSpec, m: usize) -> Result<DiscreteProblem> {
    assemble(&[], spec, m, BoundaryRule::Zero)
}

fn assemble(
    charges: &[Charge],
    spec: &BoxSpec,
    m: usize,
    rule: BoundaryRule,
) -> Result<DiscreteProblem> {
    let grid = Grid::from_box(spec)?;
    let coefficients = taylor_coefficients(m)?;
    let h = grid.h;
    let hi = grid.hi();
    let mut warnings = Vec::new();

    let min_spacing = charges
        .iter()
        .enumerate()
        .flat_map(|(j, a)| {
            charges[j + 1..]
                .iter()
                .map(move |b| euclidean(&a.pos, &b.pos))
        })
        .fold(f64::INFINITY, f64::min);
    if min_spacing.is_finite() && min_spacing < MIN_SPACINGS_BETWEEN_CHARGES * h {
        return invalid(format!(
            "grid too coarse: closest charges are {min_spacing} apart, need at least {} spacings of h = {h}",
            MIN_SPACINGS_BETWEEN_CHARGES
        ));
    }

    let mut placed: Vec<GridCharge> = Vec::new();
    for (k, c) in charges.iter().enumerate() {
        if c.pos.len() != GRID_DIM {
            return invalid(format!("charge {k} is not three-dimensional"));
        }
        let clearance = (0..3)
            .map(|d| (c.pos[d] - grid.lo[d]).min(hi[d] - c.pos[d]))
            .fold(f64::INFINITY, f64::min);
        if clearance < MIN_BOUNDARY_SPACINGS * h {
            return invalid(format!(
                "charge {k} is {clearance} from the boundary, need at least {} spacings",
                MIN_BOUNDARY_SPACINGS
            ));
        }
        if min_spacing.is_finite() && clearance < 2.0 * min_spacing {
            warnings.push(format!(
                "charge {k} has clearance {clearance:.4} below twice the minimum charge spacing"
            ));
        }
        let node = grid.snap(&c.pos).expect("charge is inside the box");
        let snap_distance = euclidean(&grid.position(node), &c.pos);
        if let Some(existing) = placed.iter_mut().find(|p| p.node == node) {
            let msg = format!(
                "charge {k} merged with charges {:?} at node {node:?}",
                existing.sources
            );
            log::warn!("{msg}");
            warnings.push(msg);
            existing.sources.push(k);
            existing.strength += c.strength;
            existing.snap_distance = existing.snap_distance.max(snap_distance);
        } else {
            placed.push(GridCharge {
                sources: vec![k],
                node,
                strength: c.strength,
                snap_distance,
            });
        }
    }
    placed.retain(|p| p.strength != 0.0);

    let boundary = match rule {
        BoundaryRule::Zero => vec![0.0; grid.len()],
        BoundaryRule::RadialSuperposition => superposition_boundary(&grid, &placed)?,
    };

    Ok(DiscreteProblem {
        grid,
        m,
        coefficients,
        boundary_rule: rule,
        boundary,
        charges: placed,
        warnings,
    })
}

fn superposition_boundary(grid: &Grid, charges: &[GridCharge]) -> Result<Vec<f64>> {
    let boundary_nodes: Vec<usize> = (0..grid.len())
        .filter(|&i| grid.is_boundary(grid.node(i)))
        .collect();
    let mut values = vec![0.0; grid.len()];
    for c in charges {
        let centre = grid.position(c.node);
        let radii: Vec<f64> = boundary_nodes
            .iter()
            .map(|&i| euclidean(&grid.position(grid.node(i)), &centre))
            .collect();
        let mut sorted = radii.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let profile = exact_radial_profile(c.strength, GRID_DIM, &sorted)?;
        for (&i, r) in boundary_nodes.iter().zip(&radii) {
            let at = sorted.partition_point(|x| x < r);
            values[i] += profile.samples[at].u;
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(a: f64) -> ChargeConfig {
        ChargeConfig::new(3, vec![Charge::new(vec![0.0; 3], a)]).unwrap()
    }

    #[test]
    fn single_charge_layout() {
        let p = assemble_problem(
            &single(1.0),
            &BoxSpec::cube(4.0, 0.125),
            2,
            BoundaryRule::Zero,
        )
        .unwrap();
        assert_eq!(p.grid.shape, [65, 65, 65]);
        assert_eq!(p.charges[0].node, [32, 32, 32]);
        assert_eq!(p.charges[0].snap_distance, 0.0);
        assert_eq!(p.boundary_sup(), 0.0);
    }

    #[test]
    fn superposition_boundary_matches_profile() {
        let p = assemble_problem(
            &single(1.0),
            &BoxSpec::cube(2.0, 0.25),
            2,
            BoundaryRule::RadialSuperposition,
        )
        .unwrap();
        let corner = p.grid.index([0, 0, 0]);
        let face = p.grid.index([0, 8, 8]);
        let r_corner = 12f64.sqrt();
        let exact = exact_radial_profile(1.0, 3, &[2.0, r_corner]).unwrap();
        assert!((p.boundary[face] - exact.samples[0].u).abs() < 1e-12);
        assert!((p.boundary[corner] - exact.samples[1].u).abs() < 1e-12);
        // coarse bound |a|^{1/2} A(3)
        assert!(p.boundary_sup() < 0.5231);
    }

    #[test]
    fn guards() {
        let close = ChargeConfig::new(
            3,
            vec![
                Charge::new(vec![0.0; 3], 1.0),
                Charge::new(vec![0.5, 0.0, 0.0], -1.0),
            ],
        )
        .unwrap();
        assert!(
            assemble_problem(&close, &BoxSpec::cube(4.0, 0.125), 2, BoundaryRule::Zero).is_err()
        );
        assert!(assemble_problem(
            &single(1.0),
            &BoxSpec::cube(4.0, 0.3),
            2,
            BoundaryRule::Zero
        )
        .is_err());
        let edge = ChargeConfig::new(3, vec![Charge::new(vec![3.9, 0.0, 0.0], 1.0)]).unwrap();
        assert!(
            assemble_problem(&edge, &BoxSpec::cube(4.0, 0.125), 2, BoundaryRule::Zero).is_err()
        );
        let four = ChargeConfig::new(4, vec![Charge::new(vec![0.0; 4], 1.0)]).unwrap();
        assert!(
            assemble_problem(&four, &BoxSpec::cube(4.0, 0.125), 2, BoundaryRule::Zero).is_err()
        );
    }

    #[test]
    fn snapping_records_distance() {
        let cfg = ChargeConfig::new(3, vec![Charge::new(vec![0.05, 0.0, 0.0], 1.0)]).unwrap();
        let p = assemble_problem(&cfg, &BoxSpec::cube(2.0, 0.25), 1, BoundaryRule::Zero).unwrap();
        assert_eq!(p.charges[0].node, [8, 8, 8]);
        assert!((p.charges[0].snap_distance - 0.05).abs() < 1e-15);
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::from_box(&BoxSpec {
            lo: [0.0, -1.0, 2.0],
            hi: [1.0, 1.0, 2.5],
            h: 0.25,
        })
        .unwrap();
        assert_eq!(g.shape, [5, 9, 3]);
        for idx in [0, 7, 44, g.len() - 1] {
            assert_eq!(g.index(g.node(idx)), idx);
        }
    }
}
