//! Discrete order-m energy
//! `I_m(u) = sum_T |T| W(|grad u|_T) - sum_k a_k u(x_k)`
//! with `W(t) = sum_h (alpha_h / 2h) t^{2h}` and piecewise-linear elements on
//! the Kuhn subdivision of each cubic cell into six tetrahedra.
//!
//! In a Kuhn tetrahedron the vertices follow a monotone lattice path from the
//! cell's lower corner to its upper corner, so each gradient component is a
//! single edge difference.

use crate::quad::CompensatedSum;

use super::grid::DiscreteProblem;

/// Corner `dx + 2 dy + 4 dz` sequence and axis order of each Kuhn tetrahedron.
const KUHN: [([usize; 4], [usize; 3]); 6] = [
    ([0, 1, 3, 7], [0, 1, 2]),
    ([0, 1, 5, 7], [0, 2, 1]),
    ([0, 2, 3, 7], [1, 0, 2]),
    ([0, 2, 6, 7], [1, 2, 0]),
    ([0, 4, 5, 7], [2, 0, 1]),
    ([0, 4, 6, 7], [2, 1, 0]),
];

pub(crate) struct Energy<'a> {
    problem: &'a DiscreteProblem,
    rho: Vec<f64>,
    free: Vec<bool>,
    corner_offsets: [usize; 8],
}

impl<'a> Energy<'a> {
    pub(crate) fn new(problem: &'a DiscreteProblem) -> Self {
        let grid = &problem.grid;
        let free = (0..grid.len())
            .map(|i| !grid.is_boundary(grid.node(i)))
            .collect();
        let [sx, sy, _] = grid.shape;
        let mut corner_offsets = [0; 8];
        for (c, off) in corner_offsets.iter_mut().enumerate() {
            *off = (c & 1) + sx * (((c >> 1) & 1) + sy * ((c >> 2) & 1));
        }
        Self {
            problem,
            rho: problem.nodal_charges(),
            free,
            corner_offsets,
        }
    }

    /// Copies the boundary data of the problem into `u`.
    pub(crate) fn impose_boundary(&self, u: &mut [f64]) {
        for (i, v) in u.iter_mut().enumerate() {
            if !self.free[i] {
                *v = self.problem.boundary[i];
            }
        }
    }

    fn tet_volume(&self) -> f64 {
        self.problem.grid.h.powi(3) / 6.0
    }

    /// Visits every tetrahedron with its cell origin node, corner sequence and gradient.
    pub(crate) fn for_each_tet<F: FnMut([usize; 3], usize, [f64; 3])>(
        &self,
        u: &[f64],
        mut visit: F,
    ) {
        let grid = &self.problem.grid;
        let inv_h = 1.0 / grid.h;
        let [sx, sy, sz] = grid.shape;
        let mut vals = [0.0; 8];
        for k in 0..sz - 1 {
            for j in 0..sy - 1 {
                for i in 0..sx - 1 {
                    let base = i + sx * (j + sy * k);
                    for (v, off) in vals.iter_mut().zip(&self.corner_offsets) {
                        *v = u[base + off];
                    }
                    for (t, (path, axes)) in KUHN.iter().enumerate() {
                        let mut g = [0.0; 3];
                        for s in 0..3 {
                            g[axes[s]] = (vals[path[s + 1]] - vals[path[s]]) * inv_h;
                        }
                        visit([i, j, k], t, g);
                    }
                }
            }
        }
    }

    pub(crate) fn value(&self, u: &[f64]) -> f64 {
        let table = &self.problem.coefficients;
        let mut bulk = CompensatedSum::default();
        self.for_each_tet(u, |_, _, g| {
            bulk.add(table.density_sq(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]));
        });
        self.tet_volume() * bulk.value() - self.pairing(u)
    }

    /// `sum_k a_k u(x_k)`.
    pub(crate) fn pairing(&self, u: &[f64]) -> f64 {
        self.problem
            .charges
            .iter()
            .map(|c| c.strength * u[self.problem.grid.index(c.node)])
            .sum()
    }

    /// Energy and its gradient with respect to the free (interior) nodes;
    /// boundary entries of `grad` are set to zero.
    pub(crate) fn value_and_gradient(&self, u: &[f64], grad: &mut [f64]) -> f64 {
        let grid = &self.problem.grid;
        let table = &self.problem.coefficients;
        let inv_h = 1.0 / grid.h;
        let vol = self.tet_volume();
        let [sx, sy, sz] = grid.shape;
        grad.iter_mut().for_each(|g| *g = 0.0);

        let mut bulk = CompensatedSum::default();
        let mut vals = [0.0; 8];
        for k in 0..sz - 1 {
            for j in 0..sy - 1 {
                for i in 0..sx - 1 {
                    let base = i + sx * (j + sy * k);
                    for (v, off) in vals.iter_mut().zip(&self.corner_offsets) {
                        *v = u[base + off];
                    }
                    let mut local = [0.0; 8];
                    let mut cell_energy = 0.0;
                    for (path, _) in &KUHN {
                        let mut d = [0.0; 3];
                        for s in 0..3 {
                            d[s] = (vals[path[s + 1]] - vals[path[s]]) * inv_h;
                        }
                        let t2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
                        cell_energy += table.density_sq(t2);
                        let w = table.flux_weight(t2);
                        let f = [w * d[0], w * d[1], w * d[2]];
                        local[path[0]] -= f[0];
                        local[path[1]] += f[0] - f[1];
                        local[path[2]] += f[1] - f[2];
                        local[path[3]] += f[2];
                    }
                    bulk.add(cell_energy);
                    for (l, off) in local.iter().zip(&self.corner_offsets) {
                        grad[base + off] += l * vol * inv_h;
                    }
                }
            }
        }
        for (idx, g) in grad.iter_mut().enumerate() {
            if self.free[idx] {
                *g -= self.rho[idx];
            } else {
                *g = 0.0;
            }
        }
        vol * bulk.value() - self.pairing(u)
    }

    /// Discrete Dirichlet integral `sum_T |T| |grad u|_T^2`.
    pub(crate) fn dirichlet(&self, u: &[f64]) -> f64 {
        let mut acc = CompensatedSum::default();
        self.for_each_tet(u, |_, _, g| {
            acc.add(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
        });
        self.tet_volume() * acc.value()
    }
}

/// Centroid offset (in units of h, from the cell origin) of Kuhn tetrahedron `t`.
pub(crate) fn tet_centroid(t: usize) -> [f64; 3] {
    let mut c = [0.0; 3];
    for &corner in &KUHN[t].0 {
        for (d, x) in c.iter_mut().enumerate() {
            *x += ((corner >> d) & 1) as f64 * 0.25;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charges::{Charge, ChargeConfig};
    use crate::field::grid::{assemble_problem, BoundaryRule, BoxSpec};

    fn problem(m: usize) -> DiscreteProblem {
        let cfg = ChargeConfig::new(3, vec![Charge::new(vec![0.0; 3], 1.0)]).unwrap();
        assemble_problem(&cfg, &BoxSpec::cube(1.0, 0.25), m, BoundaryRule::Zero).unwrap()
    }

    #[test]
    fn kuhn_paths_are_monotone_lattice_paths() {
        for (path, axes) in &KUHN {
            assert_eq!(path[0], 0);
            assert_eq!(path[3], 7);
            for s in 0..3 {
                assert_eq!(path[s + 1] - path[s], 1 << axes[s]);
            }
        }
    }

    #[test]
    fn linear_function_has_constant_gradient() {
        let p = problem(3);
        let e = Energy::new(&p);
        let u: Vec<f64> = (0..p.grid.len())
            .map(|i| {
                let x = p.grid.position(p.grid.node(i));
                0.3 * x[0] - 0.2 * x[1] + 0.1 * x[2]
            })
            .collect();
        e.for_each_tet(&u, |_, _, g| {
            assert!(
                (g[0] - 0.3).abs() < 1e-12
                    && (g[1] + 0.2).abs() < 1e-12
                    && (g[2] - 0.1).abs() < 1e-12
            );
        });
        // |grad u|^2 = 0.14 over a box of volume 8
        assert!((e.dirichlet(&u) - 0.14 * 8.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_stencil_for_order_one() {
        let p = problem(1);
        let e = Energy::new(&p);
        let mut u = vec![0.0; p.grid.len()];
        let centre = p.grid.index([4, 4, 4]);
        u[centre] = 1.0;
        let mut grad = vec![0.0; u.len()];
        e.value_and_gradient(&u, &mut grad);
        let h = p.grid.h;
        // seven-point stencil scaled by h^3 / h^2, minus the unit charge
        assert!((grad[centre] - (6.0 * h - 1.0)).abs() < 1e-12);
        assert!((grad[p.grid.index([5, 4, 4])] + h).abs() < 1e-12);
        assert!(grad[p.grid.index([5, 5, 4])].abs() < 1e-12);
    }

    #[test]
    fn centroids_inside_unit_cell() {
        for t in 0..6 {
            let c = tet_centroid(t);
            assert!(c.iter().all(|x| *x > 0.0 && *x < 1.0));
        }
    }
}
