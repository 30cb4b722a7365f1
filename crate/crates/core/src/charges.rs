//! Point-charge configurations `rho = sum_k a_k delta_{x_k}` in `R^N`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Charge {
    pub pos: Vec<f64>,
    #[serde(rename = "a")]
    pub strength: f64,
}

impl Charge {
    pub fn new(pos: Vec<f64>, strength: f64) -> Self {
        Self { pos, strength }
    }
}

/// A validated charge configuration.
///
/// Construction enforces `dim >= 3`, a non-empty list, nonzero finite strengths,
/// positions of the right dimension and pairwise distinct positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeConfig {
    dim: usize,
    charges: Vec<Charge>,
}

impl ChargeConfig {
    pub fn new(dim: usize, charges: Vec<Charge>) -> Result<Self> {
        if dim < 3 {
            return invalid(format!("dimension must be at least 3, got {dim}"));
        }
        if charges.is_empty() {
            return invalid("charge list is empty");
        }
        for (k, c) in charges.iter().enumerate() {
            if c.pos.len() != dim {
                return invalid(format!(
                    "charge {k} has a position of length {} in dimension {dim}",
                    c.pos.len()
                ));
            }
            if c.pos.iter().any(|x| !x.is_finite()) {
                return invalid(format!("charge {k} has a non-finite position"));
            }
            if c.strength == 0.0 || !c.strength.is_finite() {
                return invalid(format!("charge {k} has strength {}", c.strength));
            }
        }
        let cfg = Self { dim, charges };
        for (j, l) in cfg.pairs() {
            if cfg.distance(j, l) == 0.0 {
                return invalid(format!("charges {j} and {l} share a position"));
            }
        }
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn charges(&self) -> &[Charge] {
        &self.charges
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn strengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.charges.iter().map(|c| c.strength)
    }

    /// All index pairs `(j, l)` with `j < l`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.charges.len();
        (0..n).flat_map(move |j| (j + 1..n).map(move |l| (j, l)))
    }

    pub fn distance(&self, j: usize, l: usize) -> f64 {
        euclidean(&self.charges[j].pos, &self.charges[l].pos)
    }

    /// Minimum pairwise distance, `None` for a single charge.
    pub fn min_distance(&self) -> Option<f64> {
        self.pairs()
            .map(|(j, l)| self.distance(j, l))
            .fold(None, |acc, d| Some(acc.map_or(d, |m: f64| m.min(d))))
    }

    /// Total strength of the positive charges (0 when there are none).
    pub fn positive_total(&self) -> f64 {
        self.strengths().filter(|a| *a > 0.0).sum()
    }

    /// Total `|a_k|` over the negative charges (0 when there are none).
    pub fn negative_total(&self) -> f64 {
        self.strengths().filter(|a| *a < 0.0).map(f64::abs).sum()
    }

    /// Same strengths with every position multiplied by `lambda`.
    pub fn scaled_positions(&self, lambda: f64) -> Result<Self> {
        let charges = self
            .charges
            .iter()
            .map(|c| Charge::new(c.pos.iter().map(|x| x * lambda).collect(), c.strength))
            .collect();
        Self::new(self.dim, charges)
    }

    pub fn with_strengths(&self, strengths: &[f64]) -> Result<Self> {
        if strengths.len() != self.charges.len() {
            return invalid("strength vector length does not match the charge count");
        }
        let charges = self
            .charges
            .iter()
            .zip(strengths)
            .map(|(c, &a)| Charge::new(c.pos.clone(), a))
            .collect();
        Self::new(self.dim, charges)
    }
}

pub(crate) fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}
