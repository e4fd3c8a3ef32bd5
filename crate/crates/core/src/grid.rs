//! Discretization of the prior support.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// How nodes are distributed over `[a1, a2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[serde(alias = "linear")]
    UniformInTheta,
    #[default]
    #[serde(alias = "log")]
    UniformInLogTheta,
}

/// Default node count for bias solves and posterior grids.
pub const DEFAULT_NODES: usize = 2049;

/// Uniform grid in either `theta` or `u = ln theta`.
///
/// The solver works in the grid's own coordinate: `theta` for
/// [`Spacing::UniformInTheta`], `ln theta` for [`Spacing::UniformInLogTheta`].
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureGrid {
    a1: f64,
    a2: f64,
    spacing: Spacing,
    step: f64,
    nodes: Vec<f64>,
}

impl TemperatureGrid {
    pub fn new(a1: f64, a2: f64, m: usize, spacing: Spacing) -> Result<Self> {
        if !(a1 > 0.0 && a2 > a1 && a2.is_finite()) {
            return domain(format!(
                "grid interval must satisfy 0 < a1 < a2, got [{a1}, {a2}]"
            ));
        }
        if m < 3 {
            return domain(format!("grid needs at least 3 nodes, got {m}"));
        }
        let last = (m - 1) as f64;
        let (step, nodes) = match spacing {
            Spacing::UniformInTheta => {
                let h = (a2 - a1) / last;
                let nodes = (0..m)
                    .map(|i| match i {
                        0 => a1,
                        i if i == m - 1 => a2,
                        i => a1 + h * i as f64,
                    })
                    .collect();
                (h, nodes)
            }
            Spacing::UniformInLogTheta => {
                let (u1, u2) = (a1.ln(), a2.ln());
                let h = (u2 - u1) / last;
                let nodes = (0..m)
                    .map(|i| match i {
                        0 => a1,
                        i if i == m - 1 => a2,
                        i => (u1 + h * i as f64).exp(),
                    })
                    .collect();
                (h, nodes)
            }
        };
        Ok(TemperatureGrid {
            a1,
            a2,
            spacing,
            step,
            nodes,
        })
    }

    pub fn log_uniform(a1: f64, a2: f64, m: usize) -> Result<Self> {
        Self::new(a1, a2, m, Spacing::UniformInLogTheta)
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Node spacing in the grid coordinate.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Grid coordinate of node `i` (`theta` or `ln theta`).
    pub fn coordinate(&self, i: usize) -> f64 {
        match self.spacing {
            Spacing::UniformInTheta => self.nodes[i],
            Spacing::UniformInLogTheta => self.nodes[i].ln(),
        }
    }

    /// `d theta / d coordinate` at node `i`.
    pub fn jacobian(&self, i: usize) -> f64 {
        match self.spacing {
            Spacing::UniformInTheta => 1.0,
            Spacing::UniformInLogTheta => self.nodes[i],
        }
    }

    /// Same interval and spacing with `m` nodes.
    pub fn with_nodes(&self, m: usize) -> Result<Self> {
        Self::new(self.a1, self.a2, m, self.spacing)
    }

    /// Nested refinement: every interval halved (`2m - 1` nodes).
    pub fn refined(&self) -> Self {
        self.with_nodes(2 * self.len() - 1)
            .expect("refinement of a valid grid is valid")
    }

    /// Nested coarsening (every other node), when the node count allows it.
    pub fn coarsened(&self) -> Option<Self> {
        let m = self.len();
        if m % 2 == 1 && m >= 5 {
            self.with_nodes(m.div_ceil(2)).ok()
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(TemperatureGrid::log_uniform(0.1, 10.0, 2).is_err());
        assert!(TemperatureGrid::log_uniform(0.0, 10.0, 9).is_err());
        assert!(TemperatureGrid::log_uniform(1.0, 1.0, 9).is_err());
    }

    #[test]
    fn coarsening_is_nested() {
        let g = TemperatureGrid::log_uniform(0.1, 10.0, 9).unwrap();
        let c = g.coarsened().unwrap();
        assert_eq!(c.len(), 5);
        for (i, t) in c.nodes().iter().enumerate() {
            assert!((t - g.nodes()[2 * i]).abs() < 1e-14 * t);
        }
        assert!(g.with_nodes(8).unwrap().coarsened().is_none());
        assert_eq!(g.refined().len(), 17);
    }

    proptest! {
        #[test]
        fn nodes_are_strictly_increasing_with_exact_edges(
            a1 in 1e-3f64..10.0,
            ratio in 1.01f64..1e4,
            m in 3usize..600,
            log in any::<bool>(),
        ) {
            let a2 = a1 * ratio;
            let spacing = if log { Spacing::UniformInLogTheta } else { Spacing::UniformInTheta };
            let g = TemperatureGrid::new(a1, a2, m, spacing).unwrap();
            prop_assert_eq!(g.nodes()[0], a1);
            prop_assert_eq!(g.nodes()[m - 1], a2);
            prop_assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
            if log {
                let h = g.step();
                for i in 1..m {
                    let d = g.nodes()[i].ln() - g.nodes()[i - 1].ln();
                    prop_assert!((d - h).abs() < 1e-12);
                }
            }
        }
    }
}
