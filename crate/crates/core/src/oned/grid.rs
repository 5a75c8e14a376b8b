use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};

/// Uniform grid on `[-L, L]` whose nodes avoid the origin. Dirichlet walls
/// sit at `-L`, `L` and, for the decoupled operators, at `0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub l: f64,
    pub h: f64,
    /// Node coordinates, strictly increasing.
    pub x: Vec<f64>,
}

impl Grid1D {
    /// Staggered grid with nodes at `+-(k + 1/2) h`, `k = 0..n`, `n = L / h`.
    pub fn staggered(l: f64, h: f64) -> Result<Self> {
        if !(l > 0.0) || !(h > 0.0) {
            return Err(LabError::InvalidInput(format!("grid needs L > 0 and h > 0 (got L={l}, h={h})")));
        }
        if h > 0.01 * l * (1.0 + 1e-12) {
            return Err(LabError::MeshTooCoarse(format!("h = {h} exceeds L/100 = {}", 0.01 * l)));
        }
        let n = (l / h).round() as usize;
        let h = l / n as f64;
        let mut x = Vec::with_capacity(2 * n);
        for k in (0..n).rev() {
            x.push(-(k as f64 + 0.5) * h);
        }
        for k in 0..n {
            x.push((k as f64 + 0.5) * h);
        }
        Ok(Grid1D { l, h, x })
    }

    /// Grid from explicit, uniformly spaced nodes inside `(-L, L)`.
    pub fn from_nodes(l: f64, x: Vec<f64>) -> Result<Self> {
        if x.len() < 3 {
            return Err(LabError::MeshTooCoarse(format!("{} nodes", x.len())));
        }
        if let Some(index) = x.iter().position(|&v| v == 0.0) {
            return Err(LabError::OriginOnGrid { index });
        }
        let h = x[1] - x[0];
        let uniform = x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        if !(h > 0.0) || !uniform {
            return Err(LabError::InvalidInput("nodes must be increasing and uniformly spaced".into()));
        }
        if x[0] <= -l || x[x.len() - 1] >= l {
            return Err(LabError::InvalidInput("nodes must lie inside (-L, L)".into()));
        }
        if h > 0.01 * l * (1.0 + 1e-12) {
            return Err(LabError::MeshTooCoarse(format!("h = {h} exceeds L/100 = {}", 0.01 * l)));
        }
        Ok(Grid1D { l, h, x })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Index of the first node with `x > 0`.
    pub fn split(&self) -> usize {
        self.x.partition_point(|&v| v < 0.0)
    }

    /// Discrete L2 inner product.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.h * a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>()
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.x.iter().map(|&v| f(v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staggered_nodes_avoid_origin() {
        let g = Grid1D::staggered(10.0, 0.1).unwrap();
        assert_eq!(g.len(), 200);
        assert!(g.x.iter().all(|&v| v != 0.0));
        assert!((g.x[g.split()] - 0.05).abs() < 1e-12);
        assert!((g.x[g.split() - 1] + 0.05).abs() < 1e-12);
    }

    #[test]
    fn explicit_origin_node_is_rejected() {
        let x: Vec<f64> = (-150..=150).map(|k| k as f64 * 0.01).collect();
        let e = Grid1D::from_nodes(2.0, x).unwrap_err();
        assert_eq!(e.code(), "origin-on-grid");
    }

    #[test]
    fn coarse_spacing_is_rejected() {
        assert!(Grid1D::staggered(1.0, 0.05).is_err());
    }
}
