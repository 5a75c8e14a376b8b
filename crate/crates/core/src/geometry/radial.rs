use crate::error::{LabError, Result};
use crate::linalg::tridiag::SymTridiagonal;
use std::f64::consts::PI;

/// Cell-centered finite-volume grid on [0, R] for radial functions on the
/// disk, with nodes at `(j + 1/2) h` and the Dirichlet wall at `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    pub radius: f64,
    pub h: f64,
    pub r: Vec<f64>,
    /// Annulus areas `2 pi r_j h`.
    pub weights: Vec<f64>,
}

impl RadialMesh {
    pub fn new(radius: f64, cells: usize) -> Result<Self> {
        if !(radius > 0.0) || cells < 3 {
            return Err(LabError::MeshTooCoarse(format!(
                "radial mesh needs radius > 0 and at least 3 cells (got {cells})"
            )));
        }
        let h = radius / cells as f64;
        let r: Vec<f64> = (0..cells).map(|j| (j as f64 + 0.5) * h).collect();
        let weights = r.iter().map(|&rj| 2.0 * PI * rj * h).collect();
        Ok(RadialMesh { radius, h, r, weights })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Angular harmonic `m` block of `-Laplacian` in orthonormal
    /// coordinates `v_j = sqrt(w_j) u_j`.
    pub fn harmonic_block(&self, m: u32) -> SymTridiagonal {
        let n = self.len();
        let mut k_diag = vec![0.0; n];
        let mut k_off = vec![0.0; n - 1];
        for j in 0..n - 1 {
            // Flux through the circle r = (j + 1) h over the spacing h.
            let c = 2.0 * PI * (j as f64 + 1.0);
            k_diag[j] += c;
            k_diag[j + 1] += c;
            k_off[j] = -c;
        }
        k_diag[n - 1] += 2.0 * PI * self.radius / (0.5 * self.h);
        let m2 = (m * m) as f64;
        let diag = (0..n)
            .map(|j| k_diag[j] / self.weights[j] + m2 / (self.r[j] * self.r[j]))
            .collect();
        let off = (0..n - 1)
            .map(|j| k_off[j] / (self.weights[j] * self.weights[j + 1]).sqrt())
            .collect();
        SymTridiagonal::new(diag, off)
    }
}

/// Radial ground state data in orthonormal coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialModes {
    pub lambda0: f64,
    /// Second Dirichlet eigenvalue of the disk over all harmonics.
    pub lambda1: f64,
    /// Second eigenvalue within the radial (m = 0) sector.
    pub lambda1_radial: f64,
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
}

pub fn solve_radial_modes(mesh: &RadialMesh) -> Result<RadialModes> {
    let block0 = mesh.harmonic_block(0);
    let block1 = mesh.harmonic_block(1);
    let lambda0 = block0.eigenvalue(0);
    let lambda1_radial = block0.eigenvalue(1);
    let lambda1 = block1.eigenvalue(0).min(lambda1_radial);
    if lambda1 - lambda0 < 1e-8 * lambda0 {
        return Err(LabError::GroundStateDegenerate { gap: lambda1 - lambda0 });
    }
    let mut v0 = block0.eigenvector(lambda0);
    if v0.iter().sum::<f64>() < 0.0 {
        v0.iter_mut().for_each(|x| *x = -*x);
    }
    let mut v1 = block0.eigenvector(lambda1_radial);
    let c: f64 = v0.iter().zip(&v1).map(|(a, b)| a * b).sum();
    v1.iter_mut().zip(&v0).for_each(|(b, a)| *b -= c * a);
    let s = v1.iter().map(|x| x * x).sum::<f64>().sqrt();
    v1.iter_mut().for_each(|x| *x /= s);
    Ok(RadialModes {
        lambda0,
        lambda1,
        lambda1_radial,
        v0,
        v1,
    })
}
