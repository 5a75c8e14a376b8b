use super::mesh::{assemble_transverse_laplacian, build_mesh, rotation_operator, GridMesh2D};
use super::modes::{rotation_energy_form, solve_modes, ModeOptions, TransverseModes};
use super::radial::{solve_radial_modes, RadialMesh};
use super::shape::{CrossSectionSpec, Shape};
use crate::error::{LabError, Result};
use crate::linalg::lanczos::{lowest_eigenpairs, LanczosOptions};
use crate::linalg::skyline::Skyline;
use crate::linalg::sparse::{Assembler, SparseOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransverseKind {
    Cartesian,
    /// Radial (m = 0) sector of a disk centered on the axis.
    Radial,
    /// Span of the lowest transverse eigenvectors of a Cartesian mesh.
    Modal,
}

/// Mesh eigenvectors spanning a [`TransverseKind::Modal`] basis.
#[derive(Debug, Clone)]
pub struct ModalProjection {
    /// Orthonormal mesh vectors, one per retained mode.
    pub phi: Vec<Vec<f64>>,
    /// |y|^2 at each mesh node.
    pub radius2: Vec<f64>,
}

impl ModalProjection {
    /// Dense `Phi^T diag(f) Phi`, row-major.
    pub fn weighted_gram(&self, f: &[f64]) -> Vec<f64> {
        let k = self.phi.len();
        let mut g = vec![0.0; k * k];
        for a in 0..k {
            let fa: Vec<f64> = self.phi[a].iter().zip(f).map(|(p, w)| p * w).collect();
            for b in a..k {
                let v: f64 = fa.iter().zip(&self.phi[b]).map(|(p, q)| p * q).sum();
                g[a * k + b] = v;
                g[b * k + a] = v;
            }
        }
        g
    }

    fn project_operator(&self, op: &SparseOperator) -> SparseOperator {
        let k = self.phi.len();
        let images: Vec<Vec<f64>> = self.phi.iter().map(|p| op.matvec(p)).collect();
        let mut a = Assembler::with_capacity(k, k * k);
        for i in 0..k {
            for j in 0..k {
                let v: f64 = self.phi[i].iter().zip(&images[j]).map(|(p, q)| p * q).sum();
                a.add(i, j, v);
            }
        }
        a.build()
    }
}

/// Twist couplings in orthonormal coordinates.
#[derive(Debug, Clone)]
pub struct TwistData {
    /// `J = y1 d/dy2 - y2 d/dy1` (same matrix in nodal and orthonormal form).
    pub rotation: SparseOperator,
    /// Quadratic form of `|J v|^2` with boundary strips.
    pub energy: SparseOperator,
}

/// Everything the tube assembly needs from the cross-section, in
/// orthonormal coordinates where the discrete L2(S) norm is Euclidean.
#[derive(Debug, Clone)]
pub struct TransverseBasis {
    pub kind: TransverseKind,
    pub stiffness: SparseOperator,
    pub lambda0: f64,
    pub lambda1: f64,
    pub u0: Vec<f64>,
    /// A unit vector orthogonal to `u0`: the next eigenvector in the sector.
    pub u1: Vec<f64>,
    /// |y|^2 at each node.
    pub radius2: Vec<f64>,
    pub c_s: f64,
    pub max_radius2: f64,
    pub twist: Option<TwistData>,
    pub modal: Option<ModalProjection>,
}

impl TransverseBasis {
    pub fn from_mesh(mesh: &GridMesh2D, modes: &TransverseModes) -> Self {
        let h = mesh.h;
        let stiffness = assemble_transverse_laplacian(mesh);
        let twist = TwistData {
            rotation: rotation_operator(mesh),
            energy: rotation_energy_form(mesh).scaled(1.0 / (h * h)),
        };
        TransverseBasis {
            kind: TransverseKind::Cartesian,
            stiffness,
            lambda0: modes.lambda0,
            lambda1: modes.lambda1,
            u0: modes.u0.iter().map(|x| x * h).collect(),
            u1: modes.u1.iter().map(|x| x * h).collect(),
            radius2: mesh.nodes.iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect(),
            c_s: modes.c_s,
            max_radius2: mesh.spec.max_radius2(),
            twist: Some(twist),
            modal: None,
        }
    }

    pub fn radial_disk(radius: f64, cells: usize) -> Result<Self> {
        let mesh = RadialMesh::new(radius, cells)?;
        let modes = solve_radial_modes(&mesh)?;
        Ok(TransverseBasis {
            kind: TransverseKind::Radial,
            stiffness: mesh.harmonic_block(0).to_sparse(),
            lambda0: modes.lambda0,
            lambda1: modes.lambda1,
            u0: modes.v0,
            u1: modes.v1,
            radius2: mesh.r.iter().map(|r| r * r).collect(),
            c_s: 0.0,
            max_radius2: radius * radius,
            twist: None,
            modal: None,
        })
    }

    /// Cartesian basis for any admissible cross-section.
    pub fn cartesian(spec: &CrossSectionSpec, opts: &ModeOptions) -> Result<(Self, GridMesh2D, TransverseModes)> {
        let mesh = build_mesh(spec)?;
        let op = assemble_transverse_laplacian(&mesh);
        let modes = solve_modes(&op, &mesh, opts)?;
        Ok((Self::from_mesh(&mesh, &modes), mesh, modes))
    }

    /// The lowest `count` eigenvectors of the mesh Laplacian as a reduced
    /// transverse basis; the limit mode is exact and the rest of the
    /// spectrum is truncated.
    pub fn modal(spec: &CrossSectionSpec, count: usize, opts: &ModeOptions) -> Result<Self> {
        if count < 2 {
            return Err(LabError::InvalidInput("a modal basis needs at least 2 modes".into()));
        }
        let mesh = build_mesh(spec)?;
        if count > mesh.len() {
            return Err(LabError::MeshTooCoarse(format!("{} nodes for {count} modes", mesh.len())));
        }
        let op = assemble_transverse_laplacian(&mesh);
        let modes = solve_modes(&op, &mesh, opts)?;
        let fac = Skyline::factor(&op, 0.0)?;
        let lopts = LanczosOptions {
            nev: 1,
            tol: opts.tol,
            max_steps: opts.max_steps,
            seed: opts.seed,
            sigma: 0.0,
        };
        let h = mesh.h;
        let mut phi: Vec<Vec<f64>> = vec![modes.u0.iter().map(|x| x * h).collect()];
        let mut values = vec![modes.lambda0];
        while phi.len() < count {
            let next = lowest_eigenpairs(&op, |v| fac.solve(v), &lopts, &phi)?;
            values.push(next.values[0]);
            phi.push(next.vectors[0].clone());
        }
        let rotation = rotation_operator(&mesh);
        let energy = rotation_energy_form(&mesh).scaled(1.0 / (h * h));
        let projection = ModalProjection {
            phi,
            radius2: mesh.nodes.iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect(),
        };
        let twist = TwistData {
            rotation: projection.project_operator(&rotation),
            energy: projection.project_operator(&energy),
        };
        let mut diag = Assembler::with_capacity(count, count);
        for (i, &l) in values.iter().enumerate() {
            diag.add(i, i, l);
        }
        let unit = |k: usize| (0..count).map(|i| if i == k { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        Ok(TransverseBasis {
            kind: TransverseKind::Modal,
            stiffness: diag.build(),
            lambda0: modes.lambda0,
            lambda1: values[1],
            u0: unit(0),
            u1: unit(1),
            radius2: Vec::new(),
            c_s: modes.c_s,
            max_radius2: spec.max_radius2(),
            twist: Some(twist),
            modal: Some(projection),
        })
    }

    /// Radial basis for an axis-centered disk, resolution taken per unit
    /// length as for the Cartesian mesh.
    pub fn axisymmetric(spec: &CrossSectionSpec) -> Result<Self> {
        match spec.shape {
            Shape::Disk { radius } if spec.center == [0.0, 0.0] => {
                let cells = ((radius * spec.resolution as f64).round() as usize).max(3);
                Self::radial_disk(radius, cells)
            }
            _ => Err(LabError::ModeConflict(
                "axisymmetric mode requires a disk centered on the axis".into(),
            )),
        }
    }

    pub fn len(&self) -> usize {
        self.u0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u0.is_empty()
    }

    /// Ground mode and |y|^2 at the quadrature nodes of the cross-section.
    pub fn nodal(&self) -> (&[f64], &[f64]) {
        match &self.modal {
            Some(m) => (&m.phi[0], &m.radius2),
            None => (&self.u0, &self.radius2),
        }
    }

    /// Values at the quadrature nodes of a vector given in this basis.
    pub fn to_nodal(&self, slice: &[f64]) -> Vec<f64> {
        match &self.modal {
            Some(m) => {
                let mut out = vec![0.0; m.radius2.len()];
                for (c, p) in slice.iter().zip(&m.phi) {
                    for (o, v) in out.iter_mut().zip(p) {
                        *o += c * v;
                    }
                }
                out
            }
            None => slice.to_vec(),
        }
    }

    /// `int_S u0^2 / (sqrt(x^2 + eps^2 |y|^2) + reg) dy` by mesh quadrature.
    pub fn coulomb_average(&self, x: f64, eps: f64, reg: f64) -> f64 {
        let e2 = eps * eps;
        let (u0, r2) = self.nodal();
        u0.iter()
            .zip(r2)
            .map(|(v, r2)| v * v / ((x * x + e2 * r2).sqrt() + reg))
            .sum()
    }

    /// Per-x-slice coefficient of `u0` in a transverse vector.
    pub fn project(&self, slice: &[f64]) -> f64 {
        slice.iter().zip(&self.u0).map(|(a, b)| a * b).sum()
    }
}
