use super::mesh::{rotation_operator, wall_rotation_functional, GridMesh2D};
use crate::error::{LabError, Result};
use crate::linalg::lanczos::{lowest_eigenpairs, LanczosOptions};
use crate::linalg::skyline::Skyline;
use crate::linalg::sparse::{Assembler, SparseOperator};
use serde::{Deserialize, Serialize};

/// Lowest two Dirichlet eigenvalues of the cross-section and derived
/// integrals. `u0` and `u1` are nodal values normalized so that
/// `h^2 * sum(u^2) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseModes {
    pub lambda0: f64,
    pub lambda1: f64,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    #[serde(rename = "C_S")]
    pub c_s: f64,
    pub orthogonality_residual: f64,
    pub resolution: usize,
}

/// The JSON record emitted for a modes run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModesRecord {
    pub lambda0: f64,
    pub lambda1: f64,
    #[serde(rename = "C_S")]
    pub c_s: f64,
    pub orthogonality_residual: f64,
    pub resolution: usize,
}

impl TransverseModes {
    pub fn record(&self) -> ModesRecord {
        ModesRecord {
            lambda0: self.lambda0,
            lambda1: self.lambda1,
            c_s: self.c_s,
            orthogonality_residual: self.orthogonality_residual,
            resolution: self.resolution,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModeOptions {
    pub tol: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for ModeOptions {
    fn default() -> Self {
        ModeOptions {
            tol: 1e-11,
            max_steps: 400,
            seed: 2024,
        }
    }
}

pub fn solve_modes(op: &SparseOperator, mesh: &GridMesh2D, opts: &ModeOptions) -> Result<TransverseModes> {
    if op.dim() != mesh.len() {
        return Err(LabError::InvalidInput("operator and mesh sizes differ".into()));
    }
    let fac = Skyline::factor(op, 0.0)?;
    let lopts = LanczosOptions {
        nev: 1,
        tol: opts.tol,
        max_steps: opts.max_steps,
        seed: opts.seed,
        sigma: 0.0,
    };
    let ground = lowest_eigenpairs(op, |v| fac.solve(v), &lopts, &[])?;
    let mut v0 = ground.vectors[0].clone();
    if v0.iter().sum::<f64>() < 0.0 {
        v0.iter_mut().for_each(|x| *x = -*x);
    }
    let excited = lowest_eigenpairs(op, |v| fac.solve(v), &lopts, &[v0.clone()])?;
    let lambda0 = ground.values[0];
    let lambda1 = excited.values[0];
    let gap = lambda1 - lambda0;
    if gap < 1e-8 * lambda0.abs().max(1.0) {
        return Err(LabError::GroundStateDegenerate { gap });
    }
    if v0.iter().any(|&x| x <= 0.0) {
        return Err(LabError::InvalidInput(
            "ground state changes sign; the cross-section mesh is probably disconnected".into(),
        ));
    }
    let scale = 1.0 / mesh.h;
    let u0: Vec<f64> = v0.iter().map(|x| x * scale).collect();
    let u1: Vec<f64> = excited.vectors[0].iter().map(|x| x * scale).collect();
    let mut modes = TransverseModes {
        lambda0,
        lambda1,
        u0,
        u1,
        c_s: 0.0,
        orthogonality_residual: 0.0,
        resolution: mesh.spec.resolution,
    };
    modes.c_s = compute_cs(&modes, mesh);
    modes.orthogonality_residual = check_orthogonality(&modes, mesh);
    Ok(modes)
}

/// `C(S) = int |grad u0 . R y|^2 dy` with boundary strips using the
/// one-sided normal derivative at the wall.
pub fn compute_cs(modes: &TransverseModes, mesh: &GridMesh2D) -> f64 {
    let j = rotation_operator(mesh);
    let ju = j.matvec(&modes.u0);
    let nodal: Vec<f64> = ju.iter().map(|x| x * x).collect();
    let c = mesh.integrate(&nodal, |i, d| {
        let v: f64 = wall_rotation_functional(mesh, &j, i, d)
            .iter()
            .map(|&(k, c)| c * modes.u0[k])
            .sum();
        v * v
    });
    c.max(0.0)
}

/// `|int u0 (grad u0 . R y) dy|`, zero in the continuum for any S.
pub fn check_orthogonality(modes: &TransverseModes, mesh: &GridMesh2D) -> f64 {
    let ju = rotation_operator(mesh).matvec(&modes.u0);
    let nodal: Vec<f64> = modes.u0.iter().zip(&ju).map(|(a, b)| a * b).collect();
    mesh.integrate(&nodal, |_, _| 0.0).abs()
}

/// Nodal matrix `Q` with `u^T Q u` equal to the quadrature of `|J u|^2`
/// used by [`compute_cs`]. Nonnegative by construction.
pub fn rotation_energy_form(mesh: &GridMesh2D) -> SparseOperator {
    let j = rotation_operator(mesh);
    let n = mesh.len();
    let mut a = Assembler::with_capacity(n, 40 * n);
    let mut push_square = |w: f64, row: &[(usize, f64)]| {
        for &(p, cp) in row {
            for &(q, cq) in row {
                a.add(p, q, w * cp * cq);
            }
        }
    };
    for i in 0..n {
        let row: Vec<(usize, f64)> = j
            .matrix()
            .outer_view(i)
            .map(|r| r.iter().map(|(k, &v)| (k, v)).collect())
            .unwrap_or_default();
        push_square(mesh.cell_weights[i], &row);
        for d in 0..4 {
            let w = mesh.wall_weights[i][d];
            if w != 0.0 {
                push_square(w, &wall_rotation_functional(mesh, &j, i, d));
            }
        }
    }
    a.build_symmetric()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mesh::{assemble_transverse_laplacian, build_mesh};
    use crate::geometry::shape::CrossSectionSpec;

    fn modes_for(spec: CrossSectionSpec) -> (GridMesh2D, TransverseModes) {
        let mesh = build_mesh(&spec).unwrap();
        let op = assemble_transverse_laplacian(&mesh);
        let m = solve_modes(&op, &mesh, &ModeOptions::default()).unwrap();
        (mesh, m)
    }

    #[test]
    fn normalization_and_positivity() {
        let (mesh, m) = modes_for(CrossSectionSpec::ellipse(1.0, 0.6, 12));
        let norm: f64 = m.u0.iter().map(|x| x * x).sum::<f64>() * mesh.mass();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(m.u0.iter().all(|&x| x > 0.0));
        assert!(m.lambda0 < m.lambda1);
        assert!(m.c_s > 0.0);
    }

    #[test]
    fn rotation_form_reproduces_cs() {
        let (mesh, m) = modes_for(CrossSectionSpec::ellipse(1.0, 0.5, 10).with_center([0.1, 0.05]));
        let q = rotation_energy_form(&mesh);
        assert!(q.is_symmetric());
        assert!((q.quad_form(&m.u0) - m.c_s).abs() < 1e-10 * m.c_s.max(1.0));
    }

    #[test]
    fn symmetric_square_has_zero_orthogonality_residual() {
        let (_, m) = modes_for(CrossSectionSpec::square(1.0, 12));
        assert!(m.orthogonality_residual < 1e-12);
    }
}
