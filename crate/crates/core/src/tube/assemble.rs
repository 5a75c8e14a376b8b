use super::spec::TubeOperatorSpec;
use crate::error::{LabError, Result};
use crate::geometry::{TransverseBasis, TransverseKind};
use crate::linalg::sparse::{Assembler, SparseOperator};
use crate::oned::operator::second_difference;
use crate::oned::Grid1D;

/// Which of the tube forms a [`TubeOperator`] realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    /// Unregularized Coulomb potential.
    B,
    /// Regularized potential.
    A,
    /// Regularized potential plus `c / eps^delta`.
    ADot,
}

/// A discrete tube form in L2-orthonormal coordinates: index
/// `ix * nt + it`, with Euclidean norm equal to the L2(R x S) norm.
#[derive(Debug, Clone)]
pub struct TubeOperator {
    pub kind: FormKind,
    pub spec: TubeOperatorSpec,
    pub grid: Grid1D,
    pub nt: usize,
    pub op: SparseOperator,
}

impl TubeOperator {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn index(&self, ix: usize, it: usize) -> usize {
        ix * self.nt + it
    }

    pub fn form(&self, psi: &[f64]) -> f64 {
        self.op.quad_form(psi)
    }
}

/// Assembles `Kx (x) I + eps^-2 I (x) (S - lambda0) + diag(potential)` and
/// the twist terms. `potential(x, |y|^2)` is sampled at nodes.
fn assemble<P: Fn(f64, f64) -> f64>(spec: &TubeOperatorSpec, basis: &TransverseBasis, potential: P) -> Result<(Grid1D, SparseOperator)> {
    spec.validate()?;
    let grid = spec.x_grid()?;
    let nx = grid.len();
    let nt = basis.len();
    if nx * nt > spec.budget {
        return Err(LabError::GridBudget {
            unknowns: nx * nt,
            budget: spec.budget,
        });
    }
    let twisted = !spec.twist.is_zero();
    if twisted && basis.kind == TransverseKind::Radial {
        return Err(LabError::ModeConflict("axisymmetric mode requires zero twist".into()));
    }
    let kx = second_difference(&grid, false);
    let inv_e2 = 1.0 / (spec.epsilon * spec.epsilon);
    let transverse = basis.stiffness.entries();
    let twist = basis.twist.as_ref();
    let modal = basis.modal.as_ref();
    let per_slice = transverse.len() + if twisted { twist.map_or(0, |t| t.energy.nnz() + 2 * t.rotation.nnz()) } else { 0 };
    let dense = if modal.is_some() { nt * nt } else { 0 };
    let mut a = Assembler::with_capacity(nx * nt, nx * (per_slice + dense + 3 * nt));
    let hx = grid.h;
    for ix in 0..nx {
        let x = grid.x[ix];
        let base = ix * nt;
        for it in 0..nt {
            let i = base + it;
            let v = if modal.is_some() { 0.0 } else { potential(x, basis.radius2[it]) };
            a.add(i, i, kx.diag[ix] - basis.lambda0 * inv_e2 + v);
            if ix + 1 < nx {
                a.add_sym(i, i + nt, kx.off[ix]);
            }
        }
        if let Some(m) = modal {
            let f: Vec<f64> = m.radius2.iter().map(|&r2| potential(x, r2)).collect();
            let g = m.weighted_gram(&f);
            for p in 0..nt {
                for q in 0..nt {
                    a.add(base + p, base + q, g[p * nt + q]);
                }
            }
        }
        for &(p, q, v) in &transverse {
            a.add(base + p, base + q, v * inv_e2);
        }
        if twisted {
            let t = twist.expect("cartesian basis carries twist data");
            let rate = spec.twist.rate(x);
            if rate != 0.0 {
                for (p, q, v) in t.energy.entries() {
                    a.add(base + p, base + q, rate * rate * v);
                }
                // -2 alpha' <Dc psi, J psi> on slice ix, split into its
                // symmetric part when the matrix is built.
                for (nb, dc) in [(ix.wrapping_sub(1), -0.5 / hx), (ix + 1, 0.5 / hx)] {
                    if nb >= nx {
                        continue;
                    }
                    for (p, q, v) in t.rotation.entries() {
                        a.add(nb * nt + p, base + q, -2.0 * rate * dc * v);
                    }
                }
            }
        }
    }
    Ok((grid, a.build_symmetric()))
}

fn potential_b(kappa: f64, eps: f64) -> impl Fn(f64, f64) -> f64 {
    let e2 = eps * eps;
    move |x, r2| -kappa / (x * x + e2 * r2).sqrt()
}

fn potential_a(kappa: f64, eps: f64, reg: f64) -> impl Fn(f64, f64) -> f64 {
    let e2 = eps * eps;
    move |x, r2| -kappa / ((x * x + e2 * r2).sqrt() + reg)
}

/// The unregularized form `b`. Since no node lies at `x = 0` the potential
/// is finite at every node.
pub fn assemble_b_form(spec: &TubeOperatorSpec, basis: &TransverseBasis) -> Result<TubeOperator> {
    let (grid, op) = assemble(spec, basis, potential_b(spec.kappa, spec.epsilon))?;
    Ok(TubeOperator {
        kind: FormKind::B,
        spec: spec.clone(),
        grid,
        nt: basis.len(),
        op,
    })
}

/// The regularized form `a` and its shifted version `a + c/eps^delta`,
/// sharing one stored matrix.
pub fn assemble_a_forms(spec: &TubeOperatorSpec, basis: &TransverseBasis) -> Result<(TubeOperator, TubeOperator)> {
    let (Some(delta), Some(_)) = (spec.delta, spec.c) else {
        return Err(LabError::InvalidInput("regularized forms need delta and c".into()));
    };
    let (grid, op) = assemble(spec, basis, potential_a(spec.kappa, spec.epsilon, spec.epsilon.powf(delta)))?;
    let shifted = op.with_shift(spec.shift());
    let a = TubeOperator {
        kind: FormKind::A,
        spec: spec.clone(),
        grid: grid.clone(),
        nt: basis.len(),
        op,
    };
    let a_dot = TubeOperator {
        kind: FormKind::ADot,
        op: shifted,
        grid,
        ..a.clone()
    };
    Ok((a, a_dot))
}
