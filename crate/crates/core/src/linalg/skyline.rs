use super::sparse::SparseOperator;
use super::{norm, Scalar};
use crate::error::{LabError, Result};

/// Envelope (profile) LDL^T factorization of `A - z I` without pivoting.
///
/// Works for real symmetric and complex symmetric (not Hermitian) matrices;
/// the transpose is never conjugated. Row `i` stores columns
/// `first[i]..i` of the unit lower factor.
#[derive(Debug, Clone)]
pub struct Skyline<T> {
    first: Vec<usize>,
    start: Vec<usize>,
    lower: Vec<T>,
    d: Vec<T>,
}

/// Default cap on stored envelope entries (about 3.2 GB of f64).
pub const DEFAULT_ENVELOPE_CAP: usize = 400_000_000;

impl<T: Scalar> Skyline<T> {
    pub fn factor(op: &SparseOperator, z: T) -> Result<Self> {
        Self::factor_capped(op, z, DEFAULT_ENVELOPE_CAP)
    }

    pub fn factor_capped(op: &SparseOperator, z: T, cap: usize) -> Result<Self> {
        let n = op.dim();
        let first = op.envelope_first();
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for (i, &f) in first.iter().enumerate() {
            start.push(total);
            total += i - f;
        }
        start.push(total);
        if total > cap {
            return Err(LabError::GridBudget {
                unknowns: total,
                budget: cap,
            });
        }
        let mut lower = vec![T::zero(); total];
        let mut d = vec![T::zero(); n];
        let shift = op.shift();
        for (i, row) in op.matrix().outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                if j < i {
                    lower[start[i] + j - first[i]] = T::from_real(v);
                } else if j == i {
                    d[i] = T::from_real(v);
                }
            }
            d[i] = d[i] + T::from_real(shift) - z;
        }

        let mut scale = 0.0f64;
        for v in &d {
            scale = scale.max(v.abs2().sqrt());
        }
        let tiny = 1e-300_f64.max(scale * 1e-15);

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = lower.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi];
            // Overwrite row i with u_ik = l_ik d_k, column by column.
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_j = &done[start[j]..start[j] + (j - fj)];
                let mut s = row_i[j - fi];
                for k in k0..j {
                    s -= row_i[k - fi] * row_j[k - fj];
                }
                row_i[j - fi] = s;
            }
            let mut di = d[i];
            for k in fi..i {
                let u = row_i[k - fi];
                let l = u / d[k];
                row_i[k - fi] = l;
                di -= u * l;
            }
            if di.abs2().sqrt() <= tiny {
                return Err(LabError::InvalidInput(format!(
                    "zero pivot at row {i} in LDL^T factorization"
                )));
            }
            d[i] = di;
        }
        Ok(Skyline {
            first,
            start,
            lower,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn pivots(&self) -> &[T] {
        &self.d
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            let mut s = y[i];
            for (k, l) in (fi..i).zip(row) {
                s -= *l * y[k];
            }
            y[i] = s;
        }
        for i in 0..n {
            y[i] = y[i] / self.d[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = y[i];
            let row = &self.lower[self.start[i]..self.start[i + 1]];
            for (k, l) in (fi..i).zip(row) {
                y[k] -= *l * xi;
            }
        }
        y
    }
}

/// Result of a refined direct solve of `(A - z) x = b`.
#[derive(Debug, Clone)]
pub struct Refined<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub residual: f64,
}

/// Direct solve followed by iterative refinement until the relative
/// residual drops below `rtol`.
pub fn solve_refined<T: Scalar>(
    op: &SparseOperator,
    fac: &Skyline<T>,
    z: T,
    b: &[T],
    rtol: f64,
) -> Result<Refined<T>> {
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(Refined {
            x: vec![T::zero(); b.len()],
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut x = fac.solve(b);
    let mut history = Vec::new();
    for it in 1..=6 {
        let ax = op.matvec(&x);
        let r: Vec<T> = b
            .iter()
            .zip(ax.iter().zip(&x))
            .map(|(bi, (ai, xi))| *bi - (*ai - z * *xi))
            .collect();
        let rel = norm(&r) / bn;
        history.push(rel);
        if rel <= rtol {
            return Ok(Refined {
                x,
                iterations: it,
                residual: rel,
            });
        }
        let dx = fac.solve(&r);
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += *di;
        }
    }
    Err(LabError::LinearSolveStall { history })
}
