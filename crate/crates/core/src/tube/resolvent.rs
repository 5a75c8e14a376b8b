use crate::error::{LabError, Result};
use crate::linalg::krylov::cocg;
use crate::linalg::skyline::{solve_refined, Skyline, DEFAULT_ENVELOPE_CAP};
use crate::linalg::sparse::SparseOperator;
use crate::linalg::Scalar;
use num_complex::Complex64;
use serde::Serialize;

pub const DEFAULT_RTOL: f64 = 1e-9;

/// Outcome of one solve of `(A - z) psi = theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventSolve<T> {
    pub shift: Complex64,
    pub psi: Vec<T>,
    pub iterations: usize,
    pub residual: f64,
}

/// JSON summary of a solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveRecord {
    pub epsilon: f64,
    pub shift: [f64; 2],
    pub iterations: usize,
    pub residual: f64,
    pub norms: SolveNorms,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveNorms {
    pub theta: f64,
    pub psi: f64,
}

/// A factored `A - z` reused across right-hand sides. Falls back to
/// Jacobi-preconditioned COCG when the direct factor would not fit.
#[derive(Debug, Clone)]
pub struct Resolvent<T: Scalar> {
    op: SparseOperator,
    z: T,
    shift: Complex64,
    fac: Option<Skyline<T>>,
    rtol: f64,
}

impl<T: Scalar> Resolvent<T> {
    pub fn new(op: &SparseOperator, z: T, shift: Complex64, rtol: f64) -> Result<Self> {
        let fac = match Skyline::factor_capped(op, z, DEFAULT_ENVELOPE_CAP) {
            Ok(f) => Some(f),
            Err(LabError::GridBudget { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Resolvent {
            op: op.clone(),
            z,
            shift,
            fac,
            rtol,
        })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn apply(&self, theta: &[T]) -> Result<ResolventSolve<T>> {
        let refined = match &self.fac {
            Some(f) => match solve_refined(&self.op, f, self.z, theta, self.rtol) {
                Ok(r) => r,
                Err(LabError::LinearSolveStall { .. }) => cocg(&self.op, self.z, theta, self.rtol, 20 * self.dim())?,
                Err(e) => return Err(e),
            },
            None => cocg(&self.op, self.z, theta, self.rtol, 20 * self.dim())?,
        };
        Ok(ResolventSolve {
            shift: self.shift,
            psi: refined.x,
            iterations: refined.iterations,
            residual: refined.residual,
        })
    }

    /// `(A - z)^{-1} theta` as a bare vector.
    pub fn solve(&self, theta: &[T]) -> Result<Vec<T>> {
        Ok(self.apply(theta)?.psi)
    }
}

/// One-shot real solve of `(A - z) psi = theta`.
pub fn apply_resolvent_real(op: &SparseOperator, z: f64, theta: &[f64], rtol: f64) -> Result<ResolventSolve<f64>> {
    Resolvent::new(op, z, Complex64::new(z, 0.0), rtol)?.apply(theta)
}

/// One-shot complex solve of `(A - z) psi = theta`.
pub fn apply_resolvent_complex(op: &SparseOperator, z: Complex64, theta: &[Complex64], rtol: f64) -> Result<ResolventSolve<Complex64>> {
    Resolvent::new(op, z, z, rtol)?.apply(theta)
}
