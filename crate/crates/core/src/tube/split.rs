use super::assemble::TubeOperator;
use crate::error::{LabError, Result};
use crate::geometry::TransverseBasis;
use crate::linalg::Scalar;
use crate::oned::Operator1D;

/// `psi = w (x) u0 + eta` with `eta` orthogonal to `u0` on every slice.
pub fn project_onto_l<T: Scalar>(psi: &[T], basis: &TransverseBasis) -> (Vec<T>, Vec<T>) {
    let nt = basis.len();
    let mut eta = psi.to_vec();
    let w: Vec<T> = psi
        .chunks(nt)
        .zip(eta.chunks_mut(nt))
        .map(|(slice, e)| {
            let mut c = T::zero();
            for (v, u) in slice.iter().zip(&basis.u0) {
                c += v.scale(*u);
            }
            for (ei, u) in e.iter_mut().zip(&basis.u0) {
                *ei -= c.scale(*u);
            }
            c
        })
        .collect();
    (w, eta)
}

/// `w (x) u0`.
pub fn lift<T: Scalar>(w: &[T], basis: &TransverseBasis) -> Vec<T> {
    let mut out = Vec::with_capacity(w.len() * basis.len());
    for &wi in w {
        out.extend(basis.u0.iter().map(|&u| wi.scale(u)));
    }
    out
}

/// Largest `|<eta(x_i, .), u0>|`.
pub fn slice_overlap(eta: &[f64], basis: &TransverseBasis) -> f64 {
    eta.chunks(basis.len())
        .map(|s| s.iter().zip(&basis.u0).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTerm {
    /// `m(psi_w, eta)`.
    pub m_value: f64,
    /// `t(w)`.
    pub t_value: f64,
    /// `a_dot(eta)`.
    pub a_value: f64,
    /// `|m| / (eps^{1 - delta/2} sqrt(t a))`.
    pub bound_ratio: f64,
}

/// Cross term between the limit sector and its complement for the shifted
/// regularized form `a_dot`, with `t` the matching one-dimensional form.
pub fn cross_term_check(w: &[f64], eta: &[f64], a_dot: &TubeOperator, t: &Operator1D, basis: &TransverseBasis) -> Result<CrossTerm> {
    let spec = &a_dot.spec;
    let Some(delta) = spec.delta else {
        return Err(LabError::InvalidInput("cross term needs a regularized spec".into()));
    };
    let tol = 1e-8 * eta.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let overlap = slice_overlap(eta, basis);
    if overlap > tol {
        return Err(LabError::NotOrthogonal { max: overlap });
    }
    let eps = spec.epsilon;
    let reg = eps.powf(delta);
    let e2 = eps * eps;
    let nt = basis.len();
    let (u0, radius2) = basis.nodal();
    let mut m = 0.0;
    if spec.kappa != 0.0 {
        for (ix, (&wi, slice)) in w.iter().zip(eta.chunks(nt)).enumerate() {
            let x = a_dot.grid.x[ix];
            let nodal = basis.to_nodal(slice);
            for ((e, u), r2) in nodal.iter().zip(u0).zip(radius2) {
                m += wi * u * e / ((x * x + e2 * r2).sqrt() + reg);
            }
        }
        m *= -spec.kappa;
    }
    let t_value = t.matrix.quad_form(w);
    let a_value = a_dot.form(eta);
    let denom = eps.powf(1.0 - 0.5 * delta) * (t_value * a_value).max(0.0).sqrt();
    let bound_ratio = if m == 0.0 { 0.0 } else { m.abs() / denom };
    Ok(CrossTerm {
        m_value: m,
        t_value,
        a_value,
        bound_ratio,
    })
}
