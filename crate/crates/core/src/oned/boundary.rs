use crate::error::{LabError, Result};
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A 2x2 unitary `U = e^{i g} [[e^{i p} cos m, e^{i q} sin m], [-e^{-i q} sin m, e^{-i p} cos m]]`.
/// Every element of U(2) has this form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionMatrix {
    pub u: Matrix2<Complex64>,
}

impl ExtensionMatrix {
    pub fn from_angles(global: f64, mix: f64, phase1: f64, phase2: f64) -> Self {
        let g = Complex64::from_polar(1.0, global);
        let (s, c) = mix.sin_cos();
        let u = Matrix2::new(
            g * Complex64::from_polar(c, phase1),
            g * Complex64::from_polar(s, phase2),
            -g * Complex64::from_polar(s, -phase2),
            g * Complex64::from_polar(c, -phase1),
        );
        ExtensionMatrix { u }
    }

    /// `U = I`: Dirichlet at both sides of the origin.
    pub fn dirichlet() -> Self {
        Self::from_angles(0.0, 0.0, 0.0, 0.0)
    }

    pub fn minus_identity() -> Self {
        Self::from_angles(std::f64::consts::PI, 0.0, 0.0, 0.0)
    }

    /// Largest entry of `|U U* - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.u * self.u.adjoint() - Matrix2::identity();
        p.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Values of a function and its derivative at points approaching the
/// origin from one side.
#[derive(Debug, Clone, PartialEq)]
pub struct SideSamples {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOptions {
    /// Largest sampling radius; the others are `r0 2^-j`.
    pub r0: f64,
    pub count: usize,
    /// Successive differences shrinking by less than this factor at every
    /// step mark the sequence as divergent.
    pub growth: f64,
    /// Differences below this are treated as settled.
    pub floor: f64,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions {
            r0: 1e-4,
            count: 4,
            growth: 0.9,
            floor: 1e-9,
        }
    }
}

impl SideSamples {
    pub fn from_fn<F, G>(f: F, df: G, positive: bool, opts: &BoundaryOptions) -> Self
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let sign = if positive { 1.0 } else { -1.0 };
        let x: Vec<f64> = (0..opts.count).map(|j| sign * opts.r0 * 0.5f64.powi(j as i32)).collect();
        SideSamples {
            phi: x.iter().map(|&v| f(v)).collect(),
            dphi: x.iter().map(|&v| df(v)).collect(),
            x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceFlags {
    pub phi_plus: bool,
    pub phi_minus: bool,
    pub phitilde_plus: bool,
    pub phitilde_minus: bool,
}

impl DivergenceFlags {
    pub fn any(&self) -> bool {
        self.phi_plus || self.phi_minus || self.phitilde_plus || self.phitilde_minus
    }
}

/// `(phi(0+), phi(0-), phitilde(0+), phitilde(0-))` with divergence flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub phi_plus: Complex64,
    pub phi_minus: Complex64,
    pub phitilde_plus: Complex64,
    pub phitilde_minus: Complex64,
    pub flags: DivergenceFlags,
}

impl BoundaryData {
    pub fn new(phi_plus: Complex64, phi_minus: Complex64, phitilde_plus: Complex64, phitilde_minus: Complex64) -> Self {
        BoundaryData {
            phi_plus,
            phi_minus,
            phitilde_plus,
            phitilde_minus,
            flags: DivergenceFlags {
                phi_plus: false,
                phi_minus: false,
                phitilde_plus: false,
                phitilde_minus: false,
            },
        }
    }

    /// Boundary data satisfying the relation of `ext` for prescribed values
    /// `phi(0+-)`, or `None` when `I - U` is singular.
    pub fn solve_for(ext: &ExtensionMatrix, phi_plus: Complex64, phi_minus: Complex64) -> Option<Self> {
        let id = Matrix2::<Complex64>::identity();
        let rhs = (id + ext.u) * Vector2::new(-phi_plus, phi_minus) * Complex64::new(0.0, -1.0);
        let t = (id - ext.u).lu().solve(&rhs)?;
        if !(t[0].is_finite() && t[1].is_finite()) {
            return None;
        }
        Some(Self::new(phi_plus, phi_minus, t[0], t[1]))
    }
}

/// Limit at 0 of the polynomial through `(x_j, f_j)` (Neville).
pub fn extrapolate_to_zero(x: &[f64], f: &[f64]) -> f64 {
    let mut p = f.to_vec();
    let n = x.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
        }
    }
    p[0]
}

/// True when successive differences never contract by the factor
/// `growth` and the last one is above `floor`.
pub fn diverges(f: &[f64], opts: &BoundaryOptions) -> bool {
    let d: Vec<f64> = f.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if d.is_empty() || !f.iter().all(|v| v.is_finite()) {
        return !f.iter().all(|v| v.is_finite());
    }
    let last = d[d.len() - 1];
    last > opts.floor && d.windows(2).all(|w| w[1] >= opts.growth * w[0])
}

/// One-sided limits `(phi(0), phitilde(0), phi diverges, phitilde diverges)`.
pub fn side_limits(s: &SideSamples, kappa: f64, opts: &BoundaryOptions) -> Result<(f64, f64, bool, bool)> {
    if kappa == 0.0 {
        return Err(LabError::LogRegularizationUndefined);
    }
    if s.x.len() < 3 {
        return Err(LabError::NeedThreePoints { got: s.x.len() });
    }
    let sign = s.x[0].signum();
    let tilde: Vec<f64> = s
        .x
        .iter()
        .zip(s.phi.iter().zip(&s.dphi))
        .map(|(&x, (&p, &dp))| dp + sign * kappa * p * (kappa.abs() * x.abs()).ln())
        .collect();
    let phi_div = diverges(&s.phi, opts);
    let tilde_div = diverges(&tilde, opts);
    let phi0 = if phi_div { f64::NAN } else { extrapolate_to_zero(&s.x, &s.phi) };
    let tilde0 = if tilde_div { f64::NAN } else { extrapolate_to_zero(&s.x, &tilde) };
    Ok((phi0, tilde0, phi_div, tilde_div))
}

/// Boundary quadruple from samples on both sides of the origin.
pub fn boundary_data(plus: &SideSamples, minus: &SideSamples, kappa: f64, opts: &BoundaryOptions) -> Result<BoundaryData> {
    let (pp, tp, fpp, ftp) = side_limits(plus, kappa, opts)?;
    let (pm, tm, fpm, ftm) = side_limits(minus, kappa, opts)?;
    let c = |v: f64| Complex64::new(v, 0.0);
    Ok(BoundaryData {
        phi_plus: c(pp),
        phi_minus: c(pm),
        phitilde_plus: c(tp),
        phitilde_minus: c(tm),
        flags: DivergenceFlags {
            phi_plus: fpp,
            phi_minus: fpm,
            phitilde_plus: ftp,
            phitilde_minus: ftm,
        },
    })
}

/// Max-norm residual of `(I - U) phitilde + i (I + U) (-phi(0+), phi(0-))`.
pub fn check_extension_membership(data: &BoundaryData, ext: &ExtensionMatrix, tol: f64) -> Result<(bool, f64)> {
    let f = data.flags;
    for (flag, side) in [
        (f.phi_plus, "phi(0+)"),
        (f.phi_minus, "phi(0-)"),
        (f.phitilde_plus, "phitilde(0+)"),
        (f.phitilde_minus, "phitilde(0-)"),
    ] {
        if flag {
            return Err(LabError::NotInAdjointDomain { side: side.into() });
        }
    }
    let id = Matrix2::<Complex64>::identity();
    let lhs = (id - ext.u) * Vector2::new(data.phitilde_plus, data.phitilde_minus);
    let rhs = (id + ext.u) * Vector2::new(-data.phi_plus, data.phi_minus) * Complex64::new(0.0, -1.0);
    let r = (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok((r <= tol, r))
}

/// Local model in the adjoint domain with prescribed boundary data:
/// `phi = A g(x) + B x` where `g = 1 - sign kappa x ln(|kappa| |x|)` solves the
/// equation to leading order. Returns `(phi, phi')` at `x`.
pub fn local_solution(kappa: f64, phi0: f64, phitilde0: f64, x: f64) -> (f64, f64) {
    let sign = x.signum();
    let l = (kappa.abs() * x.abs()).ln();
    // phitilde = B - sign kappa A
    let a = phi0;
    let b = phitilde0 + sign * kappa * a;
    let g = 1.0 - sign * kappa * x * l;
    let dg = -sign * kappa * (l + 1.0);
    (a * g + b * x, a * dg + b)
}

/// Regular (Dirichlet) solution of `-phi'' - kappa/x phi = E phi` on
/// `x > 0` normalized by `phi'(0) = 1`, from its power series.
pub fn regular_series(kappa: f64, energy: f64, x: f64) -> (f64, f64) {
    let mut a = [0.0f64; 60];
    a[1] = 1.0;
    for k in 2..a.len() {
        a[k] = -(kappa * a[k - 1] + energy * a[k - 2]) / (k * (k - 1)) as f64;
    }
    let mut phi = 0.0;
    let mut dphi = 0.0;
    let mut p = 1.0;
    for (k, &ak) in a.iter().enumerate().skip(1) {
        dphi += k as f64 * ak * p;
        p *= x;
        phi += ak * p;
    }
    (phi, dphi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unitary_is_unitary() {
        let u = ExtensionMatrix::from_angles(0.3, 1.1, -0.4, 2.0);
        assert!(u.unitarity_defect() < 1e-14);
    }

    #[test]
    fn neville_is_exact_for_cubics() {
        let x = [0.4, 0.2, 0.1, 0.05];
        let f: Vec<f64> = x.iter().map(|v| 2.0 - v + 3.0 * v * v - v * v * v).collect();
        assert!((extrapolate_to_zero(&x, &f) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn kappa_zero_and_short_samples_are_errors() {
        let o = BoundaryOptions::default();
        let s = SideSamples::from_fn(|x| x, |_| 1.0, true, &o);
        assert_eq!(side_limits(&s, 0.0, &o).unwrap_err().code(), "log-regularization-undefined");
        let short = SideSamples {
            x: s.x[..2].to_vec(),
            phi: s.phi[..2].to_vec(),
            dphi: s.dphi[..2].to_vec(),
        };
        assert_eq!(side_limits(&short, 1.0, &o).unwrap_err().code(), "need-3-points");
    }
}
