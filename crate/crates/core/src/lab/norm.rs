use super::ladder::{fit_rate, strictly_decreasing, EpsilonLadder};
use super::report::{ConvergenceReport, TheoremTag};
use crate::error::{LabError, Result};
use crate::geometry::{TransverseBasis, TransverseKind};
use crate::linalg::conj_vec;
use crate::linalg::power::{operator_norm_from, NormEstimate, PowerOptions};
use crate::linalg::Scalar;
use crate::oned::Grid1D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use crate::oned::{assemble_hd, assemble_t_eps, Operator1D};
use crate::tube::{assemble_a_forms, lift, project_onto_l, Resolvent, TubeOperatorSpec, DEFAULT_RTOL};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Which pair of operators a norm sweep compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormPairing {
    /// `A_dot^{-1}` against `T^{-1} (+) 0`.
    Inverse,
    /// Resolvents at `c/eps^delta + i` of `A_dot` against `T (+) 0`.
    ShiftedComplex,
    /// `(T - c/eps^delta - i)^{-1}` against `(H_D - i)^{-1}` on the line.
    OneDimensional,
}

impl NormPairing {
    pub fn tag(&self) -> TheoremTag {
        match self {
            NormPairing::Inverse => TheoremTag::P1,
            NormPairing::ShiftedComplex => TheoremTag::P2,
            NormPairing::OneDimensional => TheoremTag::P3,
        }
    }

    /// Exponent of the upper bound; `None` when only convergence is claimed.
    pub fn theoretical_slope(&self, delta: f64) -> Option<f64> {
        match self {
            NormPairing::Inverse => Some(1.0 + 0.5 * delta),
            NormPairing::ShiftedComplex => Some(1.0 - 1.5 * delta),
            NormPairing::OneDimensional => None,
        }
    }
}

/// Slack subtracted from the theoretical exponent in pass decisions.
pub const SLOPE_SLACK: f64 = 0.3;

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub power: PowerOptions,
    pub rtol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            power: PowerOptions::default(),
            rtol: DEFAULT_RTOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RungNorm {
    pub epsilon: f64,
    pub estimate: NormEstimate,
    /// Analytic bound for the angular sectors left out of a radial basis.
    pub sector_bound: Option<f64>,
    /// Norm of the difference compressed to the limit sector.
    pub limit_sector: Option<f64>,
}

/// Spec of one rung built from the template and the ladder physics.
pub fn rung_spec(template: &TubeOperatorSpec, ladder: &EpsilonLadder, epsilon: f64) -> TubeOperatorSpec {
    let mut s = template.with_epsilon(epsilon).regularized(ladder.delta, ladder.c);
    s.kappa = ladder.kappa;
    s
}

fn one_dim(spec: &TubeOperatorSpec, basis: &TransverseBasis) -> Result<Operator1D> {
    let grid = spec.x_grid()?;
    assemble_t_eps(spec.kappa, spec.epsilon, spec.delta.unwrap_or(0.3), spec.c.unwrap_or(0.0), &grid, basis)
}

fn sector_bound(pairing: NormPairing, spec: &TubeOperatorSpec, basis: &TransverseBasis) -> Option<f64> {
    if basis.kind != TransverseKind::Radial {
        return None;
    }
    let e2 = spec.epsilon * spec.epsilon;
    let gap = basis.lambda1 - basis.lambda0;
    match pairing {
        NormPairing::Inverse => Some(e2 / gap),
        NormPairing::ShiftedComplex => {
            let floor = gap / e2 - spec.kappa.max(0.0) / spec.epsilon.powf(spec.delta.unwrap_or(0.0));
            Some(if floor > 0.0 { 1.0 / floor } else { f64::INFINITY })
        }
        NormPairing::OneDimensional => None,
    }
}

/// Power-iteration start: random transverse amplitudes on even and odd
/// Gaussians of width `L/4`. The largest singular values sit at the bottom
/// of axial continua, which a white-noise start reaches only slowly.
pub fn smooth_start<T: Scalar>(grid: &Grid1D, nt: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let even: Vec<f64> = (0..nt).map(|_| rng.gen::<f64>() - 0.5).collect();
    let odd: Vec<f64> = (0..nt).map(|_| rng.gen::<f64>() - 0.5).collect();
    let sigma = 0.25 * grid.l;
    let mut v = Vec::with_capacity(grid.len() * nt);
    for &x in &grid.x {
        let g = (-(x / sigma).powi(2)).exp();
        v.extend((0..nt).map(|t| T::from_real(g * (even[t] + x / sigma * odd[t]))));
    }
    v
}

/// Largest singular value of the resolvent difference at one rung.
pub fn rung_norm(pairing: NormPairing, spec: &TubeOperatorSpec, basis: &TransverseBasis, opts: &SweepOptions) -> Result<RungNorm> {
    let t = one_dim(spec, basis)?;
    let shift = spec.shift();
    let mut limit_sector = None;
    let estimate = match pairing {
        NormPairing::Inverse => {
            let (_, a_dot) = assemble_a_forms(spec, basis)?;
            let res = Resolvent::new(&a_dot.op, 0.0, Complex64::new(0.0, 0.0), opts.rtol)?;
            let apply = |v: &[f64]| -> Result<Vec<f64>> {
                let mut out = res.solve(v)?;
                let (w, _) = project_onto_l(v, basis);
                let limit = lift(&t.matrix.solve(0.0, &w), basis);
                out.iter_mut().zip(&limit).for_each(|(o, l)| *o -= l);
                Ok(out)
            };
            let compressed = |w: &[f64]| -> Result<Vec<f64>> { Ok(project_onto_l(&apply(&lift(w, basis))?, basis).0) };
            limit_sector = Some(operator_norm_from(smooth_start(&a_dot.grid, 1, opts.power.seed), compressed, compressed, &opts.power)?.value);
            operator_norm_from(smooth_start(&a_dot.grid, a_dot.nt, opts.power.seed), apply, apply, &opts.power)?
        }
        NormPairing::ShiftedComplex => {
            let (_, a_dot) = assemble_a_forms(spec, basis)?;
            let z = Complex64::new(shift, 1.0);
            let res = Resolvent::new(&a_dot.op, z, z, opts.rtol)?;
            let apply = |v: &[Complex64]| -> Result<Vec<Complex64>> {
                let mut out = res.solve(v)?;
                let (w, _) = project_onto_l(v, basis);
                let limit = lift(&t.matrix.solve(z, &w), basis);
                out.iter_mut().zip(&limit).for_each(|(o, l)| *o -= l);
                Ok(out)
            };
            // The difference is complex symmetric, so D* v = conj(D conj v).
            let adjoint = |v: &[Complex64]| -> Result<Vec<Complex64>> { Ok(conj_vec(&apply(&conj_vec(v))?)) };
            let compressed = |w: &[Complex64]| -> Result<Vec<Complex64>> { Ok(project_onto_l(&apply(&lift(w, basis))?, basis).0) };
            let compressed_adj = |w: &[Complex64]| -> Result<Vec<Complex64>> { Ok(conj_vec(&compressed(&conj_vec(w))?)) };
            limit_sector = Some(operator_norm_from(smooth_start(&a_dot.grid, 1, opts.power.seed), compressed, compressed_adj, &opts.power)?.value);
            operator_norm_from(smooth_start(&a_dot.grid, a_dot.nt, opts.power.seed), apply, adjoint, &opts.power)?
        }
        NormPairing::OneDimensional => {
            let grid = spec.x_grid()?;
            let hd = assemble_hd(spec.kappa, &grid, &spec.twist, basis.c_s)?;
            let zt = Complex64::new(shift, 1.0);
            let zh = Complex64::new(0.0, 1.0);
            let apply = |v: &[Complex64]| -> Result<Vec<Complex64>> {
                let mut out = t.matrix.solve(zt, v);
                let limit = hd.matrix.solve(zh, v);
                out.iter_mut().zip(&limit).for_each(|(o, l)| *o -= l);
                Ok(out)
            };
            let adjoint = |v: &[Complex64]| -> Result<Vec<Complex64>> { Ok(conj_vec(&apply(&conj_vec(v))?)) };
            operator_norm_from(smooth_start(&t.grid, 1, opts.power.seed), apply, adjoint, &opts.power)?
        }
    };
    Ok(RungNorm {
        epsilon: spec.epsilon,
        estimate,
        sector_bound: sector_bound(pairing, spec, basis),
        limit_sector,
    })
}

/// Operator-norm distance along the ladder, rungs in parallel. Passes when
/// distances decrease strictly and, where the pairing has a rate, the
/// fitted slope is at least the theoretical one minus [`SLOPE_SLACK`].
pub fn norm_resolvent_sweep(
    pairing: NormPairing,
    ladder: &EpsilonLadder,
    template: &TubeOperatorSpec,
    basis: &TransverseBasis,
    opts: &SweepOptions,
) -> Result<ConvergenceReport> {
    ladder.validate()?;
    if ladder.kappa <= 0.0 {
        return Err(LabError::InvalidInput("norm resolvent sweeps need kappa > 0".into()));
    }
    let start = Instant::now();
    let rungs: Vec<RungNorm> = ladder
        .epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| rung_norm(pairing, &rung_spec(template, ladder, eps), basis, opts).map_err(|e| e.at_rung(i, eps)))
        .collect::<Result<_>>()?;
    let mut report = ConvergenceReport::new(pairing.tag(), ladder.epsilons.clone());
    report.distances = rungs.iter().map(|r| r.estimate.value).collect();
    report
        .series
        .insert("power_iterations".into(), rungs.iter().map(|r| r.estimate.iterations as f64).collect());
    if rungs.iter().all(|r| r.sector_bound.is_some()) {
        report
            .series
            .insert("sector_bound".into(), rungs.iter().map(|r| r.sector_bound.unwrap_or(0.0)).collect());
        report
            .notes
            .push("distances cover the m = 0 block; sector_bound bounds the m >= 1 blocks analytically".into());
    }
    if rungs.iter().all(|r| r.limit_sector.is_some()) {
        let ls: Vec<f64> = rungs.iter().map(|r| r.limit_sector.unwrap_or(0.0)).collect();
        if let Ok(f) = fit_rate(&ladder.epsilons, &ls) {
            report.fits.insert("limit_sector".into(), f);
        }
        report.series.insert("limit_sector".into(), ls);
    }
    let fit = fit_rate(&ladder.epsilons, &report.distances).ok();
    report.fit = fit;
    report.theoretical_slope = pairing.theoretical_slope(ladder.delta);
    let monotone = strictly_decreasing(&report.distances);
    let rate_ok = match (report.theoretical_slope, fit) {
        (Some(th), Some(f)) => f.slope >= th - SLOPE_SLACK,
        (Some(_), None) => false,
        (None, _) => true,
    };
    report.pass = monotone && rate_ok;
    if !monotone {
        report.notes.push("distances are not strictly decreasing".into());
    }
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
