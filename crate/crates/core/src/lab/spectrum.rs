use super::ladder::{fit_rate, strictly_decreasing, EpsilonLadder};
use super::norm::rung_spec;
use super::report::{ConvergenceReport, TheoremTag};
use crate::error::Result;
use crate::geometry::TransverseBasis;
use crate::linalg::lanczos::{lowest_eigenpairs, LanczosOptions};
use crate::linalg::skyline::Skyline;
use crate::oned::assemble_hd;
use crate::tube::{assemble_a_forms, TubeOperator, TubeOperatorSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Number of tube eigenpairs computed per rung for parity sorting.
pub const SPECTRUM_NEV: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RungSpectrum {
    pub epsilon: f64,
    /// Lowest eigenvalue of `A_dot` minus `c / eps^delta`.
    pub lowest: f64,
    /// Lowest eigenvalue whose eigenvector is odd in `x`.
    pub lowest_odd: Option<f64>,
}

/// `<v, P v>` with `P` the reflection `x -> -x`.
fn parity(op: &TubeOperator, v: &[f64]) -> f64 {
    let nx = op.grid.len();
    let nt = op.nt;
    let mut s = 0.0;
    for ix in 0..nx {
        let jx = nx - 1 - ix;
        for it in 0..nt {
            s += v[ix * nt + it] * v[jx * nt + it];
        }
    }
    s
}

/// Lowest shifted eigenvalues of the regularized tube operator at one rung.
pub fn rung_spectrum(spec: &TubeOperatorSpec, basis: &TransverseBasis) -> Result<RungSpectrum> {
    let (_, a_dot) = assemble_a_forms(spec, basis)?;
    let shift = spec.shift();
    // A_dot is bounded below by (c - kappa)/eps^delta > 0, so 0 is a valid pole.
    let sigma = if shift > 0.0 { 0.0 } else { -1.0 };
    let fac = Skyline::factor(&a_dot.op, sigma)?;
    let opts = LanczosOptions {
        nev: SPECTRUM_NEV,
        tol: 1e-9,
        max_steps: 400,
        seed: 7,
        sigma,
    };
    let pairs = lowest_eigenpairs(&a_dot.op, |v| fac.solve(v), &opts, &[])?;
    let lowest_odd = pairs
        .values
        .iter()
        .zip(&pairs.vectors)
        .find(|(_, v)| parity(&a_dot, v) < 0.0)
        .map(|(l, _)| l - shift);
    Ok(RungSpectrum {
        epsilon: spec.epsilon,
        lowest: pairs.values[0] - shift,
        lowest_odd,
    })
}

/// Lowest shifted eigenvalue along the ladder against the ground energy of
/// the limit operator on the same axial grid. Passes when the error
/// decreases strictly; for repulsive coupling, when no rung has an
/// eigenvalue below zero.
pub fn spectrum_convergence(ladder: &EpsilonLadder, template: &TubeOperatorSpec, basis: &TransverseBasis) -> Result<ConvergenceReport> {
    ladder.validate()?;
    let start = Instant::now();
    let grid = template.x_grid()?;
    let limit_op = assemble_hd(ladder.kappa, &grid, &template.twist, basis.c_s)?;
    let limit = limit_op.lowest_eigenvalues(1)[0];
    let rungs: Vec<RungSpectrum> = ladder
        .epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| rung_spectrum(&rung_spec(template, ladder, eps), basis).map_err(|e| e.at_rung(i, eps)))
        .collect::<Result<_>>()?;
    let mut report = ConvergenceReport::new(TheoremTag::T1, ladder.epsilons.clone());
    let lowest: Vec<f64> = rungs.iter().map(|r| r.lowest).collect();
    report.distances = lowest.iter().map(|e| (e - limit).abs()).collect();
    report.series.insert("lowest".into(), lowest.clone());
    report.series.insert("limit".into(), vec![limit; rungs.len()]);
    if rungs.iter().all(|r| r.lowest_odd.is_some()) {
        let odd: Vec<f64> = rungs.iter().map(|r| r.lowest_odd.unwrap_or(f64::NAN)).collect();
        let odd_dist: Vec<f64> = odd.iter().map(|e| (e - limit).abs()).collect();
        if let Ok(f) = fit_rate(&ladder.epsilons, &odd_dist) {
            report.fits.insert("lowest_odd_distance".into(), f);
        }
        report.series.insert("lowest_odd".into(), odd);
        report.series.insert("lowest_odd_distance".into(), odd_dist);
    }
    report.fit = fit_rate(&ladder.epsilons, &report.distances).ok();
    if ladder.kappa > 0.0 {
        report.pass = strictly_decreasing(&report.distances);
        if !report.pass {
            report.notes.push(format!(
                "the lowest eigenvalue does not approach the limit {limit:.6} monotonically"
            ));
        }
    } else {
        report.pass = lowest.iter().all(|&e| e >= 0.0);
        if report.pass {
            report.notes.push("no bound state".into());
        }
    }
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistShift {
    pub epsilon: f64,
    pub untwisted: f64,
    pub twisted: f64,
    /// `twisted - untwisted`.
    pub shift: f64,
    /// `rate^2 C(S)` with the basis' own `C(S)`.
    pub predicted: f64,
}

/// Energy shift from a constant twist `rate` at the template's epsilon.
pub fn twist_shift(template: &TubeOperatorSpec, ladder: &EpsilonLadder, rate: f64, basis: &TransverseBasis) -> Result<TwistShift> {
    let mut flat = rung_spec(template, ladder, template.epsilon);
    flat.twist = crate::oned::TwistProfile::Zero;
    let mut turned = flat.clone();
    turned.twist = crate::oned::TwistProfile::ConstantRate { rate };
    let (a, b) = rayon::join(|| rung_spectrum(&flat, basis), || rung_spectrum(&turned, basis));
    let (a, b) = (a?, b?);
    Ok(TwistShift {
        epsilon: template.epsilon,
        untwisted: a.lowest,
        twisted: b.lowest,
        shift: b.lowest - a.lowest,
        predicted: rate * rate * basis.c_s,
    })
}
