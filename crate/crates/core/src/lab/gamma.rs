use super::ladder::EpsilonLadder;
use super::report::{ConvergenceReport, TheoremTag};
use crate::error::{LabError, Result};
use crate::geometry::TransverseBasis;
use crate::linalg::norm;
use crate::oned::{assemble_hd, TwistProfile};
use crate::quadrature::{geometric_breaks, integrate_pieces};
use crate::tube::{assemble_b_form, lift, project_onto_l, TubeOperatorSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Relative distance to `b0` accepted at the last rung.
pub const GAMMA_REL_TOL: f64 = 0.01;

/// One-dimensional trial functions with closed-form derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TrialFunction {
    /// `x exp(-(x/width)^2)`, vanishing at the origin.
    OddGaussian { width: f64 },
    /// `exp(-(x/width)^2)`, equal to 1 at the origin.
    Gaussian { width: f64 },
}

impl Default for TrialFunction {
    fn default() -> Self {
        TrialFunction::OddGaussian { width: 1.0 }
    }
}

impl TrialFunction {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TrialFunction::OddGaussian { width } => x * (-(x / width).powi(2)).exp(),
            TrialFunction::Gaussian { width } => (-(x / width).powi(2)).exp(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            TrialFunction::OddGaussian { width } => (1.0 - 2.0 * x * x / (width * width)) * (-(x / width).powi(2)).exp(),
            TrialFunction::Gaussian { width } => -2.0 * x / (width * width) * (-(x / width).powi(2)).exp(),
        }
    }

    fn width(&self) -> f64 {
        match *self {
            TrialFunction::OddGaussian { width } | TrialFunction::Gaussian { width } => width,
        }
    }
}

/// `int_a^b (|w'|^2 + alpha'^2 C |w|^2) dx`.
fn kinetic(w: &TrialFunction, twist: &TwistProfile, c_s: f64, a: f64, b: f64) -> Result<f64> {
    let f = |x: f64| {
        let r = twist.rate(x);
        w.derivative(x).powi(2) + r * r * c_s * w.value(x).powi(2)
    };
    let mid = 0.5 * (a + b);
    Ok(integrate_pieces(&f, &[a, mid, b], 1e-12)?)
}

/// `int (|w'|^2 + alpha'^2 C |w|^2 - kappa |w|^2 / |x|) dx` over the window.
pub fn limit_form(w: &TrialFunction, kappa: f64, twist: &TwistProfile, c_s: f64, half_width: f64) -> Result<f64> {
    let k = kinetic(w, twist, c_s, -half_width, half_width)?;
    let f = |x: f64| w.value(x).powi(2) / x.abs();
    let breaks = geometric_breaks(1e-6, half_width);
    let pot = integrate_pieces(&f, &breaks, 1e-12)? + integrate_pieces(&|x: f64| f(-x), &breaks, 1e-12)?;
    Ok(k - kappa * pot)
}

/// `b^eps(w (x) u0)`: exact transverse reduction, x-integral by adaptive
/// quadrature against the mesh average of `u0^2 / sqrt(x^2 + eps^2 y^2)`.
pub fn tube_trial_form(w: &TrialFunction, kappa: f64, epsilon: f64, twist: &TwistProfile, basis: &TransverseBasis, half_width: f64) -> Result<f64> {
    let k = kinetic(w, twist, basis.c_s, -half_width, half_width)?;
    let f = |x: f64| w.value(x).powi(2) * basis.coulomb_average(x, epsilon, 0.0);
    let breaks = geometric_breaks(1e-3 * epsilon, half_width);
    let pot = integrate_pieces(&f, &breaks, 1e-12)? + integrate_pieces(&|x: f64| f(-x), &breaks, 1e-12)?;
    Ok(k - kappa * pot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaReport {
    pub trial: TrialFunction,
    pub kappa: f64,
    pub epsilons: Vec<f64>,
    /// `b^eps(w (x) u0)` per rung.
    pub b_eps: Vec<f64>,
    /// `b0(w)`.
    pub b0: f64,
    /// Discrete tube form on `w (x) u0 + eps xi` per rung.
    pub liminf_values: Vec<f64>,
    /// Discrete limit form on the same axial grid.
    pub b0_discrete: f64,
    pub monotone: bool,
    pub relative_error_last: f64,
    pub liminf_ok: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct GammaOptions {
    pub seed: u64,
    /// Tolerance on `liminf` relative to `max(|b0|, 1)`.
    pub liminf_tol: f64,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            seed: 5,
            liminf_tol: 0.01,
        }
    }
}

fn half_width(template: &TubeOperatorSpec, w: &TrialFunction) -> f64 {
    template.x_domain.length.min(12.0 * w.width())
}

/// `b^eps(w (x) u0)` along the ladder without the domain check; for
/// `w(0) != 0` these grow without bound.
pub fn trial_form_series(w: &TrialFunction, ladder: &EpsilonLadder, template: &TubeOperatorSpec, basis: &TransverseBasis) -> Result<Vec<f64>> {
    let hw = half_width(template, w);
    ladder
        .epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &e)| tube_trial_form(w, ladder.kappa, e, &template.twist, basis, hw).map_err(|err| err.at_rung(i, e)))
        .collect()
}

/// Monotone convergence of `b^eps(w (x) u0)` to `b0(w)` and a liminf
/// check along perturbed recovery sequences.
pub fn gamma_trial_check(
    w: &TrialFunction,
    ladder: &EpsilonLadder,
    template: &TubeOperatorSpec,
    basis: &TransverseBasis,
    opts: &GammaOptions,
) -> Result<GammaReport> {
    ladder.validate()?;
    if ladder.kappa >= 0.0 {
        return Err(LabError::InvalidInput("the trial check needs kappa < 0".into()));
    }
    let w0 = w.value(0.0);
    if w0 != 0.0 {
        return Err(LabError::NotInLimitDomain { w0 });
    }
    let kappa = ladder.kappa;
    let b_eps = trial_form_series(w, ladder, template, basis)?;
    let b0 = limit_form(w, kappa, &template.twist, basis.c_s, half_width(template, w))?;

    let grid = template.x_grid()?;
    let sqrt_h = grid.h.sqrt();
    let w_nodes: Vec<f64> = grid.x.iter().map(|&x| w.value(x)).collect();
    let b0_discrete = assemble_hd(kappa, &grid, &template.twist, basis.c_s)?.quad_form(&w_nodes);
    let w_coeff: Vec<f64> = w_nodes.iter().map(|v| v * sqrt_h).collect();
    let psi_w = lift(&w_coeff, basis);
    let liminf_values: Vec<f64> = ladder
        .epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let run = || -> Result<f64> {
                let mut spec = template.with_epsilon(eps);
                spec.kappa = kappa;
                spec.delta = None;
                spec.c = None;
                let b = assemble_b_form(&spec, basis)?;
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                let noise: Vec<f64> = (0..b.dim()).map(|_| rng.gen::<f64>() - 0.5).collect();
                let (_, mut xi) = project_onto_l(&noise, basis);
                let energy = b.form(&xi);
                if !(energy > 0.0) || norm(&xi) == 0.0 {
                    return Err(LabError::InvalidInput("complement noise has no form energy".into()));
                }
                let s = 1.0 / energy.sqrt();
                xi.iter_mut().for_each(|v| *v *= s);
                let psi: Vec<f64> = psi_w.iter().zip(&xi).map(|(a, e)| a + eps * e).collect();
                Ok(b.form(&psi))
            };
            run().map_err(|e| e.at_rung(i, eps))
        })
        .collect::<Result<_>>()?;
    let monotone = b_eps.windows(2).all(|p| p[1] >= p[0]);
    let last = *b_eps.last().unwrap_or(&f64::NAN);
    let relative_error_last = (last - b0).abs() / b0.abs();
    let liminf_ok = *liminf_values.last().unwrap_or(&f64::NAN) >= b0_discrete - opts.liminf_tol * b0_discrete.abs().max(1.0);
    Ok(GammaReport {
        trial: *w,
        kappa,
        epsilons: ladder.epsilons.clone(),
        b_eps,
        b0,
        liminf_values,
        b0_discrete,
        monotone,
        relative_error_last,
        liminf_ok,
        pass: monotone && relative_error_last <= GAMMA_REL_TOL && liminf_ok,
    })
}

impl GammaReport {
    /// Common report view: distances are `|b^eps - b0|`.
    pub fn summary(&self, runtime_seconds: f64) -> ConvergenceReport {
        let mut c = ConvergenceReport::new(TheoremTag::P4, self.epsilons.clone());
        c.distances = self.b_eps.iter().map(|b| (b - self.b0).abs()).collect();
        c.series.insert("b_eps".into(), self.b_eps.clone());
        c.series.insert("liminf_values".into(), self.liminf_values.clone());
        c.series.insert("b0".into(), vec![self.b0; self.epsilons.len()]);
        c.series.insert("b0_discrete".into(), vec![self.b0_discrete; self.epsilons.len()]);
        c.fit = super::ladder::fit_rate(&self.epsilons, &c.distances).ok();
        c.pass = self.pass;
        if !self.monotone {
            c.notes.push("b_eps is not monotone".into());
        }
        if self.relative_error_last > GAMMA_REL_TOL {
            c.notes
                .push(format!("last rung is {:.3e} away from b0 in relative terms", self.relative_error_last));
        }
        if !self.liminf_ok {
            c.notes.push("liminf check failed".into());
        }
        c.runtime_seconds = runtime_seconds;
        c
    }
}

pub fn gamma_report(
    w: &TrialFunction,
    ladder: &EpsilonLadder,
    template: &TubeOperatorSpec,
    basis: &TransverseBasis,
    opts: &GammaOptions,
) -> Result<(GammaReport, ConvergenceReport)> {
    let start = Instant::now();
    let g = gamma_trial_check(w, ladder, template, basis, opts)?;
    let c = g.summary(start.elapsed().as_secs_f64());
    Ok((g, c))
}
