use super::ladder::{fit_rate, strictly_decreasing, strictly_increasing, RateFit};
use super::report::{ConvergenceReport, TheoremTag};
use crate::error::{check_delta, LabError, Result};
use crate::quadrature::{geometric_breaks, integrate, integrate_pieces};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

/// Profile `|psi(x, u)|` entering `Q^eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum QepsScenario {
    /// `|psi| = |w(x)| u^p` with `w = exp(-x^2)`.
    BoundedProfile { p: f64 },
    /// `|psi| = M` on `[0, 1/2] x [0, 1/4 + eps^2]`, zero elsewhere.
    FlatProfile { m: f64 },
}

/// Allowed deviation of the flat-profile slope from `2 (delta - 1)`.
pub const FLAT_SLOPE_TOL: f64 = 0.2;
const X_CUT: f64 = 6.0;

impl QepsScenario {
    pub fn tag(&self) -> TheoremTag {
        match self {
            QepsScenario::BoundedProfile { .. } => TheoremTag::Q1,
            QepsScenario::FlatProfile { .. } => TheoremTag::Q2,
        }
    }

    pub fn theoretical_slope(&self, delta: f64) -> f64 {
        match *self {
            QepsScenario::BoundedProfile { p } => 2.0 * delta + 4.0 * p - 4.0,
            QepsScenario::FlatProfile { .. } => 2.0 * (delta - 1.0),
        }
    }

    pub fn validate(&self, delta: f64) -> Result<()> {
        check_delta(delta)?;
        match *self {
            QepsScenario::BoundedProfile { p } => {
                if !(p > 0.75 && p < 1.0) {
                    return Err(LabError::PRange { p });
                }
                if !(delta > 2.0 - 2.0 * p) {
                    return Err(LabError::InvalidInput(format!(
                        "the bounded profile needs delta > 2 - 2p = {}, got {delta}",
                        2.0 - 2.0 * p
                    )));
                }
            }
            QepsScenario::FlatProfile { m } => {
                if !m.is_finite() {
                    return Err(LabError::InvalidInput("M must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// `kappa^2 / (2p - 1) eps^{2 delta + 4p - 4} ||w||^2` for the bounded
    /// profile.
    pub fn upper_bound(&self, kappa: f64, epsilon: f64, delta: f64) -> Option<f64> {
        match *self {
            QepsScenario::BoundedProfile { p } => {
                let w2 = (0.5 * PI).sqrt();
                Some(kappa * kappa / (2.0 * p - 1.0) * epsilon.powf(2.0 * delta + 4.0 * p - 4.0) * w2)
            }
            QepsScenario::FlatProfile { .. } => None,
        }
    }
}

/// `Q^eps = kappa^2 eps^{2(delta-1)} int dx int_{x^2}^{x^2+eps^2} du
/// |psi|^2 / (u + eps^delta sqrt(u))^2` by nested adaptive quadrature.
pub fn qeps_estimate(scenario: QepsScenario, kappa: f64, epsilon: f64, delta: f64) -> Result<f64> {
    scenario.validate(delta)?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(LabError::InvalidInput(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    let a = epsilon.powf(delta);
    let e2 = epsilon * epsilon;
    let (profile_u, weight_x, x_end): (Box<dyn Fn(f64) -> f64 + Sync>, Box<dyn Fn(f64) -> f64 + Sync>, f64) = match scenario {
        QepsScenario::BoundedProfile { p } => (Box::new(move |u: f64| u.powf(2.0 * p)), Box::new(|x: f64| (-2.0 * x * x).exp()), X_CUT),
        QepsScenario::FlatProfile { m } => (Box::new(|_| 1.0), Box::new(move |_| m * m), 0.5),
    };
    // Inner integral in t = ln u, where the integrand stays bounded as
    // the lower limit x^2 goes to 0. Tolerances are relative to the size
    // of each integral so that the outer error estimate sees no noise.
    let g = |t: f64| {
        let u = t.exp();
        let d = u + a * u.sqrt();
        profile_u(u) * u / (d * d)
    };
    let inner = |x: f64| -> f64 {
        let lo = (x * x).max(1e-300);
        let (t0, t1) = (lo.ln(), (lo + e2).ln());
        let scale = (g(t0).abs() + g(t1).abs()) * (t1 - t0);
        if scale == 0.0 {
            return 0.0;
        }
        integrate(&g, t0, t1, 1e-12 * scale).unwrap_or(f64::NAN)
    };
    let outer = |x: f64| weight_x(x) * inner(x);
    let breaks = geometric_breaks(1e-3 * epsilon, x_end);
    let rough = integrate_pieces(&outer, &breaks, 1e-4 * (1.0 + 1.0 / (a * a)) * e2)?;
    let mut total = integrate_pieces(&outer, &breaks, 1e-10 * rough.abs())?;
    if !total.is_finite() {
        return Err(LabError::InvalidInput("inner quadrature failed".into()));
    }
    // The bounded profile extends over the whole line; w^2 is even.
    if let QepsScenario::BoundedProfile { .. } = scenario {
        total *= 2.0;
    }
    Ok(kappa * kappa * epsilon.powf(2.0 * (delta - 1.0)) * total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QepsReport {
    pub scenario: QepsScenario,
    pub kappa: f64,
    pub delta: f64,
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    /// Rung-by-rung upper bound, bounded profile only.
    pub bounds: Option<Vec<f64>>,
    pub fit: Option<RateFit>,
    pub theoretical_slope: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Bounded profile: every rung under its bound and `Q` decreasing.
/// Flat profile: `Q` increasing and the slope within [`FLAT_SLOPE_TOL`] of
/// `2 (delta - 1)`.
pub fn qeps_sweep(scenario: QepsScenario, kappa: f64, delta: f64, epsilons: &[f64]) -> Result<QepsReport> {
    scenario.validate(delta)?;
    let values: Vec<f64> = epsilons
        .iter()
        .enumerate()
        .map(|(i, &e)| qeps_estimate(scenario, kappa, e, delta).map_err(|err| err.at_rung(i, e)))
        .collect::<Result<_>>()?;
    let bounds: Option<Vec<f64>> = epsilons.iter().map(|&e| scenario.upper_bound(kappa, e, delta)).collect();
    let fit = fit_rate(epsilons, &values).ok();
    let theoretical_slope = scenario.theoretical_slope(delta);
    let mut notes = Vec::new();
    let pass = match scenario {
        QepsScenario::BoundedProfile { .. } => {
            let under = bounds
                .as_ref()
                .map(|b| values.iter().zip(b).all(|(q, b)| q <= b))
                .unwrap_or(false);
            if !under {
                notes.push("a rung exceeds the upper bound".into());
            }
            let dec = strictly_decreasing(&values);
            if !dec {
                notes.push("Q is not decreasing".into());
            }
            under && dec
        }
        QepsScenario::FlatProfile { .. } => {
            let inc = strictly_increasing(&values);
            if !inc {
                notes.push("Q is not increasing".into());
            }
            let slope_ok = fit.map(|f| (f.slope - theoretical_slope).abs() <= FLAT_SLOPE_TOL).unwrap_or(false);
            if !slope_ok {
                notes.push(format!(
                    "fitted slope {:?} is outside {theoretical_slope} +- {FLAT_SLOPE_TOL}",
                    fit.map(|f| f.slope)
                ));
            }
            inc && slope_ok
        }
    };
    Ok(QepsReport {
        scenario,
        kappa,
        delta,
        epsilons: epsilons.to_vec(),
        values,
        bounds,
        fit,
        theoretical_slope,
        pass,
        notes,
    })
}

impl QepsReport {
    pub fn summary(&self, runtime_seconds: f64) -> ConvergenceReport {
        let mut c = ConvergenceReport::new(self.scenario.tag(), self.epsilons.clone());
        c.distances = self.values.clone();
        if let Some(b) = &self.bounds {
            c.series.insert("upper_bound".into(), b.clone());
        }
        c.fit = self.fit;
        c.theoretical_slope = Some(self.theoretical_slope);
        c.pass = self.pass;
        c.notes = self.notes.clone();
        c.runtime_seconds = runtime_seconds;
        c
    }
}

pub fn qeps_report(scenario: QepsScenario, kappa: f64, delta: f64, epsilons: &[f64]) -> Result<(QepsReport, ConvergenceReport)> {
    let start = Instant::now();
    let q = qeps_sweep(scenario, kappa, delta, epsilons)?;
    let c = q.summary(start.elapsed().as_secs_f64());
    Ok((q, c))
}
