use super::ladder::strictly_decreasing;
use super::report::{ConvergenceReport, TheoremTag};
use crate::error::{check_delta, LabError, Result};
use crate::geometry::TransverseBasis;
use crate::quadrature::{geometric_breaks, integrate_pieces};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Half-width of the integration window for conditions (ii), (iv), (v).
pub const KLAUS_B: f64 = 1.0;
/// Relative slack on the envelope inequality.
pub const ENVELOPE_TOL: f64 = 1e-8;
/// Allowed relative deviation of integral gaps from the envelope gaps.
pub const GAP_TOL: f64 = 0.2;
const SAMPLE_COUNT: usize = 50;
const TRAPEZOID_CELLS: usize = 4096;

/// Sampled checks of the five conditions for `V(x) = -kappa int u0^2 /
/// (sqrt(x^2 + eps^2 y^2) + eps^delta) dy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlausReport {
    pub kappa: f64,
    pub delta: f64,
    pub epsilons: Vec<f64>,
    /// Envelope `g (|x|^-gamma + |x|^-beta)`.
    pub g: f64,
    pub gamma: f64,
    pub beta: f64,
    pub sample_x: Vec<f64>,
    /// (i) per rung: the envelope holds at every sample.
    pub envelope_holds: Vec<bool>,
    /// (i) per rung: largest `|V(x)| |x| / kappa`.
    pub envelope_max_ratio: Vec<f64>,
    /// (ii) trapezoid values of `int_{-b}^{b} |V|`.
    pub abs_integral_trapezoid: Vec<f64>,
    /// (ii) relative change of the trapezoid value when the cells double.
    pub refinement_change: Vec<f64>,
    /// (iii) largest `|V(x) + kappa/|x||` on `[0.1, 1]`.
    pub pointwise_residual: Vec<f64>,
    /// (iv) `int_{-b}^{b} V`.
    pub integrals: Vec<f64>,
    /// (iv) `-kappa int_{-b}^{b} dx / (sqrt(x^2 + eps^2 K) + eps^delta)`.
    pub envelope_integrals: Vec<f64>,
    /// (iv) gap of `integrals` over gap of `envelope_integrals`, per step.
    pub gap_ratios: Vec<f64>,
    /// (v) `int |V| / |int V|`.
    pub sign_ratio: Vec<f64>,
    pub pass: bool,
    pub notes: Vec<String>,
}

fn log_samples() -> Vec<f64> {
    let (lo, hi) = (1e-6f64.ln(), 1.0f64.ln());
    (0..SAMPLE_COUNT)
        .map(|k| (lo + (hi - lo) * k as f64 / (SAMPLE_COUNT - 1) as f64).exp())
        .collect()
}

fn trapezoid<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let inner: f64 = (1..cells).map(|k| f(a + k as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

pub fn klaus_check(kappa: f64, delta: f64, epsilons: &[f64], basis: &TransverseBasis) -> Result<KlausReport> {
    if kappa <= 0.0 {
        return Err(LabError::InvalidInput("the Klaus conditions are checked for kappa > 0".into()));
    }
    check_delta(delta)?;
    if epsilons.len() < 2 || !strictly_decreasing(epsilons) {
        return Err(LabError::InvalidInput("need at least 2 strictly decreasing epsilons".into()));
    }
    let sample_x = log_samples();
    let far: Vec<f64> = (0..20).map(|k| 0.1 + 0.9 * k as f64 / 19.0).collect();
    let k2 = basis.max_radius2;
    let b = KLAUS_B;
    let mut r = KlausReport {
        kappa,
        delta,
        epsilons: epsilons.to_vec(),
        g: 0.5 * kappa,
        gamma: 1.0,
        beta: 1.0,
        sample_x: sample_x.clone(),
        envelope_holds: Vec::new(),
        envelope_max_ratio: Vec::new(),
        abs_integral_trapezoid: Vec::new(),
        refinement_change: Vec::new(),
        pointwise_residual: Vec::new(),
        integrals: Vec::new(),
        envelope_integrals: Vec::new(),
        gap_ratios: Vec::new(),
        sign_ratio: Vec::new(),
        pass: false,
        notes: Vec::new(),
    };
    for &eps in epsilons {
        let reg = eps.powf(delta);
        let v = |x: f64| -kappa * basis.coulomb_average(x, eps, reg);
        let abs_v = |x: f64| v(x).abs();
        let (g, gamma, beta) = (r.g, r.gamma, r.beta);
        let envelope = |x: f64| g * (x.abs().powf(-gamma) + x.abs().powf(-beta));
        let mut holds = true;
        let mut worst: f64 = 0.0;
        for &x in &sample_x {
            for s in [x, -x] {
                let val = v(s).abs();
                holds &= val <= envelope(s) * (1.0 + ENVELOPE_TOL);
                worst = worst.max(val * s.abs() / kappa);
            }
        }
        r.envelope_holds.push(holds);
        r.envelope_max_ratio.push(worst);

        let coarse = trapezoid(&abs_v, -b, b, TRAPEZOID_CELLS);
        let fine = trapezoid(&abs_v, -b, b, 2 * TRAPEZOID_CELLS);
        r.abs_integral_trapezoid.push(fine);
        r.refinement_change.push((fine - coarse).abs() / fine);

        r.pointwise_residual
            .push(far.iter().map(|&x| (v(x) + kappa / x).abs()).fold(0.0, f64::max));

        // V is even; both integrals use the same nodes so the ratio in (v)
        // is computed from identical sums.
        let breaks = geometric_breaks(1e-2 * eps, b);
        let tol = 1e-10;
        let int_v = 2.0 * integrate_pieces(&v, &breaks, tol)?;
        let int_abs = 2.0 * integrate_pieces(&abs_v, &breaks, tol)?;
        r.integrals.push(int_v);
        r.sign_ratio.push(int_abs / int_v.abs());
        let env = |x: f64| 1.0 / ((x * x + eps * eps * k2).sqrt() + reg);
        r.envelope_integrals.push(-kappa * 2.0 * integrate_pieces(&env, &breaks, tol)?);
    }
    for k in 0..epsilons.len() - 1 {
        let g = r.integrals[k] - r.integrals[k + 1];
        let o = r.envelope_integrals[k] - r.envelope_integrals[k + 1];
        r.gap_ratios.push(g / o);
    }
    let cond_i = r.envelope_holds.iter().all(|&h| h);
    let cond_iv = strictly_decreasing(&r.integrals) && r.gap_ratios.iter().all(|g| (g - 1.0).abs() <= GAP_TOL);
    let cond_v = r.sign_ratio.iter().all(|&q| q == 1.0);
    if !cond_i {
        r.notes.push("envelope inequality violated at a sample".into());
    }
    if !cond_iv {
        r.notes.push("integrals do not diverge at the envelope rate".into());
    }
    if !cond_v {
        r.notes.push("sign ratio differs from 1".into());
    }
    r.notes
        .push("conditions (ii) and (iii) are sampled: trapezoid refinement and residuals on [0.1, 1]".into());
    r.pass = cond_i && cond_iv && cond_v;
    Ok(r)
}

impl KlausReport {
    /// Common report view: distances are the pointwise residuals (iii).
    pub fn summary(&self, runtime_seconds: f64) -> ConvergenceReport {
        let mut c = ConvergenceReport::new(TheoremTag::Klaus, self.epsilons.clone());
        c.distances = self.pointwise_residual.clone();
        let bools = |v: &[bool]| v.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        c.series.insert("envelope_holds".into(), bools(&self.envelope_holds));
        c.series.insert("envelope_max_ratio".into(), self.envelope_max_ratio.clone());
        c.series.insert("abs_integral_trapezoid".into(), self.abs_integral_trapezoid.clone());
        c.series.insert("refinement_change".into(), self.refinement_change.clone());
        c.series.insert("integrals".into(), self.integrals.clone());
        c.series.insert("envelope_integrals".into(), self.envelope_integrals.clone());
        c.series.insert("gap_ratios".into(), self.gap_ratios.clone());
        c.series.insert("sign_ratio".into(), self.sign_ratio.clone());
        c.pass = self.pass;
        c.notes = self.notes.clone();
        c.runtime_seconds = runtime_seconds;
        c
    }
}

/// Runs [`klaus_check`] and wraps it as a common report.
pub fn klaus_report(kappa: f64, delta: f64, epsilons: &[f64], basis: &TransverseBasis) -> Result<(KlausReport, ConvergenceReport)> {
    let start = Instant::now();
    let k = klaus_check(kappa, delta, epsilons, basis)?;
    let c = k.summary(start.elapsed().as_secs_f64());
    Ok((k, c))
}
