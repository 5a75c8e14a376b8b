use super::ladder::EpsilonLadder;
use super::norm::rung_spec;
use crate::error::Result;
use crate::geometry::TransverseBasis;
use crate::oned::{assemble_t_eps, hardy_check, Grid1D};
use crate::tube::{assemble_a_forms, cross_term_check, lift, project_onto_l, CrossTerm, TubeOperatorSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Random smooth `w` with `w(0) = 0`: a sum of a few terms
/// `a x exp(-b (x - c)^2)` sampled on the grid.
pub fn random_admissible(grid: &Grid1D, rng: &mut impl Rng) -> Vec<f64> {
    let terms = rng.gen_range(1..=4);
    let params: Vec<(f64, f64, f64)> = (0..terms)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.2..5.0), rng.gen_range(-2.0..2.0)))
        .collect();
    grid.x
        .iter()
        .map(|&x| params.iter().map(|&(a, b, c)| a * x * (-b * (x - c) * (x - c)).exp()).sum())
        .collect()
}

/// Largest discrete Hardy ratio over `count` random admissible functions.
pub fn hardy_sweep(grid: &Grid1D, count: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| hardy_check(&random_admissible(grid, &mut rng), grid))
        .fold(0.0, f64::max)
}

fn random_bump(grid: &Grid1D, rng: &mut ChaCha8Rng, widths: (f64, f64)) -> Vec<f64> {
    let c = rng.gen_range(-1.0..1.0);
    let width = rng.gen_range(widths.0..widths.1);
    grid.x.iter().map(|&x| (-((x - c) / width).powi(2)).exp()).collect()
}

/// Even draws are white noise; odd draws are smooth limit-sector bumps
/// near the origin, where the attractive potential is felt most.
fn random_tube_vector(k: usize, grid: &Grid1D, basis: &TransverseBasis, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if k % 2 == 0 {
        return (0..grid.len() * basis.len()).map(|_| rng.gen::<f64>() - 0.5).collect();
    }
    lift(&random_bump(grid, rng, (0.1, 2.0)), basis)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityRung {
    pub epsilon: f64,
    /// `(c - kappa) / eps^delta`.
    pub floor: f64,
    /// Smallest `a_dot(psi) / ||psi||^2` over the sample.
    pub min_rayleigh: f64,
}

/// Rayleigh quotients of the shifted regularized form on random vectors.
pub fn form_positivity(ladder: &EpsilonLadder, template: &TubeOperatorSpec, basis: &TransverseBasis, count: usize, seed: u64) -> Result<Vec<PositivityRung>> {
    ladder
        .epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let run = || -> Result<PositivityRung> {
                let spec = rung_spec(template, ladder, eps);
                let (_, a_dot) = assemble_a_forms(&spec, basis)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut min_rayleigh = f64::INFINITY;
                for k in 0..count {
                    let v = random_tube_vector(k, &a_dot.grid, basis, &mut rng);
                    let n2: f64 = v.iter().map(|x| x * x).sum();
                    min_rayleigh = min_rayleigh.min(a_dot.form(&v) / n2);
                }
                Ok(PositivityRung {
                    epsilon: eps,
                    floor: (ladder.c - ladder.kappa) / eps.powf(ladder.delta),
                    min_rayleigh,
                })
            };
            run().map_err(|e| e.at_rung(i, eps))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossTermSweep {
    pub epsilons: Vec<f64>,
    /// Largest bound ratio over the sampled pairs, per rung.
    pub max_ratio: Vec<f64>,
    /// `max / min - 1` of `max_ratio` across rungs.
    pub spread: f64,
}

/// Cross-term bound ratios for random smooth pairs: `w` a Gaussian bump
/// near the origin, `eta` a second bump times the next transverse mode.
/// The same seed is used at every rung.
pub fn cross_term_sweep(ladder: &EpsilonLadder, template: &TubeOperatorSpec, basis: &TransverseBasis, pairs: usize, seed: u64) -> Result<CrossTermSweep> {
    let max_ratio: Vec<f64> = ladder
        .epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let run = || -> Result<f64> {
                let spec = rung_spec(template, ladder, eps);
                let (_, a_dot) = assemble_a_forms(&spec, basis)?;
                let t = assemble_t_eps(ladder.kappa, eps, ladder.delta, ladder.c, &a_dot.grid, basis)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                for _ in 0..pairs {
                    let w = random_bump(&a_dot.grid, &mut rng, (0.1, 2.0));
                    let profile = random_bump(&a_dot.grid, &mut rng, (0.05, 2.0));
                    let mut eta = Vec::with_capacity(a_dot.dim());
                    for g in &profile {
                        eta.extend(basis.u1.iter().map(|u| g * u));
                    }
                    let (_, eta) = project_onto_l(&eta, basis);
                    let CrossTerm { bound_ratio, .. } = cross_term_check(&w, &eta, &a_dot, &t, basis)?;
                    worst = worst.max(bound_ratio);
                }
                Ok(worst)
            };
            run().map_err(|e| e.at_rung(i, eps))
        })
        .collect::<Result<_>>()?;
    let hi = max_ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = max_ratio.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(CrossTermSweep {
        epsilons: ladder.epsilons.clone(),
        max_ratio,
        spread: hi / lo - 1.0,
    })
}
