use crate::error::{check_delta, check_shift, LabError, Result};
use serde::{Deserialize, Serialize};

/// Strictly decreasing tube scales with the physics shared by every rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLadder {
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub kappa: f64,
    pub c: f64,
}

impl EpsilonLadder {
    pub fn new(epsilons: Vec<f64>, delta: f64, kappa: f64, c: f64) -> Result<Self> {
        let l = EpsilonLadder { epsilons, delta, kappa, c };
        l.validate()?;
        Ok(l)
    }

    /// `{0.2, 0.1, 0.05, 0.025}`, `delta = 0.3`, `c = 2 kappa` when attractive.
    pub fn standard(kappa: f64) -> Self {
        EpsilonLadder {
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            delta: 0.3,
            kappa,
            c: if kappa > 0.0 { 2.0 * kappa } else { 2.0 * kappa.abs() },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.len() < 3 {
            return Err(LabError::InvalidInput(format!(
                "a ladder needs at least 3 rungs, got {}",
                self.epsilons.len()
            )));
        }
        if !self.epsilons.iter().all(|&e| e > 0.0 && e <= 1.0) {
            return Err(LabError::InvalidInput("every epsilon must lie in (0, 1]".into()));
        }
        if !self.epsilons.windows(2).all(|w| w[1] < w[0]) {
            return Err(LabError::InvalidInput("epsilons must be strictly decreasing".into()));
        }
        check_delta(self.delta)?;
        if self.kappa > 0.0 {
            check_shift(self.kappa, self.c)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.epsilons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epsilons.is_empty()
    }
}

/// Least-squares line through `(ln eps, ln d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn fit_rate(epsilons: &[f64], distances: &[f64]) -> Result<RateFit> {
    if epsilons.len() != distances.len() {
        return Err(LabError::DegenerateFit("ladder and distance lengths differ".into()));
    }
    if distances.len() < 3 {
        return Err(LabError::DegenerateFit(format!("{} points, need at least 3", distances.len())));
    }
    if let Some(d) = distances.iter().find(|&&d| !(d > 0.0) || !d.is_finite()) {
        return Err(LabError::DegenerateFit(format!("distance {d} is not a positive number")));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::DegenerateFit("all epsilons coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        residual,
    })
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let e = [0.2, 0.1, 0.05, 0.025];
        let d: Vec<f64> = e.iter().map(|x| x * x).collect();
        assert!((fit_rate(&e, &d).unwrap().slope - 2.0).abs() < 1e-12);
        let d: Vec<f64> = e.iter().map(|x: &f64| 5.0 * x.powf(1.15)).collect();
        assert!((fit_rate(&e, &d).unwrap().slope - 1.15).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_distance_is_degenerate() {
        let e = [0.2, 0.1, 0.05];
        assert_eq!(fit_rate(&e, &[1.0, 0.0, 0.5]).unwrap_err().code(), "degenerate-fit");
    }

    #[test]
    fn ladder_rules() {
        assert!(EpsilonLadder::new(vec![0.2, 0.1], 0.3, 1.0, 2.0).is_err());
        assert!(EpsilonLadder::new(vec![0.2, 0.1, 0.1], 0.3, 1.0, 2.0).is_err());
        assert_eq!(EpsilonLadder::new(vec![0.2, 0.1, 0.05], 0.6, 1.0, 2.0).unwrap_err().code(), "delta-range");
        assert_eq!(EpsilonLadder::new(vec![0.2, 0.1, 0.05], 0.3, 1.0, 1.0).unwrap_err().code(), "shift-too-small");
        EpsilonLadder::standard(1.0).validate().unwrap();
    }
}
