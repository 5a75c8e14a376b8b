//! Adaptive one-dimensional integration on top of double-exponential rules.

use crate::error::{LabError, Result};
use std::collections::BinaryHeap;

const MAX_INTERVALS: usize = 4000;

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Piece {
    let out = quadrature::double_exponential::integrate(f, a, b, tol);
    let error = if out.integral.is_finite() { out.error_estimate } else { f64::INFINITY };
    Piece {
        a,
        b,
        value: out.integral,
        error,
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`. The interval
/// with the largest error estimate is bisected until the estimates sum to
/// less than `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    heap.push(rule(f, a, b, tol));
    let mut count = 1;
    loop {
        let total: f64 = heap.iter().map(|p| p.error).sum();
        if total <= tol {
            return Ok(heap.iter().map(|p| p.value).sum());
        }
        if count >= MAX_INTERVALS {
            return Err(LabError::InvalidInput(format!(
                "quadrature on [{a}, {b}] did not reach tolerance {tol:.1e} (estimate {total:.1e})"
            )));
        }
        let worst = heap.pop().expect("nonempty");
        let m = 0.5 * (worst.a + worst.b);
        heap.push(rule(f, worst.a, m, tol));
        heap.push(rule(f, m, worst.b, tol));
        count += 1;
    }
}

/// Integrates over consecutive pieces `[p_0, p_1], [p_1, p_2], ...`,
/// splitting the tolerance evenly. Breakpoints should sit at kinks and
/// at the edges of narrow features.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: f64) -> Result<f64> {
    if points.len() < 2 {
        return Ok(0.0);
    }
    let share = tol / (points.len() - 1) as f64;
    let mut total = 0.0;
    for w in points.windows(2) {
        total += integrate(f, w[0], w[1], share)?;
    }
    Ok(total)
}

/// Geometric breakpoints `0, s, 2s, 4s, ..., <= end` for integrands with a
/// feature of width `s` at the origin.
pub fn geometric_breaks(s: f64, end: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = s.min(end);
    while x < end {
        pts.push(x);
        x *= 2.0;
    }
    pts.push(end);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_singularity() {
        let v = integrate(&|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn narrow_peak_with_breaks() {
        let s = 1e-4;
        let f = |x: f64| 1.0 / (x + s);
        let v = integrate_pieces(&f, &geometric_breaks(s, 1.0), 1e-9).unwrap();
        let exact = ((1.0 + s) / s).ln();
        assert!((v - exact).abs() < 1e-8);
    }
}
