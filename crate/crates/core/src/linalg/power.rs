use super::{norm, Scalar};
use crate::error::{LabError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct PowerOptions {
    pub max_iter: usize,
    /// Relative change of the estimate below which iteration stops.
    pub stagnation: f64,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            max_iter: 30,
            stagnation: 1e-4,
            seed: 11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Successive estimates `||D v_k||` with `||v_k|| = 1`.
    pub history: Vec<f64>,
}

/// Largest singular value of `D` by power iteration on `D* D`.
pub fn operator_norm<T, F, G>(n: usize, apply: F, apply_adjoint: G, opts: &PowerOptions) -> Result<NormEstimate>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<Vec<T>>,
    G: Fn(&[T]) -> Result<Vec<T>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let v: Vec<T> = (0..n).map(|_| T::from_real(rng.gen::<f64>() - 0.5)).collect();
    operator_norm_from(v, apply, apply_adjoint, opts)
}

/// [`operator_norm`] from a given nonzero start vector.
pub fn operator_norm_from<T, F, G>(start: Vec<T>, apply: F, apply_adjoint: G, opts: &PowerOptions) -> Result<NormEstimate>
where
    T: Scalar,
    F: Fn(&[T]) -> Result<Vec<T>>,
    G: Fn(&[T]) -> Result<Vec<T>>,
{
    let s = norm(&start);
    if s == 0.0 {
        return Err(LabError::InvalidInput("zero start vector".into()));
    }
    let mut v: Vec<T> = start.iter().map(|x| x.scale(1.0 / s)).collect();
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let y = apply(&v)?;
        let est = norm(&y);
        history.push(est);
        if est == 0.0 {
            return Ok(NormEstimate {
                value: 0.0,
                iterations: it,
                history,
            });
        }
        if it > 1 {
            let prev = history[it - 2];
            if (est - prev).abs() <= opts.stagnation * est {
                return Ok(NormEstimate {
                    value: est,
                    iterations: it,
                    history,
                });
            }
        }
        let w = apply_adjoint(&y)?;
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(NormEstimate {
                value: est,
                iterations: it,
                history,
            });
        }
        v = w.iter().map(|x| x.scale(1.0 / wn)).collect();
    }
    Err(LabError::NormEstimateUnreliable { history })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_operator_norm() {
        let d = [3.0, -1.0, 0.5, 2.0];
        let f = |v: &[f64]| Ok(v.iter().zip(&d).map(|(a, b)| a * b).collect::<Vec<_>>());
        let est = operator_norm(4, f, f, &PowerOptions::default()).unwrap();
        assert!((est.value - 3.0).abs() < 1e-3);
    }

    #[test]
    fn zero_operator_has_zero_norm() {
        let f = |v: &[f64]| Ok(vec![0.0; v.len()]);
        let est = operator_norm(5, f, f, &PowerOptions::default()).unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn clustered_spectrum_without_enough_iterations_is_flagged() {
        let d: Vec<f64> = (0..50).map(|k| 1.0 - 1e-3 * k as f64).collect();
        let f = |v: &[f64]| Ok(v.iter().zip(&d).map(|(a, b)| a * b).collect::<Vec<_>>());
        let opts = PowerOptions {
            max_iter: 3,
            stagnation: 1e-12,
            seed: 1,
        };
        let err = operator_norm(50, f, f, &opts).unwrap_err();
        assert_eq!(err.code(), "norm-estimate-unreliable");
    }
}
