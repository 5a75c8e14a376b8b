use super::sparse::SparseOperator;
use super::{axpy, dot, norm};
use crate::error::{LabError, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Number of eigenpairs wanted, counted from the bottom.
    pub nev: usize,
    /// Relative residual `||A v - l v|| / max(|l|, 1)` accepted as converged.
    pub tol: f64,
    pub max_steps: usize,
    pub seed: u64,
    /// Shift used by the inverse; must lie below the wanted eigenvalues.
    pub sigma: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            nev: 1,
            tol: 1e-10,
            max_steps: 300,
            seed: 7,
            sigma: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub steps: usize,
}

/// Lowest eigenpairs of `op` by shift-invert Lanczos with full
/// reorthogonalization. `inverse` applies `(op - sigma)^{-1}`. The search is
/// restricted to the orthogonal complement of `deflate` (orthonormal).
pub fn lowest_eigenpairs<F>(
    op: &SparseOperator,
    inverse: F,
    opts: &LanczosOptions,
    deflate: &[Vec<f64>],
) -> Result<EigenPairs>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    project_out(&mut q, deflate);
    let s = norm(&q);
    if s == 0.0 {
        return Err(LabError::InvalidInput("empty Krylov start vector".into()));
    }
    q.iter_mut().for_each(|x| *x /= s);

    let max_steps = opts.max_steps.min(n.saturating_sub(deflate.len())).max(1);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut best_residual = f64::INFINITY;

    for step in 1..=max_steps {
        let mut w = inverse(&basis[step - 1]);
        project_out(&mut w, deflate);
        let a = dot(&basis[step - 1], &w);
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                axpy(-c, v, &mut w);
            }
            project_out(&mut w, deflate);
        }
        let b = norm(&w);

        let check = step >= opts.nev && (step % 5 == 0 || step == max_steps || b < 1e-13);
        if check {
            let (values, vectors, residuals) = ritz(op, &basis, &alpha, &beta, opts)?;
            let worst = residuals.iter().cloned().fold(0.0, f64::max);
            best_residual = best_residual.min(worst);
            if worst <= opts.tol {
                return Ok(EigenPairs {
                    values,
                    vectors,
                    residuals,
                    steps: step,
                });
            }
        }
        if b < 1e-13 || step == max_steps {
            break;
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    Err(LabError::EigensolverStall {
        iterations: basis.len(),
        residual: best_residual,
    })
}

fn project_out(w: &mut [f64], deflate: &[Vec<f64>]) {
    for d in deflate {
        let c = dot(d, w);
        axpy(-c, d, w);
    }
}

type Ritz = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>);

fn ritz(
    op: &SparseOperator,
    basis: &[Vec<f64>],
    alpha: &[f64],
    beta: &[f64],
    opts: &LanczosOptions,
) -> Result<Ritz> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    // Largest theta of the inverse <-> smallest eigenvalues above sigma.
    let mut order: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > 0.0).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if order.len() < opts.nev {
        return Err(LabError::EigensolverStall {
            iterations: m,
            residual: f64::INFINITY,
        });
    }
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    let mut residuals = Vec::new();
    let n = op.dim();
    for &k in order.iter().take(opts.nev) {
        let theta = eig.eigenvalues[k];
        let lambda = opts.sigma + 1.0 / theta;
        let mut y = vec![0.0; n];
        for (j, v) in basis.iter().enumerate().take(m) {
            axpy(eig.eigenvectors[(j, k)], v, &mut y);
        }
        let s = norm(&y);
        y.iter_mut().for_each(|x| *x /= s);
        let ay = op.matvec(&y);
        let r: f64 = ay
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        values.push(lambda);
        vectors.push(y);
        residuals.push(r / lambda.abs().max(1.0));
    }
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok((
        idx.iter().map(|&i| values[i]).collect(),
        idx.iter().map(|&i| vectors[i].clone()).collect(),
        idx.iter().map(|&i| residuals[i]).collect(),
    ))
}
