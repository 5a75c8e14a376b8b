use super::skyline::Refined;
use super::sparse::SparseOperator;
use super::{norm, Scalar};
use crate::error::{LabError, Result};

/// Bilinear (unconjugated) product; COCG relies on it for complex
/// symmetric systems and it reduces to the usual dot product for reals.
fn bilinear<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

/// Jacobi-preconditioned conjugate orthogonal conjugate gradients for
/// `(A - z) x = b` with `A` real symmetric. For real `z` below the
/// spectrum this is plain preconditioned CG.
pub fn cocg<T: Scalar>(
    op: &SparseOperator,
    z: T,
    b: &[T],
    rtol: f64,
    max_iter: usize,
) -> Result<Refined<T>> {
    let n = op.dim();
    let bn = norm(b);
    if bn == 0.0 {
        return Ok(Refined {
            x: vec![T::zero(); n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let dinv: Vec<T> = op
        .diagonal()
        .iter()
        .map(|&d| T::from_real(1.0) / (T::from_real(d) - z))
        .collect();
    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut zr: Vec<T> = r.iter().zip(&dinv).map(|(a, d)| *a * *d).collect();
    let mut p = zr.clone();
    let mut rho = bilinear(&r, &zr);
    let mut history = Vec::new();
    for it in 1..=max_iter {
        let ap: Vec<T> = op
            .matvec(&p)
            .iter()
            .zip(&p)
            .map(|(a, pi)| *a - z * *pi)
            .collect();
        let alpha = rho / bilinear(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / bn;
        if it % 50 == 0 {
            history.push(rel);
        }
        if rel <= rtol {
            return Ok(Refined {
                x,
                iterations: it,
                residual: rel,
            });
        }
        zr = r.iter().zip(&dinv).map(|(a, d)| *a * *d).collect();
        let rho_new = bilinear(&r, &zr);
        let beta = rho_new / rho;
        rho = rho_new;
        for i in 0..n {
            p[i] = zr[i] + beta * p[i];
        }
    }
    history.push(norm(&r) / bn);
    Err(LabError::LinearSolveStall { history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tridiag::SymTridiagonal;
    use num_complex::Complex64;

    #[test]
    fn cg_and_cocg_converge_on_a_path_laplacian() {
        let n = 100;
        let op = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).to_sparse();
        let v: Vec<f64> = (0..n).map(|k| (k as f64 * 0.1).sin()).collect();
        let b: Vec<f64> = op.matvec(&v).iter().zip(&v).map(|(a, x)| a + x).collect();
        let sol = cocg(&op, -1.0, &b, 1e-12, 500).unwrap();
        assert!(super::super::norm(&super::super::sub(&sol.x, &v)) < 1e-9);

        let z = Complex64::new(0.3, 1.0);
        let vc: Vec<Complex64> = v.iter().map(|&a| Complex64::new(a, -a)).collect();
        let bc: Vec<Complex64> = op.matvec(&vc).iter().zip(&vc).map(|(a, x)| *a - z * *x).collect();
        let solc = cocg(&op, z, &bc, 1e-12, 2000).unwrap();
        assert!(super::super::norm(&super::super::sub(&solc.x, &vc)) < 1e-8);
    }

    #[test]
    fn stall_is_reported() {
        let n = 400;
        let op = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).to_sparse();
        let b = vec![1.0; n];
        let err = cocg(&op, 0.0, &b, 1e-14, 3).unwrap_err();
        assert_eq!(err.code(), "linear-solve-stall");
    }
}
