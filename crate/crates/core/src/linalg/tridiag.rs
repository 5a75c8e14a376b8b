use super::sparse::{Assembler, SparseOperator};
use super::Scalar;

/// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        SymTridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut y: Vec<T> = (0..n).map(|i| x[i].scale(self.diag[i])).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += x[i + 1].scale(self.off[i]);
            y[i + 1] += x[i].scale(self.off[i]);
        }
        y
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn to_sparse(&self) -> SparseOperator {
        let n = self.dim();
        let mut a = Assembler::with_capacity(n, 3 * n);
        for i in 0..n {
            a.add(i, i, self.diag[i]);
        }
        for (i, &o) in self.off.iter().enumerate() {
            a.add_sym(i, i + 1, o);
        }
        a.build()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.dim() {
            let b2 = if i > 0 { self.off[i - 1] * self.off[i - 1] } else { 0.0 };
            q = self.diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -f64::EPSILON * (x.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.dim());
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (lo.abs() + hi.abs() + 1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn lowest(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.dim())).map(|k| self.eigenvalue(k)).collect()
    }

    /// Solves `(T - z) x = b` by Gaussian elimination without pivoting.
    pub fn solve<T: Scalar>(&self, z: T, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        let mut piv = T::from_real(self.diag[0]) - z;
        d[0] = b[0] / piv;
        for i in 1..n {
            c[i - 1] = T::from_real(self.off[i - 1]) / piv;
            piv = T::from_real(self.diag[i]) - z - c[i - 1].scale(self.off[i - 1]);
            d[i] = (b[i] - d[i - 1].scale(self.off[i - 1])) / piv;
        }
        let mut x = d;
        for i in (0..n.saturating_sub(1)).rev() {
            let next = x[i + 1];
            x[i] -= c[i] * next;
        }
        x
    }

    /// Unit eigenvector for a (converged) eigenvalue by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        let sigma = lambda + 1e-10 * (lambda.abs() + 1.0);
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 37 % 11) as f64)).collect();
        for _ in 0..4 {
            v = self.solve(sigma, &v);
            let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= s);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn laplacian(n: usize) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn bisection_matches_closed_form() {
        let n = 50;
        let t = laplacian(n);
        for k in 0..5 {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_solve_inverts() {
        let t = laplacian(20);
        let z = Complex64::new(0.5, 1.0);
        let v: Vec<Complex64> = (0..20).map(|k| Complex64::new(k as f64, 1.0)).collect();
        let b: Vec<Complex64> = t.matvec(&v).iter().zip(&v).map(|(a, x)| *a - z * *x).collect();
        let x = t.solve(z, &b);
        for (a, b) in x.iter().zip(&v) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn eigenvector_has_small_residual() {
        let t = laplacian(40);
        let l = t.eigenvalue(0);
        let v = t.eigenvector(l);
        let r: f64 = t
            .matvec(&v)
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - l * b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(r < 1e-9);
    }
}
