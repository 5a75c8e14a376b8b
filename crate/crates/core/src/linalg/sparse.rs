use super::Scalar;
use sprs::{CsMat, TriMat};

/// Symmetric sparse matrix plus a lazily applied multiple of the identity.
///
/// Keeping the shift separate makes `with_shift(s) - self == s * I` hold
/// exactly rather than up to rounding in the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    mat: CsMat<f64>,
    shift: f64,
}

/// Triplet accumulator; duplicate entries are summed on `build`.
#[derive(Debug)]
pub struct Assembler {
    n: usize,
    tri: TriMat<f64>,
}

impl Assembler {
    pub fn new(n: usize) -> Self {
        Assembler {
            n,
            tri: TriMat::new((n, n)),
        }
    }

    pub fn with_capacity(n: usize, nnz: usize) -> Self {
        Assembler {
            n,
            tri: TriMat::with_capacity((n, n), nnz),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.tri.add_triplet(i, j, v);
        }
    }

    /// Adds `v` at (i, j) and (j, i), or once on the diagonal.
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        self.add(i, j, v);
        if i != j {
            self.add(j, i, v);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn build(self) -> SparseOperator {
        SparseOperator {
            mat: self.tri.to_csr(),
            shift: 0.0,
        }
    }

    /// Builds `(M + M^T) / 2`, which is bitwise symmetric whatever order
    /// the duplicates were summed in.
    pub fn build_symmetric(self) -> SparseOperator {
        let m: CsMat<f64> = self.tri.to_csr();
        let mt: CsMat<f64> = m.transpose_view().to_csr();
        SparseOperator {
            mat: (&m + &mt).map(|v| 0.5 * v),
            shift: 0.0,
        }
    }
}

impl SparseOperator {
    pub fn from_csr(mat: CsMat<f64>) -> Self {
        assert_eq!(mat.rows(), mat.cols(), "operator must be square");
        SparseOperator { mat, shift: 0.0 }
    }

    pub fn identity(n: usize) -> Self {
        SparseOperator::from_csr(CsMat::eye(n))
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn nnz(&self) -> usize {
        self.mat.nnz()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn matrix(&self) -> &CsMat<f64> {
        &self.mat
    }

    /// Same stored matrix, shift replaced by `self.shift() + s`.
    pub fn with_shift(&self, s: f64) -> SparseOperator {
        SparseOperator {
            mat: self.mat.clone(),
            shift: self.shift + s,
        }
    }

    /// Folds the lazy shift into the stored diagonal.
    pub fn materialized(&self) -> SparseOperator {
        if self.shift == 0.0 {
            return self.clone();
        }
        let n = self.dim();
        let mut a = Assembler::with_capacity(n, self.nnz() + n);
        for (i, j, v) in self.entries() {
            a.add(i, j, v);
        }
        a.build()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let v = self.mat.get(i, j).copied().unwrap_or(0.0);
        if i == j {
            v + self.shift
        } else {
            v
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    /// All stored entries with the shift folded into the diagonal.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let n = self.dim();
        let mut out = Vec::with_capacity(self.nnz() + n);
        let mut has_diag = vec![false; n];
        for (i, row) in self.mat.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                if i == j {
                    has_diag[i] = true;
                    out.push((i, j, v + self.shift));
                } else {
                    out.push((i, j, v));
                }
            }
        }
        if self.shift != 0.0 {
            for (i, seen) in has_diag.iter().enumerate() {
                if !seen {
                    out.push((i, i, self.shift));
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        for (i, row) in self.mat.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                if self.mat.get(j, i).copied() != Some(v) {
                    return false;
                }
            }
        }
        true
    }

    pub fn matvec<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim());
        let mut y = Vec::with_capacity(x.len());
        for (i, row) in self.mat.outer_iterator().enumerate() {
            let mut s = T::zero();
            for (j, &v) in row.iter() {
                s += x[j].scale(v);
            }
            if self.shift != 0.0 {
                s += x[i].scale(self.shift);
            }
            y.push(s);
        }
        y
    }

    /// Real quadratic form `x^T A x` for real vectors.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let y = self.matvec(x);
        x.iter().zip(&y).map(|(a, b)| a * b).sum()
    }

    /// Sum of two operators on the same space.
    pub fn plus(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim(), other.dim());
        SparseOperator {
            mat: &self.mat + &other.mat,
            shift: self.shift + other.shift,
        }
    }

    pub fn scaled(&self, s: f64) -> SparseOperator {
        SparseOperator {
            mat: self.mat.map(|v| v * s),
            shift: self.shift * s,
        }
    }

    /// For each row, the smallest column index in its lower triangle.
    pub fn envelope_first(&self) -> Vec<usize> {
        self.mat
            .outer_iterator()
            .enumerate()
            .map(|(i, row)| row.iter().map(|(j, _)| j).filter(|&j| j <= i).min().unwrap_or(i).min(i))
            .collect()
    }

    pub fn envelope_size(&self) -> usize {
        self.envelope_first().iter().enumerate().map(|(i, f)| i - f).sum()
    }
}

/// Sparse product `a^T * diag(w) * b` for rectangular factors given as
/// CSR matrices with the same row count.
pub fn gram(a: &CsMat<f64>, w: &[f64], b: &CsMat<f64>) -> CsMat<f64> {
    assert_eq!(a.rows(), b.rows());
    assert_eq!(a.rows(), w.len());
    let wb: CsMat<f64> = {
        let mut tri = TriMat::new((b.rows(), b.cols()));
        for (i, row) in b.outer_iterator().enumerate() {
            for (j, &v) in row.iter() {
                tri.add_triplet(i, j, w[i] * v);
            }
        }
        tri.to_csr()
    };
    let at: CsMat<f64> = a.transpose_view().to_csr();
    &at * &wb
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn small() -> SparseOperator {
        let mut a = Assembler::new(3);
        a.add(0, 0, 2.0);
        a.add_sym(0, 1, -1.0);
        a.add(1, 1, 2.0);
        a.add_sym(1, 2, -1.0);
        a.add(2, 2, 2.0);
        a.add(2, 2, 0.5);
        a.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let op = small();
        assert_eq!(op.get(2, 2), 2.5);
        assert!(op.is_symmetric());
    }

    #[test]
    fn lazy_shift_is_exact() {
        let op = small();
        let s = 3.7_f64.powf(0.3);
        let shifted = op.with_shift(s);
        assert_eq!(shifted.shift() - op.shift(), s);
        assert_eq!(shifted.matrix(), op.matrix());
        let x = vec![1.0, -2.0, 0.5];
        let y0 = op.matvec(&x);
        let y1 = shifted.matvec(&x);
        for k in 0..3 {
            assert!((y1[k] - y0[k] - s * x[k]).abs() < 1e-14);
        }
        assert_eq!(shifted.materialized().get(1, 1), 2.0 + s);
    }

    #[test]
    fn complex_matvec_matches_real_parts() {
        let op = small();
        let x = vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0), Complex64::new(3.0, 0.0)];
        let y = op.matvec(&x);
        let yr = op.matvec(&x.iter().map(|z| z.re).collect::<Vec<_>>());
        let yi = op.matvec(&x.iter().map(|z| z.im).collect::<Vec<_>>());
        for k in 0..3 {
            assert_eq!(y[k].re, yr[k]);
            assert_eq!(y[k].im, yi[k]);
        }
    }

    #[test]
    fn envelope_of_tridiagonal() {
        let op = small();
        assert_eq!(op.envelope_first(), vec![0, 0, 1]);
        assert_eq!(op.envelope_size(), 2);
    }
}
