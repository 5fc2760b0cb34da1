//! Minimal compressed-row matrix for the Liouvillian's operator products.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Csr {
    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    #[cfg(test)]
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out = alpha * self * x + out` for a dense column-major `x`.
    pub fn mul_add(&self, alpha: Complex64, x: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let ncols = x.ncols();
        for j in 0..ncols {
            let xc = x.column(j);
            let xs = xc.as_slice();
            let mut oc = out.column_mut(j);
            let os = oc.as_mut_slice();
            for i in 0..self.n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[k] * xs[self.cols[k]];
                }
                os[i] += alpha * acc;
            }
        }
    }

    pub fn mul(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.n, x.ncols());
        self.mul_add(Complex64::new(1.0, 0.0), x, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_product() {
        let a = DMatrix::from_fn(5, 5, |i, j| {
            if (i + 2 * j) % 3 == 0 { Complex64::new(i as f64 - 1.5, j as f64) } else { Complex64::new(0.0, 0.0) }
        });
        let x = DMatrix::from_fn(5, 4, |i, j| Complex64::new((i * j) as f64 * 0.3, 1.0 - i as f64));
        let csr = Csr::from_dense(&a);
        assert!(csr.nnz() < 25);
        let diff = csr.mul(&x) - &a * &x;
        assert!(diff.iter().all(|z| z.norm() < 1e-13));
    }
}
