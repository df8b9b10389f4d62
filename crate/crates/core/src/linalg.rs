//! Small dense matrices and their spectra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                data.push(f(i, k));
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, k| if i == k { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.n + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Rows and columns restricted to `idx`, in the given order.
    pub fn submatrix(&self, idx: &[usize]) -> DenseMatrix {
        DenseMatrix::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|x| !x.is_finite()) {
            Some(pos) => Err(Error::NonFinite(pos / self.n, pos % self.n)),
            None => Ok(()),
        }
    }
}

/// All eigenvalues with multiplicity, sorted by descending modulus (ties by
/// descending real part, then imaginary part).
///
/// Hessenberg reduction plus shifted QR via nalgebra's real Schur form.
pub fn spectrum(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    m.check_finite()?;
    let mut eig: Vec<Complex64> = match m.n {
        0 => Vec::new(),
        1 => vec![Complex64::new(m.data[0], 0.0)],
        n => DMatrix::from_row_slice(n, n, &m.data)
            .complex_eigenvalues()
            .iter()
            .map(|z| Complex64::new(z.re, z.im))
            .collect(),
    };
    eig.sort_by(|a, b| {
        b.norm()
            .total_cmp(&a.norm())
            .then(b.re.total_cmp(&a.re))
            .then(b.im.total_cmp(&a.im))
    });
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(v: &[Complex64]) -> Vec<f64> {
        v.iter().map(|z| z.re).collect()
    }

    #[test]
    fn identity_spectrum() {
        let s = spectrum(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(s.len(), 3);
        for z in s {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_diagonal_offdiagonal_structure() {
        let (a, b) = (23.0 / 24.0, 1.0 / 12.0);
        let m = DenseMatrix::from_fn(3, |i, k| if i == k { a } else { b });
        let s = spectrum(&m).unwrap();
        let re = sorted_re(&s);
        assert!((re[0] - 1.125).abs() < 1e-12);
        assert!((re[1] - 0.875).abs() < 1e-12);
        assert!((re[2] - 0.875).abs() < 1e-12);
        assert!(s.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn companion_golden_ratio() {
        // x^2 - x - 1
        let m = DenseMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let s = spectrum(&m).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s[0].re - phi).abs() < 1e-12);
        assert!((s[1].re - (1.0 - phi)).abs() < 1e-12);
    }

    #[test]
    fn rotation_has_complex_pair() {
        let (c, s) = (0.6f64, 0.8f64);
        let m = DenseMatrix::new(3, vec![c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 0.5]).unwrap();
        let e = spectrum(&m).unwrap();
        assert!((e[0].norm() - 1.0).abs() < 1e-12);
        assert!((e[0].im.abs() - 0.8).abs() < 1e-12);
        assert!((e[0] - e[1].conj()).norm() < 1e-12);
        assert!((e[2].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn triangular_matrix_eigenvalues_are_diagonal() {
        let n = 40;
        let m = DenseMatrix::from_fn(n, |i, k| {
            if k > i {
                ((i * 7 + k * 3) % 11) as f64 / 11.0
            } else if i == k {
                (i + 1) as f64 / n as f64
            } else {
                0.0
            }
        });
        let e = spectrum(&m).unwrap();
        for (j, z) in e.iter().enumerate() {
            let want = (n - j) as f64 / n as f64;
            assert!((z.re - want).abs() < 1e-9 * want.max(1.0), "{z} vs {want}");
        }
    }

    #[test]
    fn rejects_non_finite() {
        let m = DenseMatrix::new(2, vec![1.0, f64::NAN, 0.0, 1.0]).unwrap();
        assert_eq!(spectrum(&m), Err(Error::NonFinite(0, 1)));
        assert!(DenseMatrix::new(2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn trivial_sizes() {
        assert!(spectrum(&DenseMatrix::from_fn(0, |_, _| 0.0)).unwrap().is_empty());
        let e = spectrum(&DenseMatrix::new(1, vec![-0.25]).unwrap()).unwrap();
        assert_eq!(e, vec![Complex64::new(-0.25, 0.0)]);
    }
}
