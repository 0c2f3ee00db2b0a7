//! Orthonormal DCT-II and its inverse (DCT-III), computed through one
//! complex FFT of the same length with Makhoul's even/odd reordering.
//!
//! `X[k] = s_k sum_n x[n] cos(pi (2n + 1) k / 2N)` with `s_0 = sqrt(1/N)`
//! and `s_k = sqrt(2/N)` otherwise, so the transform is orthogonal.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft;

/// Precomputed DCT for a fixed length.
#[derive(Debug, Clone)]
pub struct Dct {
    n: usize,
    fft: Fft,
    // e^{-i pi k / 2N}
    shift: Vec<Complex64>,
    scale0: f64,
    scale: f64,
}

impl Dct {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "DCT length must be positive");
        let shift = (0..n)
            .map(|k| {
                let th = -PI * k as f64 / (2 * n) as f64;
                Complex64::new(libm::cos(th), libm::sin(th))
            })
            .collect();
        Self {
            n,
            fft: Fft::new(n),
            shift,
            scale0: libm::sqrt(1.0 / n as f64),
            scale: libm::sqrt(2.0 / n as f64),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch { expected: self.n, actual: len });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x.len())?;
        let n = self.n;
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n.div_ceil(2) {
            v[i].re = x[2 * i];
        }
        for i in 0..n / 2 {
            v[n - 1 - i].re = x[2 * i + 1];
        }
        self.fft.forward(&mut v);
        Ok((0..n)
            .map(|k| {
                let s = if k == 0 { self.scale0 } else { self.scale };
                s * (v[k] * self.shift[k]).re
            })
            .collect())
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check(coeffs.len())?;
        let n = self.n;
        // undo the orthonormal scaling to get the plain DCT-II values C_k
        let c = |k: usize| -> f64 {
            if k == 0 {
                coeffs[0] / self.scale0
            } else if k < n {
                coeffs[k] / self.scale
            } else {
                0.0
            }
        };
        let mut v: Vec<Complex64> = (0..n)
            .map(|k| self.shift[k].conj() * Complex64::new(c(k), -c(n - k)))
            .collect();
        v[0] = Complex64::new(c(0), 0.0);
        self.fft.inverse(&mut v);
        let mut out = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            out[2 * i] = v[i].re;
        }
        for i in 0..n / 2 {
            out[2 * i + 1] = v[n - 1 - i].re;
        }
        Ok(out)
    }
}

/// Orthonormal DCT-II of `x`.
pub fn dct2(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::EmptyInput { len: 0, min: 1 });
    }
    Dct::new(x.len()).forward(x)
}

/// Inverse of [`dct2`].
pub fn idct2(coeffs: &[f64]) -> Result<Vec<f64>> {
    if coeffs.is_empty() {
        return Err(Error::EmptyInput { len: 0, min: 1 });
    }
    Dct::new(coeffs.len()).inverse(coeffs)
}
