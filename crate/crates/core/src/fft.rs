//! Complex FFT for arbitrary lengths: iterative radix-2 for powers of two,
//! Bluestein's chirp-z for everything else.
//!
//! Convention: the forward transform is unnormalized,
//! `X[k] = sum_n x[n] e^{-2 pi i k n / N}`; [`Fft::inverse`] applies the
//! conjugate kernel *and* the `1/N` factor.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

fn cis(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    // e^{-2 pi i k / n}, k < n/2
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2).map(|k| cis(-2.0 * PI * k as f64 / n as f64)).collect();
        Self { n, twiddles }
    }

    /// In-place forward (`inverse == false`) or conjugate transform, unscaled.
    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: Radix2,
    // e^{-i pi k^2 / n}
    chirp: Vec<Complex64>,
    // forward transform of the conjugate chirp, wrapped to the inner length
    kernel: Vec<Complex64>,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        let two_n = 2 * n as u128;
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                // k^2 mod 2n keeps the phase argument small
                let k2 = (k as u128 * k as u128) % two_n;
                cis(-PI * k2 as f64 / n as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        inner.run(&mut kernel, false);
        Self { inner, chirp, kernel }
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.chirp.len();
        let m = self.inner.n;
        let mut work = vec![Complex64::new(0.0, 0.0); m];
        // conj trick: inverse(x) = conj(forward(conj(x)))
        for k in 0..n {
            let x = if inverse { buf[k].conj() } else { buf[k] };
            work[k] = x * self.chirp[k];
        }
        self.inner.run(&mut work, false);
        for (w, h) in work.iter_mut().zip(&self.kernel) {
            *w *= h;
        }
        self.inner.run(&mut work, true);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            let y = work[k] * scale * self.chirp[k];
            buf[k] = if inverse { y.conj() } else { y };
        }
    }
}

#[derive(Debug, Clone)]
enum Algorithm {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// A precomputed transform plan for one length.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    algo: Algorithm,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        let algo = if n.is_power_of_two() || n == 0 {
            Algorithm::Radix2(Radix2::new(n.max(1)))
        } else {
            Algorithm::Bluestein(Bluestein::new(n))
        };
        Self { n, algo }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward DFT in place. Panics if `buf.len() != self.len()`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "fft length");
        match &self.algo {
            Algorithm::Radix2(r) => r.run(buf, false),
            Algorithm::Bluestein(b) => b.run(buf, false),
        }
    }

    /// Inverse DFT in place, including the `1/N` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.n, "fft length");
        match &self.algo {
            Algorithm::Radix2(r) => r.run(buf, true),
            Algorithm::Bluestein(b) => b.run(buf, true),
        }
        let scale = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}
