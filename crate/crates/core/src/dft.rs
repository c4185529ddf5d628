//! Discrete Fourier transform backends.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

/// A batched, unnormalised forward DFT
/// `X[k] = Σₙ x[n] e^{−j2πkn/N}` with natural output order.
///
/// Implementations must agree with the direct sum to ~1e-12 relative.
pub trait FourierEngine {
    /// Transforms every consecutive chunk of `len` samples of `data` in place.
    /// `data.len()` is a multiple of `len`.
    fn forward(&self, data: &mut [Complex64], len: usize);
}

impl<E: FourierEngine + ?Sized> FourierEngine for &E {
    fn forward(&self, data: &mut [Complex64], len: usize) {
        (**self).forward(data, len)
    }
}

/// `O(N²)` direct summation with an exact twiddle table. Allocation-light and
/// `no_std`; fine for small grids, too slow for full-size radar cubes.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectDft;

impl FourierEngine for DirectDft {
    fn forward(&self, data: &mut [Complex64], len: usize) {
        if len == 0 {
            return;
        }
        assert_eq!(data.len() % len, 0, "buffer is not a whole number of {len}-point transforms");
        let twiddle: Vec<Complex64> =
            (0..len).map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64)).collect();
        let mut out = alloc::vec![Complex64::new(0.0, 0.0); len];
        for chunk in data.chunks_exact_mut(len) {
            for (k, slot) in out.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut idx = 0usize;
                for x in chunk.iter() {
                    acc += x * twiddle[idx];
                    idx += k;
                    if idx >= len {
                        idx -= len;
                    }
                }
                *slot = acc;
            }
            chunk.copy_from_slice(&out);
        }
    }
}
