//! Dense row-major complex 3-tensors.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};
use num_complex::Complex64;

use crate::{Error, Result};

/// Row-major `[d0, d1, d2]` complex tensor; the last axis is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    shape: [usize; 3],
    data: Vec<Complex64>,
}

impl Cube {
    pub fn zeros(shape: [usize; 3]) -> Self {
        Self { shape, data: vec![Complex64::new(0.0, 0.0); shape.iter().product()] }
    }

    pub fn from_vec(shape: [usize; 3], data: Vec<Complex64>) -> Result<Self> {
        if data.len() != shape.iter().product::<usize>() {
            return Err(Error::ShapeMismatch { expected: shape, found: [data.len(), 1, 1] });
        }
        Ok(Self { shape, data })
    }

    /// Builds a cube by evaluating `f(a, b, c)` at every index.
    pub fn from_fn(shape: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(shape.iter().product());
        for a in 0..shape[0] {
            for b in 0..shape[1] {
                for c in 0..shape[2] {
                    data.push(f(a, b, c));
                }
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn offset(&self, a: usize, b: usize, c: usize) -> usize {
        debug_assert!(a < self.shape[0] && b < self.shape[1] && c < self.shape[2]);
        (a * self.shape[1] + b) * self.shape[2] + c
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    /// Contiguous `[d1, d2]` slab at first index `a`.
    pub fn slab(&self, a: usize) -> &[Complex64] {
        let n = self.shape[1] * self.shape[2];
        &self.data[a * n..(a + 1) * n]
    }

    pub fn slab_mut(&mut self, a: usize) -> &mut [Complex64] {
        let n = self.shape[1] * self.shape[2];
        &mut self.data[a * n..(a + 1) * n]
    }

    /// Contiguous last-axis lane at `(a, b)`.
    pub fn lane(&self, a: usize, b: usize) -> &[Complex64] {
        let start = self.offset(a, b, 0);
        &self.data[start..start + self.shape[2]]
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.data.iter_mut().for_each(|z| *z *= factor);
    }

    /// Entrywise `self += other`.
    pub fn add_assign(&mut self, other: &Cube) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch { expected: self.shape, found: other.shape });
        }
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// Largest entry-wise modulus difference, or infinity on shape mismatch.
    pub fn max_abs_diff(&self, other: &Cube) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<[usize; 3]> for Cube {
    type Output = Complex64;

    #[inline]
    fn index(&self, [a, b, c]: [usize; 3]) -> &Complex64 {
        &self.data[self.offset(a, b, c)]
    }
}

impl IndexMut<[usize; 3]> for Cube {
    #[inline]
    fn index_mut(&mut self, [a, b, c]: [usize; 3]) -> &mut Complex64 {
        let k = self.offset(a, b, c);
        &mut self.data[k]
    }
}
