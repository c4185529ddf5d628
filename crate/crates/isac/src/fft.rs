//! FFT-backed [`FourierEngine`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use isac_core::FourierEngine;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Mixed-radix FFTs from `rustfft`, with plans cached per length.
///
/// Cheap to share across threads; each call allocates its own scratch.
pub struct RustFftEngine {
    plans: Mutex<HashMap<usize, Arc<dyn Fft<f64>>>>,
    planner: Mutex<FftPlanner<f64>>,
}

impl RustFftEngine {
    pub fn new() -> Self {
        Self { plans: Mutex::new(HashMap::new()), planner: Mutex::new(FftPlanner::new()) }
    }

    fn plan(&self, len: usize) -> Arc<dyn Fft<f64>> {
        let mut plans = self.plans.lock().expect("fft plan cache poisoned");
        plans
            .entry(len)
            .or_insert_with(|| self.planner.lock().expect("fft planner poisoned").plan_fft_forward(len))
            .clone()
    }
}

impl Default for RustFftEngine {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for RustFftEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RustFftEngine").finish_non_exhaustive()
    }
}

impl FourierEngine for RustFftEngine {
    fn forward(&self, data: &mut [Complex64], len: usize) {
        if len == 0 || data.is_empty() {
            return;
        }
        assert_eq!(data.len() % len, 0, "buffer is not a whole number of {len}-point transforms");
        let fft = self.plan(len);
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use isac_core::DirectDft;
    use proptest::prelude::*;

    fn max_rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = b.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
    }

    proptest! {
        #[test]
        fn matches_direct_sum(len in 1usize..=40, batches in 1usize..4, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let x: Vec<Complex64> = (0..len * batches)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let mut fast = x.clone();
            RustFftEngine::new().forward(&mut fast, len);
            let mut slow = x;
            DirectDft.forward(&mut slow, len);
            prop_assert!(max_rel_err(&fast, &slow) < 1e-12);
        }
    }

    #[test]
    fn plan_reuse_is_stateless() {
        let engine = RustFftEngine::new();
        let mut a = vec![Complex64::new(1.0, 0.0); 12];
        engine.forward(&mut a, 12);
        let mut b = vec![Complex64::new(1.0, 0.0); 12];
        engine.forward(&mut b, 12);
        assert_eq!(a, b);
        assert_eq!(a[0], Complex64::new(12.0, 0.0));
    }
}
