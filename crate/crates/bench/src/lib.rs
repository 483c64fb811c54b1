//! Benchmark helpers: deterministic fixtures shared by the criterion
//! benches.

use rand_like::SmallRng;
use vibspec::{Matrix, Spectrum, SpectrumImage};

/// Tiny deterministic generator so fixtures need no external RNG crate.
mod rand_like {
    pub struct SmallRng(u64);

    impl SmallRng {
        pub fn new(seed: u64) -> Self {
            SmallRng(seed.max(1))
        }

        pub fn next_u64(&mut self) -> u64 {
            // xorshift64*
            let mut x = self.0;
            x ^= x >> 12;
            x ^= x << 25;
            x ^= x >> 27;
            self.0 = x;
            x.wrapping_mul(0x2545_F491_4F6C_DD1D)
        }

        pub fn unit_f64(&mut self) -> f64 {
            (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
        }
    }
}

/// A deterministic pseudo-random window of 1024 samples.
pub fn window(seed: u64) -> Vec<f64> {
    let mut rng = SmallRng::new(seed);
    (0..1024).map(|_| rng.unit_f64() * 2.0 - 1.0).collect()
}

/// A deterministic spectrum with comb-like structure.
pub fn spectrum(seed: u64) -> Spectrum {
    let mut rng = SmallRng::new(seed);
    let mags: Vec<f64> = (0..512)
        .map(|k| {
            let comb = if k % 9 == 0 { 1.0 } else { 0.05 };
            comb * (0.5 + rng.unit_f64())
        })
        .collect();
    Spectrum::new(mags, 12_000.0 / 1024.0).unwrap()
}

/// Deterministic grayscale images of the given shape.
pub fn images(seed: u64, count: usize, rows: usize, cols: usize) -> Vec<SpectrumImage> {
    let mut rng = SmallRng::new(seed);
    (0..count)
        .map(|_| {
            let data: Vec<f64> = (0..rows * cols).map(|_| rng.unit_f64()).collect();
            SpectrumImage::new(Matrix::from_vec(rows, cols, data).unwrap()).unwrap()
        })
        .collect()
}

/// A random symmetric matrix.
pub fn symmetric(seed: u64, n: usize) -> Matrix {
    let mut rng = SmallRng::new(seed);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.unit_f64() * 2.0 - 1.0;
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}
