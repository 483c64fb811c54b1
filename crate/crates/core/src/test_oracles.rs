//! Brute-force reference computations used only by tests. These stay
//! independent of the production code paths they check.

use std::f64::consts::PI;

/// Direct O(N^2) DFT magnitudes over all N bins.
pub(crate) fn dft_magnitudes(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0_f64, 0.0_f64);
            for (i, &v) in x.iter().enumerate() {
                let ang = -2.0 * PI * (k * i) as f64 / n as f64;
                re += v * ang.cos();
                im += v * ang.sin();
            }
            (re * re + im * im).sqrt()
        })
        .collect()
}

/// Envelope (analytic-signal magnitude) via a direct-DFT Hilbert transform.
pub(crate) fn envelope(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut re = vec![0.0_f64; n];
    let mut im = vec![0.0_f64; n];
    for k in 0..n {
        for (i, &v) in x.iter().enumerate() {
            let ang = -2.0 * PI * (k * i) as f64 / n as f64;
            re[k] += v * ang.cos();
            im[k] += v * ang.sin();
        }
    }
    for k in 1..n {
        if k < n / 2 {
            re[k] *= 2.0;
            im[k] *= 2.0;
        } else if k > n / 2 {
            re[k] = 0.0;
            im[k] = 0.0;
        }
    }
    (0..n)
        .map(|i| {
            let (mut ar, mut ai) = (0.0_f64, 0.0_f64);
            for k in 0..n {
                let ang = 2.0 * PI * (k * i) as f64 / n as f64;
                ar += re[k] * ang.cos() - im[k] * ang.sin();
                ai += re[k] * ang.sin() + im[k] * ang.cos();
            }
            (ar * ar + ai * ai).sqrt() / n as f64
        })
        .collect()
}
