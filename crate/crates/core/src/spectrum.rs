//! Single-sided FFT magnitude spectra and their rasterization into
//! fixed-size grayscale images.
//!
//! A 1024-sample window maps to 512 magnitude bins. The rasterizer replaces
//! interactive figure capture with a deterministic renderer: amplitudes are
//! auto-scaled by the spectrum maximum, each bin becomes a column line
//! height, gaps from the bin-to-column mapping are bridged by linear
//! interpolation, and every column is filled white from the bottom row up to
//! its line height on a black background. Rendering is binary (no
//! anti-aliasing) so identical spectra produce identical pixels everywhere.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::vibration::WINDOW_LEN;

/// Number of retained spectrum bins (half the window length).
pub const SPECTRUM_BINS: usize = WINDOW_LEN / 2;
/// Default image height in pixels.
pub const DEFAULT_ROWS: usize = 420;
/// Default image width in pixels.
pub const DEFAULT_COLS: usize = 560;

/// Single-sided magnitude spectrum of one analysis window.
#[derive(Debug, Clone)]
pub struct Spectrum {
    magnitudes: Vec<f64>,
    bin_width: f64,
}

impl Spectrum {
    pub fn new(magnitudes: Vec<f64>, bin_width: f64) -> Result<Self> {
        if magnitudes.len() != SPECTRUM_BINS {
            return Err(Error::DimensionMismatch(format!(
                "spectrum needs exactly {SPECTRUM_BINS} bins, got {}",
                magnitudes.len()
            )));
        }
        if let Some(i) = magnitudes.iter().position(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::NonFinite(format!("magnitude bin {i}")));
        }
        if bin_width.is_nan() || bin_width <= 0.0 {
            return Err(Error::InvalidArgument("bin width must be positive".into()));
        }
        Ok(Spectrum {
            magnitudes,
            bin_width,
        })
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn max(&self) -> f64 {
        self.magnitudes.iter().cloned().fold(0.0, f64::max)
    }

    /// The spectrum normalized by its own maximum (all-zero stays all-zero).
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.max();
        if max == 0.0 {
            return vec![0.0; SPECTRUM_BINS];
        }
        self.magnitudes.iter().map(|m| m / max).collect()
    }
}

/// `|X_k|` for `k = 0..512` of the unwindowed 1024-point transform.
pub fn fft_magnitude(window: &[f64], sample_rate: f64) -> Result<Spectrum> {
    if window.len() != WINDOW_LEN {
        return Err(Error::DimensionMismatch(format!(
            "window needs exactly {WINDOW_LEN} samples, got {}",
            window.len()
        )));
    }
    if let Some(i) = window.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("window sample {i}")));
    }
    if sample_rate.is_nan() || sample_rate <= 0.0 {
        return Err(Error::InvalidArgument("sample rate must be positive".into()));
    }

    let mut re = window.to_vec();
    let mut im = vec![0.0_f64; WINDOW_LEN];
    fft_in_place(&mut re, &mut im);
    let magnitudes = (0..SPECTRUM_BINS)
        .map(|k| (re[k] * re[k] + im[k] * im[k]).sqrt())
        .collect();
    Spectrum::new(magnitudes, sample_rate / WINDOW_LEN as f64)
}

/// In-place radix-2 decimation-in-time FFT. Length must be a power of two.
pub(crate) fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    debug_assert!(n.is_power_of_two());
    debug_assert_eq!(n, im.len());

    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    // Butterfly stages.
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let ang = -2.0 * PI / len as f64;
        let (wr, wi) = (ang.cos(), ang.sin());
        let mut start = 0;
        while start < n {
            let (mut cr, mut ci) = (1.0_f64, 0.0_f64);
            for k in 0..half {
                let a = start + k;
                let b = a + half;
                let tr = cr * re[b] - ci * im[b];
                let ti = cr * im[b] + ci * re[b];
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                let next_cr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = next_cr;
            }
            start += len;
        }
        len <<= 1;
    }
}

/// A grayscale spectrum image; pixels in `[0, 1]`, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumImage {
    pixels: Matrix,
}

impl SpectrumImage {
    pub fn new(pixels: Matrix) -> Result<Self> {
        if let Some(p) = pixels.data().iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!(
                "pixel value {p} outside [0, 1]"
            )));
        }
        Ok(SpectrumImage { pixels })
    }

    pub fn rows(&self) -> usize {
        self.pixels.rows()
    }

    pub fn cols(&self) -> usize {
        self.pixels.cols()
    }

    pub fn pixels(&self) -> &Matrix {
        &self.pixels
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels.get(r, c)
    }

    /// Row-major pixel buffer; identical to the flattened image vector.
    pub fn as_slice(&self) -> &[f64] {
        self.pixels.data()
    }

    /// Height in pixels of the white line in a column, measured from the
    /// bottom row (0 when only the baseline pixel is lit).
    pub fn column_line_height(&self, c: usize) -> usize {
        let rows = self.rows();
        for r in 0..rows {
            if self.pixels.get(r, c) > 0.5 {
                return rows - 1 - r;
            }
        }
        0
    }
}

/// Renders a spectrum as a `rows x cols` black-and-white line plot.
///
/// Columns with no bin (when `cols > 512`) take linearly interpolated
/// heights between their occupied neighbors; columns past the last occupied
/// one extend its height. Every column is filled from the bottom row up to
/// its height, so the baseline row is always white and the polyline has no
/// gaps.
pub fn rasterize_spectrum(spectrum: &Spectrum, rows: usize, cols: usize) -> Result<SpectrumImage> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidArgument(format!(
            "image needs rows >= 2 and cols >= 2, got {rows}x{cols}"
        )));
    }

    let normalized = spectrum.normalized();
    let max_height = (rows - 1) as f64;

    // Tallest line per occupied column.
    let mut col_height: Vec<Option<usize>> = vec![None; cols];
    for (k, &a) in normalized.iter().enumerate() {
        let c = k * cols / SPECTRUM_BINS;
        let h = (a * max_height).round() as usize;
        let slot = &mut col_height[c];
        *slot = Some(slot.map_or(h, |prev: usize| prev.max(h)));
    }

    // Bridge unoccupied columns: interpolate interior gaps, extend the tail.
    let mut heights = vec![0usize; cols];
    let mut prev: Option<(usize, usize)> = None;
    for c in 0..cols {
        if let Some(h) = col_height[c] {
            if let Some((pc, ph)) = prev {
                for (gap, h_at) in heights.iter_mut().enumerate().take(c).skip(pc + 1) {
                    let t = (gap - pc) as f64 / (c - pc) as f64;
                    *h_at = (ph as f64 + t * (h as f64 - ph as f64)).round() as usize;
                }
            }
            heights[c] = h;
            prev = Some((c, h));
        }
    }
    if let Some((pc, ph)) = prev {
        for h_at in heights.iter_mut().skip(pc + 1) {
            *h_at = ph;
        }
    }

    let mut pixels = Matrix::zeros(rows, cols);
    for (c, &h) in heights.iter().enumerate() {
        let top = rows - 1 - h.min(rows - 1);
        for r in top..rows {
            pixels.set(r, c, 1.0);
        }
    }
    Ok(SpectrumImage { pixels })
}

/// Writes a binary PGM (P5, maxval 255); pixels round to the nearest level.
pub fn write_pgm(path: &Path, image: &SpectrumImage) -> Result<()> {
    let mut out = Vec::with_capacity(image.rows() * image.cols() + 32);
    write!(out, "P5\n{} {}\n255\n", image.cols(), image.rows())?;
    out.extend(
        image
            .as_slice()
            .iter()
            .map(|p| (p * 255.0).round() as u8),
    );
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a binary PGM written by [`write_pgm`] (P5, maxval 255).
pub fn read_pgm(path: &Path) -> Result<SpectrumImage> {
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| Error::Ingest {
        path: display.clone(),
        detail: e.to_string(),
    })?;
    parse_pgm(&bytes).map_err(|detail| Error::Ingest {
        path: display,
        detail,
    })
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<SpectrumImage, String> {
    let mut pos = 0usize;
    let mut token = |bytes: &[u8]| -> std::result::Result<String, String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(format!("truncated header at byte offset {start}"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    if token(bytes)? != "P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    let cols: usize = token(bytes)?.parse().map_err(|_| "bad width".to_string())?;
    let rows: usize = token(bytes)?.parse().map_err(|_| "bad height".to_string())?;
    let maxval: usize = token(bytes)?.parse().map_err(|_| "bad maxval".to_string())?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}, expected 255"));
    }
    pos += 1; // single whitespace after maxval
    let need = rows * cols;
    if bytes.len() < pos + need {
        return Err(format!(
            "pixel data truncated at byte offset {} (need {need} bytes)",
            bytes.len()
        ));
    }
    let data: Vec<f64> = bytes[pos..pos + need]
        .iter()
        .map(|&b| b as f64 / 255.0)
        .collect();
    let pixels = Matrix::from_vec(rows, cols, data).map_err(|e| e.to_string())?;
    SpectrumImage::new(pixels).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_spectrum(value: f64) -> Spectrum {
        Spectrum::new(vec![value; SPECTRUM_BINS], 12_000.0 / 1024.0).unwrap()
    }

    #[test]
    fn zero_window_gives_zero_spectrum() {
        let s = fft_magnitude(&vec![0.0; 1024], 12_000.0).unwrap();
        assert!(s.magnitudes().iter().all(|&m| m == 0.0));
        assert!((s.bin_width() - 12_000.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_at_bin_37_has_magnitude_512() {
        let fs = 12_000.0;
        let f = 37.0 * fs / 1024.0;
        let w: Vec<f64> = (0..1024)
            .map(|i| (2.0 * PI * f * i as f64 / fs).cos())
            .collect();
        let s = fft_magnitude(&w, fs).unwrap();
        assert!((s.magnitudes()[37] - 512.0).abs() < 1e-9);
        for (k, &m) in s.magnitudes().iter().enumerate() {
            if k != 37 {
                assert!(m < 1e-9, "bin {k} has magnitude {m}");
            }
        }
    }

    #[test]
    fn parseval_against_direct_dft() {
        // Oracle: direct O(N^2) DFT over all 1024 bins.
        let w: Vec<f64> = (0..1024)
            .map(|i| ((i * 37 + 11) % 101) as f64 / 101.0 - 0.5)
            .collect();
        let oracle = crate::test_oracles::dft_magnitudes(&w);
        let time_energy: f64 = w.iter().map(|x| x * x).sum::<f64>() * 1024.0;
        let freq_energy: f64 = oracle.iter().map(|m| m * m).sum();
        assert!(((time_energy - freq_energy) / time_energy).abs() < 1e-6);

        // The fast path matches the oracle on the retained half.
        let s = fft_magnitude(&w, 12_000.0).unwrap();
        for (k, (&fast, &slow)) in s.magnitudes().iter().zip(&oracle[..512]).enumerate() {
            assert!(
                (fast - slow).abs() <= 1e-8 * slow.abs().max(1.0),
                "bin {k}: fft {fast} vs dft {slow}"
            );
        }
    }

    #[test]
    fn fft_rejects_bad_input() {
        assert!(fft_magnitude(&vec![0.0; 1000], 12_000.0).is_err());
        let mut w = vec![0.0; 1024];
        w[3] = f64::INFINITY;
        assert!(fft_magnitude(&w, 12_000.0).is_err());
    }

    #[test]
    fn zero_spectrum_rasterizes_to_baseline() {
        let img = rasterize_spectrum(&flat_spectrum(0.0), 420, 560).unwrap();
        for c in 0..560 {
            assert_eq!(img.get(419, c), 1.0, "baseline column {c}");
            for r in 0..419 {
                assert_eq!(img.get(r, c), 0.0, "pixel {r},{c}");
            }
        }
    }

    #[test]
    fn single_bin_spike_fills_first_column() {
        let mut mags = vec![0.0; SPECTRUM_BINS];
        mags[0] = 3.0;
        let s = Spectrum::new(mags, 10.0).unwrap();
        let img = rasterize_spectrum(&s, 420, 560).unwrap();
        // Column 0 fully white, every other column baseline only.
        for r in 0..420 {
            assert_eq!(img.get(r, 0), 1.0);
        }
        for c in 1..560 {
            assert_eq!(img.column_line_height(c), 0, "column {c}");
            assert_eq!(img.get(419, c), 1.0);
        }
    }

    #[test]
    fn default_dimensions() {
        let img = rasterize_spectrum(&flat_spectrum(1.0), DEFAULT_ROWS, DEFAULT_COLS).unwrap();
        assert_eq!(img.rows(), 420);
        assert_eq!(img.cols(), 560);
        assert!(rasterize_spectrum(&flat_spectrum(1.0), 1, 560).is_err());
        assert!(rasterize_spectrum(&flat_spectrum(1.0), 420, 1).is_err());
    }

    #[test]
    fn every_column_has_a_white_pixel() {
        let mags: Vec<f64> = (0..SPECTRUM_BINS).map(|k| (k as f64 * 0.37).sin().abs()).collect();
        let s = Spectrum::new(mags, 10.0).unwrap();
        for (rows, cols) in [(420usize, 560usize), (60, 80), (30, 700), (10, 512)] {
            let img = rasterize_spectrum(&s, rows, cols).unwrap();
            for c in 0..cols {
                assert!(
                    (0..rows).any(|r| img.get(r, c) == 1.0),
                    "{rows}x{cols}: column {c} empty"
                );
            }
        }
    }

    #[test]
    fn scale_invariance() {
        let mags: Vec<f64> = (0..SPECTRUM_BINS)
            .map(|k| ((k * k + 7) % 97) as f64 / 97.0)
            .collect();
        let a = Spectrum::new(mags.clone(), 10.0).unwrap();
        for c in [0.5, 3.0, 1e6] {
            let scaled = Spectrum::new(mags.iter().map(|m| m * c).collect(), 10.0).unwrap();
            let ia = rasterize_spectrum(&a, 100, 140).unwrap();
            let ib = rasterize_spectrum(&scaled, 100, 140).unwrap();
            assert_eq!(ia, ib, "scale {c}");
        }
    }

    #[test]
    fn raising_a_bin_never_lowers_its_column() {
        let mut mags: Vec<f64> = vec![0.2; SPECTRUM_BINS];
        mags[0] = 1.0; // fixed maximum so relative amplitudes are controlled
        let bin = 200;
        let mut last_height = 0;
        for step in 0..=10 {
            mags[bin] = 0.2 + 0.08 * step as f64;
            let s = Spectrum::new(mags.clone(), 10.0).unwrap();
            let img = rasterize_spectrum(&s, 120, 560).unwrap();
            let c = bin * 560 / SPECTRUM_BINS;
            let h = img.column_line_height(c);
            assert!(h >= last_height, "step {step}: height {h} < {last_height}");
            last_height = h;
        }
    }

    #[test]
    fn pgm_round_trip() {
        let dir = std::env::temp_dir().join("vibspec-test-pgm");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("img.pgm");
        let mags: Vec<f64> = (0..SPECTRUM_BINS).map(|k| (k % 13) as f64).collect();
        let s = Spectrum::new(mags, 10.0).unwrap();
        let img = rasterize_spectrum(&s, 60, 80).unwrap();
        write_pgm(&path, &img).unwrap();
        let back = read_pgm(&path).unwrap();
        assert_eq!(img, back);

        // Binary images hit PGM levels exactly, so bytes are reproducible.
        write_pgm(&dir.join("img2.pgm"), &back).unwrap();
        let b1 = std::fs::read(&path).unwrap();
        let b2 = std::fs::read(dir.join("img2.pgm")).unwrap();
        assert_eq!(b1, b2);
    }
}
