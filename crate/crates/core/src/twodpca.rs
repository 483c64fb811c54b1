//! Two-dimensional PCA on spectrum images.
//!
//! Images are treated directly as matrices: the column-wise scatter matrix
//! `G = (1/M) * sum_j (A_j - mean)^T (A_j - mean)` is an `h x h` symmetric
//! PSD matrix (h = image columns). Its leading `d` eigenvectors form the
//! projection basis `U`; an image `B` maps to the eigen image `E = B * U`
//! with `d` columns. Projection uses the raw image, not the centered one.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymEigen};
use crate::spectrum::SpectrumImage;
use crate::vibration::FaultClass;

/// Fitted 2DPCA basis: the training mean, the full eigenvalue spectrum of
/// the scatter matrix, and the first `d` eigenvectors as columns of `U`.
#[derive(Debug, Clone)]
pub struct EigenBasis2D {
    mean_image: Matrix,
    eigenvalues: Vec<f64>,
    basis: Matrix,
}

impl EigenBasis2D {
    pub(crate) fn from_parts(mean_image: Matrix, eigenvalues: Vec<f64>, basis: Matrix) -> Self {
        EigenBasis2D {
            mean_image,
            eigenvalues,
            basis,
        }
    }

    pub fn mean_image(&self) -> &Matrix {
        &self.mean_image
    }

    /// All `h` eigenvalues of the scatter matrix, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The `h x d` projection basis.
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn d(&self) -> usize {
        self.basis.cols()
    }

    pub fn image_rows(&self) -> usize {
        self.mean_image.rows()
    }

    pub fn image_cols(&self) -> usize {
        self.mean_image.cols()
    }
}

/// A projected feature matrix `E = [Y_1 .. Y_d]` with its source label when
/// it came from a labeled sample.
#[derive(Debug, Clone)]
pub struct EigenImage {
    pub features: Matrix,
    pub label: Option<FaultClass>,
}

impl EigenImage {
    pub fn d(&self) -> usize {
        self.features.cols()
    }
}

fn check_same_dims(samples: &[&SpectrumImage]) -> Result<(usize, usize)> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one image".into()))?;
    let (rows, cols) = (first.rows(), first.cols());
    for (i, s) in samples.iter().enumerate() {
        if s.rows() != rows || s.cols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "image {i} is {}x{}, expected {rows}x{cols}",
                s.rows(),
                s.cols()
            )));
        }
    }
    Ok((rows, cols))
}

/// Elementwise mean of the training images.
pub fn mean_image(samples: &[&SpectrumImage]) -> Result<Matrix> {
    let (rows, cols) = check_same_dims(samples)?;
    let mut mean = Matrix::zeros(rows, cols);
    let scale = 1.0 / samples.len() as f64;
    for s in samples {
        for (m, p) in mean.data_mut().iter_mut().zip(s.as_slice()) {
            *m += p;
        }
    }
    for m in mean.data_mut() {
        *m *= scale;
    }
    Ok(mean)
}

/// Global image scatter matrix `G = (1/M) * sum (A_j - mean)^T (A_j - mean)`.
///
/// Accumulation runs over row blocks of `G` in parallel; each block sums the
/// samples in a fixed order, so the result does not depend on thread timing.
pub fn scatter_matrix(samples: &[&SpectrumImage]) -> Result<Matrix> {
    let mean = mean_image(samples)?;
    Ok(scatter_about(samples, &mean))
}

pub(crate) fn scatter_about(samples: &[&SpectrumImage], mean: &Matrix) -> Matrix {
    let (rows, cols) = (mean.rows(), mean.cols());
    let scale = 1.0 / samples.len() as f64;

    // Deviations once per sample row; accumulate the upper triangle of
    // d^T d row-blocks in parallel.
    let deviations: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|s| {
            let mut d = Vec::with_capacity(rows * cols);
            for (p, m) in s.as_slice().iter().zip(mean.data()) {
                d.push(p - m);
            }
            d
        })
        .collect();

    let mut g = Matrix::zeros(cols, cols);
    {
        let gdata = g.data_mut();
        // Split G into row bands so threads never share a write target.
        let band = 64.max(cols / (rayon::current_num_threads().max(1) * 4)).min(cols);
        let bands: Vec<(usize, &mut [f64])> = {
            let mut out = Vec::new();
            let mut rest = gdata;
            let mut start = 0;
            while start < cols {
                let take = band.min(cols - start);
                let (head, tail) = rest.split_at_mut(take * cols);
                out.push((start, head));
                rest = tail;
                start += take;
            }
            out
        };
        bands.into_par_iter().for_each(|(a0, block)| {
            let a1 = a0 + block.len() / cols;
            for dev in &deviations {
                for r in 0..rows {
                    let drow = &dev[r * cols..(r + 1) * cols];
                    for a in a0..a1 {
                        let da = drow[a];
                        if da == 0.0 {
                            continue;
                        }
                        let out = &mut block[(a - a0) * cols..(a - a0 + 1) * cols];
                        // Upper triangle only; mirrored below.
                        for b in a..cols {
                            out[b] += da * drow[b];
                        }
                    }
                }
            }
        });
    }

    for a in 0..cols {
        for b in a..cols {
            let v = g.get(a, b) * scale;
            g.set(a, b, v);
            g.set(b, a, v);
        }
    }
    g
}

/// Eigenvalues (descending) and eigenvectors of a symmetric scatter matrix.
pub fn eigen_sorted(g: &Matrix) -> Result<SymEigen> {
    linalg::sym_eigen(g)
}

/// Fits the projection basis on training images: mean, scatter,
/// eigendecomposition, and selection of the `d` leading eigenvectors.
pub fn fit_2dpca(samples: &[&SpectrumImage], d: usize) -> Result<EigenBasis2D> {
    let (_, cols) = check_same_dims(samples)?;
    if d < 1 || d >= cols {
        return Err(Error::InvalidArgument(format!(
            "d must satisfy 1 <= d < h = {cols}, got {d}"
        )));
    }
    let mean = mean_image(samples)?;
    let g = scatter_about(samples, &mean);
    let eig = eigen_sorted(&g)?;
    let basis = eig.basis(d);
    Ok(EigenBasis2D {
        mean_image: mean,
        eigenvalues: eig.values,
        basis,
    })
}

/// Projects a raw image onto the basis: `E = B * U`.
pub fn project(image: &SpectrumImage, basis: &EigenBasis2D) -> Result<EigenImage> {
    if image.cols() != basis.basis.rows() {
        return Err(Error::DimensionMismatch(format!(
            "image has {} columns, basis expects {}",
            image.cols(),
            basis.basis.rows()
        )));
    }
    let features = image.pixels().matmul(&basis.basis)?;
    Ok(EigenImage {
        features,
        label: None,
    })
}
