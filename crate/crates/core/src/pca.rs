//! Flattened-vector PCA baseline with contribution-based dimension
//! selection.
//!
//! Covariance uses the `1/M` normalization. When the dimension `p` exceeds
//! the sample count `M`, eigenpairs come from the `M x M` Gram matrix of
//! centered samples and map back to `p`-dimensional components; the nonzero
//! spectrum is identical to the direct covariance route. The retained
//! dimension `k` is the smallest prefix whose eigenvalue mass reaches the
//! requested contribution fraction.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix};
use crate::spectrum::SpectrumImage;

/// Eigenvalues this far below the largest count as zero for rank and
/// contribution purposes.
const RANK_TOL: f64 = 1e-10;

/// Fitted PCA basis.
#[derive(Debug, Clone)]
pub struct PcaBasis {
    mean: Vec<f64>,
    /// Stored transposed: row `i` is the `i`-th orthonormal component of
    /// length `p` (logically the `i`-th column of the `p x k` matrix).
    components: Matrix,
    eigenvalues: Vec<f64>,
    contribution: f64,
}

impl PcaBasis {
    pub(crate) fn from_parts(
        mean: Vec<f64>,
        components: Matrix,
        eigenvalues: Vec<f64>,
        contribution: f64,
    ) -> Self {
        PcaBasis {
            mean,
            components,
            eigenvalues,
            contribution,
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Input dimension `p`.
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Retained dimension `k`.
    pub fn k(&self) -> usize {
        self.components.rows()
    }

    /// The `i`-th orthonormal component (`i < k`), length `p`.
    pub fn component(&self, i: usize) -> &[f64] {
        self.components.row(i)
    }

    pub(crate) fn components(&self) -> &Matrix {
        &self.components
    }

    /// Eigenvalues of the `1/M`-normalized covariance, descending. The list
    /// covers the full computed spectrum, not just the retained `k`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn contribution(&self) -> f64 {
        self.contribution
    }
}

/// Row-major flattening of an image into a vector of length rows*cols.
pub fn flatten(image: &SpectrumImage) -> Vec<f64> {
    image.as_slice().to_vec()
}

/// Fits PCA on `M >= 2` equal-length sample vectors.
pub fn fit_pca(samples: &[&[f64]], contribution: f64) -> Result<PcaBasis> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "PCA needs at least 2 samples, got {m}"
        )));
    }
    if !(contribution > 0.0 && contribution <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "contribution must lie in (0, 1], got {contribution}"
        )));
    }
    let p = samples[0].len();
    if p == 0 {
        return Err(Error::InvalidArgument("samples are empty vectors".into()));
    }
    for (i, s) in samples.iter().enumerate() {
        if s.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "sample {i} has length {}, expected {p}",
                s.len()
            )));
        }
    }

    let mut mean = vec![0.0_f64; p];
    for s in samples {
        for (m_i, &x) in mean.iter_mut().zip(*s) {
            *m_i += x;
        }
    }
    for m_i in mean.iter_mut() {
        *m_i /= m as f64;
    }

    let (eigenvalues, components) = if p > m {
        fit_gram(samples, &mean)?
    } else {
        fit_direct(samples, &mean)?
    };

    // Clamp the tail that is numerically zero, then pick k by cumulative
    // contribution of eigenvalue mass.
    let lam_max = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let clamped: Vec<f64> = eigenvalues
        .iter()
        .map(|&l| if l > RANK_TOL * lam_max { l } else { 0.0 })
        .collect();
    let total: f64 = clamped.iter().sum();

    let (k, comps) = if total == 0.0 {
        // Degenerate data: a single arbitrary unit component.
        let mut row = vec![0.0; p];
        row[0] = 1.0;
        (1, Matrix::from_vec(1, p, row)?)
    } else {
        let mut k = clamped.len();
        let mut acc = 0.0;
        for (i, &l) in clamped.iter().enumerate() {
            acc += l;
            if acc / total >= contribution {
                k = i + 1;
                break;
            }
        }
        let mut data = Vec::with_capacity(k * p);
        for i in 0..k {
            data.extend_from_slice(components.row(i));
        }
        (k, Matrix::from_vec(k, p, data)?)
    };
    debug_assert_eq!(comps.rows(), k);

    Ok(PcaBasis {
        mean,
        components: comps,
        eigenvalues: clamped,
        contribution,
    })
}

/// Gram route for p > M: eigenpairs of K = (1/M) D D^T mapped back through
/// u_i = D^T v_i / sqrt(M * lambda_i).
fn fit_gram(samples: &[&[f64]], mean: &[f64]) -> Result<(Vec<f64>, Matrix)> {
    let m = samples.len();
    let p = mean.len();
    let mut k = Matrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0;
            for ((&a, &b), &mu) in samples[i].iter().zip(samples[j]).zip(mean) {
                acc += (a - mu) * (b - mu);
            }
            acc /= m as f64;
            k.set(i, j, acc);
            k.set(j, i, acc);
        }
    }
    let eig = linalg::sym_eigen(&k)?;

    let lam_max = eig.values[0].max(0.0);
    let mut components = Matrix::zeros(m, p);
    for i in 0..m {
        let lam = eig.values[i];
        if lam <= RANK_TOL * lam_max || lam <= 0.0 {
            break; // descending order: the rest are numerically zero
        }
        let v = eig.eigenvector(i);
        let out = components.row_mut(i);
        for (j, s) in samples.iter().enumerate() {
            let w = v[j];
            if w == 0.0 {
                continue;
            }
            for ((o, &x), &mu) in out.iter_mut().zip(*s).zip(mean) {
                *o += w * (x - mu);
            }
        }
        let norm = linalg::norm2(out);
        if norm > 0.0 {
            for o in out.iter_mut() {
                *o /= norm;
            }
        }
    }
    Ok((eig.values, components))
}

/// Direct route for p <= M: eigenpairs of the p x p covariance.
fn fit_direct(samples: &[&[f64]], mean: &[f64]) -> Result<(Vec<f64>, Matrix)> {
    let m = samples.len();
    let p = mean.len();
    let mut c = Matrix::zeros(p, p);
    for s in samples {
        let d: Vec<f64> = s.iter().zip(mean).map(|(&x, &mu)| x - mu).collect();
        for a in 0..p {
            if d[a] == 0.0 {
                continue;
            }
            for b in a..p {
                let v = c.get(a, b) + d[a] * d[b];
                c.set(a, b, v);
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            let v = c.get(a, b) / m as f64;
            c.set(a, b, v);
            c.set(b, a, v);
        }
    }
    let eig = linalg::sym_eigen(&c)?;
    let mut components = Matrix::zeros(p, p);
    for i in 0..p {
        components.row_mut(i).copy_from_slice(eig.eigenvector(i));
    }
    Ok((eig.values, components))
}

/// Feature vector `components^T * (x - mean)`, length `k`.
pub fn project_pca(vector: &[f64], basis: &PcaBasis) -> Result<Vec<f64>> {
    if vector.len() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector has length {}, basis expects {}",
            vector.len(),
            basis.dim()
        )));
    }
    let centered: Vec<f64> = vector
        .iter()
        .zip(basis.mean())
        .map(|(&x, &mu)| x - mu)
        .collect();
    Ok((0..basis.k())
        .map(|i| dot(basis.component(i), &centered))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpectrumImage;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flatten_is_row_major() {
        let img = SpectrumImage::new(
            Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap(),
        );
        // Values above 1 are invalid pixels; build through Matrix directly.
        assert!(img.is_err());
        let img = SpectrumImage::new(
            Matrix::from_rows(&[&[0.1, 0.2], &[0.3, 0.4]]).unwrap(),
        )
        .unwrap();
        assert_eq!(flatten(&img), vec![0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn flatten_default_size() {
        let img = SpectrumImage::new(Matrix::zeros(420, 560)).unwrap();
        assert_eq!(flatten(&img).len(), 235_200);
    }

    #[test]
    fn rank_one_line_gives_single_component() {
        // Points on a 1-D line in 3-D.
        let dir = [1.0, 2.0, -1.0];
        let samples: Vec<Vec<f64>> = (0..5)
            .map(|t| dir.iter().map(|&d| d * t as f64).collect())
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = fit_pca(&refs, 0.9).unwrap();
        assert_eq!(basis.k(), 1);
        // Component parallel to the line.
        let norm = (6.0_f64).sqrt();
        let unit: Vec<f64> = dir.iter().map(|&d| d / norm).collect();
        let cosine: f64 = dot(basis.component(0), &unit).abs();
        assert!((cosine - 1.0).abs() < 1e-10);
    }

    #[test]
    fn full_contribution_keeps_rank() {
        let samples: Vec<Vec<f64>> = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = fit_pca(&refs, 1.0).unwrap();
        // Centered rank of 3 points in general position is 2.
        assert_eq!(basis.k(), 2);
    }

    #[test]
    fn gram_route_matches_direct_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        // p = 10 > M = 5 exercises the Gram route.
        let samples: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = fit_pca(&refs, 1.0).unwrap();

        // Direct p x p covariance oracle.
        let p = 10;
        let m = 5;
        let mut mean = vec![0.0; p];
        for s in &samples {
            for (mu, &x) in mean.iter_mut().zip(s) {
                *mu += x / m as f64;
            }
        }
        let mut cov = Matrix::zeros(p, p);
        for s in &samples {
            for a in 0..p {
                for b in 0..p {
                    let v = cov.get(a, b) + (s[a] - mean[a]) * (s[b] - mean[b]) / m as f64;
                    cov.set(a, b, v);
                }
            }
        }
        let direct = linalg::sym_eigen(&cov).unwrap();
        for (i, &lam) in basis.eigenvalues().iter().enumerate().take(4) {
            assert!(
                (lam - direct.values[i]).abs() <= 1e-9 * direct.values[0].max(1.0),
                "eigenvalue {i}: gram {lam} vs direct {}",
                direct.values[i]
            );
        }
    }

    #[test]
    fn components_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let samples: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..20).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = fit_pca(&refs, 1.0).unwrap();
        for i in 0..basis.k() {
            for j in 0..basis.k() {
                let d = dot(basis.component(i), basis.component(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-8, "components {i},{j}: {d}");
            }
        }
    }

    #[test]
    fn projecting_the_mean_is_zero() {
        let samples: Vec<Vec<f64>> = vec![vec![1.0, 2.0, 3.0], vec![3.0, 0.0, 1.0], vec![2.0, 4.0, 2.0]];
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = fit_pca(&refs, 0.9).unwrap();
        let f = project_pca(basis.mean(), &basis).unwrap();
        assert!(f.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn projecting_mean_plus_component_is_coordinate() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let samples: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = fit_pca(&refs, 1.0).unwrap();
        let x: Vec<f64> = basis
            .mean()
            .iter()
            .zip(basis.component(0))
            .map(|(&m, &c)| m + 2.0 * c)
            .collect();
        let f = project_pca(&x, &basis).unwrap();
        assert!((f[0] - 2.0).abs() < 1e-10);
        for &v in &f[1..] {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn projection_matches_naive_dots() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let samples: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = fit_pca(&refs, 0.95).unwrap();
        let x: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = project_pca(&x, &basis).unwrap();
        for (i, &fi) in f.iter().enumerate() {
            let mut want = 0.0;
            for ((&c, &xj), &mu) in basis.component(i).iter().zip(&x).zip(basis.mean()) {
                want += c * (xj - mu);
            }
            assert!((fi - want).abs() < 1e-12);
        }
    }

    #[test]
    fn project_rejects_wrong_length() {
        let samples: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![0.0, 1.0]];
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = fit_pca(&refs, 0.9).unwrap();
        assert!(project_pca(&[1.0, 2.0, 3.0], &basis).is_err());
    }

    #[test]
    fn fit_rejects_single_sample_and_bad_contribution() {
        let s = vec![1.0, 2.0];
        assert!(fit_pca(&[s.as_slice()], 0.9).is_err());
        let t = vec![0.0, 1.0];
        assert!(fit_pca(&[s.as_slice(), t.as_slice()], 0.0).is_err());
        assert!(fit_pca(&[s.as_slice(), t.as_slice()], 1.5).is_err());
    }

    #[test]
    fn identical_samples_fall_back_to_unit_component() {
        let s = vec![0.3, 0.3, 0.3];
        let refs: Vec<&[f64]> = vec![&s, &s, &s];
        let basis = fit_pca(&refs, 0.9).unwrap();
        assert_eq!(basis.k(), 1);
        assert!((linalg::norm2(basis.component(0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_residual_equals_discarded_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let samples: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let basis = fit_pca(&refs, 0.6).unwrap();
        let k = basis.k();
        let discarded: f64 = basis.eigenvalues()[k..].iter().sum();

        let mut mean_residual = 0.0;
        for s in &samples {
            let f = project_pca(s, &basis).unwrap();
            let mut recon: Vec<f64> = basis.mean().to_vec();
            for (i, &fi) in f.iter().enumerate() {
                for (r, &c) in recon.iter_mut().zip(basis.component(i)) {
                    *r += fi * c;
                }
            }
            mean_residual += s
                .iter()
                .zip(&recon)
                .map(|(&x, &r)| (x - r) * (x - r))
                .sum::<f64>();
        }
        mean_residual /= samples.len() as f64;
        assert!(
            (mean_residual - discarded).abs() <= 1e-6 * discarded.max(1e-12),
            "residual {mean_residual} vs discarded {discarded}"
        );
    }

    #[test]
    fn k_monotone_in_contribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let samples: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        let mut last_k = 0;
        for c in [0.2, 0.4, 0.6, 0.8, 0.9, 1.0] {
            let k = fit_pca(&refs, c).unwrap().k();
            assert!(k >= last_k, "k dropped from {last_k} to {k} at {c}");
            last_k = k;
        }
    }
}
