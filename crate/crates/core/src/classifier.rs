//! Minimum-distance nearest-neighbor classification over projected
//! features.
//!
//! The distance between two feature matrices is the sum over columns of the
//! per-column Euclidean norm of the difference. This is not the Frobenius
//! norm: differences (1,0) and (0,2) in two columns give 3.0, not sqrt(5).
//! Feature vectors are single-column matrices, for which the distance
//! reduces to the plain Euclidean norm.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pca::PcaBasis;
use crate::spectrum::{Spectrum, SpectrumImage};
use crate::twodpca::EigenBasis2D;
use crate::vibration::FaultClass;

/// Which feature space a model classifies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    /// 2DPCA eigen images of spectrum images.
    EigenImage,
    /// PCA features of flattened spectrum images.
    PcaVector,
    /// PCA features of max-normalized FFT magnitude vectors.
    FftAmplitude,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 3] = [
        FeatureKind::EigenImage,
        FeatureKind::PcaVector,
        FeatureKind::FftAmplitude,
    ];

    pub fn token(self) -> &'static str {
        match self {
            FeatureKind::EigenImage => "2dpca",
            FeatureKind::PcaVector => "pca",
            FeatureKind::FftAmplitude => "fft",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "2dpca" => Ok(FeatureKind::EigenImage),
            "pca" => Ok(FeatureKind::PcaVector),
            "fft" | "fft-amplitude" => Ok(FeatureKind::FftAmplitude),
            _ => Err(Error::InvalidArgument(format!(
                "feature kind must be 2dpca, pca, or fft, got {s:?}"
            ))),
        }
    }
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

/// The basis a model was fitted with.
#[derive(Debug, Clone)]
pub enum FittedBasis {
    TwoDpca(EigenBasis2D),
    Pca(PcaBasis),
}

/// Training features with labels plus the fitted basis.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    kind: FeatureKind,
    features: Vec<Matrix>,
    labels: Vec<FaultClass>,
    basis: FittedBasis,
    /// Source image dimensions for image-space models; `None` for the
    /// FFT-amplitude kind.
    image_dims: Option<(usize, usize)>,
}

impl TrainedModel {
    pub fn new(
        kind: FeatureKind,
        features: Vec<Matrix>,
        labels: Vec<FaultClass>,
        basis: FittedBasis,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyModel);
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} features vs {} labels",
                features.len(),
                labels.len()
            )));
        }
        let (r, c) = (features[0].rows(), features[0].cols());
        for (i, f) in features.iter().enumerate() {
            if f.rows() != r || f.cols() != c {
                return Err(Error::DimensionMismatch(format!(
                    "feature {i} is {}x{}, expected {r}x{c}",
                    f.rows(),
                    f.cols()
                )));
            }
        }
        match (kind, &basis) {
            (FeatureKind::EigenImage, FittedBasis::TwoDpca(_)) => {}
            (FeatureKind::PcaVector | FeatureKind::FftAmplitude, FittedBasis::Pca(_)) => {}
            _ => {
                return Err(Error::InvalidArgument(
                    "feature kind does not match the fitted basis".into(),
                ))
            }
        }
        let image_dims = match &basis {
            FittedBasis::TwoDpca(b) => Some((b.image_rows(), b.image_cols())),
            FittedBasis::Pca(_) => None,
        };
        Ok(TrainedModel {
            kind,
            features,
            labels,
            basis,
            image_dims,
        })
    }

    /// Records the source image size of a PCA-on-images model so loaded
    /// models can rasterize fresh windows to the right shape.
    pub fn with_image_dims(mut self, rows: usize, cols: usize) -> Self {
        self.image_dims = Some((rows, cols));
        self
    }

    pub fn image_dims(&self) -> Option<(usize, usize)> {
        self.image_dims
    }

    /// Projects a spectrum image into this model's feature space. Errors
    /// for FFT-amplitude models, which classify spectra.
    pub fn feature_for_image(&self, image: &SpectrumImage) -> Result<Matrix> {
        match (&self.basis, self.kind) {
            (FittedBasis::TwoDpca(b), FeatureKind::EigenImage) => {
                Ok(crate::twodpca::project(image, b)?.features)
            }
            (FittedBasis::Pca(b), FeatureKind::PcaVector) => {
                let v = crate::pca::project_pca(image.as_slice(), b)?;
                let k = v.len();
                Matrix::from_vec(k, 1, v)
            }
            _ => Err(Error::InvalidArgument(
                "an fft-amplitude model classifies spectra, not images".into(),
            )),
        }
    }

    /// Projects a magnitude spectrum into this model's feature space. For
    /// image-space models the spectrum is rasterized to the training image
    /// size first.
    pub fn feature_for_spectrum(&self, spectrum: &Spectrum) -> Result<Matrix> {
        match self.kind {
            FeatureKind::FftAmplitude => match &self.basis {
                FittedBasis::Pca(b) => {
                    let v = crate::pca::project_pca(&spectrum.normalized(), b)?;
                    let k = v.len();
                    Matrix::from_vec(k, 1, v)
                }
                FittedBasis::TwoDpca(_) => unreachable!("kind/basis pairing is validated"),
            },
            FeatureKind::EigenImage | FeatureKind::PcaVector => {
                let (rows, cols) = self.image_dims.ok_or_else(|| {
                    Error::InvalidArgument(
                        "model carries no image dimensions; classify images instead".into(),
                    )
                })?;
                let image = crate::spectrum::rasterize_spectrum(spectrum, rows, cols)?;
                self.feature_for_image(&image)
            }
        }
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[Matrix] {
        &self.features
    }

    pub fn labels(&self) -> &[FaultClass] {
        &self.labels
    }

    pub fn basis(&self) -> &FittedBasis {
        &self.basis
    }
}

/// Sum over columns of the Euclidean norm of the column difference.
pub fn distance(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "features are {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let cols = a.cols();
    let rows = a.rows();
    let mut total = 0.0;
    for c in 0..cols {
        let mut acc = 0.0;
        for r in 0..rows {
            let d = a.get(r, c) - b.get(r, c);
            acc += d * d;
        }
        total += acc.sqrt();
    }
    Ok(total)
}

/// Result of classifying one feature: the winning label, the index of the
/// nearest training sample, and its distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: FaultClass,
    pub nearest_index: usize,
    pub distance: f64,
}

/// Nearest-neighbor decision; ties go to the smallest training index.
pub fn classify(feature: &Matrix, model: &TrainedModel) -> Result<Classification> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    let mut best_i = 0usize;
    let mut best_d = f64::INFINITY;
    for (i, train) in model.features.iter().enumerate() {
        let d = distance(feature, train)?;
        if d < best_d {
            best_d = d;
            best_i = i;
        }
    }
    Ok(Classification {
        label: model.labels[best_i],
        nearest_index: best_i,
        distance: best_d,
    })
}

/// Same argmin as [`classify`], abandoning a candidate as soon as its
/// partial column sum exceeds the best seen. Column sums grow monotonically,
/// so the early exit cannot change the winner.
pub fn classify_pruned(feature: &Matrix, model: &TrainedModel) -> Result<Classification> {
    if model.is_empty() {
        return Err(Error::EmptyModel);
    }
    let mut best_i = 0usize;
    let mut best_d = f64::INFINITY;
    let (rows, cols) = (feature.rows(), feature.cols());
    for (i, train) in model.features.iter().enumerate() {
        if train.rows() != rows || train.cols() != cols {
            return Err(Error::DimensionMismatch(format!(
                "feature {i} is {}x{}, expected {rows}x{cols}",
                train.rows(),
                train.cols()
            )));
        }
        let mut partial = 0.0;
        let mut pruned = false;
        for c in 0..cols {
            let mut acc = 0.0;
            for r in 0..rows {
                let d = feature.get(r, c) - train.get(r, c);
                acc += d * d;
            }
            partial += acc.sqrt();
            if partial > best_d {
                pruned = true;
                break;
            }
        }
        if !pruned && partial < best_d {
            best_d = partial;
            best_i = i;
        }
    }
    Ok(Classification {
        label: model.labels[best_i],
        nearest_index: best_i,
        distance: best_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vibration::{FaultClass, FaultSize};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mat(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    fn dummy_basis(p: usize) -> FittedBasis {
        let mut comp = vec![0.0; p];
        comp[0] = 1.0;
        FittedBasis::Pca(PcaBasis::from_parts(
            vec![0.0; p],
            Matrix::from_vec(1, p, comp).unwrap(),
            vec![1.0],
            0.9,
        ))
    }

    fn labels4() -> [FaultClass; 4] {
        [
            FaultClass::InnerRace(FaultSize::In014),
            FaultClass::Ball(FaultSize::In014),
            FaultClass::OuterRace(FaultSize::In014),
            FaultClass::Normal,
        ]
    }

    #[test]
    fn distance_identity() {
        let a = mat(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn distance_three_four_five() {
        let a = mat(2, 1, vec![0.0, 0.0]);
        let b = mat(2, 1, vec![3.0, 4.0]);
        assert_eq!(distance(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn distance_column_sum_not_frobenius() {
        // Column differences (1,0) and (0,2): column-sum gives 3, the
        // Frobenius norm would give sqrt(5).
        let a = mat(2, 2, vec![0.0, 0.0, 0.0, 0.0]);
        let b = mat(2, 2, vec![1.0, 0.0, 0.0, 2.0]);
        assert_eq!(distance(&a, &b).unwrap(), 3.0);
    }

    #[test]
    fn distance_shape_mismatch() {
        let a = mat(2, 2, vec![0.0; 4]);
        let b = mat(2, 3, vec![0.0; 6]);
        assert!(distance(&a, &b).is_err());
    }

    #[test]
    fn classify_training_feature_self_match() {
        let feats = vec![
            mat(2, 1, vec![0.0, 0.0]),
            mat(2, 1, vec![5.0, 0.0]),
            mat(2, 1, vec![0.0, 5.0]),
        ];
        let [l0, l1, l2, _] = labels4();
        let model =
            TrainedModel::new(FeatureKind::PcaVector, feats.clone(), vec![l0, l1, l2], dummy_basis(2))
                .unwrap();
        for (i, f) in feats.iter().enumerate() {
            let c = classify(f, &model).unwrap();
            assert_eq!(c.nearest_index, i);
            assert_eq!(c.distance, 0.0);
            assert_eq!(c.label, model.labels()[i]);
        }
    }

    #[test]
    fn classify_tie_breaks_to_lowest_index() {
        let feats = vec![mat(1, 1, vec![2.0]), mat(1, 1, vec![-2.0])];
        let [l0, l1, _, _] = labels4();
        let model =
            TrainedModel::new(FeatureKind::PcaVector, feats, vec![l0, l1], dummy_basis(1)).unwrap();
        let c = classify(&mat(1, 1, vec![0.0]), &model).unwrap();
        assert_eq!(c.nearest_index, 0);
        assert_eq!(c.label, l0);
        assert_eq!(c.distance, 2.0);
    }

    #[test]
    fn classify_empty_model_rejected() {
        assert!(TrainedModel::new(
            FeatureKind::PcaVector,
            vec![],
            vec![],
            dummy_basis(1)
        )
        .is_err());
    }

    #[test]
    fn well_separated_classes_classify_exhaustively() {
        // 4 classes x 5 training points on distant centers; every test
        // point lands on its own class, verified against a brute-force
        // distance table.
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let labels = labels4();
        let centers = [
            [0.0, 0.0, 0.0],
            [100.0, 0.0, 0.0],
            [0.0, 100.0, 0.0],
            [0.0, 0.0, 100.0],
        ];
        let mut feats = Vec::new();
        let mut labs = Vec::new();
        for (ci, center) in centers.iter().enumerate() {
            for _ in 0..5 {
                let v: Vec<f64> = center.iter().map(|&c| c + rng.gen_range(-1.0..1.0)).collect();
                feats.push(mat(3, 1, v));
                labs.push(labels[ci]);
            }
        }
        let model =
            TrainedModel::new(FeatureKind::PcaVector, feats.clone(), labs.clone(), dummy_basis(3))
                .unwrap();
        for (ci, center) in centers.iter().enumerate() {
            for _ in 0..10 {
                let v: Vec<f64> = center.iter().map(|&c| c + rng.gen_range(-1.0..1.0)).collect();
                let test = mat(3, 1, v);
                let got = classify(&test, &model).unwrap();
                // Brute-force table.
                let dists: Vec<f64> = feats.iter().map(|f| distance(&test, f).unwrap()).collect();
                let mut want = 0;
                for (i, &d) in dists.iter().enumerate() {
                    if d < dists[want] {
                        want = i;
                    }
                }
                assert_eq!(got.nearest_index, want);
                assert_eq!(got.label, labels[ci]);
            }
        }
    }

    #[test]
    fn pruned_path_agrees_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let labels = labels4();
        for _ in 0..50 {
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=12);
            let feats: Vec<Matrix> = (0..m)
                .map(|_| {
                    mat(
                        rows,
                        cols,
                        (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                    )
                })
                .collect();
            let labs: Vec<FaultClass> = (0..m).map(|i| labels[i % 4]).collect();
            let model =
                TrainedModel::new(FeatureKind::PcaVector, feats, labs, dummy_basis(rows)).unwrap();
            let test = mat(
                rows,
                cols,
                (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            );
            let a = classify(&test, &model).unwrap();
            let b = classify_pruned(&test, &model).unwrap();
            assert_eq!(a.nearest_index, b.nearest_index);
            assert_eq!(a.distance, b.distance);
        }
    }
}
