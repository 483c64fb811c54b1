//! Property tests for the distance metric, classification invariances, and
//! the rasterizer.

use proptest::prelude::*;

use vibspec::{
    classify, distance, fit_pca, rasterize_spectrum, FaultClass, FaultKind, FaultSize,
    FeatureKind, FittedBasis, Matrix, Spectrum, TrainedModel,
};

fn feature(rows: usize, cols: usize, values: &[f64]) -> Matrix {
    Matrix::from_vec(rows, cols, values.to_vec()).unwrap()
}

fn any_feature(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-50.0..50.0f64, rows * cols)
        .prop_map(move |v| feature(rows, cols, &v))
}

fn dummy_basis(p: usize) -> FittedBasis {
    let a = vec![0.0; p];
    let mut b = vec![0.0; p];
    b[0] = 1.0;
    FittedBasis::Pca(fit_pca(&[&a, &b], 0.9).unwrap())
}

fn labels() -> [FaultClass; 4] {
    [
        FaultClass::InnerRace(FaultSize::In014),
        FaultClass::Ball(FaultSize::In014),
        FaultClass::OuterRace(FaultSize::In014),
        FaultClass::Normal,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_a_metric(
        a in any_feature(4, 3),
        b in any_feature(4, 3),
        c in any_feature(4, 3),
    ) {
        let dab = distance(&a, &b).unwrap();
        let dba = distance(&b, &a).unwrap();
        let dac = distance(&a, &c).unwrap();
        let dcb = distance(&c, &b).unwrap();
        prop_assert!(dab >= 0.0);
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(distance(&a, &a).unwrap(), 0.0);
        // Triangle inequality with a little float slack.
        prop_assert!(dab <= dac + dcb + 1e-9 * (1.0 + dab.abs()));
    }

    #[test]
    fn classify_invariant_under_training_permutation(
        feats in prop::collection::vec(any_feature(3, 2), 2..8),
        query in any_feature(3, 2),
        rotation in 0usize..8,
    ) {
        let labs = labels();
        let m = feats.len();
        let base_labels: Vec<FaultClass> = (0..m).map(|i| labs[i % 4]).collect();
        let model = TrainedModel::new(
            FeatureKind::PcaVector,
            feats.clone(),
            base_labels.clone(),
            dummy_basis(3),
        ).unwrap();
        let a = classify(&query, &model).unwrap();

        // Distinct distances are required for permutation invariance of the
        // decision; skip the rare degenerate draw.
        let mut ds: Vec<f64> = feats.iter().map(|f| distance(&query, f).unwrap()).collect();
        ds.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assume!(ds.windows(2).all(|w| w[0] != w[1]));

        let k = rotation % m;
        let mut rotated = feats.clone();
        rotated.rotate_left(k);
        let mut rotated_labels = base_labels.clone();
        rotated_labels.rotate_left(k);
        let model2 = TrainedModel::new(
            FeatureKind::PcaVector,
            rotated,
            rotated_labels,
            dummy_basis(3),
        ).unwrap();
        let b = classify(&query, &model2).unwrap();
        prop_assert_eq!(a.label, b.label);
        prop_assert_eq!(a.distance, b.distance);
    }

    #[test]
    fn classification_invariant_under_global_scaling(
        feats in prop::collection::vec(any_feature(3, 2), 2..8),
        query in any_feature(3, 2),
        scale in 1e-3..1e3f64,
    ) {
        let labs = labels();
        let m = feats.len();
        let base_labels: Vec<FaultClass> = (0..m).map(|i| labs[i % 4]).collect();
        let model = TrainedModel::new(
            FeatureKind::PcaVector,
            feats.clone(),
            base_labels.clone(),
            dummy_basis(3),
        ).unwrap();
        let a = classify(&query, &model).unwrap();

        let mut ds: Vec<f64> = feats.iter().map(|f| distance(&query, f).unwrap()).collect();
        ds.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assume!(ds.windows(2).all(|w| (w[1] - w[0]) > 1e-9 * (1.0 + w[1].abs())));

        let scale_mat = |m: &Matrix| {
            Matrix::from_vec(
                m.rows(),
                m.cols(),
                m.data().iter().map(|v| v * scale).collect(),
            ).unwrap()
        };
        let scaled: Vec<Matrix> = feats.iter().map(&scale_mat).collect();
        let model2 = TrainedModel::new(
            FeatureKind::PcaVector,
            scaled,
            base_labels,
            dummy_basis(3),
        ).unwrap();
        let b = classify(&scale_mat(&query), &model2).unwrap();
        prop_assert_eq!(a.nearest_index, b.nearest_index);
    }

    #[test]
    fn rasterizer_scale_invariant_and_gap_free(
        mags in prop::collection::vec(0.0..1e4f64, 512),
        scale in 1e-6..1e6f64,
        rows in 2usize..100,
        cols in 2usize..700,
    ) {
        let s1 = Spectrum::new(mags.clone(), 10.0).unwrap();
        let s2 = Spectrum::new(mags.iter().map(|m| m * scale).collect(), 10.0).unwrap();
        let a = rasterize_spectrum(&s1, rows, cols).unwrap();
        let b = rasterize_spectrum(&s2, rows, cols).unwrap();
        prop_assert_eq!(a.pixels().data(), b.pixels().data());

        // Every column carries at least one white pixel.
        for c in 0..cols {
            prop_assert!((0..rows).any(|r| a.get(r, c) == 1.0), "column {} empty", c);
        }
    }
}

#[test]
fn classes_and_kinds_round_trip_tokens() {
    for kind in FaultKind::ALL {
        assert_eq!(FaultKind::parse(kind.token()).unwrap(), kind);
    }
    for kind in FeatureKind::ALL {
        assert_eq!(FeatureKind::parse(kind.token()).unwrap(), kind);
    }
}
