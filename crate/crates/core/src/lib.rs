//! Bearing fault diagnosis from spectrum images of vibration signals.
//!
//! The pipeline: vibration windows are transformed with a 1024-point FFT,
//! the single-sided magnitude spectrum is rendered as a fixed-size
//! grayscale image, two-dimensional PCA extracts low-dimensional eigen
//! images, and a minimum-distance nearest-neighbor rule classifies faults.
//! A flattened-vector PCA baseline and a raw FFT-amplitude feature mode sit
//! beside the image pipeline for comparison, and an experiment harness runs
//! the randomized train/test protocol over the load-condition grid.

pub mod classifier;
pub mod config;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod manifest;
pub mod model;
pub mod pca;
pub mod report;
pub mod spectrum;
pub mod twodpca;
pub mod vibration;

#[cfg(test)]
pub(crate) mod test_oracles;

pub use classifier::{classify, classify_pruned, distance, Classification, FeatureKind, FittedBasis, TrainedModel};
pub use config::{DataSource, SuiteConfig};
pub use error::{Error, Result};
pub use experiment::{
    build_corpus, derive_seed, fit_model, run_suite, run_test, Corpus, ExperimentConfig,
    TestOutcome,
};
pub use linalg::{Matrix, SymEigen};
pub use manifest::Manifest;
pub use pca::{fit_pca, flatten, project_pca, PcaBasis};
pub use report::{Report, ReportEntry, TimingMode};
pub use spectrum::{fft_magnitude, rasterize_spectrum, read_pgm, write_pgm, Spectrum, SpectrumImage};
pub use twodpca::{eigen_sorted, fit_2dpca, mean_image, project, scatter_matrix, EigenBasis2D, EigenImage};
pub use vibration::{
    ingest_raw, segment, synth_bearing_signal, write_raw, FaultClass, FaultKind, FaultSize,
    LoadCondition, RawFormat, Signal, SynthParams,
};
