//! The experiment protocol: corpus construction, randomized train/test
//! repetitions, and suite execution over the test grid.
//!
//! All randomness derives from the master seed through tagged splitmix
//! chains, so a given configuration reproduces every sampled training set
//! and every reported number. Training splits depend on (test, n,
//! repetition) but not on the feature kind, which keeps the three feature
//! modes comparable on identical splits. Repetitions run in parallel and
//! merge in repetition order.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classifier::{self, FeatureKind, FittedBasis, TrainedModel};
use crate::config::{DataSource, SuiteConfig};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::manifest::Manifest;
use crate::pca;
use crate::report::{Report, ReportEntry};
use crate::spectrum::{self, Spectrum, SpectrumImage};
use crate::twodpca;
use crate::vibration::{
    self, FaultClass, FaultKind, FaultSize, LoadCondition, SynthParams, WINDOW_LEN,
};

/// One test of the grid: a training condition evaluated at one feature kind
/// and one training-set size.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub test_id: u32,
    pub fault_size: FaultSize,
    pub training_load: LoadCondition,
    pub testing_loads: Vec<LoadCondition>,
    pub classes: Vec<FaultKind>,
    pub n_per_class: usize,
    pub repetitions: usize,
    pub feature_kind: FeatureKind,
    pub d: usize,
    pub contribution: f64,
    pub master_seed: u64,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed for a tagged role.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut x = splitmix(master);
    for &t in tags {
        x = splitmix(x ^ t);
    }
    x
}

const TAG_CORPUS: u64 = 0xC0_0151;
const TAG_SPLIT: u64 = 0x51_1717;

/// All samples of one (class, load) cell.
#[derive(Debug)]
pub struct CorpusGroup {
    pub class: FaultClass,
    pub load: LoadCondition,
    pub spectra: Vec<Spectrum>,
    pub images: Vec<SpectrumImage>,
}

/// Labeled spectrum images (and their source spectra) for every (class,
/// load) cell of one fault size.
#[derive(Debug)]
pub struct Corpus {
    pub fault_size: FaultSize,
    pub rows: usize,
    pub cols: usize,
    pub images_per_class: usize,
    groups: Vec<CorpusGroup>,
}

impl Corpus {
    pub fn group(&self, class: FaultKind, load: LoadCondition) -> Option<&CorpusGroup> {
        self.groups
            .iter()
            .find(|g| g.class.kind() == class && g.load == load)
    }

    pub fn groups(&self) -> &[CorpusGroup] {
        &self.groups
    }

    pub fn total_images(&self) -> usize {
        self.groups.iter().map(|g| g.images.len()).sum()
    }
}

fn class_of(kind: FaultKind, size: FaultSize) -> FaultClass {
    match kind {
        FaultKind::No => FaultClass::Normal,
        FaultKind::If => FaultClass::InnerRace(size),
        FaultKind::Bf => FaultClass::Ball(size),
        FaultKind::Of => FaultClass::OuterRace(size),
    }
}

fn size_tag(size: FaultSize) -> u64 {
    match size {
        FaultSize::In014 => 14,
        FaultSize::In021 => 21,
    }
}

/// Renders one window into its spectrum and image.
fn window_to_sample(
    window: &vibration::Signal,
    rows: usize,
    cols: usize,
) -> Result<(Spectrum, SpectrumImage)> {
    let spec = spectrum::fft_magnitude(window.samples(), window.sample_rate())?;
    let img = spectrum::rasterize_spectrum(&spec, rows, cols)?;
    Ok((spec, img))
}

/// Builds the corpus for one fault size from the configured source.
pub fn build_corpus(cfg: &SuiteConfig, fault_size: FaultSize) -> Result<Corpus> {
    cfg.validate()?;
    let loads: Vec<LoadCondition> = {
        // Training loads may differ from testing loads; the corpus covers both.
        let mut all = cfg.training_loads.clone();
        for &l in &cfg.testing_loads {
            if !all.contains(&l) {
                all.push(l);
            }
        }
        all.sort();
        all
    };

    match &cfg.source {
        DataSource::Synthetic => {
            build_corpus_synthetic(&cfg.synth, &cfg.classes, &loads, fault_size, cfg)
        }
        DataSource::Ingested(path) => {
            let manifest = Manifest::load(path)?;
            build_corpus_ingested(&manifest, &cfg.classes, &loads, fault_size, cfg)
        }
    }
}

fn build_corpus_synthetic(
    params: &SynthParams,
    classes: &[FaultKind],
    loads: &[LoadCondition],
    fault_size: FaultSize,
    cfg: &SuiteConfig,
) -> Result<Corpus> {
    let count = cfg.images_per_class;
    let duration = (count * WINDOW_LEN) as f64 / params.sample_rate;

    let cells: Vec<(FaultKind, LoadCondition)> = loads
        .iter()
        .flat_map(|&l| classes.iter().map(move |&c| (c, l)))
        .collect();

    let groups: Vec<Result<CorpusGroup>> = cells
        .par_iter()
        .map(|&(kind, load)| {
            let class = class_of(kind, fault_size);
            let seed = derive_seed(
                cfg.master_seed,
                &[TAG_CORPUS, size_tag(fault_size), kind as u64, load.index() as u64],
            );
            let signal = vibration::synth_bearing_signal(params, class, load, duration, seed)?;
            let windows = vibration::segment(&signal, WINDOW_LEN, WINDOW_LEN)?;
            debug_assert!(windows.len() >= count);
            let mut spectra = Vec::with_capacity(count);
            let mut images = Vec::with_capacity(count);
            for w in windows.iter().take(count) {
                let (s, i) = window_to_sample(w, cfg.rows, cfg.cols)?;
                spectra.push(s);
                images.push(i);
            }
            Ok(CorpusGroup {
                class,
                load,
                spectra,
                images,
            })
        })
        .collect();

    let groups = groups.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Corpus {
        fault_size,
        rows: cfg.rows,
        cols: cfg.cols,
        images_per_class: count,
        groups,
    })
}

fn build_corpus_ingested(
    manifest: &Manifest,
    classes: &[FaultKind],
    loads: &[LoadCondition],
    fault_size: FaultSize,
    cfg: &SuiteConfig,
) -> Result<Corpus> {
    let count = cfg.images_per_class;
    let mut groups = Vec::new();
    for &load in loads {
        for &kind in classes {
            let class = class_of(kind, fault_size);
            // Normal recordings carry no size and serve both sizes.
            let entries: Vec<_> = manifest
                .signals
                .iter()
                .filter(|e| {
                    e.load == load
                        && e.class.kind() == kind
                        && (kind == FaultKind::No || e.class.fault_size() == Some(fault_size))
                })
                .collect();
            if entries.is_empty() {
                return Err(Error::Manifest(format!(
                    "no signals for class {kind} under {load} (size {fault_size})"
                )));
            }
            let mut spectra = Vec::with_capacity(count);
            let mut images = Vec::with_capacity(count);
            'outer: for e in &entries {
                let signal =
                    vibration::ingest_raw(&e.path, e.format, e.sample_rate, e.class, e.load)?;
                let windows = vibration::segment(&signal, WINDOW_LEN, WINDOW_LEN)?;
                for w in &windows {
                    if spectra.len() == count {
                        break 'outer;
                    }
                    let (s, i) = window_to_sample(w, cfg.rows, cfg.cols)?;
                    spectra.push(s);
                    images.push(i);
                }
            }
            if spectra.len() < count {
                return Err(Error::Manifest(format!(
                    "class {kind} under {load}: only {} windows available, need {count}",
                    spectra.len()
                )));
            }
            groups.push(CorpusGroup {
                class,
                load,
                spectra,
                images,
            });
        }
    }
    Ok(Corpus {
        fault_size,
        rows: cfg.rows,
        cols: cfg.cols,
        images_per_class: count,
        groups,
    })
}

/// Outcome of one test for one testing load.
#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub testing_load: LoadCondition,
    pub per_rep_rates: Vec<f64>,
    /// `confusion[true_class][predicted_class]`, summed over repetitions,
    /// indexed by position in the configured class list.
    pub confusion: Vec<Vec<u64>>,
}

/// Outcome of one test (all testing loads plus the timed phase).
#[derive(Debug)]
pub struct TestOutcome {
    pub config: ExperimentConfig,
    pub loads: Vec<LoadOutcome>,
    /// Wall-clock seconds summed over repetitions, covering basis fitting
    /// through classification (corpus construction and sampling excluded).
    pub seconds: f64,
}

struct RepOutcome {
    // per testing load: (correct, confusion rows)
    loads: Vec<(u64, Vec<Vec<u64>>)>,
    seconds: f64,
}

/// Draws n distinct indices from 0..len, in draw order.
fn sample_without_replacement(rng: &mut ChaCha8Rng, len: usize, n: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, len, n).into_vec()
}

/// Runs one test: repeated random training draws, basis fit, projection,
/// and minimum-distance classification of every image of every testing
/// load.
pub fn run_test(corpus: &Corpus, cfg: &ExperimentConfig) -> Result<TestOutcome> {
    if cfg.n_per_class > corpus.images_per_class {
        return Err(Error::InvalidArgument(format!(
            "n_per_class {} exceeds corpus images per class {}",
            cfg.n_per_class, corpus.images_per_class
        )));
    }
    for &kind in &cfg.classes {
        if corpus.group(kind, cfg.training_load).is_none() {
            return Err(Error::InvalidArgument(format!(
                "corpus lacks class {kind} under training {}",
                cfg.training_load
            )));
        }
        for &l in &cfg.testing_loads {
            if corpus.group(kind, l).is_none() {
                return Err(Error::InvalidArgument(format!(
                    "corpus lacks class {kind} under testing {l}"
                )));
            }
        }
    }

    let reps: Vec<Result<RepOutcome>> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(corpus, cfg, rep as u64))
        .collect();
    let reps = reps.into_iter().collect::<Result<Vec<_>>>()?;

    let k = cfg.classes.len();
    let tested_per_load: Vec<u64> = cfg
        .testing_loads
        .iter()
        .map(|&l| {
            cfg.classes
                .iter()
                .map(|&c| corpus.group(c, l).unwrap().images.len() as u64)
                .sum()
        })
        .collect();

    let mut loads: Vec<LoadOutcome> = cfg
        .testing_loads
        .iter()
        .map(|&l| LoadOutcome {
            testing_load: l,
            per_rep_rates: Vec::with_capacity(cfg.repetitions),
            confusion: vec![vec![0u64; k]; k],
        })
        .collect();
    let mut seconds = 0.0;
    for rep in &reps {
        seconds += rep.seconds;
        for (li, (correct, conf)) in rep.loads.iter().enumerate() {
            let out = &mut loads[li];
            out.per_rep_rates
                .push(100.0 * *correct as f64 / tested_per_load[li] as f64);
            for (row_out, row_in) in out.confusion.iter_mut().zip(conf) {
                for (o, &v) in row_out.iter_mut().zip(row_in) {
                    *o += v;
                }
            }
        }
    }

    Ok(TestOutcome {
        config: cfg.clone(),
        loads,
        seconds,
    })
}

/// Draws the training split of one repetition and fits a model on it.
///
/// The split depends on (test, n, repetition) but not on the feature kind,
/// so all feature modes see identical training draws.
pub fn fit_model(corpus: &Corpus, cfg: &ExperimentConfig, repetition: u64) -> Result<TrainedModel> {
    if cfg.n_per_class > corpus.images_per_class {
        return Err(Error::InvalidArgument(format!(
            "n_per_class {} exceeds corpus images per class {}",
            cfg.n_per_class, corpus.images_per_class
        )));
    }
    let seed = derive_seed(
        cfg.master_seed,
        &[
            TAG_SPLIT,
            cfg.test_id as u64,
            cfg.n_per_class as u64,
            repetition,
        ],
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks: Vec<(FaultKind, Vec<usize>)> = cfg
        .classes
        .iter()
        .map(|&c| {
            (
                c,
                sample_without_replacement(&mut rng, corpus.images_per_class, cfg.n_per_class),
            )
        })
        .collect();

    let mut train_labels = Vec::with_capacity(cfg.classes.len() * cfg.n_per_class);
    let model = match cfg.feature_kind {
        FeatureKind::EigenImage => {
            let mut train_images = Vec::with_capacity(train_labels.capacity());
            for (kind, idx) in &picks {
                let group = corpus.group(*kind, cfg.training_load).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "corpus lacks class {kind} under training {}",
                        cfg.training_load
                    ))
                })?;
                for &i in idx {
                    train_images.push(&group.images[i]);
                    train_labels.push(group.class);
                }
            }
            let basis = twodpca::fit_2dpca(&train_images, cfg.d)?;
            let features = train_images
                .iter()
                .map(|img| Ok(twodpca::project(img, &basis)?.features))
                .collect::<Result<Vec<_>>>()?;
            TrainedModel::new(
                cfg.feature_kind,
                features,
                train_labels,
                FittedBasis::TwoDpca(basis),
            )?
        }
        FeatureKind::PcaVector => {
            let mut train_vecs: Vec<&[f64]> = Vec::with_capacity(train_labels.capacity());
            for (kind, idx) in &picks {
                let group = corpus.group(*kind, cfg.training_load).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "corpus lacks class {kind} under training {}",
                        cfg.training_load
                    ))
                })?;
                for &i in idx {
                    train_vecs.push(group.images[i].as_slice());
                    train_labels.push(group.class);
                }
            }
            let basis = pca::fit_pca(&train_vecs, cfg.contribution)?;
            let features = train_vecs
                .iter()
                .map(|v| vector_feature(pca::project_pca(v, &basis)?))
                .collect::<Result<Vec<_>>>()?;
            TrainedModel::new(cfg.feature_kind, features, train_labels, FittedBasis::Pca(basis))?
                .with_image_dims(corpus.rows, corpus.cols)
        }
        FeatureKind::FftAmplitude => {
            let mut owned: Vec<Vec<f64>> = Vec::with_capacity(train_labels.capacity());
            for (kind, idx) in &picks {
                let group = corpus.group(*kind, cfg.training_load).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "corpus lacks class {kind} under training {}",
                        cfg.training_load
                    ))
                })?;
                for &i in idx {
                    owned.push(group.spectra[i].normalized());
                    train_labels.push(group.class);
                }
            }
            let train_vecs: Vec<&[f64]> = owned.iter().map(|v| v.as_slice()).collect();
            let basis = pca::fit_pca(&train_vecs, cfg.contribution)?;
            let features = train_vecs
                .iter()
                .map(|v| vector_feature(pca::project_pca(v, &basis)?))
                .collect::<Result<Vec<_>>>()?;
            TrainedModel::new(cfg.feature_kind, features, train_labels, FittedBasis::Pca(basis))?
        }
    };
    Ok(model)
}

fn run_repetition(corpus: &Corpus, cfg: &ExperimentConfig, rep: u64) -> Result<RepOutcome> {
    // Timed phase: basis fit through classification. The index draw inside
    // fit_model rides along but costs microseconds against seconds.
    let started = Instant::now();
    let model = fit_model(corpus, cfg, rep)?;

    let k = cfg.classes.len();
    let mut loads = Vec::with_capacity(cfg.testing_loads.len());
    for &l in &cfg.testing_loads {
        let mut confusion = vec![vec![0u64; k]; k];
        let mut correct = 0u64;
        for (ci, &class) in cfg.classes.iter().enumerate() {
            let group = corpus.group(class, l).unwrap();
            let preds: Vec<Result<FaultKind>> = (0..group.images.len())
                .into_par_iter()
                .map(|i| {
                    let feature = sample_feature(&model, group, i)?;
                    Ok(classifier::classify(&feature, &model)?.label.kind())
                })
                .collect();
            for pred in preds {
                let pred = pred?;
                let pi = cfg
                    .classes
                    .iter()
                    .position(|&c| c == pred)
                    .expect("prediction label comes from the training class set");
                confusion[ci][pi] += 1;
                if pred == class {
                    correct += 1;
                }
            }
        }
        loads.push((correct, confusion));
    }

    Ok(RepOutcome {
        loads,
        seconds: started.elapsed().as_secs_f64(),
    })
}

fn vector_feature(v: Vec<f64>) -> Result<Matrix> {
    let k = v.len();
    Matrix::from_vec(k, 1, v)
}

fn sample_feature(model: &TrainedModel, group: &CorpusGroup, i: usize) -> Result<Matrix> {
    match model.kind() {
        FeatureKind::EigenImage | FeatureKind::PcaVector => {
            model.feature_for_image(&group.images[i])
        }
        FeatureKind::FftAmplitude => model.feature_for_spectrum(&group.spectra[i]),
    }
}

/// Runs the whole configured grid and aggregates one report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new(cfg.classes.clone());
    let mut test_id = 0u32;
    for &size in &cfg.fault_sizes {
        let corpus = build_corpus(cfg, size)?;
        for &training_load in &cfg.training_loads {
            test_id += 1;
            for &kind in &cfg.feature_kinds {
                for &n in &cfg.n_values {
                    let test_cfg = ExperimentConfig {
                        test_id,
                        fault_size: size,
                        training_load,
                        testing_loads: cfg.testing_loads.clone(),
                        classes: cfg.classes.clone(),
                        n_per_class: n,
                        repetitions: cfg.repetitions,
                        feature_kind: kind,
                        d: cfg.d,
                        contribution: cfg.contribution,
                        master_seed: cfg.master_seed,
                    };
                    let outcome = run_test(&corpus, &test_cfg)?;
                    push_outcome(&mut report, &outcome);
                }
            }
        }
    }
    Ok(report)
}

/// Converts a test outcome into report entries (one per testing load).
pub fn push_outcome(report: &mut Report, outcome: &TestOutcome) {
    for lo in &outcome.loads {
        report.entries.push(ReportEntry::from_counts(
            outcome.config.test_id,
            outcome.config.fault_size,
            outcome.config.training_load,
            outcome.config.feature_kind,
            outcome.config.n_per_class,
            lo.testing_load,
            lo.per_rep_rates.clone(),
            lo.confusion.clone(),
            outcome.seconds,
        ));
    }
}
