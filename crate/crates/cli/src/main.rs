//! Command-line driver for the spectrum-image diagnosis pipeline.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vibspec::manifest::{ImageEntry, Manifest, SignalEntry};
use vibspec::model;
use vibspec::{
    build_corpus, classify, fit_model, read_pgm, run_suite, write_pgm, ExperimentConfig,
    FaultClass, FaultKind, FaultSize, FeatureKind, LoadCondition, RawFormat, Report, SuiteConfig,
    TimingMode,
};

#[derive(Parser)]
#[command(
    name = "vibspec",
    about = "Bearing fault diagnosis from FFT spectrum images",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic spectrum-image corpus to PGM files plus a manifest.
    Generate(GenerateArgs),
    /// Check raw recordings and list them in a signal manifest.
    Ingest(IngestArgs),
    /// Fit a model on one training draw and persist it.
    Train(TrainArgs),
    /// Classify PGM images or manifest signals against a saved model.
    Classify(ClassifyArgs),
    /// Run the configured experiment suite and write reports.
    Experiment(ExperimentArgs),
    /// Re-emit tables from a saved full report.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Experiment configuration file (key = value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for PGM files and manifest.txt.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Manifest file to write.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Append to an existing manifest instead of creating one.
    #[arg(long)]
    append: bool,
    /// Raw sample encoding: f32le, f64le, or csv.
    #[arg(long)]
    format: String,
    /// Sampling rate in Hz.
    #[arg(long)]
    sample_rate: f64,
    /// Fault class: NO, IF, BF, or OF.
    #[arg(long)]
    class: String,
    /// Fault size in inches (0.014 or 0.021); omit for NO.
    #[arg(long)]
    fault_size: Option<String>,
    /// Load condition index 0..=3.
    #[arg(long)]
    load: u8,
    /// Raw recording files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feature kind: 2dpca, pca, or fft.
    #[arg(long, default_value = "2dpca")]
    kind: String,
    /// Training images per class.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Fault size to train on (defaults to the first configured).
    #[arg(long)]
    fault_size: Option<String>,
    /// Training load index (defaults to the first configured).
    #[arg(long)]
    training_load: Option<u8>,
    /// Model file to write.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Saved model file.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Manifest of signals or images to classify.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// PGM spectrum images to classify.
    images: Vec<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.csv, report.txt, report.full.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Write zeros in the timing column (byte-reproducible output).
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Full report file produced by `experiment`.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Output format: csv or text.
    #[arg(long, default_value = "text")]
    format: String,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write zeros in the timing column.
    #[arg(long)]
    no_timing: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let run = || -> vibspec::Result<()> {
        match cli.command {
            Command::Generate(args) => cmd_generate(args),
            Command::Ingest(args) => cmd_ingest(args),
            Command::Train(args) => cmd_train(args),
            Command::Classify(args) => cmd_classify(args),
            Command::Experiment(args) => cmd_experiment(args),
            Command::Report(args) => cmd_report(args),
        }
    };

    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> vibspec::Result<SuiteConfig> {
    match path {
        Some(p) => SuiteConfig::from_file(p),
        None => Ok(SuiteConfig::default()),
    }
}

fn cmd_generate(args: GenerateArgs) -> vibspec::Result<()> {
    let cfg = load_config(&args.config)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let mut manifest = Manifest::default();
    let mut written = 0usize;
    for &size in &cfg.fault_sizes {
        let corpus = build_corpus(&cfg, size)?;
        let size_dir = args.out_dir.join(format!("size_{size}"));
        std::fs::create_dir_all(&size_dir)?;
        for group in corpus.groups() {
            for (i, image) in group.images.iter().enumerate() {
                let name = format!(
                    "{}_load{}_{i:04}.pgm",
                    group.class.kind().token().to_lowercase(),
                    group.load.index()
                );
                let path = size_dir.join(name);
                write_pgm(&path, image)?;
                manifest.images.push(ImageEntry {
                    path,
                    class: group.class,
                    load: group.load,
                });
                written += 1;
            }
        }
    }
    let manifest_path = args.out_dir.join("manifest.txt");
    manifest.save(&manifest_path)?;
    println!(
        "wrote {written} images and {}",
        manifest_path.display()
    );
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> vibspec::Result<()> {
    let format = RawFormat::parse(&args.format)?;
    let class = FaultClass::new(
        FaultKind::parse(&args.class)?,
        args.fault_size.as_deref().map(FaultSize::parse).transpose()?,
    )?;
    let load = LoadCondition::new(args.load)?;

    let mut manifest = if args.append && args.out.exists() {
        Manifest::load(&args.out)?
    } else {
        Manifest::default()
    };
    for file in &args.files {
        // Decode now so malformed data fails here, not at corpus time.
        let signal = vibspec::ingest_raw(file, format, args.sample_rate, class, load)?;
        println!(
            "{}: {} samples at {} Hz, {} under {}",
            file.display(),
            signal.len(),
            signal.sample_rate(),
            signal.label(),
            signal.load()
        );
        manifest.signals.push(SignalEntry {
            path: file.clone(),
            format,
            sample_rate: args.sample_rate,
            class,
            load,
        });
    }
    manifest.save(&args.out)?;
    println!("manifest: {} ({} signals)", args.out.display(), manifest.signals.len());
    Ok(())
}

fn cmd_train(args: TrainArgs) -> vibspec::Result<()> {
    let cfg = load_config(&args.config)?;
    let kind = FeatureKind::parse(&args.kind)?;
    let fault_size = match &args.fault_size {
        Some(s) => FaultSize::parse(s)?,
        None => *cfg.fault_sizes.first().ok_or_else(|| {
            vibspec::Error::Config("config lists no fault sizes".into())
        })?,
    };
    let training_load = match args.training_load {
        Some(i) => LoadCondition::new(i)?,
        None => *cfg.training_loads.first().ok_or_else(|| {
            vibspec::Error::Config("config lists no training loads".into())
        })?,
    };
    let test_id = suite_test_id(&cfg, fault_size, training_load);

    let corpus = build_corpus(&cfg, fault_size)?;
    let test_cfg = ExperimentConfig {
        test_id,
        fault_size,
        training_load,
        testing_loads: cfg.testing_loads.clone(),
        classes: cfg.classes.clone(),
        n_per_class: args.n,
        repetitions: 1,
        feature_kind: kind,
        d: cfg.d,
        contribution: cfg.contribution,
        master_seed: cfg.master_seed,
    };
    let model = fit_model(&corpus, &test_cfg, 0)?;
    model::save_model(&args.out, &model)?;
    println!(
        "trained {kind} model on {} samples ({}x{} per class {n}, {training_load}) -> {}",
        model.len(),
        corpus.rows,
        corpus.cols,
        args.out.display(),
        n = args.n,
    );
    Ok(())
}

/// Table-style test id of a (fault size, training load) pair under a config.
fn suite_test_id(cfg: &SuiteConfig, size: FaultSize, load: LoadCondition) -> u32 {
    let mut id = 0;
    for &s in &cfg.fault_sizes {
        for &l in &cfg.training_loads {
            id += 1;
            if s == size && l == load {
                return id;
            }
        }
    }
    1
}

fn cmd_classify(args: ClassifyArgs) -> vibspec::Result<()> {
    if args.images.is_empty() && args.manifest.is_none() {
        return Err(vibspec::Error::InvalidArgument(
            "nothing to classify: pass PGM images or --manifest".into(),
        ));
    }
    let model = model::load_model(&args.model)?;
    let mut total = 0usize;
    let mut labeled_correct: Option<(usize, usize)> = None;

    let mut judge = |name: &str,
                     truth: Option<FaultKind>,
                     feature: vibspec::Matrix|
     -> vibspec::Result<()> {
        let result = classify(&feature, &model)?;
        total += 1;
        match truth {
            Some(t) => {
                let (c, n) = labeled_correct.unwrap_or((0, 0));
                let hit = result.label.kind() == t;
                labeled_correct = Some((c + hit as usize, n + 1));
                println!(
                    "{name}: {} (nearest #{}, distance {:.4}) truth {}{}",
                    result.label.kind(),
                    result.nearest_index,
                    result.distance,
                    t,
                    if hit { "" } else { "  MISMATCH" }
                );
            }
            None => println!(
                "{name}: {} (nearest #{}, distance {:.4})",
                result.label.kind(),
                result.nearest_index,
                result.distance
            ),
        }
        Ok(())
    };

    for path in &args.images {
        let image = read_pgm(path)?;
        let feature = model.feature_for_image(&image)?;
        judge(&path.display().to_string(), None, feature)?;
    }

    if let Some(manifest_path) = &args.manifest {
        let manifest = Manifest::load(manifest_path)?;
        if manifest.is_empty() {
            return Err(vibspec::Error::Manifest("manifest lists no entries".into()));
        }
        for entry in &manifest.images {
            let image = read_pgm(&entry.path)?;
            let feature = model.feature_for_image(&image)?;
            judge(
                &entry.path.display().to_string(),
                Some(entry.class.kind()),
                feature,
            )?;
        }
        for entry in &manifest.signals {
            let signal = vibspec::ingest_raw(
                &entry.path,
                entry.format,
                entry.sample_rate,
                entry.class,
                entry.load,
            )?;
            let windows = vibspec::segment(&signal, vibspec::vibration::WINDOW_LEN, vibspec::vibration::WINDOW_LEN)?;
            for (w, window) in windows.iter().enumerate() {
                let spectrum = vibspec::fft_magnitude(window.samples(), window.sample_rate())?;
                let feature = model.feature_for_spectrum(&spectrum)?;
                judge(
                    &format!("{}[{w}]", entry.path.display()),
                    Some(entry.class.kind()),
                    feature,
                )?;
            }
        }
    }

    if let Some((correct, n)) = labeled_correct {
        println!(
            "classified {total} inputs; labeled accuracy {correct}/{n} ({:.2}%)",
            100.0 * correct as f64 / n as f64
        );
    } else {
        println!("classified {total} inputs");
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> vibspec::Result<()> {
    let cfg = load_config(&args.config)?;
    std::fs::create_dir_all(&args.out_dir)?;
    let timing = if args.no_timing {
        TimingMode::Zeroed
    } else {
        TimingMode::WallClock
    };
    let report = run_suite(&cfg)?;
    write_report(&report, &args.out_dir, timing)?;
    println!(
        "ran {} report entries -> {}",
        report.entries.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn write_report(report: &Report, dir: &Path, timing: TimingMode) -> vibspec::Result<()> {
    std::fs::write(dir.join("report.csv"), report.to_csv(timing))?;
    std::fs::write(dir.join("report.txt"), report.to_text(timing))?;
    report.save_full(&dir.join("report.full"))?;
    Ok(())
}

fn cmd_report(args: ReportArgs) -> vibspec::Result<()> {
    let report = Report::load_full(&args.input)?;
    let timing = if args.no_timing {
        TimingMode::Zeroed
    } else {
        TimingMode::WallClock
    };
    let rendered = match args.format.as_str() {
        "csv" => report.to_csv(timing),
        "text" => report.to_text(timing),
        other => {
            return Err(vibspec::Error::InvalidArgument(format!(
                "format must be csv or text, got {other:?}"
            )))
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}
