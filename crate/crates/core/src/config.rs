//! Flat key-value experiment configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Every key is
//! optional and falls back to the defaults below, but unknown or duplicate
//! keys are errors. Lists are comma-separated.

use std::path::PathBuf;

use crate::classifier::FeatureKind;
use crate::error::{Error, Result};
use crate::vibration::{FaultKind, FaultSize, LoadCondition, SynthParams};

/// Where corpus signals come from.
#[derive(Debug, Clone)]
pub enum DataSource {
    Synthetic,
    /// Path to a signal manifest.
    Ingested(PathBuf),
}

/// Full description of an experiment suite (the Table-1-style grid).
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub source: DataSource,
    pub synth: SynthParams,
    pub master_seed: u64,
    /// One test per (fault size, training load), numbered 1.. in order.
    pub fault_sizes: Vec<FaultSize>,
    pub training_loads: Vec<LoadCondition>,
    pub testing_loads: Vec<LoadCondition>,
    pub classes: Vec<FaultKind>,
    pub n_values: Vec<usize>,
    pub repetitions: usize,
    pub feature_kinds: Vec<FeatureKind>,
    pub d: usize,
    pub contribution: f64,
    /// Images per class per load. 40 is the desk-scale profile; set 400 for
    /// the full-scale corpus.
    pub images_per_class: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            source: DataSource::Synthetic,
            synth: SynthParams::default(),
            master_seed: 20_240_101,
            fault_sizes: vec![FaultSize::In014, FaultSize::In021],
            training_loads: LoadCondition::ALL.to_vec(),
            testing_loads: LoadCondition::ALL.to_vec(),
            classes: FaultKind::ALL.to_vec(),
            n_values: vec![1, 3, 5, 10],
            repetitions: 20,
            feature_kinds: FeatureKind::ALL.to_vec(),
            d: 10,
            contribution: 0.90,
            images_per_class: 40,
            rows: 420,
            cols: 560,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        for &n in &self.n_values {
            if n == 0 || n > self.images_per_class {
                return Err(Error::Config(format!(
                    "n_per_class {n} must lie in 1..=images_per_class ({})",
                    self.images_per_class
                )));
            }
        }
        if self.classes.is_empty() {
            return Err(Error::Config("classes must not be empty".into()));
        }
        if self.testing_loads.is_empty() {
            return Err(Error::Config("testing_loads must not be empty".into()));
        }
        if self.d < 1 || self.d >= self.cols {
            return Err(Error::Config(format!(
                "d must satisfy 1 <= d < cols ({}), got {}",
                self.cols, self.d
            )));
        }
        if !(self.contribution > 0.0 && self.contribution <= 1.0) {
            return Err(Error::Config(format!(
                "contribution must lie in (0, 1], got {}",
                self.contribution
            )));
        }
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::Config(format!(
                "image size must be at least 2x2, got {}x{}",
                self.rows, self.cols
            )));
        }
        if matches!(self.source, DataSource::Synthetic)
            && self.classes.iter().any(|c| *c != FaultKind::No)
            && self.fault_sizes.is_empty()
        {
            return Err(Error::Config("fault_sizes must not be empty".into()));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<SuiteConfig> {
        let mut cfg = SuiteConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
            cfg.apply(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<SuiteConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "source" => {
                self.source = match value {
                    "synthetic" => DataSource::Synthetic,
                    "ingested" => DataSource::Ingested(PathBuf::new()),
                    _ => {
                        return Err(Error::Config(format!(
                            "source must be synthetic or ingested, got {value:?}"
                        )))
                    }
                };
            }
            "manifest" => {
                self.source = DataSource::Ingested(PathBuf::from(value));
            }
            "master_seed" => self.master_seed = parse_num(key, value)?,
            "fault_sizes" => {
                self.fault_sizes = split_list(value)
                    .map(FaultSize::parse)
                    .collect::<Result<_>>()?;
            }
            "training_loads" => {
                self.training_loads = parse_loads(value)?;
            }
            "testing_loads" => {
                self.testing_loads = parse_loads(value)?;
            }
            "classes" => {
                self.classes = split_list(value)
                    .map(FaultKind::parse)
                    .collect::<Result<_>>()?;
            }
            "n_values" => {
                self.n_values = split_list(value)
                    .map(|v| parse_num::<usize>("n_values", v))
                    .collect::<Result<_>>()?;
            }
            "repetitions" => self.repetitions = parse_num(key, value)?,
            "feature_kinds" => {
                self.feature_kinds = split_list(value)
                    .map(FeatureKind::parse)
                    .collect::<Result<_>>()?;
            }
            "d" => self.d = parse_num(key, value)?,
            "contribution" => self.contribution = parse_num(key, value)?,
            "images_per_class" => self.images_per_class = parse_num(key, value)?,
            "rows" => self.rows = parse_num(key, value)?,
            "cols" => self.cols = parse_num(key, value)?,
            "sample_rate" => self.synth.sample_rate = parse_num(key, value)?,
            "bpfi_order" => self.synth.bpfi_order = parse_num(key, value)?,
            "bpfo_order" => self.synth.bpfo_order = parse_num(key, value)?,
            "bsf_order" => self.synth.bsf_order = parse_num(key, value)?,
            "resonance_hz" => self.synth.resonance_hz = parse_num(key, value)?,
            "decay_rate" => self.synth.decay_rate = parse_num(key, value)?,
            "impulse_amplitude" => self.synth.impulse_amplitude = parse_num(key, value)?,
            "noise_std" => self.synth.noise_std = parse_num(key, value)?,
            "slip_jitter" => self.synth.slip_jitter = parse_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(|s| s.trim()).filter(|s| !s.is_empty())
}

fn parse_loads(value: &str) -> Result<Vec<LoadCondition>> {
    split_list(value)
        .map(|v| {
            let idx: u8 = v
                .parse()
                .map_err(|_| Error::Config(format!("bad load index {v:?}")))?;
            LoadCondition::new(idx).map_err(|e| Error::Config(e.to_string()))
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SuiteConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_full_config() {
        let cfg = SuiteConfig::parse(
            "# comment\n\
             master_seed = 7\n\
             fault_sizes = 0.014\n\
             training_loads = 0, 2\n\
             testing_loads = 0,1,2,3\n\
             classes = IF,BF,OF,NO\n\
             n_values = 1,5\n\
             repetitions = 3\n\
             feature_kinds = 2dpca,fft\n\
             d = 4\n\
             contribution = 0.8\n\
             images_per_class = 12\n\
             rows = 60\n\
             cols = 80\n\
             noise_std = 0.05\n",
        )
        .unwrap();
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.fault_sizes, vec![FaultSize::In014]);
        assert_eq!(cfg.training_loads.len(), 2);
        assert_eq!(cfg.n_values, vec![1, 5]);
        assert_eq!(
            cfg.feature_kinds,
            vec![FeatureKind::EigenImage, FeatureKind::FftAmplitude]
        );
        assert_eq!(cfg.rows, 60);
        assert!((cfg.synth.noise_std - 0.05).abs() < 1e-15);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = SuiteConfig::parse("window_size = 7\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn duplicate_key_is_an_error() {
        let err = SuiteConfig::parse("d = 5\nd = 6\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn n_larger_than_corpus_rejected() {
        let err = SuiteConfig::parse("images_per_class = 10\nn_values = 12\n").unwrap_err();
        assert!(err.to_string().contains("n_per_class"), "{err}");
    }

    #[test]
    fn manifest_key_switches_source() {
        let cfg = SuiteConfig::parse("manifest = signals.txt\n").unwrap();
        assert!(matches!(cfg.source, DataSource::Ingested(ref p) if p.ends_with("signals.txt")));
    }
}
