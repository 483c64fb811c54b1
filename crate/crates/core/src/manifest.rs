//! Line-oriented manifests tying files on disk to their labels.
//!
//! Two entry kinds share one format: `signal` entries point at raw
//! recordings (for ingestion), `image` entries at rendered PGM files (for
//! inspection or image-space classification). Fields are whitespace
//! separated; `-` marks the absent fault size of a normal bearing.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::vibration::{FaultClass, FaultKind, FaultSize, LoadCondition, RawFormat};

const HEADER: &str = "vibspec-manifest v1";

#[derive(Debug, Clone)]
pub struct SignalEntry {
    pub path: PathBuf,
    pub format: RawFormat,
    pub sample_rate: f64,
    pub class: FaultClass,
    pub load: LoadCondition,
}

#[derive(Debug, Clone)]
pub struct ImageEntry {
    pub path: PathBuf,
    pub class: FaultClass,
    pub load: LoadCondition,
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub signals: Vec<SignalEntry>,
    pub images: Vec<ImageEntry>,
}

fn class_tokens(class: FaultClass) -> (String, String) {
    let size = match class.fault_size() {
        Some(s) => s.to_string(),
        None => "-".to_string(),
    };
    (class.kind().token().to_string(), size)
}

fn parse_class(kind: &str, size: &str) -> Result<FaultClass> {
    let kind = FaultKind::parse(kind)?;
    let size = match size {
        "-" => None,
        s => Some(FaultSize::parse(s)?),
    };
    FaultClass::new(kind, size)
}

impl std::fmt::Display for Manifest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{HEADER}")?;
        for s in &self.signals {
            let (kind, size) = class_tokens(s.class);
            writeln!(
                f,
                "signal {} {} {} {} {} {}",
                s.path.display(),
                s.format.token(),
                s.sample_rate,
                kind,
                size,
                s.load.index()
            )?;
        }
        for i in &self.images {
            let (kind, size) = class_tokens(i.class);
            writeln!(f, "image {} {} {} {}", i.path.display(), kind, size, i.load.index())?;
        }
        Ok(())
    }
}

impl Manifest {
    pub fn is_empty(&self) -> bool {
        self.signals.is_empty() && self.images.is_empty()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_string())?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Manifest> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, first)) if first.trim() == HEADER => {}
            _ => {
                return Err(Error::Manifest(format!(
                    "missing {HEADER:?} header line"
                )))
            }
        }
        let mut m = Manifest::default();
        for (lineno, raw) in lines {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let fail = |msg: String| Error::Manifest(format!("line {}: {msg}", lineno + 1));
            match fields[0] {
                "signal" => {
                    if fields.len() != 7 {
                        return Err(fail(format!(
                            "signal entry needs 7 fields, got {}",
                            fields.len()
                        )));
                    }
                    let format = RawFormat::parse(fields[2]).map_err(|e| fail(e.to_string()))?;
                    let sample_rate: f64 = fields[3]
                        .parse()
                        .map_err(|_| fail(format!("bad sample rate {:?}", fields[3])))?;
                    let class = parse_class(fields[4], fields[5]).map_err(|e| fail(e.to_string()))?;
                    let load_idx: u8 = fields[6]
                        .parse()
                        .map_err(|_| fail(format!("bad load {:?}", fields[6])))?;
                    let load = LoadCondition::new(load_idx).map_err(|e| fail(e.to_string()))?;
                    m.signals.push(SignalEntry {
                        path: PathBuf::from(fields[1]),
                        format,
                        sample_rate,
                        class,
                        load,
                    });
                }
                "image" => {
                    if fields.len() != 5 {
                        return Err(fail(format!(
                            "image entry needs 5 fields, got {}",
                            fields.len()
                        )));
                    }
                    let class = parse_class(fields[2], fields[3]).map_err(|e| fail(e.to_string()))?;
                    let load_idx: u8 = fields[4]
                        .parse()
                        .map_err(|_| fail(format!("bad load {:?}", fields[4])))?;
                    let load = LoadCondition::new(load_idx).map_err(|e| fail(e.to_string()))?;
                    m.images.push(ImageEntry {
                        path: PathBuf::from(fields[1]),
                        class,
                        load,
                    });
                }
                other => return Err(fail(format!("unknown entry kind {other:?}"))),
            }
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Manifest(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }
}
