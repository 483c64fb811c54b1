//! Vibration signals: domain types, windowing, a synthetic bearing-fault
//! generator, and raw-recording ingestion.
//!
//! The generator models a faulty rolling bearing as a train of impacts, each
//! exciting an exponentially decaying resonance. Impact spacing follows the
//! fault's characteristic frequency with a per-impulse slip jitter (the
//! inter-impulse interval drifts, as rollers do), inner-race impacts are
//! amplitude-modulated at shaft rate, and white noise is added on top.
//! Healthy bearings produce shaft-order sinusoids plus noise.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default sampling rate in Hz (drive-end accelerometer convention).
pub const DEFAULT_SAMPLE_RATE: f64 = 12_000.0;

/// Default analysis window length in samples.
pub const WINDOW_LEN: usize = 1024;

/// Fault diameter of the seeded defect, in inches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultSize {
    /// 0.014 in
    In014,
    /// 0.021 in
    In021,
}

impl FaultSize {
    pub fn inches(self) -> f64 {
        match self {
            FaultSize::In014 => 0.014,
            FaultSize::In021 => 0.021,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "0.014" => Ok(FaultSize::In014),
            "0.021" => Ok(FaultSize::In021),
            _ => Err(Error::InvalidArgument(format!(
                "fault size must be 0.014 or 0.021, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for FaultSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultSize::In014 => write!(f, "0.014"),
            FaultSize::In021 => write!(f, "0.021"),
        }
    }
}

/// The four bearing health categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultKind {
    /// Normal bearing.
    No,
    /// Inner-race fault.
    If,
    /// Ball fault.
    Bf,
    /// Outer-race fault.
    Of,
}

impl FaultKind {
    pub const ALL: [FaultKind; 4] = [FaultKind::If, FaultKind::Bf, FaultKind::Of, FaultKind::No];

    pub fn token(self) -> &'static str {
        match self {
            FaultKind::No => "NO",
            FaultKind::If => "IF",
            FaultKind::Bf => "BF",
            FaultKind::Of => "OF",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "NO" | "no" => Ok(FaultKind::No),
            "IF" | "if" => Ok(FaultKind::If),
            "BF" | "bf" => Ok(FaultKind::Bf),
            "OF" | "of" => Ok(FaultKind::Of),
            _ => Err(Error::InvalidArgument(format!(
                "fault class must be one of NO, IF, BF, OF, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Health label of a signal. Faulty classes carry the defect size; a normal
/// bearing has none, which this representation makes unrepresentable
/// otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultClass {
    Normal,
    InnerRace(FaultSize),
    Ball(FaultSize),
    OuterRace(FaultSize),
}

impl FaultClass {
    pub fn new(kind: FaultKind, size: Option<FaultSize>) -> Result<Self> {
        match (kind, size) {
            (FaultKind::No, None) => Ok(FaultClass::Normal),
            (FaultKind::No, Some(_)) => Err(Error::InvalidArgument(
                "a normal bearing carries no fault size".into(),
            )),
            (_, None) => Err(Error::InvalidArgument(format!(
                "fault class {kind} needs a fault size"
            ))),
            (FaultKind::If, Some(s)) => Ok(FaultClass::InnerRace(s)),
            (FaultKind::Bf, Some(s)) => Ok(FaultClass::Ball(s)),
            (FaultKind::Of, Some(s)) => Ok(FaultClass::OuterRace(s)),
        }
    }

    pub fn kind(self) -> FaultKind {
        match self {
            FaultClass::Normal => FaultKind::No,
            FaultClass::InnerRace(_) => FaultKind::If,
            FaultClass::Ball(_) => FaultKind::Bf,
            FaultClass::OuterRace(_) => FaultKind::Of,
        }
    }

    pub fn fault_size(self) -> Option<FaultSize> {
        match self {
            FaultClass::Normal => None,
            FaultClass::InnerRace(s) | FaultClass::Ball(s) | FaultClass::OuterRace(s) => Some(s),
        }
    }
}

impl fmt::Display for FaultClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fault_size() {
            Some(s) => write!(f, "{}({})", self.kind(), s),
            None => write!(f, "{}", self.kind()),
        }
    }
}

/// Motor load condition. The load index fixes the shaft speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoadCondition(u8);

impl LoadCondition {
    pub const ALL: [LoadCondition; 4] = [
        LoadCondition(0),
        LoadCondition(1),
        LoadCondition(2),
        LoadCondition(3),
    ];

    pub fn new(index: u8) -> Result<Self> {
        if index > 3 {
            return Err(Error::InvalidArgument(format!(
                "load index must be 0..=3, got {index}"
            )));
        }
        Ok(LoadCondition(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Shaft speed in rpm: 0 -> 1797, 1 -> 1772, 2 -> 1750, 3 -> 1730.
    pub fn shaft_rpm(self) -> f64 {
        match self.0 {
            0 => 1797.0,
            1 => 1772.0,
            2 => 1750.0,
            _ => 1730.0,
        }
    }

    /// Shaft rotation rate in Hz.
    pub fn shaft_hz(self) -> f64 {
        self.shaft_rpm() / 60.0
    }
}

impl fmt::Display for LoadCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Load{}", self.0)
    }
}

/// A uniformly sampled vibration record with its label metadata.
#[derive(Debug, Clone)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
    label: FaultClass,
    load: LoadCondition,
}

impl Signal {
    pub fn new(
        samples: Vec<f64>,
        sample_rate: f64,
        label: FaultClass,
        load: LoadCondition,
    ) -> Result<Self> {
        if sample_rate.is_nan() || sample_rate <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidArgument("signal has no samples".into()));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("sample {i}")));
        }
        Ok(Signal {
            samples,
            sample_rate,
            label,
            load,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn label(&self) -> FaultClass {
        self.label
    }

    pub fn load(&self) -> LoadCondition {
        self.load
    }
}

/// Parameters of the synthetic fault-signal generator.
///
/// The characteristic-frequency multipliers are orders of the shaft rate;
/// the defaults are the usual values for a 6205-size test bearing.
#[derive(Debug, Clone)]
pub struct SynthParams {
    pub sample_rate: f64,
    /// Ball-pass frequency, inner race, in shaft orders.
    pub bpfi_order: f64,
    /// Ball-pass frequency, outer race, in shaft orders.
    pub bpfo_order: f64,
    /// Ball-spin frequency, in shaft orders.
    pub bsf_order: f64,
    /// Structural resonance excited by each impact, Hz.
    pub resonance_hz: f64,
    /// Exponential decay rate of the impact ring-down, 1/s.
    pub decay_rate: f64,
    /// Peak amplitude of one impact.
    pub impulse_amplitude: f64,
    /// Standard deviation of the additive white noise.
    pub noise_std: f64,
    /// Slip jitter: each inter-impulse interval is scaled by a factor drawn
    /// uniformly from `[1 - j, 1 + j]`. Must lie in `[0, 0.05]`.
    pub slip_jitter: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            sample_rate: DEFAULT_SAMPLE_RATE,
            bpfi_order: 5.415,
            bpfo_order: 3.585,
            bsf_order: 2.357,
            resonance_hz: 590.0,
            decay_rate: 700.0,
            impulse_amplitude: 1.0,
            noise_std: 0.01,
            slip_jitter: 0.025,
        }
    }
}

/// Modulation depth of inner-race impacts at shaft rate.
const IF_MODULATION_DEPTH: f64 = 0.7;
/// Relative amplitudes of the shaft harmonics of a healthy bearing.
const NO_HARMONIC_AMPLITUDES: [f64; 3] = [1.0, 0.5, 0.25];

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate.is_nan() || self.sample_rate <= 0.0 {
            return Err(Error::InvalidArgument("sample_rate must be positive".into()));
        }
        for (name, v) in [
            ("bpfi_order", self.bpfi_order),
            ("bpfo_order", self.bpfo_order),
            ("bsf_order", self.bsf_order),
            ("resonance_hz", self.resonance_hz),
            ("decay_rate", self.decay_rate),
            ("impulse_amplitude", self.impulse_amplitude),
            ("noise_std", self.noise_std),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if !(0.0..=0.05).contains(&self.slip_jitter) {
            return Err(Error::InvalidArgument(format!(
                "slip_jitter must lie in [0, 0.05], got {}",
                self.slip_jitter
            )));
        }
        Ok(())
    }

    /// Characteristic impulse rate for a fault kind at a given load, Hz.
    /// Normal bearings have no impulse train.
    pub fn characteristic_hz(&self, kind: FaultKind, load: LoadCondition) -> Option<f64> {
        let order = match kind {
            FaultKind::If => self.bpfi_order,
            FaultKind::Bf => self.bsf_order,
            FaultKind::Of => self.bpfo_order,
            FaultKind::No => return None,
        };
        Some(order * load.shaft_hz())
    }
}

/// Splits a signal into fixed-length windows, `hop` samples apart.
///
/// Yields `floor((len - window_len) / hop) + 1` windows; label, load, and
/// sample rate carry over.
pub fn segment(signal: &Signal, window_len: usize, hop: usize) -> Result<Vec<Signal>> {
    if window_len == 0 {
        return Err(Error::InvalidArgument("window_len must be positive".into()));
    }
    if hop == 0 {
        return Err(Error::InvalidArgument("hop must be at least 1".into()));
    }
    if signal.len() < window_len {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            window: window_len,
        });
    }
    let count = (signal.len() - window_len) / hop + 1;
    let mut out = Vec::with_capacity(count);
    for w in 0..count {
        let start = w * hop;
        out.push(Signal {
            samples: signal.samples[start..start + window_len].to_vec(),
            sample_rate: signal.sample_rate,
            label: signal.label,
            load: signal.load,
        });
    }
    Ok(out)
}

/// Synthesizes a labeled vibration signal. Deterministic for a fixed seed.
pub fn synth_bearing_signal(
    params: &SynthParams,
    class: FaultClass,
    load: LoadCondition,
    duration_s: f64,
    seed: u64,
) -> Result<Signal> {
    params.validate()?;
    if duration_s.is_nan() || duration_s <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "duration must be positive, got {duration_s}"
        )));
    }
    let n = (duration_s * params.sample_rate).round() as usize;
    if n < WINDOW_LEN {
        return Err(Error::SignalTooShort {
            len: n,
            window: WINDOW_LEN,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = params.sample_rate;
    let shaft = load.shaft_hz();
    let mut x = vec![0.0_f64; n];

    match class.kind() {
        FaultKind::No => {
            for (k, &a) in NO_HARMONIC_AMPLITUDES.iter().enumerate() {
                let f = (k + 1) as f64 * shaft;
                let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                let w = 2.0 * PI * f / fs;
                for (i, s) in x.iter_mut().enumerate() {
                    *s += a * (w * i as f64 + phase).sin();
                }
            }
        }
        kind => {
            let rate = params
                .characteristic_hz(kind, load)
                .expect("faulty class has a characteristic frequency");
            if rate.is_nan() || rate <= 0.0 {
                return Err(Error::InvalidArgument(
                    "characteristic frequency must be positive for fault classes".into(),
                ));
            }
            let period = 1.0 / rate;
            let ring = impulse_ring(params, n);
            let mut t = 0.0_f64;
            while t < duration_s {
                let start = (t * fs).round() as usize;
                if start >= n {
                    break;
                }
                let mut amp = params.impulse_amplitude;
                if kind == FaultKind::If {
                    amp *= 1.0 + IF_MODULATION_DEPTH * (2.0 * PI * shaft * t).cos();
                }
                let span = ring.len().min(n - start);
                for (s, r) in x[start..start + span].iter_mut().zip(&ring[..span]) {
                    *s += amp * r;
                }
                let slip = if params.slip_jitter > 0.0 {
                    rng.gen_range(-params.slip_jitter..=params.slip_jitter)
                } else {
                    0.0
                };
                t += period * (1.0 + slip);
            }
        }
    }

    if params.noise_std > 0.0 {
        for s in x.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *s += params.noise_std * z;
        }
    }

    Signal::new(x, fs, class, load)
}

/// One impact: an exponentially decaying sinusoid at the resonance.
fn impulse_ring(params: &SynthParams, max_len: usize) -> Vec<f64> {
    let fs = params.sample_rate;
    let len = if params.decay_rate > 0.0 {
        // Truncate once the envelope falls below ~1e-8.
        ((18.0 / params.decay_rate) * fs).ceil() as usize
    } else {
        max_len
    };
    let len = len.clamp(1, max_len);
    let w = 2.0 * PI * params.resonance_hz / fs;
    let decay = params.decay_rate / fs;
    (0..len)
        .map(|i| {
            let i = i as f64;
            (-decay * i).exp() * (w * i).sin()
        })
        .collect()
}

/// On-disk encodings accepted by [`ingest_raw`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawFormat {
    /// Little-endian IEEE-754 binary32, no header.
    F32Le,
    /// Little-endian IEEE-754 binary64, no header.
    F64Le,
    /// One decimal value per line, '.' decimal separator.
    Csv,
}

impl RawFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "f32le" | "float32-le" => Ok(RawFormat::F32Le),
            "f64le" | "float64-le" => Ok(RawFormat::F64Le),
            "csv" => Ok(RawFormat::Csv),
            _ => Err(Error::InvalidArgument(format!(
                "format must be f32le, f64le, or csv, got {s:?}"
            ))),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            RawFormat::F32Le => "f32le",
            RawFormat::F64Le => "f64le",
            RawFormat::Csv => "csv",
        }
    }
}

/// Decodes a raw recording into a labeled [`Signal`].
///
/// Binary formats are decoded bit-exactly; errors carry the byte or line
/// offset of the first offending value.
pub fn ingest_raw(
    path: &Path,
    format: RawFormat,
    sample_rate: f64,
    label: FaultClass,
    load: LoadCondition,
) -> Result<Signal> {
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| Error::Ingest {
        path: display.clone(),
        detail: e.to_string(),
    })?;
    let samples = decode_raw(&bytes, format).map_err(|detail| Error::Ingest {
        path: display.clone(),
        detail,
    })?;
    Signal::new(samples, sample_rate, label, load).map_err(|e| Error::Ingest {
        path: display,
        detail: e.to_string(),
    })
}

fn decode_raw(bytes: &[u8], format: RawFormat) -> std::result::Result<Vec<f64>, String> {
    if bytes.is_empty() {
        return Err("empty file".into());
    }
    match format {
        RawFormat::F32Le | RawFormat::F64Le => {
            let width = if format == RawFormat::F32Le { 4 } else { 8 };
            if !bytes.len().is_multiple_of(width) {
                return Err(format!(
                    "trailing {} bytes at byte offset {} are not a whole value",
                    bytes.len() % width,
                    bytes.len() - bytes.len() % width
                ));
            }
            let mut out = Vec::with_capacity(bytes.len() / width);
            for (i, chunk) in bytes.chunks_exact(width).enumerate() {
                let v = if width == 4 {
                    f32::from_le_bytes(chunk.try_into().unwrap()) as f64
                } else {
                    f64::from_le_bytes(chunk.try_into().unwrap())
                };
                if !v.is_finite() {
                    return Err(format!("non-finite value at byte offset {}", i * width));
                }
                out.push(v);
            }
            Ok(out)
        }
        RawFormat::Csv => {
            let text = std::str::from_utf8(bytes).map_err(|e| {
                format!("invalid UTF-8 at byte offset {}", e.valid_up_to())
            })?;
            let mut out = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let trimmed = line.trim();
                if trimmed.is_empty() {
                    continue;
                }
                let v: f64 = trimmed
                    .parse()
                    .map_err(|_| format!("malformed number {trimmed:?} at line {}", lineno + 1))?;
                if !v.is_finite() {
                    return Err(format!("non-finite value at line {}", lineno + 1));
                }
                out.push(v);
            }
            if out.is_empty() {
                return Err("no values".into());
            }
            Ok(out)
        }
    }
}

/// Writes samples in one of the raw encodings (the inverse of [`ingest_raw`]).
pub fn write_raw(path: &Path, format: RawFormat, samples: &[f64]) -> Result<()> {
    let mut bytes = Vec::new();
    match format {
        RawFormat::F32Le => {
            for &s in samples {
                bytes.extend_from_slice(&(s as f32).to_le_bytes());
            }
        }
        RawFormat::F64Le => {
            for &s in samples {
                bytes.extend_from_slice(&s.to_le_bytes());
            }
        }
        RawFormat::Csv => {
            for &s in samples {
                bytes.extend_from_slice(s.to_string().as_bytes());
                bytes.push(b'\n');
            }
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}
