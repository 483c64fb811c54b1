//! Result aggregation and emission.
//!
//! The mean classification rate of an entry is computed from its summed
//! confusion matrix (diagonal over total), so the reported mean and the
//! confusion matrix can never drift apart. CSV rows carry two-decimal
//! percentages; the full report format stores exact values and can be
//! re-emitted later.

use std::fmt::Write as _;
use std::path::Path;

use crate::classifier::FeatureKind;
use crate::error::{Error, Result};
use crate::vibration::{FaultKind, FaultSize, LoadCondition};

/// Whether CSV rows carry measured wall-clock seconds or a fixed zero.
/// Zeroed timing makes two equal-seed runs byte-identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimingMode {
    WallClock,
    Zeroed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub test_id: u32,
    pub fault_size: FaultSize,
    pub training_load: LoadCondition,
    pub feature_kind: FeatureKind,
    pub n_per_class: usize,
    pub testing_load: LoadCondition,
    pub per_rep_rates: Vec<f64>,
    /// `confusion[true][pred]` summed over repetitions.
    pub confusion: Vec<Vec<u64>>,
    /// Wall-clock seconds for the whole (test, kind, n) run, repeated on
    /// each of its testing-load rows.
    pub seconds: f64,
}

impl ReportEntry {
    #[allow(clippy::too_many_arguments)]
    pub fn from_counts(
        test_id: u32,
        fault_size: FaultSize,
        training_load: LoadCondition,
        feature_kind: FeatureKind,
        n_per_class: usize,
        testing_load: LoadCondition,
        per_rep_rates: Vec<f64>,
        confusion: Vec<Vec<u64>>,
        seconds: f64,
    ) -> Self {
        ReportEntry {
            test_id,
            fault_size,
            training_load,
            feature_kind,
            n_per_class,
            testing_load,
            per_rep_rates,
            confusion,
            seconds,
        }
    }

    pub fn total_tested(&self) -> u64 {
        self.confusion.iter().map(|r| r.iter().sum::<u64>()).sum()
    }

    pub fn diagonal(&self) -> u64 {
        self.confusion
            .iter()
            .enumerate()
            .map(|(i, r)| r[i])
            .sum()
    }

    /// Mean rate in percent, exactly `100 * diagonal / total`.
    pub fn mean_rate_pct(&self) -> f64 {
        let total = self.total_tested();
        if total == 0 {
            return 0.0;
        }
        100.0 * self.diagonal() as f64 / total as f64
    }

    /// Population standard deviation of the per-repetition rates.
    pub fn stddev_pct(&self) -> f64 {
        let n = self.per_rep_rates.len();
        if n == 0 {
            return 0.0;
        }
        let mean = self.per_rep_rates.iter().sum::<f64>() / n as f64;
        let var = self
            .per_rep_rates
            .iter()
            .map(|r| (r - mean) * (r - mean))
            .sum::<f64>()
            / n as f64;
        var.sqrt()
    }
}

/// An aggregated experiment report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    /// Class order the confusion matrices are indexed by.
    pub classes: Vec<FaultKind>,
    pub entries: Vec<ReportEntry>,
}

impl Report {
    pub fn new(classes: Vec<FaultKind>) -> Self {
        Report {
            classes,
            entries: Vec::new(),
        }
    }

    /// CSV with the columns
    /// `test_id,feature_kind,n,testing_load,mean_rate_pct,stddev_pct,seconds`.
    pub fn to_csv(&self, timing: TimingMode) -> String {
        let mut out = String::new();
        out.push_str("test_id,feature_kind,n,testing_load,mean_rate_pct,stddev_pct,seconds\n");
        for e in &self.entries {
            let seconds = match timing {
                TimingMode::WallClock => e.seconds,
                TimingMode::Zeroed => 0.0,
            };
            writeln!(
                out,
                "{},{},{},{},{:.2},{:.2},{:.3}",
                e.test_id,
                e.feature_kind,
                e.n_per_class,
                e.testing_load,
                e.mean_rate_pct(),
                e.stddev_pct(),
                seconds
            )
            .unwrap();
        }
        out
    }

    /// Aligned-text tables: one block per (test, feature kind), rows over
    /// n, one `LoadX(rate)` cell per testing load, and a trailing seconds
    /// column.
    pub fn to_text(&self, timing: TimingMode) -> String {
        let mut out = String::new();
        let mut blocks: Vec<(u32, FeatureKind)> = self
            .entries
            .iter()
            .map(|e| (e.test_id, e.feature_kind))
            .collect();
        blocks.dedup();

        for (test_id, kind) in blocks {
            let block: Vec<&ReportEntry> = self
                .entries
                .iter()
                .filter(|e| e.test_id == test_id && e.feature_kind == kind)
                .collect();
            let first = block[0];
            writeln!(
                out,
                "# Test {test_id} | feature={kind} | fault_size={} | training={}",
                first.fault_size, first.training_load
            )
            .unwrap();

            let mut loads: Vec<LoadCondition> = Vec::new();
            for e in &block {
                if !loads.contains(&e.testing_load) {
                    loads.push(e.testing_load);
                }
            }
            let mut header = format!("{:<6}", "n");
            for (i, _) in loads.iter().enumerate() {
                header.push_str(&format!("{:<16}", format!("Test{}(%)", i + 1)));
            }
            header.push_str("T(s)");
            writeln!(out, "{header}").unwrap();

            let mut ns: Vec<usize> = block.iter().map(|e| e.n_per_class).collect();
            ns.sort_unstable();
            ns.dedup();
            for n in ns {
                let mut line = format!("{n:<6}");
                let mut secs = 0.0;
                for &l in &loads {
                    let e = block
                        .iter()
                        .find(|e| e.n_per_class == n && e.testing_load == l)
                        .expect("every (n, load) cell exists");
                    line.push_str(&format!(
                        "{:<16}",
                        format!("{}({:.2})", l, e.mean_rate_pct())
                    ));
                    secs = e.seconds;
                }
                let secs = match timing {
                    TimingMode::WallClock => secs,
                    TimingMode::Zeroed => 0.0,
                };
                writeln!(out, "{line}{secs:.1}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Serializes the full report (exact rates, confusion counts, timing).
    pub fn to_full_text(&self) -> String {
        let mut out = String::new();
        out.push_str("vibspec-report v1\n");
        out.push_str("classes");
        for c in &self.classes {
            out.push(' ');
            out.push_str(c.token());
        }
        out.push('\n');
        for e in &self.entries {
            writeln!(
                out,
                "entry test={} size={} train={} kind={} n={} load={} seconds={}",
                e.test_id,
                e.fault_size,
                e.training_load.index(),
                e.feature_kind,
                e.n_per_class,
                e.testing_load.index(),
                e.seconds
            )
            .unwrap();
            out.push_str("rates");
            for r in &e.per_rep_rates {
                out.push(' ');
                out.push_str(&r.to_string());
            }
            out.push('\n');
            out.push_str("confusion");
            for row in &e.confusion {
                for v in row {
                    out.push(' ');
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn save_full(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_full_text())?;
        Ok(())
    }

    pub fn parse_full(text: &str) -> Result<Report> {
        let mut lines = text.lines().enumerate().peekable();
        let fail = |lineno: usize, msg: String| Error::Config(format!("report line {}: {msg}", lineno + 1));

        match lines.next() {
            Some((_, l)) if l.trim() == "vibspec-report v1" => {}
            _ => return Err(Error::Config("not a vibspec report (bad header)".into())),
        }
        let classes = match lines.next() {
            Some((ln, l)) => {
                let mut it = l.split_whitespace();
                if it.next() != Some("classes") {
                    return Err(fail(ln, "expected classes line".into()));
                }
                it.map(FaultKind::parse).collect::<Result<Vec<_>>>()?
            }
            None => return Err(Error::Config("report truncated".into())),
        };
        let k = classes.len();

        let mut report = Report::new(classes);
        while let Some((ln, line)) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            let mut kv = std::collections::HashMap::new();
            let mut it = line.split_whitespace();
            if it.next() != Some("entry") {
                return Err(fail(ln, format!("expected entry line, got {line:?}")));
            }
            for part in it {
                let (key, value) = part
                    .split_once('=')
                    .ok_or_else(|| fail(ln, format!("bad field {part:?}")))?;
                kv.insert(key.to_string(), value.to_string());
            }
            let get = |key: &str| {
                kv.get(key)
                    .cloned()
                    .ok_or_else(|| fail(ln, format!("missing field {key}")))
            };
            let test_id: u32 = get("test")?.parse().map_err(|_| fail(ln, "bad test id".into()))?;
            let fault_size = FaultSize::parse(&get("size")?)?;
            let training_load = LoadCondition::new(
                get("train")?.parse().map_err(|_| fail(ln, "bad train load".into()))?,
            )?;
            let feature_kind = FeatureKind::parse(&get("kind")?)?;
            let n_per_class: usize = get("n")?.parse().map_err(|_| fail(ln, "bad n".into()))?;
            let testing_load = LoadCondition::new(
                get("load")?.parse().map_err(|_| fail(ln, "bad test load".into()))?,
            )?;
            let seconds: f64 = get("seconds")?
                .parse()
                .map_err(|_| fail(ln, "bad seconds".into()))?;

            let (rates_ln, rates_line) = lines
                .next()
                .ok_or_else(|| Error::Config("report truncated in rates".into()))?;
            let mut it = rates_line.split_whitespace();
            if it.next() != Some("rates") {
                return Err(fail(rates_ln, "expected rates line".into()));
            }
            let per_rep_rates: Vec<f64> = it
                .map(|v| v.parse().map_err(|_| fail(rates_ln, format!("bad rate {v:?}"))))
                .collect::<Result<_>>()?;

            let (conf_ln, conf_line) = lines
                .next()
                .ok_or_else(|| Error::Config("report truncated in confusion".into()))?;
            let mut it = conf_line.split_whitespace();
            if it.next() != Some("confusion") {
                return Err(fail(conf_ln, "expected confusion line".into()));
            }
            let flat: Vec<u64> = it
                .map(|v| v.parse().map_err(|_| fail(conf_ln, format!("bad count {v:?}"))))
                .collect::<Result<_>>()?;
            if flat.len() != k * k {
                return Err(fail(conf_ln, format!("expected {} counts, got {}", k * k, flat.len())));
            }
            let confusion: Vec<Vec<u64>> = flat.chunks(k).map(|c| c.to_vec()).collect();

            report.entries.push(ReportEntry {
                test_id,
                fault_size,
                training_load,
                feature_kind,
                n_per_class,
                testing_load,
                per_rep_rates,
                confusion,
                seconds,
            });
        }
        Ok(report)
    }

    pub fn load_full(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse_full(&text)
    }
}
