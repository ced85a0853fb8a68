//! Corpus benchmark harness.
//!
//! Every (file, configuration) pair is compressed, decompressed and
//! compared byte for byte before its size is recorded. Files run in
//! parallel, one model per task.

use crate::codec::{compress, decompress};
use crate::model::{ModelConfig, Variant};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// The 18-file Calgary set, in the published column order.
pub const CALGARY_FILES: [&str; 18] = [
    "bib", "book1", "book2", "geo", "news", "obj1", "obj2", "paper1", "paper2", "paper3", "paper4",
    "paper5", "paper6", "pic", "progc", "progl", "progp", "trans",
];

/// Published bits-per-byte figures for ctw/48, cts/48, cts-star/48 and
/// cts-star/160.
pub const PUBLISHED_CSV: &str = include_str!("../data/calgary_published.csv");

/// Column header of the results CSV.
pub const CSV_COLUMNS: [&str; 7] = ["file", "variant", "depth", "input_bytes", "output_bytes", "bpb", "elapsed_s"];

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusResult {
    pub file: String,
    pub variant: Variant,
    pub depth: usize,
    pub input_bytes: u64,
    /// Size of the whole compressed stream, header included.
    pub output_bytes: u64,
    pub elapsed_s: f64,
    /// Set when the file could not be read or failed to round-trip.
    pub error: Option<String>,
}

impl CorpusResult {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    /// 8 · output / input; `None` for failures and empty inputs.
    pub fn bpb(&self) -> Option<f64> {
        (self.ok() && self.input_bytes > 0).then(|| 8.0 * self.output_bytes as f64 / self.input_bytes as f64)
    }
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    file: &'a str,
    variant: &'static str,
    depth: usize,
    input_bytes: u64,
    output_bytes: Option<u64>,
    bpb: Option<f64>,
    elapsed_s: f64,
}

/// Regular files directly inside `dir`, sorted by name.
pub fn list_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        if entry.file_type()?.is_file() {
            files.push(entry.path());
        }
    }
    files.sort();
    Ok(files)
}

/// Compresses, verifies and measures a single in-memory input.
pub fn run_one(name: &str, data: &[u8], config: &ModelConfig) -> CorpusResult {
    let start = Instant::now();
    let packed = compress(data, config);
    let error = match decompress(&packed) {
        Ok(out) if out == data => None,
        Ok(_) => Some("round trip mismatch".to_string()),
        Err(e) => Some(format!("round trip failed: {e}")),
    };
    CorpusResult {
        file: name.to_string(),
        variant: config.variant(),
        depth: config.depth(),
        input_bytes: data.len() as u64,
        output_bytes: packed.len() as u64,
        elapsed_s: start.elapsed().as_secs_f64(),
        error,
    }
}

fn run_path(path: &Path, config: &ModelConfig) -> CorpusResult {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    match std::fs::read(path) {
        Ok(data) => run_one(&name, &data, config),
        Err(e) => CorpusResult {
            file: name,
            variant: config.variant(),
            depth: config.depth(),
            input_bytes: 0,
            output_bytes: 0,
            elapsed_s: 0.0,
            error: Some(format!("read failed: {e}")),
        },
    }
}

/// Runs every configuration over every regular file in `dir` using up to
/// `jobs` threads. Results are sorted by file, then variant and depth.
pub fn run_corpus(dir: &Path, configs: &[ModelConfig], jobs: usize) -> io::Result<Vec<CorpusResult>> {
    let files = list_files(dir)?;
    run_files(&files, configs, jobs)
}

/// [`run_corpus`] over an explicit file list.
pub fn run_files(files: &[PathBuf], configs: &[ModelConfig], jobs: usize) -> io::Result<Vec<CorpusResult>> {
    let tasks: Vec<(&PathBuf, &ModelConfig)> = files
        .iter()
        .flat_map(|f| configs.iter().map(move |c| (f, c)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(io::Error::other)?;
    let mut results: Vec<CorpusResult> = pool.install(|| tasks.par_iter().map(|(f, c)| run_path(f, c)).collect());
    results.sort_by(|a, b| {
        (&a.file, a.variant.code(), a.depth).cmp(&(&b.file, b.variant.code(), b.depth))
    });
    Ok(results)
}

/// Writes results with the columns in [`CSV_COLUMNS`]. Failure rows leave
/// `output_bytes` and `bpb` empty.
pub fn write_csv<W: io::Write>(results: &[CorpusResult], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(CsvRow {
            file: &r.file,
            variant: r.variant.name(),
            depth: r.depth,
            input_bytes: r.input_bytes,
            output_bytes: r.ok().then_some(r.output_bytes),
            bpb: r.bpb().map(|b| (b * 1e4).round() / 1e4),
            elapsed_s: (r.elapsed_s * 1e3).round() / 1e3,
        })?;
    }
    if results.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

/// A fixed-width table with one row per result and a weighted average per
/// configuration.
pub fn format_table(results: &[CorpusResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<10} {:<9} {:>5} {:>10} {:>10} {:>7} {:>9}",
        "file", "variant", "depth", "input", "output", "bpb", "time(s)"
    );
    for r in results {
        match (&r.error, r.bpb()) {
            (Some(e), _) => {
                let _ = writeln!(s, "{:<10} {:<9} {:>5} FAILED: {e}", r.file, r.variant.name(), r.depth);
            }
            (None, bpb) => {
                let bpb = bpb.map_or_else(|| "-".to_string(), |b| format!("{b:.3}"));
                let _ = writeln!(
                    s,
                    "{:<10} {:<9} {:>5} {:>10} {:>10} {:>7} {:>9.2}",
                    r.file,
                    r.variant.name(),
                    r.depth,
                    r.input_bytes,
                    r.output_bytes,
                    bpb,
                    r.elapsed_s
                );
            }
        }
    }
    for (variant, depth) in configurations(results) {
        let group: Vec<CorpusResult> = results
            .iter()
            .filter(|r| r.variant == variant && r.depth == depth)
            .cloned()
            .collect();
        if let Some(avg) = weighted_average(&group) {
            let _ = writeln!(s, "weighted average {:<9} D={:<4} {avg:.3}", variant.name(), depth);
        }
    }
    s
}

/// Distinct (variant, depth) pairs in first-seen order.
pub fn configurations(results: &[CorpusResult]) -> Vec<(Variant, usize)> {
    let mut seen = Vec::new();
    for r in results {
        if !seen.contains(&(r.variant, r.depth)) {
            seen.push((r.variant, r.depth));
        }
    }
    seen
}

/// Σ output bits / Σ input bytes over successful rows.
pub fn weighted_average(results: &[CorpusResult]) -> Option<f64> {
    let (bits, bytes) = results
        .iter()
        .filter(|r| r.ok())
        .fold((0u64, 0u64), |(b, n), r| (b + 8 * r.output_bytes, n + r.input_bytes));
    (bytes > 0).then(|| bits as f64 / bytes as f64)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BaselineRow {
    pub file: String,
    pub variant: String,
    pub depth: usize,
    pub bpb: f64,
}

pub fn parse_baseline<R: io::Read>(input: R) -> csv::Result<Vec<BaselineRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// The checked-in published baseline.
pub fn published_baseline() -> Vec<BaselineRow> {
    parse_baseline(PUBLISHED_CSV.as_bytes()).expect("bundled baseline parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineStatus {
    Pass,
    OutOfTolerance,
    /// No baseline row for this file and configuration.
    MissingBaseline,
    /// The run itself failed.
    RunFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineEntry {
    pub file: String,
    pub variant: Variant,
    pub depth: usize,
    pub measured: Option<f64>,
    pub expected: Option<f64>,
    pub status: BaselineStatus,
}

impl BaselineEntry {
    pub fn delta(&self) -> Option<f64> {
        Some(self.measured? - self.expected?)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BaselineReport {
    pub tolerance: f64,
    pub entries: Vec<BaselineEntry>,
}

impl BaselineReport {
    /// True when no row is out of tolerance and no run failed. Missing
    /// baseline rows are reported but do not fail the check.
    pub fn passed(&self) -> bool {
        self.entries
            .iter()
            .all(|e| matches!(e.status, BaselineStatus::Pass | BaselineStatus::MissingBaseline))
    }

    pub fn count(&self, status: BaselineStatus) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }

    pub fn format(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let f = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
            let _ = writeln!(
                s,
                "{:<10} {:<9} {:>4} measured {:>6} expected {:>6} delta {:>7} {:?}",
                e.file,
                e.variant.name(),
                e.depth,
                f(e.measured),
                f(e.expected),
                e.delta().map_or_else(|| "-".to_string(), |d| format!("{d:+.3}")),
                e.status
            );
        }
        s
    }
}

/// Compares each result against the baseline row for the same file,
/// variant and depth.
pub fn compare_baseline(results: &[CorpusResult], baseline: &[BaselineRow], tolerance: f64) -> BaselineReport {
    let entries = results
        .iter()
        .map(|r| {
            let expected = baseline
                .iter()
                .find(|b| b.file == r.file && b.variant == r.variant.name() && b.depth == r.depth)
                .map(|b| b.bpb);
            let measured = r.bpb();
            let status = match (measured, expected) {
                _ if !r.ok() => BaselineStatus::RunFailed,
                (_, None) => BaselineStatus::MissingBaseline,
                (Some(m), Some(e)) if (m - e).abs() <= tolerance => BaselineStatus::Pass,
                _ => BaselineStatus::OutOfTolerance,
            };
            BaselineEntry {
                file: r.file.clone(),
                variant: r.variant,
                depth: r.depth,
                measured,
                expected,
                status,
            }
        })
        .collect();
    BaselineReport { tolerance, entries }
}

/// Number of files where configuration `a` codes no larger than `b`, and
/// the number of files both ran on.
pub fn head_to_head(results: &[CorpusResult], a: (Variant, usize), b: (Variant, usize)) -> (usize, usize) {
    let find = |file: &str, (v, d): (Variant, usize)| {
        results
            .iter()
            .find(|r| r.file == file && r.variant == v && r.depth == d)
            .and_then(CorpusResult::bpb)
    };
    let mut wins = 0;
    let mut total = 0;
    for r in results.iter().filter(|r| (r.variant, r.depth) == a) {
        if let (Some(x), Some(y)) = (r.bpb(), find(&r.file, b)) {
            total += 1;
            if x <= y {
                wins += 1;
            }
        }
    }
    (wins, total)
}
