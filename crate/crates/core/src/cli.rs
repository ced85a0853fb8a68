//! Command-line front end.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 bad flags, 3 I/O failure,
//! 4 integrity failure, 5 benchmark tolerance failure.

use crate::bench::{self, BaselineRow};
use crate::codec::{compress, decompress};
use crate::model::{ModelConfig, Variant, MAX_DEPTH};
use crate::oracle;
use clap::{CommandFactory, Parser, Subcommand};
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INTEGRITY: i32 = 4;
pub const EXIT_TOLERANCE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "cts", version, about = "Context tree weighting and switching compressor")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Compress a file.
    Compress {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// ctw, cts or cts-star.
        #[arg(long, default_value = "cts")]
        variant: Variant,
        #[arg(long, default_value_t = 48, value_parser = parse_depth)]
        depth: usize,
    },
    /// Decompress a file; the model is read from the header.
    Decompress {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run configurations over every file in a directory.
    Bench {
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated VARIANT:DEPTH pairs, e.g. ctw:48,cts:48.
        #[arg(long, value_delimiter = ',', value_parser = parse_config, default_value = "ctw:48,cts:48")]
        configs: Vec<ModelConfig>,
        /// Compare against a baseline and fail when any file is off.
        #[arg(long)]
        check: bool,
        /// Baseline CSV (file,variant,depth,bpb); the bundled published
        /// values when omitted.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        tolerance: f64,
        /// Write the results CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Worker threads.
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// Check the incremental models against brute-force enumeration.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn parse_depth(s: &str) -> Result<usize, String> {
    let d: usize = s.parse().map_err(|e| format!("{e}"))?;
    if d > MAX_DEPTH {
        return Err(format!("depth must be at most {MAX_DEPTH}"));
    }
    Ok(d)
}

/// Parses `VARIANT:DEPTH`.
pub fn parse_config(s: &str) -> Result<ModelConfig, String> {
    let (v, d) = s
        .split_once(':')
        .ok_or_else(|| format!("expected VARIANT:DEPTH, got {s:?}"))?;
    let variant: Variant = v.parse().map_err(|e| format!("{e}"))?;
    ModelConfig::new(variant, parse_depth(d)?).map_err(|e| e.to_string())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return EXIT_OK;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return EXIT_USAGE;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            eprintln!("cts: {msg}");
            code
        }
    }
}

struct Failure(i32, String);

fn io_fail(what: &str, path: &Path, e: io::Error) -> Failure {
    Failure(EXIT_IO, format!("{what} {}: {e}", path.display()))
}

fn execute(command: CliCommand) -> Result<(), Failure> {
    match command {
        CliCommand::Compress {
            input,
            output,
            variant,
            depth,
        } => {
            let config = ModelConfig::new(variant, depth).map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
            let data = fs::read(&input).map_err(|e| io_fail("cannot read", &input, e))?;
            write_atomic(&output, &compress(&data, &config))
        }
        CliCommand::Decompress { input, output } => {
            let data = fs::read(&input).map_err(|e| io_fail("cannot read", &input, e))?;
            let plain = decompress(&data).map_err(|e| Failure(EXIT_INTEGRITY, format!("{}: {e}", input.display())))?;
            write_atomic(&output, &plain)
        }
        CliCommand::Bench {
            dir,
            configs,
            check,
            baseline,
            tolerance,
            csv,
            jobs,
        } => run_bench(&dir, &configs, check, baseline.as_deref(), tolerance, csv.as_deref(), jobs),
        CliCommand::Selftest { seed } => {
            let checks = oracle::selftest(seed);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(Failure(EXIT_SELFTEST, "self-test failed".into()))
            }
        }
    }
}

fn run_bench(
    dir: &Path,
    configs: &[ModelConfig],
    check: bool,
    baseline: Option<&Path>,
    tolerance: f64,
    csv_path: Option<&Path>,
    jobs: usize,
) -> Result<(), Failure> {
    let baseline: Vec<BaselineRow> = match baseline {
        Some(p) => {
            let f = fs::File::open(p).map_err(|e| io_fail("cannot open", p, e))?;
            bench::parse_baseline(f).map_err(|e| Failure(EXIT_IO, format!("bad baseline {}: {e}", p.display())))?
        }
        None => bench::published_baseline(),
    };
    let results = bench::run_corpus(dir, configs, jobs).map_err(|e| io_fail("cannot list", dir, e))?;
    print!("{}", bench::format_table(&results));
    let mut csv_bytes = Vec::new();
    bench::write_csv(&results, &mut csv_bytes).map_err(|e| Failure(EXIT_IO, e.to_string()))?;
    match csv_path {
        Some(p) => write_atomic(p, &csv_bytes)?,
        None => {
            println!();
            io::stdout()
                .write_all(&csv_bytes)
                .map_err(|e| Failure(EXIT_IO, e.to_string()))?;
        }
    }
    if check {
        let report = bench::compare_baseline(&results, &baseline, tolerance);
        println!();
        print!("{}", report.format());
        if !report.passed() {
            return Err(Failure(EXIT_TOLERANCE, format!("baseline check failed (tolerance {tolerance})")));
        }
    } else if results.iter().any(|r| !r.ok()) {
        return Err(Failure(EXIT_INTEGRITY, "some files failed".into()));
    }
    Ok(())
}

/// Writes next to `path` and renames into place, so a failure never leaves
/// a partial file.
fn write_atomic(path: &Path, data: &[u8]) -> Result<(), Failure> {
    let name = path.file_name().ok_or_else(|| Failure(EXIT_IO, format!("bad output path {}", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::write(&tmp, data).and_then(|()| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_fail("cannot write", path, e));
    }
    Ok(())
}
