//! Command-line front end. Exit codes: 0 success, 1 check failure, 2 input
//! error, 3 cap exceeded.

use std::fmt::Debug;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::collapsing::{self, WitnessRecord};
use crate::endo::{self, EndoError, DEFAULT_CAP};
use crate::green::{self, Format, MonoidTable};
use crate::gset::GSet;
use crate::io::{self, InputError};
use crate::verify::{self, CheckId, CheckReport, CorpusSpec, Mutation, RunOptions, Status, VerifyError};

#[derive(Debug, Parser)]
#[command(name = "eqmonoid", version, about = "Equivariant transformation monoids of finite G-sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a G-set file against the group and action axioms.
    Validate { input: PathBuf },
    /// List every equivariant map in lexicographic word order.
    Enumerate {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Print |End_G(X)| from the closed-form product.
    Count { input: PathBuf },
    /// Green's relations and the eggbox diagram.
    Green {
        input: PathBuf,
        #[arg(long, default_value = "json")]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Every elementary collapsing with its witness and type, as JSON.
    Collapsings {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the property checks on a corpus or a single G-set.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Largest monoid to materialize.
    #[arg(long, default_value_t = DEFAULT_CAP as u64)]
    pub cap: u64,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Corpus specification (JSON).
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub corpus: Option<PathBuf>,
    /// A single G-set (JSON).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `all` or a comma-separated list of check ids.
    #[arg(long, default_value = "all", value_parser = parse_checks)]
    pub checks: CheckList,
    /// JSON report destination.
    #[arg(long, visible_alias = "output")]
    pub report: Option<PathBuf>,
    /// Overrides the corpus seed.
    #[arg(long, conflicts_with = "input")]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_CAP as u64)]
    pub cap: u64,
    /// Corrupts the engine to exercise the harness.
    #[arg(long, hide = true)]
    pub mutate: Option<Mutation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckList(pub Vec<CheckId>);

fn parse_checks(s: &str) -> Result<CheckList, String> {
    CheckId::parse_list(s).map(CheckList).map_err(|e| e.to_string())
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

/// Variant name of an error enum, from its `Debug` form.
fn kind(e: &impl Debug) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric() && c != '_').next().unwrap_or_default().to_string()
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Failure {
        let message = match &e {
            InputError::Group(inner) => format!("{e} [{}]", kind(inner)),
            InputError::GSet(inner) => format!("{e} [{}]", kind(inner)),
            _ => e.to_string(),
        };
        Failure::input(message)
    }
}

impl From<EndoError> for Failure {
    fn from(e: EndoError) -> Failure {
        match e {
            EndoError::TooMany { .. } => Failure {
                code: 3,
                message: e.to_string(),
            },
            other => Failure::input(other.to_string()),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Failure {
        match e {
            VerifyError::MonoidTooLarge { .. } => Failure {
                code: 3,
                message: e.to_string(),
            },
            VerifyError::Input(inner) => inner.into(),
            VerifyError::Endo(inner) => inner.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load_gset(path: &Path) -> Result<GSet, Failure> {
    Ok(io::parse_gset(&read(path)?)?)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    let io_err = |e: std::io::Error| Failure::input(format!("cannot write output: {e}"));
    match output {
        Some(path) => fs::write(path, text).map_err(io_err),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io_err),
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

fn monoid(x: &GSet, cap: u64) -> Result<MonoidTable, Failure> {
    Ok(MonoidTable::new(x, cap as u128)?)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    passed: usize,
    failed: usize,
    skipped: usize,
    reports: &'a [CheckReport],
}

fn run_verify(args: &VerifyArgs) -> Result<bool, Failure> {
    let opts = RunOptions {
        cap: args.cap as u128,
        mutation: args.mutate,
        ..RunOptions::default()
    };
    let checks = &args.checks.0;
    let reports = match (&args.corpus, &args.input) {
        (Some(path), _) => {
            let mut spec = CorpusSpec::parse(&read(path)?)?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            verify::run_corpus(&spec, checks, &opts)?
        }
        (None, Some(path)) => verify::run_checks(&load_gset(path)?, checks, &opts)?,
        (None, None) => return Err(Failure::input("one of --corpus or --input is required")),
    };
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let summary = VerifyReport {
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skipped),
        reports: &reports,
    };
    let mut out = std::io::stdout().lock();
    for r in &reports {
        let status = match r.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skipped",
        };
        let _ = writeln!(out, "{:<4} gset {:<3} {status:<7} {} cases", r.check_id, r.gset, r.cases);
        if let Some(cex) = &r.counterexample {
            let _ = writeln!(out, "     {} / {}: {}", cex.check_id, cex.part, cex.message);
            let _ = writeln!(out, "     {}", serde_json::to_string(cex).expect("serializable"));
        }
    }
    let _ = writeln!(
        out,
        "{} passed, {} failed, {} skipped",
        summary.passed, summary.failed, summary.skipped
    );
    if let Some(path) = &args.report {
        emit(Some(path), &to_json(&summary))?;
    }
    Ok(summary.failed == 0)
}

/// Runs one command; `Ok(false)` means a property check failed.
pub fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Validate { input } => {
            let x = load_gset(input)?;
            println!(
                "valid; |G|={}, |X|={}, orbits={}",
                x.group().order(),
                x.n_points(),
                x.orbits().len()
            );
        }
        Command::Count { input } => {
            println!("{}", endo::count_endos(&load_gset(input)?));
        }
        Command::Enumerate { input, common } => {
            let x = load_gset(input)?;
            let maps = endo::enumerate_endos(&x, common.cap as u128)?;
            let text: String = maps.iter().map(|f| format!("{}\n", f.display(&x))).collect();
            emit(common.output.as_deref(), &text)?;
        }
        Command::Green { input, format, common } => {
            let x = load_gset(input)?;
            let m = monoid(&x, common.cap)?;
            let gs = green::green_structure(&m);
            let mut text = green::emit_eggbox(&m, &gs, *format);
            if !text.ends_with('\n') {
                text.push('\n');
            }
            emit(common.output.as_deref(), &text)?;
        }
        Command::Collapsings { input, common } => {
            let x = load_gset(input)?;
            let m = monoid(&x, common.cap)?;
            let records: Vec<WitnessRecord> = collapsing::all_collapsings(&m)
                .iter()
                .map(|entry| WitnessRecord::new(&m, entry))
                .collect();
            emit(common.output.as_deref(), &to_json(&records))?;
        }
        Command::Verify(args) => return run_verify(args),
    }
    Ok(true)
}

pub fn main_with(cli: Cli) -> ExitCode {
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_commands() {
        let cli = Cli::try_parse_from(["eqmonoid", "green", "x.json", "--format", "dot"]).unwrap();
        assert!(matches!(cli.command, Command::Green { format: Format::Dot, .. }));
        let cli = Cli::try_parse_from(["eqmonoid", "verify", "--input", "x.json", "--checks", "P1,P7"]).unwrap();
        let Command::Verify(args) = cli.command else { panic!() };
        assert_eq!(args.checks.0, vec![CheckId::P1, CheckId::P7]);
    }

    #[test]
    fn rejects_bad_flags() {
        assert!(Cli::try_parse_from(["eqmonoid", "green", "x.json", "--format", "svg"]).is_err());
        assert!(Cli::try_parse_from(["eqmonoid", "verify", "--input", "x", "--checks", "P0"]).is_err());
        assert!(Cli::try_parse_from(["eqmonoid", "verify"]).is_err());
        assert!(Cli::try_parse_from(["eqmonoid", "verify", "--input", "x", "--corpus", "y"]).is_err());
    }

    #[test]
    fn error_kinds() {
        let e = crate::gset::GSetError::CompatibilityViolated { g: 1, h: 1, x: 2 };
        assert_eq!(kind(&e), "CompatibilityViolated");
        assert_eq!(kind(&crate::gset::GSetError::NoPoints), "NoPoints");
    }
}
