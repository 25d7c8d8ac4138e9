//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal invariant violation, 2 input or usage
//! error, 3 oracle budget exceeded for every requested size, 4 certificate
//! re-check failure. Every failure prints one `error[CODE]: message` line
//! on stderr.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::format::{parse_vass, read_vass, FormatError};
use crate::geometry::{classify, Category};
use crate::inc::compute_inc;
use crate::oracle::{termination_complexity, to_csv, Budget, OracleEntry, RunLength};
use crate::poly::analyze;
use crate::report::{build_report, recheck, AnalysisReport, OracleRow, ReportError};
use crate::scc::scc_decompose;
use crate::vass::Vass;

#[derive(Debug, Parser)]
#[command(name = "vassc", version, about = "Termination complexity of vector addition systems with states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full analysis report with certificates.
    Analyze {
        input: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Emit the JSON rendering instead of the text one.
        #[arg(long)]
        json: bool,
        /// Re-verify the report before emitting it.
        #[arg(long)]
        recheck: bool,
        /// Attach brute-force values of L(n) for these sizes.
        #[arg(long, value_name = "RANGE", value_parser = parse_sizes)]
        oracle: Option<Sizes>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Category of every strongly connected component.
    Classify { input: PathBuf },
    /// Effects of all short cycles, one per line.
    Inc {
        input: PathBuf,
        /// Append a cycle realizing each effect.
        #[arg(long)]
        witnesses: bool,
    },
    /// Brute-force L(n) as CSV.
    Simulate {
        input: PathBuf,
        /// `a` for one size, `a:b` for a, 2a, 4a, ... up to b, `a:b:s` for
        /// steps of s, or a comma-separated list.
        #[arg(long, value_name = "RANGE", value_parser = parse_sizes)]
        n: Sizes,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Re-verify a saved report against its input.
    Check { report: PathBuf, input: PathBuf },
}

#[derive(Debug, Args, Clone, Copy)]
pub struct BudgetArgs {
    /// Maximum distinct configurations kept by the oracle.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_configs: Option<u64>,
    /// Maximum successor expansions (default from VASS_BUDGET_STEPS).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_expansions: Option<u64>,
}

impl BudgetArgs {
    pub fn budget(&self) -> Budget {
        let mut b = Budget::from_env();
        if let Some(c) = self.max_configs {
            b.max_configs = c as usize;
        }
        if let Some(e) = self.max_expansions {
            b.max_expansions = e;
        }
        b
    }
}

/// Oracle sizes given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sizes(pub Vec<u64>);

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    parse_range(s).map(Sizes)
}

/// Parses `a`, `a:b` (doubling), `a:b:s` (arithmetic) or `a,b,c`.
pub fn parse_range(s: &str) -> Result<Vec<u64>, String> {
    let num = |x: &str| -> Result<u64, String> {
        match x.trim().parse::<u64>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(format!("`{x}` is not a positive integer")),
        }
    };
    if s.contains(',') {
        return s.split(',').map(num).collect();
    }
    let parts: Vec<&str> = s.split(':').collect();
    let out: Vec<u64> = match parts.as_slice() {
        [a] => vec![num(a)?],
        [a, b] => {
            let (mut x, b) = (num(a)?, num(b)?);
            let mut v = Vec::new();
            while x <= b {
                v.push(x);
                x = x.checked_mul(2).ok_or("range overflows")?;
            }
            v
        }
        [a, b, st] => {
            let (a, b, st) = (num(a)?, num(b)?, num(st)?);
            (a..=b).step_by(st as usize).collect()
        }
        _ => return Err(format!("`{s}` is not a range")),
    };
    if out.is_empty() {
        return Err(format!("range `{s}` is empty"));
    }
    Ok(out)
}

/// A failure with its exit code and diagnostic code.
#[derive(Debug)]
pub struct Failure {
    pub exit: i32,
    pub code: String,
    pub message: String,
}

impl Failure {
    fn new(exit: i32, code: &str, message: impl Into<String>) -> Self {
        Failure {
            exit,
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::new(2, e.code(), e.to_string())
    }
}

/// Reads the input, with `-` meaning the text format on stdin.
fn load(path: &std::path::Path) -> Result<Vass, Failure> {
    let parsed = if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut text)
            .map_err(|e| Failure::new(2, "Io", format!("cannot read stdin: {e}")))?;
        parse_vass(&text)
    } else {
        read_vass(path)
    };
    parsed.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::new(1, "Io", e.to_string())
}

fn oracle_entries(v: &Vass, ns: &[u64], budget: Budget) -> Vec<OracleEntry> {
    ns.iter().map(|&n| termination_complexity(v, n, budget)).collect()
}

fn category_line(c: &Category) -> String {
    match c {
        Category::A { .. } => "A".into(),
        Category::B { normal, .. } => format!("B normal={normal}"),
        Category::C(gn) => format!("C normal={}", gn.normal),
        Category::D { normal, .. } => format!("D normal={normal}"),
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze {
            input,
            output,
            json,
            recheck: want_recheck,
            oracle,
            budget,
        } => {
            let v = load(&input)?;
            let analysis = analyze(&v).map_err(|e| Failure::new(1, e.code(), e.to_string()))?;
            let mut report = build_report(&v, &analysis);
            if let Some(Sizes(ns)) = oracle {
                report.oracle = oracle_entries(&v, &ns, budget.budget())
                    .into_iter()
                    .map(|e| OracleRow {
                        n: e.n,
                        length: e.value.finite(),
                        status: e.value.status().to_string(),
                    })
                    .collect();
            }
            if want_recheck {
                let failures = recheck(&report, &v).map_err(|e| Failure::new(1, e.code(), e.to_string()))?;
                if let Some(first) = failures.first() {
                    return Err(Failure::new(1, "Internal", format!("fresh report fails re-check: {first}")));
                }
            }
            let text = if json { report.to_json() } else { report.to_text() };
            match output {
                Some(p) => std::fs::write(&p, text).map_err(io_failure)?,
                None => out.write_all(text.as_bytes()).map_err(io_failure)?,
            }
        }
        Command::Classify { input } => {
            let v = load(&input)?;
            for comp in scc_decompose(&v) {
                let inc = compute_inc(&comp.vass, false);
                writeln!(out, "SCC {}: {}", comp.label(&v), category_line(&classify(&inc))).map_err(io_failure)?;
            }
        }
        Command::Inc { input, witnesses } => {
            let v = load(&input)?;
            let inc = compute_inc(&v, witnesses);
            for e in inc.effects() {
                match inc.witness(e) {
                    Some(w) if witnesses => writeln!(out, "{e} {}", w.render(&v)),
                    _ => writeln!(out, "{e}"),
                }
                .map_err(io_failure)?;
            }
        }
        Command::Simulate { input, n, budget } => {
            let v = load(&input)?;
            let entries = oracle_entries(&v, &n.0, budget.budget());
            out.write_all(to_csv(&entries).as_bytes()).map_err(io_failure)?;
            if entries.iter().all(|e| e.value == RunLength::BudgetExceeded) {
                return Err(Failure::new(3, "BudgetExceeded", "oracle budget exceeded for every requested n"));
            }
        }
        Command::Check { report, input } => {
            let v = load(&input)?;
            let text = std::fs::read_to_string(&report)
                .map_err(|e| Failure::new(2, "Io", format!("cannot read {}: {e}", report.display())))?;
            let parsed = if report.extension().is_some_and(|e| e == "json") {
                AnalysisReport::from_json(&text)
            } else {
                AnalysisReport::from_text(&text)
            }
            .map_err(|e| Failure::new(2, e.code(), format!("{}: {e}", report.display())))?;
            match recheck(&parsed, &v) {
                Err(e @ ReportError::FingerprintMismatch { .. }) => return Err(Failure::new(4, e.code(), e.to_string())),
                Err(e) => return Err(Failure::new(2, e.code(), e.to_string())),
                Ok(failures) if failures.is_empty() => writeln!(out, "ok").map_err(io_failure)?,
                Ok(failures) => {
                    for f in &failures {
                        writeln!(out, "failed: {f}").map_err(io_failure)?;
                    }
                    return Err(Failure::new(
                        4,
                        "RecheckFailed",
                        format!("{} invariant(s) violated; first: {}", failures.len(), failures[0]),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let msg = e.to_string();
            let summary: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            let summary = summary.join(" ");
            let _ = writeln!(err, "error[Usage]: {}", summary.trim_start_matches("error: "));
            return 2;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let msg = f.message.replace('\n', " ");
            let _ = writeln!(err, "error[{}]: {msg}", f.code);
            f.exit
        }
    }
}
