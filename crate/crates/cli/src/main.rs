//! `ncpick`: JSON in, certificates and realizations out.
//!
//! Exit status 0 means success (feasible, member, true), 1 a well-posed
//! negative answer and 2 an input or runtime error. stdout carries exactly
//! one JSON document; diagnostics go to stderr.

mod commands;

use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "ncpick", version, about = "Noncommutative Schur-Agler interpolation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    flags: Flags,
}

#[derive(clap::Args, Clone, Debug)]
pub struct Flags {
    /// PSD / comparison tolerance
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive_f64)]
    pub tol: f64,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Bound on the total multiplicity in envelope searches
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_multiplicity: Option<u64>,

    /// Amplification level for Choi certificates
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub amplification: Option<u64>,

    /// Truncation length for okaweil
    #[arg(long = "truncation-L", global = true)]
    pub truncation_l: Option<u64>,

    /// Number of random samples (contractivity checks, okaweil, refuter trials)
    #[arg(long, global = true, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
}

impl Flags {
    fn to_json(&self) -> Value {
        json!({
            "tol": self.tol,
            "seed": self.seed,
            "max_multiplicity": self.max_multiplicity,
            "amplification": self.amplification,
            "truncation_L": self.truncation_l,
            "samples": self.samples,
        })
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err("must be a positive finite number".into())
    }
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Evaluate an nc polynomial at a matrix tuple
    Eval(Input),
    /// Test ‖Q(Z)‖ < 1
    DomainCheck(Input),
    /// Envelope membership with an intertwiner witness
    Envelope(EnvelopeArgs),
    /// Single-variable nc-Zariski closure membership
    Zariski(Input),
    /// Complete positivity of the Szegő kernel on a finite set
    CpCheck(Input),
    /// Pick certificate for an interpolation problem
    PickCheck(Input),
    /// Certify and, when feasible, synthesize an interpolant
    PickSolve(Input),
    /// Left-tangential operator-argument certificate
    LtoaCheck(Input),
    /// Stein-dominance certificate (and optional strict-Stein refuter)
    SteinCheck(Input),
    /// Evaluate the transfer function of a colligation
    RealizeEval(Input),
    /// Polynomial truncation and its uniform error
    Okaweil(Input),
    /// Run built-in sanity checks
    Selftest,
}

#[derive(clap::Args, Debug, Clone)]
struct Input {
    /// JSON input file; stdin when absent or "-"
    input: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Clone)]
struct EnvelopeArgs {
    input: Option<PathBuf>,

    /// Which envelope to test
    #[arg(long, value_enum, default_value_t = EnvelopeMode::Full)]
    mode: EnvelopeMode,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvelopeMode {
    Nc,
    Similarity,
    Full,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::DomainCheck(_) => "domain-check",
            Command::Envelope(_) => "envelope",
            Command::Zariski(_) => "zariski",
            Command::CpCheck(_) => "cp-check",
            Command::PickCheck(_) => "pick-check",
            Command::PickSolve(_) => "pick-solve",
            Command::LtoaCheck(_) => "ltoa-check",
            Command::SteinCheck(_) => "stein-check",
            Command::RealizeEval(_) => "realize-eval",
            Command::Okaweil(_) => "okaweil",
            Command::Selftest => "selftest",
        }
    }

    fn input_path(&self) -> Option<Option<&PathBuf>> {
        match self {
            Command::Selftest => None,
            Command::Envelope(a) => Some(a.input.as_ref()),
            Command::Eval(i)
            | Command::DomainCheck(i)
            | Command::Zariski(i)
            | Command::CpCheck(i)
            | Command::PickCheck(i)
            | Command::PickSolve(i)
            | Command::LtoaCheck(i)
            | Command::SteinCheck(i)
            | Command::RealizeEval(i)
            | Command::Okaweil(i) => Some(i.input.as_ref()),
        }
    }
}

/// Failure of a command: exit status 2 with an error object.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure { kind: "input", message: message.into() }
    }
}

impl From<ncpick::Error> for Failure {
    fn from(e: ncpick::Error) -> Self {
        use ncpick::Error as E;
        let kind = match e {
            E::Dimension(_) | E::LetterOutOfRange { .. } | E::InvalidArgument(_) | E::NotHermitian(_) => "input",
            E::OutsideDomain { .. } => "domain",
            E::InconsistentConstraints(_) => "constraints",
            E::WordCap { .. } => "word_cap",
            _ => "numerical",
        };
        Failure { kind, message: e.to_string() }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::input(format!("bad input: {e}"))
    }
}

/// Successful command result: `positive` selects exit status 0 or 1.
pub struct Outcome {
    pub positive: bool,
    pub body: serde_json::Map<String, Value>,
}

fn read_input(path: Option<&PathBuf>) -> Result<Value, Failure> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            text = std::fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
        }
        _ => {
            std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::input(format!("stdin: {e}")))?;
        }
    }
    Ok(serde_json::from_str(&text)?)
}

fn run(cmd: &Command, flags: &Flags) -> Result<Outcome, Failure> {
    let input = match cmd.input_path() {
        Some(path) => read_input(path)?,
        None => Value::Null,
    };
    match cmd {
        Command::Eval(_) => commands::eval(input),
        Command::DomainCheck(_) => commands::domain_check(input),
        Command::Envelope(a) => commands::envelope(input, a.mode, flags),
        Command::Zariski(_) => commands::zariski(input),
        Command::CpCheck(_) => commands::cp_check(input, flags),
        Command::PickCheck(_) => commands::pick_check(input, flags),
        Command::PickSolve(_) => commands::pick_solve(input, flags),
        Command::LtoaCheck(_) => commands::ltoa_check(input, flags),
        Command::SteinCheck(_) => commands::stein_check(input, flags),
        Command::RealizeEval(_) => commands::realize_eval(input),
        Command::Okaweil(_) => commands::okaweil(input, flags),
        Command::Selftest => commands::selftest(flags),
    }
}

fn emit(v: &Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    // a closed stdout is not worth a panic
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            emit(&json!({"v": SCHEMA_VERSION, "error": {"kind": "usage", "message": e.kind().to_string()}}));
            return ExitCode::from(2);
        }
    };
    let name = cli.command.name();
    match run(&cli.command, &cli.flags) {
        Ok(out) => {
            let mut doc = out.body;
            doc.insert("v".into(), json!(SCHEMA_VERSION));
            doc.insert("command".into(), json!(name));
            doc.insert("flags".into(), cli.flags.to_json());
            emit(&Value::Object(doc));
            eprintln!("ncpick {name}: {}", if out.positive { "positive" } else { "negative" });
            if out.positive {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("ncpick {name}: {}", f.message);
            emit(&json!({
                "v": SCHEMA_VERSION,
                "command": name,
                "flags": cli.flags.to_json(),
                "error": {"kind": f.kind, "message": f.message},
            }));
            ExitCode::from(2)
        }
    }
}
