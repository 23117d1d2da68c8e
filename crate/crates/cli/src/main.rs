use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kinlog_cli::commands::{self, CliError};
use kinlog_cli::lemmas::{check_lemmas, Field};
use kinlog_cli::mm::mm_demo;
use kinlog_cli::report::{SuiteReport, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
use kinlog_core::scalar::Rat;

const DEFAULT_CORPUS: &str = include_str!("../data/corpus.kl");

#[derive(Parser)]
#[command(name = "kinlog", version, about = "Classical and relativistic kinematics, checked exactly")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the transformation lemmas on random exact instances
    CheckLemmas {
        /// suite or case name, e.g. rad, xy or cannon-poincare
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// instances per case
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long, default_value = "exact", value_parser = ["exact", "f64"])]
        field: String,
        #[arg(long)]
        json: bool,
    },
    /// Translate a file of formulas
    Translate {
        /// tr, tr+, tr+inv, tr*, tr*inv or a chain such as tr*∘tr+
        #[arg(long)]
        translator: String,
        /// merge the ether quantifiers introduced by tr
        #[arg(long)]
        simplify: bool,
        input: PathBuf,
        output: PathBuf,
    },
    /// Evaluate the translated axioms of a theory in a model
    CheckInterpretation {
        /// ck, ck-stl, sr, sr-e, ck-composed or a JSON spec file
        #[arg(long)]
        model: String,
        /// the translator whose source theory is checked
        #[arg(long)]
        direction: String,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Compare atoms with their images under a translation round trip
    Roundtrip {
        #[arg(long)]
        model: String,
        /// plus, star or composed
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Michelson–Morley in relativistic and classical coordinates
    MmDemo {
        #[arg(long, default_value = "3/5")]
        v: String,
        /// arm length
        #[arg(long = "L", default_value = "1")]
        l: String,
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Check that merging ether quantifiers keeps verdicts on a corpus
    CheckSimplifier {
        /// relativistic formulas, one or more per file; the bundled corpus by default
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        budget: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn rat(flag: &str, s: &str) -> Result<Rat, CliError> {
    s.parse().map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn emit(report: &SuiteReport, json: bool) -> i32 {
    let text = if json { report.to_json() + "\n" } else { report.table() };
    let _ = std::io::stdout().write_all(text.as_bytes());
    report.exit_code()
}

fn run(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::CheckLemmas { filter, seed, budget, field, json } => {
            let field = Field::from_name(&field).ok_or_else(|| CliError::Usage(format!("unknown field {field}")))?;
            let report = check_lemmas(filter.as_deref(), seed, budget, field).map_err(CliError::Usage)?;
            Ok(emit(&report, json))
        }
        Command::Translate { translator, simplify, input, output } => {
            let n = commands::cmd_translate(&input, &output, &translator, simplify)?;
            eprintln!("translated {n} formulas into {}", output.display());
            Ok(EXIT_PASS)
        }
        Command::CheckInterpretation { model, direction, budget, seed, json } => {
            Ok(emit(&commands::cmd_check_interpretation(&model, &direction, budget, seed)?, json))
        }
        Command::Roundtrip { model, pair, samples, seed, json } => {
            Ok(emit(&commands::cmd_roundtrip(&model, &pair, samples, seed)?, json))
        }
        Command::MmDemo { v, l, c, svg, csv } => {
            let demo = mm_demo(&rat("v", &v)?, &rat("L", &l)?, &rat("c", &c)?).map_err(|e| CliError::Usage(e.to_string()))?;
            print!("{}", demo.table());
            if let Some(path) = svg {
                std::fs::write(path, demo.svg())?;
            }
            if let Some(path) = csv {
                std::fs::write(path, demo.csv())?;
            }
            Ok(if demo.all_ok() { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::CheckSimplifier { corpus, budget, seed, json } => {
            let text = match corpus {
                Some(path) => std::fs::read_to_string(path)?,
                None => DEFAULT_CORPUS.to_string(),
            };
            Ok(emit(&commands::check_simplifier(&text, budget, seed)?, json))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kinlog: {e}");
            EXIT_USAGE
        }
    };
    ExitCode::from(code as u8)
}
