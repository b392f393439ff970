//! `artlab`: question banks, grading, dataset preparation, training and
//! reporting from one binary.

mod commands;
mod config;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "artlab", version, about = "Algorithmic reasoning tasks: author, grade, predict")]
struct Cli {
    /// INI file with `[section]` headers; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Question bank tools.
    #[command(subcommand)]
    Bank(BankCommand),
    /// Mark student responses against a bank.
    Grade(GradeArgs),
    /// Join objective and code-writing marks and anonymise student ids.
    Prepare(PrepareArgs),
    /// Split, cross-validate, fit and evaluate.
    Train(TrainArgs),
    /// Evaluate a saved model on a scores file.
    Report(ReportArgs),
    /// Write a synthetic scores file.
    Synth(SynthArgs),
}

#[derive(Subcommand, Debug)]
enum BankCommand {
    /// Parse every question and derive every key.
    Validate { bank: PathBuf },
    /// Print or write the answer keys.
    Keygen {
        bank: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct GradeArgs {
    #[arg(long)]
    pub bank: Option<PathBuf>,
    /// `student_id,question_id,answer` rows.
    #[arg(long)]
    pub responses: Option<PathBuf>,
    /// Objective scores file; diagnostics go to `<out>.diagnostics`.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PrepareArgs {
    #[arg(long)]
    pub objective: Option<PathBuf>,
    /// Instructor file, `student_id,cw1,cw2,cw3`.
    #[arg(long)]
    pub code_writing: Option<PathBuf>,
    #[arg(long)]
    pub salt: Option<String>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Test fractions, e.g. `0.25,0.3`.
    #[arg(long)]
    pub splits: Option<String>,
    /// `rf`, `lr` or both, comma separated.
    #[arg(long)]
    pub models: Option<String>,
    /// Code-writing question used as the label (1 to 3).
    #[arg(long)]
    pub target: Option<usize>,
    /// Cross-validation folds.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Question kinds as letters, e.g. `TTTDDDCCCAAA`.
    #[arg(long, conflicts_with = "bank")]
    pub kinds: Option<String>,
    /// Take question kinds from this bank.
    #[arg(long)]
    pub bank: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<usize>,
    #[arg(long, conflicts_with = "bank")]
    pub kinds: Option<String>,
    #[arg(long)]
    pub bank: Option<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub students: Option<usize>,
    /// Kind weights as `tracing,detection,comparison,analysis`.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub weak: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::load(cli.config.as_deref()).and_then(|ini| match cli.command {
        Command::Bank(BankCommand::Validate { bank }) => commands::bank_validate(&bank),
        Command::Bank(BankCommand::Keygen { bank, out }) => commands::bank_keygen(&bank, out.as_deref()),
        Command::Grade(args) => commands::grade(&args, &ini),
        Command::Prepare(args) => commands::prepare(&args, &ini),
        Command::Train(args) => commands::train(&args, &ini),
        Command::Report(args) => commands::report(&args, &ini),
        Command::Synth(args) => commands::synth(&args, &ini),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
