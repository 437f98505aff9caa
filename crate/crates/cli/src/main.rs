//! `cdenlab`: batch experiment runner and lemma checker.

mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cdenlab::rng::DEFAULT_SEED;

#[derive(Parser, Debug)]
#[command(name = "cdenlab", version, about = "Certified-deniability games and lemma checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every lemma suite and report violations.
    Lemmas(Common),
    /// Run one security game.
    Experiment(Common),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Game {
    AdpDel,
    DoubleExt,
    Dph,
    Soundness,
    Deniability,
    EvidenceDemo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("bad seed {s:?}: {e}"))
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_enum)]
    pub game: Option<Game>,
    /// fs-nizk | fs-sig for deniability, ot | mult for soundness.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub strategy: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub lambda: usize,
    #[arg(long, default_value_t = 8)]
    pub lambda_x: usize,
    #[arg(long, default_value_t = 6)]
    pub reps: usize,
    #[arg(long, default_value_t = 8)]
    pub ell: usize,
    #[arg(long)]
    pub trials: Option<usize>,
    /// tagged | untagged, for double-ext.
    #[arg(long, default_value = "tagged")]
    pub variant: String,
    /// honest-verify | always-accept, for soundness.
    #[arg(long, default_value = "honest-verify")]
    pub verifier: String,
    /// Decimal or 0x-prefixed hex.
    #[arg(long, env = "CDENLAB_SEED", default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Record wall-clock time; the report is then no longer reproducible.
    #[arg(long)]
    pub timing: bool,
    /// For `lemmas`, list every instance after the summaries.
    #[arg(long)]
    pub per_instance: bool,
}

/// Usage errors exit with 2, everything else with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<cdenlab::games::GameError> for CliError {
    fn from(e: cdenlab::games::GameError) -> Self {
        use cdenlab::fs_cden::FsError;
        use cdenlab::games::GameError as G;
        use cdenlab::sig_cden::SigError;
        match e {
            G::Params(_) | G::Unknown(_) | G::Fs(FsError::Lambda(_)) | G::Sig(SigError::Params(_)) => {
                Self::Usage(e.to_string())
            }
            G::Sig(SigError::Fs(FsError::Lambda(_))) => Self::Usage(e.to_string()),
            other => Self::Failed(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Lemmas(c) => run::cmd_lemmas(c),
        Command::Experiment(c) => run::cmd_experiment(c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failed(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
