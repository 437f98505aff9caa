use std::io::Write;
use std::time::Duration;

use serde::Serialize;

use cdenlab::games::{BoundReport, GameStats};

use crate::run::RunConfig;
use crate::{CliError, Common, Format};

/// Everything a command hands to the writer.
pub struct Output {
    pub results: Vec<serde_json::Value>,
    /// Game statistics, projected one row per trial in CSV.
    pub stats: Vec<GameStats>,
    /// Lemma instances, one CSV row each.
    pub reports: Vec<BoundReport>,
    /// One-line summaries.
    pub lines: Vec<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    tool_version: &'static str,
    config: &'a RunConfig,
    results: &'a [serde_json::Value],
    wall_time_ms: Option<u64>,
}

#[derive(Serialize)]
struct TrialRow<'a> {
    game: &'a str,
    strategy: &'a str,
    seed: u64,
    trial: usize,
    win: bool,
    prob: Option<f64>,
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

fn csv_bytes(out: &Output) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if out.stats.is_empty() {
        for r in &out.reports {
            w.serialize(r).map_err(failed)?;
        }
    } else {
        for s in &out.stats {
            for (trial, o) in s.outcomes.iter().enumerate() {
                let row =
                    TrialRow { game: &s.game, strategy: &s.strategy, seed: s.seed, trial, win: o.win, prob: o.prob };
                w.serialize(row).map_err(failed)?;
            }
        }
    }
    w.into_inner().map_err(failed)
}

/// Writes the report to `--out` (summary lines on stdout) or to stdout
/// (summary lines on stderr).
pub fn emit(c: &Common, cfg: &RunConfig, out: Output, elapsed: Option<Duration>) -> Result<(), CliError> {
    let body = match c.format {
        Format::Json => {
            let report = Report {
                tool_version: env!("CARGO_PKG_VERSION"),
                config: cfg,
                results: &out.results,
                wall_time_ms: elapsed.map(|d| d.as_millis() as u64),
            };
            let mut b = serde_json::to_vec_pretty(&report).map_err(failed)?;
            b.push(b'\n');
            b
        }
        Format::Csv => csv_bytes(&out)?,
    };
    let summary = out.lines.join("\n");
    match &c.out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| failed(format!("{}: {e}", path.display())))?;
            println!("{summary}");
        }
        None => {
            std::io::stdout().write_all(&body).map_err(failed)?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}
