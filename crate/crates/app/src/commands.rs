//! The work behind each subcommand, kept free of argument parsing so tests
//! can call it directly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mcq_core::eval::{build_report, load_ratings, EvalError, EvalReport, LoadError};
use mcq_core::export::{ExportError, ExporterRegistry};
use mcq_core::gateway::{Gateway, GatewayError};
use mcq_core::iwf::{is_acceptable, Flag, IwfConfig, IwfCritic};
use mcq_core::language::{readability, readability_gate, ReadabilityError};
use mcq_core::mcq::{bank_to_string, load_bank, BankEntry, BankError, GenerationRequest, GradeBand, Mcq};
use mcq_core::supervisor::{BatchOutcome, Supervisor};
use serde::Serialize;
use thiserror::Error;

use crate::config::{AppConfig, ConfigError};
use crate::requests::RequestError;

pub const BANK_FILE: &str = "bank.jsonl";
pub const REPORT_FILE: &str = "run_report.json";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("objectives: {0}")]
    Requests(#[from] RequestError),
    #[error("bank {path}: {source}")]
    Bank { path: PathBuf, source: BankError },
    #[error("ratings {path}: {source}")]
    Ratings { path: PathBuf, source: LoadError },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Export(#[from] ExportError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Readability(#[from] ReadabilityError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot start server: {0}")]
    Serve(String),
}

pub fn read_text(path: &Path) -> Result<String, CommandError> {
    std::fs::read_to_string(path).map_err(|source| CommandError::Io { path: path.to_path_buf(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CommandError> {
    let io = |source| CommandError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

pub fn open_bank(path: &Path) -> Result<Vec<BankEntry>, CommandError> {
    load_bank(path).map_err(|source| CommandError::Bank { path: path.to_path_buf(), source })
}

pub fn bank_map(bank: &[BankEntry]) -> BTreeMap<String, Mcq> {
    bank.iter().map(|e| (e.mcq.id.clone(), e.mcq.clone())).collect()
}

// ---------------------------------------------------------------------------
// generate

/// Runs the batch and writes `bank.jsonl` and `run_report.json` into
/// `out_dir`. Questions that failed are listed in the report only.
pub fn generate(config: &AppConfig, requests: &[GenerationRequest], out_dir: &Path) -> Result<BatchOutcome, CommandError> {
    let gateway = config.build_gateway()?;
    generate_with(&gateway, config, requests, out_dir)
}

pub fn generate_with(
    gateway: &Gateway,
    config: &AppConfig,
    requests: &[GenerationRequest],
    out_dir: &Path,
) -> Result<BatchOutcome, CommandError> {
    let outcome = Supervisor::new(gateway, config.supervisor_config()).run_batch(requests);
    for failure in &outcome.report.failures {
        log::warn!("{}: {}", failure.id, failure.error);
    }
    write_text(&out_dir.join(BANK_FILE), &bank_to_string(&outcome.bank))?;
    write_text(&out_dir.join(REPORT_FILE), &outcome.report.to_json())?;
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// lint

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LintRecord {
    pub id: String,
    pub flaw_count: usize,
    pub acceptable: bool,
    pub flags: Vec<Flag>,
}

/// Lints every question; the model probe runs only when a gateway is given.
pub fn lint_bank(
    bank: &[BankEntry],
    max_flaws: usize,
    probe: Option<(&Gateway, &str)>,
) -> Result<Vec<LintRecord>, GatewayError> {
    let critic = IwfCritic::new(IwfConfig::default());
    bank.iter()
        .map(|entry| {
            let report = critic.review(&entry.mcq, probe)?;
            Ok(LintRecord {
                id: entry.mcq.id.clone(),
                flaw_count: report.flaw_count,
                acceptable: is_acceptable(&report, max_flaws),
                flags: report.flags,
            })
        })
        .collect()
}

pub fn lint_json(records: &[LintRecord]) -> String {
    serde_json::to_string_pretty(records).expect("lint records serialize") + "\n"
}

pub fn lint_table(records: &[LintRecord]) -> String {
    let width = records.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
    let mut out = format!("{:<width$}  flaws  ok   categories\n", "id");
    for r in records {
        let mut categories: Vec<&str> = r.flags.iter().map(|f| f.category.name()).collect();
        categories.dedup();
        out += &format!(
            "{:<width$}  {:>5}  {:<3}  {}\n",
            r.id,
            r.flaw_count,
            if r.acceptable { "yes" } else { "no" },
            categories.join(", ")
        );
    }
    let bad = records.iter().filter(|r| !r.acceptable).count();
    out += &format!("{} questions, {} over the flaw limit\n", records.len(), bad);
    out
}

// ---------------------------------------------------------------------------
// readability

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadabilitySummary {
    pub grade: f64,
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grade_band: Option<GradeBand>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_band: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedback: Option<String>,
}

pub fn readability_summary(text: &str, band: Option<GradeBand>) -> Result<ReadabilitySummary, ReadabilityError> {
    let stats = readability(text)?;
    let feedback = band.and_then(|b| readability_gate(stats.grade, b));
    Ok(ReadabilitySummary {
        grade: stats.grade,
        words: stats.words,
        sentences: stats.sentences,
        syllables: stats.syllables,
        grade_band: band,
        within_band: band.map(|_| feedback.is_none()),
        feedback,
    })
}

impl ReadabilitySummary {
    pub fn render(&self) -> String {
        let mut out = format!(
            "grade {:.2} ({} words, {} sentences, {} syllables)\n",
            self.grade, self.words, self.sentences, self.syllables
        );
        if let Some(band) = self.grade_band {
            match &self.feedback {
                None => out += &format!("within grades {band}\n"),
                Some(f) => out += &format!("too hard for grades {band}: {f}\n"),
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// eval

pub fn eval_files(bank_path: &Path, ratings_path: &Path) -> Result<EvalReport, CommandError> {
    let bank = open_bank(bank_path)?;
    let ratings = load_ratings(ratings_path).map_err(|source| CommandError::Ratings { path: ratings_path.to_path_buf(), source })?;
    let report = build_report(&ratings, &bank_map(&bank))?;
    for warning in &report.warnings {
        log::warn!("{warning}");
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// export

pub fn export_bank(bank: &[BankEntry], format: &str) -> Result<String, CommandError> {
    let registry = ExporterRegistry::standard();
    let exporter = registry.get(format)?;
    if bank.is_empty() {
        log::warn!("the bank is empty; writing an empty {} file", exporter.name());
    }
    Ok(exporter.export(bank))
}
