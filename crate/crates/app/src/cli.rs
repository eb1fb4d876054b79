//! Command-line interface.

use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcq_core::mcq::{parse_bloom, BloomLevel, GradeBand};

use crate::commands::{self, CommandError};
use crate::config::{AppConfig, Overrides, RunMode};
use crate::requests::{parse_objectives, RequestDefaults};
use crate::server::{self, AppState};

#[derive(Debug, Parser)]
#[command(name = "mcqgen", version, about = "Generate, critique, export and evaluate multiple-choice questions")]
pub struct Cli {
    /// TOML config file; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the generate-critique-revise loop over a set of objectives.
    Generate(GenerateArgs),
    /// Like generate, but in record mode: transcript hits are reused, misses
    /// go to the provider and are appended.
    Record(GenerateArgs),
    /// Check a question bank for item-writing flaws.
    Lint(LintArgs),
    /// Flesch-Kincaid grade of a text.
    Readability(ReadabilityArgs),
    /// Rubric statistics over a ratings file.
    Eval(EvalArgs),
    /// Write a bank as json, csv or gift.
    Export(ExportArgs),
    /// Serve the review API (and UI assets).
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct GatewayArgs {
    /// live, record or replay.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<RunMode>,
    /// Transcript file for record and replay modes.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    /// Shorthand for --mode replay --transcript FILE.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["mode", "transcript", "record"])]
    pub replay: Option<PathBuf>,
    /// Shorthand for --mode record --transcript FILE.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["mode", "transcript"])]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    /// Chat-completions URL of an OpenAI-compatible server.
    #[arg(long)]
    pub endpoint: Option<String>,
}

impl GatewayArgs {
    fn overrides(&self) -> Overrides {
        let (mode, transcript) = match (&self.replay, &self.record) {
            (Some(p), _) => (Some(RunMode::Replay), Some(p.clone())),
            (_, Some(p)) => (Some(RunMode::Record), Some(p.clone())),
            _ => (self.mode, self.transcript.clone()),
        };
        Overrides {
            model: self.model.clone(),
            mode,
            transcript,
            endpoint: self.endpoint.clone(),
            ..Overrides::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Objectives file: JSONL requests or one objective per line.
    #[arg(long, value_name = "FILE", required_unless_present = "objective")]
    pub objectives: Option<PathBuf>,
    /// An objective given inline; may be repeated.
    #[arg(long)]
    pub objective: Vec<String>,
    /// Bloom level for requests that do not set one.
    #[arg(long, value_parser = parse_bloom_arg)]
    pub bloom: Option<BloomLevel>,
    /// Grade band (e.g. 7-9) for requests that do not set one.
    #[arg(long, value_parser = parse_grades)]
    pub grades: Option<GradeBand>,
    /// Scenario for requests that do not set one.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Directory for bank.jsonl and run_report.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[command(flatten)]
    pub gateway: GatewayArgs,
    /// Seed for option display orders.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub max_revisions: Option<u32>,
    #[arg(long)]
    pub max_flaws: Option<usize>,
    #[arg(long)]
    pub option_count: Option<usize>,
    /// Also ask the model for language reviews and flaw probes in the loop.
    #[arg(long)]
    pub llm_critics: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct LintArgs {
    /// Question bank (JSONL).
    #[arg(long, value_name = "FILE")]
    pub bank: PathBuf,
    /// Also run the model probe for the semantically judged flaws.
    #[arg(long)]
    pub probe: bool,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub max_flaws: Option<usize>,
    #[command(flatten)]
    pub gateway: GatewayArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReadabilityArgs {
    /// Text to score; read from stdin when absent.
    pub text: Option<String>,
    /// Grade band to check the text against.
    #[arg(long, value_parser = parse_grades)]
    pub grades: Option<GradeBand>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    pub bank: PathBuf,
    /// Ratings file: JSONL, or CSV when the name ends in .csv.
    #[arg(long, value_name = "FILE")]
    pub ratings: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(long, value_name = "FILE")]
    pub bank: PathBuf,
    /// json, csv or gift.
    #[arg(long)]
    pub format: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, value_name = "FILE")]
    pub bank: PathBuf,
    /// Append-only ratings store; created when missing.
    #[arg(long, value_name = "FILE", default_value = "ratings.jsonl")]
    pub ratings: PathBuf,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory with the review UI build.
    #[arg(long, value_name = "DIR")]
    pub static_dir: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<RunMode, String> {
    s.parse().map_err(|e: crate::config::ConfigError| e.to_string())
}

fn parse_bloom_arg(s: &str) -> Result<BloomLevel, String> {
    parse_bloom(s).map_err(|e| e.to_string())
}

fn parse_grades(s: &str) -> Result<GradeBand, String> {
    s.parse().map_err(|e: mcq_core::mcq::DomainError| e.to_string())
}

fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<AppConfig, CommandError> {
    let mut config = AppConfig::load_or_default(path)?;
    config.apply(overrides);
    Ok(config)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CommandError> {
    match out {
        Some(path) => commands::write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs a parsed command line and returns the process exit code: 0 on
/// success, 1 when the run finished but found problems (failed generations,
/// questions over the flaw limit).
pub fn run(cli: Cli) -> Result<i32, CommandError> {
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Generate(args) => run_generate(config_path, args, false),
        Command::Record(args) => run_generate(config_path, args, true),
        Command::Lint(args) => {
            let overrides = Overrides { max_flaws: args.max_flaws, ..args.gateway.overrides() };
            let config = load_config(config_path, &overrides)?;
            let bank = commands::open_bank(&args.bank)?;
            let gateway = if args.probe { Some(config.build_gateway()?) } else { None };
            let probe = gateway.as_ref().map(|g| (g, config.model.as_str()));
            let records = commands::lint_bank(&bank, config.max_flaws, probe)?;
            let text = if args.json { commands::lint_json(&records) } else { commands::lint_table(&records) };
            print!("{text}");
            Ok(if records.iter().all(|r| r.acceptable) { 0 } else { 1 })
        }
        Command::Readability(args) => {
            let text = match args.text {
                Some(t) => t,
                None => {
                    let mut buf = String::new();
                    std::io::stdin()
                        .read_to_string(&mut buf)
                        .map_err(|source| CommandError::Io { path: "<stdin>".into(), source })?;
                    buf
                }
            };
            let summary = commands::readability_summary(&text, args.grades)?;
            if args.json {
                println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            } else {
                print!("{}", summary.render());
            }
            Ok(if summary.within_band == Some(false) { 1 } else { 0 })
        }
        Command::Eval(args) => {
            let report = commands::eval_files(&args.bank, &args.ratings)?;
            let text = match args.format {
                ReportFormat::Json => report.to_json(),
                ReportFormat::Csv => report.to_csv(),
            };
            emit(args.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Export(args) => {
            let bank = commands::open_bank(&args.bank)?;
            let text = commands::export_bank(&bank, &args.format)?;
            emit(args.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Serve(args) => {
            let config = load_config(config_path, &Overrides { port: args.port, ..Overrides::default() })?;
            let bank = commands::open_bank(&args.bank)?;
            let state = AppState::open(bank, &args.ratings)?;
            server::serve(state, &format!("{}:{}", args.host, config.port), args.static_dir)?;
            Ok(0)
        }
    }
}

fn run_generate(config_path: Option<&Path>, args: GenerateArgs, force_record: bool) -> Result<i32, CommandError> {
    let mut overrides = Overrides {
        seed: args.seed,
        workers: args.workers,
        max_revisions: args.max_revisions,
        max_flaws: args.max_flaws,
        option_count: args.option_count,
        llm_critics: args.llm_critics.then_some(true),
        ..args.gateway.overrides()
    };
    if force_record {
        overrides.mode = Some(RunMode::Record);
    }
    let config = load_config(config_path, &overrides)?;
    // fail on a bad config or missing transcript before reading any input
    let gateway = config.build_gateway()?;

    let defaults = RequestDefaults {
        bloom: args.bloom,
        grades: args.grades,
        scenario: args.scenario.clone(),
        option_count: config.option_count,
    };
    let mut text = match &args.objectives {
        Some(path) => commands::read_text(path)?,
        None => String::new(),
    };
    for objective in &args.objective {
        text.push('\n');
        text += objective.replace('\n', " ").trim();
    }
    let requests = parse_objectives(&text, &defaults)?;
    let outcome = commands::generate_with(&gateway, &config, &requests, &args.out)?;
    let r = &outcome.report;
    eprintln!(
        "{} requested: {} approved, {} need human review, {} failed ({} gateway calls)",
        r.requested, r.approved, r.needs_human_review, r.failed, r.total_gateway_calls
    );
    Ok(if r.failed == 0 { 0 } else { 1 })
}
