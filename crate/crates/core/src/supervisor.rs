//! The supervisor: routes each draft to approve, revise or stop, and drives
//! the generate → critique → decide loop for one request or a batch.
//!
//! Routing is plain rule logic over the two critic reports. Both critics
//! always run on the same draft and never see each other's output.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{Gateway, GatewayError, DEFAULT_MODEL};
use crate::generator::{Directive, DirectiveSource, GenerationError, GeneratorAgent, RevisionDirectives};
use crate::iwf::{is_acceptable, Flag, FlawCategory, IwfConfig, IwfCritic, IwfReport, DEFAULT_MAX_FLAWS};
use crate::language::{review_language, LanguageError, LanguageReport, Verdict};
use crate::mcq::{BankEntry, GenerationRequest, Mcq, QuestionStatus};

pub const DEFAULT_MAX_REVISIONS: u32 = 3;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, Clone)]
pub struct SupervisorConfig {
    pub max_revisions: u32,
    pub max_flaws: usize,
    /// Seed for option display orders.
    pub seed: u64,
    pub workers: usize,
    pub generator: GeneratorAgent,
    /// Model used by the critics when their model reviews are enabled.
    pub critic_model: String,
    /// Ask the model for a language review in addition to the grade gate.
    pub llm_language_review: bool,
    /// Run the model probe for the semantically judged flaws.
    pub llm_iwf_probe: bool,
    pub iwf: IwfConfig,
}

impl Default for SupervisorConfig {
    fn default() -> Self {
        Self {
            max_revisions: DEFAULT_MAX_REVISIONS,
            max_flaws: DEFAULT_MAX_FLAWS,
            seed: DEFAULT_SEED,
            workers: DEFAULT_WORKERS,
            generator: GeneratorAgent::default(),
            critic_model: DEFAULT_MODEL.to_string(),
            llm_language_review: false,
            llm_iwf_probe: false,
            iwf: IwfConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Approve,
    Revise(RevisionDirectives),
    StopNeedsReview,
}

impl Decision {
    pub fn kind(&self) -> DecisionKind {
        match self {
            Decision::Approve => DecisionKind::Approve,
            Decision::Revise(_) => DecisionKind::Revise,
            Decision::StopNeedsReview => DecisionKind::Stop,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionKind {
    Approve,
    Revise,
    Stop,
}

fn iwf_directive(category: FlawCategory, flags: &[&Flag]) -> Directive {
    let evidence: Vec<&str> = flags.iter().map(|f| f.evidence.as_str()).collect();
    Directive::new(
        DirectiveSource::Iwf,
        format!("{category}: {} Found: {}", category.remediation(), evidence.join("; ")),
    )
}

/// Language feedback first, then one directive per flagged flaw category.
pub fn revision_directives(iwf: &IwfReport, lang: &LanguageReport) -> RevisionDirectives {
    let mut directives = RevisionDirectives::default();
    for item in &lang.feedback {
        directives.push(Directive::new(DirectiveSource::Language, item.clone()));
    }
    for category in iwf.categories() {
        let flags: Vec<&Flag> = iwf.flags.iter().filter(|f| f.category == category).collect();
        directives.push(iwf_directive(category, &flags));
    }
    if directives.is_empty() {
        directives.push(Directive::new(
            DirectiveSource::Supervisor,
            "Improve the question so it reads at the target grade level and has at most one item-writing flaw.",
        ));
    }
    directives
}

/// Approve when the draft has at most `max_flaws` flaws and the language
/// verdict is pass; otherwise revise while budget remains, else stop.
pub fn decide(iwf: &IwfReport, lang: &LanguageReport, revisions_used: u32, config: &SupervisorConfig) -> Decision {
    if is_acceptable(iwf, config.max_flaws) && lang.verdict == Verdict::Pass {
        Decision::Approve
    } else if revisions_used >= config.max_revisions {
        Decision::StopNeedsReview
    } else {
        Decision::Revise(revision_directives(iwf, lang))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkflowStatus {
    InProgress,
    Approved,
    NeedsHumanReview,
}

/// One critiqued draft and what the supervisor did with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub draft: Mcq,
    pub iwf: IwfReport,
    pub language: LanguageReport,
    pub decision: DecisionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowState {
    pub request: GenerationRequest,
    pub current: Mcq,
    pub history: Vec<Round>,
    pub revisions_used: u32,
    pub status: WorkflowStatus,
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("generator: {0}")]
    Generation(#[from] GenerationError),
    #[error("language critic: {0}")]
    Language(#[from] LanguageError),
    #[error("item-writing critic: {0}")]
    Iwf(#[from] GatewayError),
}

impl StepError {
    pub fn is_replay_miss(&self) -> bool {
        matches!(
            self,
            StepError::Generation(GenerationError::Gateway(GatewayError::ReplayMiss { .. }))
                | StepError::Language(LanguageError::Gateway(GatewayError::ReplayMiss { .. }))
                | StepError::Iwf(GatewayError::ReplayMiss { .. })
        )
    }
}

/// A workflow that stopped on an error. `partial` is `None` when the first
/// draft could not be produced.
#[derive(Debug, Error)]
#[error("{id}: {source}")]
pub struct WorkflowError {
    pub id: String,
    pub partial: Option<Box<WorkflowState>>,
    #[source]
    pub source: StepError,
}

pub struct Supervisor<'g> {
    gateway: &'g Gateway,
    config: SupervisorConfig,
    critic: IwfCritic,
}

/// Question ids for a batch: `q001`, `q002`, ...
pub fn question_id(index: usize) -> String {
    format!("q{:03}", index + 1)
}

impl<'g> Supervisor<'g> {
    pub fn new(gateway: &'g Gateway, config: SupervisorConfig) -> Self {
        let critic = IwfCritic::new(config.iwf.clone());
        Self { gateway, config, critic }
    }

    pub fn config(&self) -> &SupervisorConfig {
        &self.config
    }

    /// Runs both critics on the same draft, concurrently.
    pub fn critique(&self, draft: &Mcq, req: &GenerationRequest) -> Result<(IwfReport, LanguageReport), StepError> {
        let model = self.config.critic_model.as_str();
        let probe = self.config.llm_iwf_probe.then_some((self.gateway, model));
        let style = self.config.llm_language_review.then_some((self.gateway, model));
        let (iwf, lang) = rayon::join(
            || self.critic.review(draft, probe),
            || review_language(draft, req.grade_band, style),
        );
        Ok((iwf?, lang?))
    }

    pub fn run_workflow(&self, req: &GenerationRequest, id: &str) -> Result<WorkflowState, WorkflowError> {
        let generator = &self.config.generator;
        let first = generator
            .draft(self.gateway, req, id)
            .map_err(|e| WorkflowError { id: id.to_string(), partial: None, source: e.into() })?;
        let mut state = WorkflowState {
            request: req.clone(),
            current: first,
            history: Vec::new(),
            revisions_used: 0,
            status: WorkflowStatus::InProgress,
        };
        loop {
            let (iwf, language) = match self.critique(&state.current, req) {
                Ok(reports) => reports,
                Err(source) => return Err(fail(id, state, source)),
            };
            let decision = decide(&iwf, &language, state.revisions_used, &self.config);
            log::debug!(
                "{id} r{}: {} flaw(s), grade {:.1}, {:?}",
                state.revisions_used,
                iwf.flaw_count,
                language.fk_grade,
                decision.kind()
            );
            state.history.push(Round {
                draft: state.current.clone(),
                iwf,
                language,
                decision: decision.kind(),
            });
            match decision {
                Decision::Approve => {
                    state.status = WorkflowStatus::Approved;
                    state.current.status = QuestionStatus::Approved;
                    return Ok(state);
                }
                Decision::StopNeedsReview => {
                    state.status = WorkflowStatus::NeedsHumanReview;
                    state.current.status = QuestionStatus::NeedsHumanReview;
                    return Ok(state);
                }
                Decision::Revise(directives) => {
                    match generator.revise(self.gateway, req, &state.current, &directives) {
                        Ok(next) => {
                            state.current = next;
                            state.revisions_used += 1;
                        }
                        Err(e) => return Err(fail(id, state, e.into())),
                    }
                }
            }
        }
    }

    /// Runs every request as an independent workflow on at most
    /// `config.workers` threads. Output order follows request order.
    pub fn run_batch(&self, requests: &[GenerationRequest]) -> BatchOutcome {
        let before = self.gateway.call_counts();
        let run = |(i, req): (usize, &GenerationRequest)| self.run_workflow(req, &question_id(i));
        let results: Vec<Result<WorkflowState, WorkflowError>> = match rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| requests.par_iter().enumerate().map(run).collect()),
            Err(e) => {
                log::warn!("thread pool unavailable ({e}); running sequentially");
                requests.iter().enumerate().map(run).collect()
            }
        };
        let after = self.gateway.call_counts();
        let gateway_calls: BTreeMap<String, usize> = after
            .into_iter()
            .map(|(k, n)| {
                let earlier = before.get(&k).copied().unwrap_or(0);
                (k, n - earlier)
            })
            .filter(|(_, n)| *n > 0)
            .collect();
        BatchOutcome::assemble(results, gateway_calls, self.config.seed)
    }
}

fn fail(id: &str, state: WorkflowState, source: StepError) -> WorkflowError {
    WorkflowError { id: id.to_string(), partial: Some(Box::new(state)), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub revision: u32,
    pub flaw_count: usize,
    pub flags: Vec<Flag>,
    pub fk_grade: f64,
    pub language_verdict: Verdict,
    pub language_feedback: Vec<String>,
    pub decision: DecisionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub status: WorkflowStatus,
    pub revisions_used: u32,
    pub history: Vec<RoundSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub id: String,
    pub error: String,
    pub replay_miss: bool,
    /// Revisions completed before the failure, when a draft existed.
    pub revisions_used: Option<u32>,
}

/// Summary written next to the bank after a batch run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub requested: usize,
    pub approved: usize,
    pub needs_human_review: usize,
    pub failed: usize,
    /// Terminal questions by number of revisions used.
    pub revision_histogram: BTreeMap<u32, usize>,
    pub gateway_calls: BTreeMap<String, usize>,
    pub total_gateway_calls: usize,
    pub questions: Vec<QuestionRecord>,
    pub failures: Vec<FailureRecord>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("run report serializes");
        text.push('\n');
        text
    }
}

fn summarize(state: &WorkflowState) -> QuestionRecord {
    QuestionRecord {
        id: state.current.id.clone(),
        status: state.status,
        revisions_used: state.revisions_used,
        history: state
            .history
            .iter()
            .map(|r| RoundSummary {
                revision: r.draft.revision,
                flaw_count: r.iwf.flaw_count,
                flags: r.iwf.flags.clone(),
                fk_grade: r.language.fk_grade,
                language_verdict: r.language.verdict,
                language_feedback: r.language.feedback.clone(),
                decision: r.decision,
            })
            .collect(),
    }
}

#[derive(Debug)]
pub struct BatchOutcome {
    pub bank: Vec<BankEntry>,
    pub report: RunReport,
    pub states: Vec<WorkflowState>,
    pub errors: Vec<WorkflowError>,
}

impl BatchOutcome {
    fn assemble(
        results: Vec<Result<WorkflowState, WorkflowError>>,
        gateway_calls: BTreeMap<String, usize>,
        seed: u64,
    ) -> Self {
        let mut report = RunReport {
            requested: results.len(),
            total_gateway_calls: gateway_calls.values().sum(),
            gateway_calls,
            ..RunReport::default()
        };
        let mut bank = Vec::new();
        let mut states = Vec::new();
        let mut errors = Vec::new();
        for result in results {
            match result {
                Ok(state) => {
                    match state.status {
                        WorkflowStatus::Approved => report.approved += 1,
                        _ => report.needs_human_review += 1,
                    }
                    *report.revision_histogram.entry(state.revisions_used).or_default() += 1;
                    report.questions.push(summarize(&state));
                    bank.push(BankEntry::new(state.current.clone(), seed));
                    states.push(state);
                }
                Err(err) => {
                    log::warn!("{err}");
                    report.failed += 1;
                    report.failures.push(FailureRecord {
                        id: err.id.clone(),
                        error: err.source.to_string(),
                        replay_miss: err.source.is_replay_miss(),
                        revisions_used: err.partial.as_ref().map(|s| s.revisions_used),
                    });
                    errors.push(err);
                }
            }
        }
        Self { bank, report, states, errors }
    }
}
