//! The generator agent: drafts a question from a request and rewrites it from
//! critic feedback, one structured completion per call.
//!
//! Prompt text lives in `prompts/*.txt` and is versioned by template id; the
//! id that produced a draft is stored in its provenance.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::gateway::schema::{McqSchema, OutputSchema, MCQ_V1};
use crate::gateway::{
    CompletionRequest, Gateway, GatewayError, DEFAULT_MAX_ATTEMPTS, DEFAULT_MODEL,
    GENERATION_TEMPERATURE,
};
use crate::mcq::{
    validate_mcq, describe_violations, GenerationRequest, Mcq, Provenance, QuestionStatus,
    ViolationKind,
};
use crate::prompt::{distractor_lines, render};

pub const GENERATE_PROMPT_ID: &str = "generate.v1";
pub const REVISE_PROMPT_ID: &str = "revise.v1";

const GENERATE_TEMPLATE: &str = include_str!("../prompts/generate.v1.txt");
const REVISE_TEMPLATE: &str = include_str!("../prompts/revise.v1.txt");

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("generated question is missing field `{0}`")]
    MissingField(&'static str),
    #[error("field `{0}` has the wrong type")]
    WrongType(&'static str),
    #[error("expected {expected} distractors, got {got}")]
    WrongDistractorCount { expected: usize, got: usize },
    #[error("duplicate options: {0}")]
    DuplicateOptions(String),
    #[error("generated question is invalid: {0}")]
    InvalidQuestion(String),
    #[error("revision requested without directives")]
    EmptyDirectives,
    #[error("directive {0} has an empty instruction")]
    EmptyInstruction(usize),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// Which agent asked for a change. Declaration order is the order directives
/// appear in revision prompts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectiveSource {
    Language,
    Iwf,
    Supervisor,
}

impl DirectiveSource {
    pub fn label(self) -> &'static str {
        match self {
            DirectiveSource::Language => "language",
            DirectiveSource::Iwf => "iwf",
            DirectiveSource::Supervisor => "supervisor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Directive {
    pub source: DirectiveSource,
    pub instruction: String,
}

impl Directive {
    pub fn new(source: DirectiveSource, instruction: impl Into<String>) -> Self {
        Self { source, instruction: instruction.into() }
    }
}

/// Feedback items for one revision, kept sorted by source (stable within a source).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionDirectives(Vec<Directive>);

impl RevisionDirectives {
    pub fn new(mut items: Vec<Directive>) -> Self {
        items.sort_by_key(|d| d.source);
        Self(items)
    }

    pub fn push(&mut self, directive: Directive) {
        let at = self.0.partition_point(|d| d.source <= directive.source);
        self.0.insert(at, directive);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Directive> {
        self.0.iter()
    }
}

/// Identity and provenance stamped onto a parsed draft.
#[derive(Debug, Clone)]
pub struct DraftInfo {
    pub id: String,
    pub revision: u32,
    pub template: String,
    pub model: String,
}

fn scenario_block(scenario: Option<&str>) -> String {
    scenario.map(|s| format!("Scenario: {s}\n")).unwrap_or_default()
}

/// Builds the initial-draft prompt for `req` (template `generate.v1`).
pub fn build_generation_prompt(req: &GenerationRequest) -> CompletionRequest {
    let grades = req.grade_band.to_string();
    let option_count = req.option_count.to_string();
    let distractor_count = req.distractor_count().to_string();
    let grade_high = req.grade_band.high().to_string();
    let scenario = scenario_block(req.scenario());
    let prompt = render(
        GENERATE_TEMPLATE,
        &[
            ("grades", &grades),
            ("objective", req.learning_objective.trim()),
            ("bloom", req.bloom_level.name()),
            ("bloom_definition", req.bloom_level.definition()),
            ("scenario_block", &scenario),
            ("option_count", &option_count),
            ("distractor_count", &distractor_count),
            ("grade_high", &grade_high),
            ("schema", McqSchema.describe()),
        ],
    );
    CompletionRequest::new(GENERATE_PROMPT_ID, prompt, MCQ_V1)
}

/// Builds the revision prompt: the whole current question, then each
/// directive labelled by source (template `revise.v1`).
pub fn build_revision_prompt(
    mcq: &Mcq,
    directives: &RevisionDirectives,
) -> Result<CompletionRequest, GenerationError> {
    if directives.is_empty() {
        return Err(GenerationError::EmptyDirectives);
    }
    if let Some(i) = directives.iter().position(|d| d.instruction.trim().is_empty()) {
        return Err(GenerationError::EmptyInstruction(i));
    }
    let grades = mcq.grade_band.to_string();
    let distractor_count = mcq.distractors.len().to_string();
    let scenario = scenario_block(mcq.scenario.as_deref().map(str::trim).filter(|s| !s.is_empty()));
    let distractor_lines = distractor_lines(&mcq.distractors);
    let directive_lines: String = directives
        .iter()
        .map(|d| format!("- [{}] {}\n", d.source.label(), d.instruction.trim()))
        .collect();
    let prompt = render(
        REVISE_TEMPLATE,
        &[
            ("grades", &grades),
            ("objective", mcq.learning_objective.trim()),
            ("bloom", mcq.bloom_level.name()),
            ("bloom_definition", mcq.bloom_level.definition()),
            ("scenario_block", &scenario),
            ("stem", &mcq.stem),
            ("key", &mcq.key),
            ("distractor_lines", &distractor_lines),
            ("directive_lines", &directive_lines),
            ("schema", McqSchema.describe()),
            ("distractor_count", &distractor_count),
        ],
    );
    Ok(CompletionRequest::new(REVISE_PROMPT_ID, prompt, MCQ_V1))
}

fn text_field(payload: &Value, name: &'static str) -> Result<String, GenerationError> {
    match payload.get(name) {
        None | Some(Value::Null) => Err(GenerationError::MissingField(name)),
        Some(Value::String(s)) => Ok(s.trim().to_string()),
        Some(_) => Err(GenerationError::WrongType(name)),
    }
}

/// Turns an `mcq.v1` payload into a draft question carrying the request's metadata.
pub fn parse_generation_output(
    payload: &Value,
    req: &GenerationRequest,
    info: &DraftInfo,
) -> Result<Mcq, GenerationError> {
    let stem = text_field(payload, "stem")?;
    let key = text_field(payload, "key")?;
    let distractors = match payload.get("distractors") {
        None | Some(Value::Null) => return Err(GenerationError::MissingField("distractors")),
        Some(Value::Array(items)) => items
            .iter()
            .map(|v| v.as_str().map(|s| s.trim().to_string()))
            .collect::<Option<Vec<_>>>()
            .ok_or(GenerationError::WrongType("distractors"))?,
        Some(_) => return Err(GenerationError::WrongType("distractors")),
    };
    if distractors.len() != req.distractor_count() {
        return Err(GenerationError::WrongDistractorCount {
            expected: req.distractor_count(),
            got: distractors.len(),
        });
    }
    let mcq = Mcq {
        id: info.id.clone(),
        stem,
        key,
        distractors,
        bloom_level: req.bloom_level,
        grade_band: req.grade_band,
        learning_objective: req.learning_objective.trim().to_string(),
        scenario: req.scenario().map(str::to_string),
        status: QuestionStatus::Draft,
        revision: info.revision,
        provenance: Provenance {
            template: info.template.clone(),
            model: info.model.clone(),
        },
    };
    let violations = validate_mcq(&mcq);
    if violations.is_empty() {
        return Ok(mcq);
    }
    let duplicates: Vec<_> = violations
        .iter()
        .filter(|v| {
            matches!(v.kind, ViolationKind::DuplicateOfKey | ViolationKind::DuplicateOfDistractor(_))
        })
        .cloned()
        .collect();
    if !duplicates.is_empty() {
        return Err(GenerationError::DuplicateOptions(describe_violations(&duplicates)));
    }
    Err(GenerationError::InvalidQuestion(describe_violations(&violations)))
}

/// Drafts and revises questions through the gateway.
#[derive(Debug, Clone)]
pub struct GeneratorAgent {
    pub model: String,
    pub temperature: f64,
    pub max_attempts: u32,
}

impl Default for GeneratorAgent {
    fn default() -> Self {
        Self {
            model: DEFAULT_MODEL.to_string(),
            temperature: GENERATION_TEMPERATURE,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

impl GeneratorAgent {
    fn configure(&self, req: CompletionRequest) -> CompletionRequest {
        req.with_model(self.model.clone())
            .with_temperature(self.temperature)
            .with_max_attempts(self.max_attempts)
    }

    fn call(
        &self,
        gateway: &Gateway,
        completion: CompletionRequest,
        req: &GenerationRequest,
        info: DraftInfo,
    ) -> Result<Mcq, GenerationError> {
        // unusable drafts are repaired inside the gateway's retry loop
        let validate = |payload: &Value| {
            parse_generation_output(payload, req, &info)
                .map(|_| ())
                .map_err(|e| e.to_string())
        };
        let completion = gateway.complete_validated(&completion, &validate)?;
        parse_generation_output(&completion.payload, req, &info)
    }

    pub fn draft(&self, gateway: &Gateway, req: &GenerationRequest, id: &str) -> Result<Mcq, GenerationError> {
        let completion = self.configure(build_generation_prompt(req));
        let info = DraftInfo {
            id: id.to_string(),
            revision: 0,
            template: GENERATE_PROMPT_ID.to_string(),
            model: self.model.clone(),
        };
        self.call(gateway, completion, req, info)
    }

    pub fn revise(
        &self,
        gateway: &Gateway,
        req: &GenerationRequest,
        current: &Mcq,
        directives: &RevisionDirectives,
    ) -> Result<Mcq, GenerationError> {
        let completion = self.configure(build_revision_prompt(current, directives)?);
        let info = DraftInfo {
            id: current.id.clone(),
            revision: current.revision + 1,
            template: REVISE_PROMPT_ID.to_string(),
            model: self.model.clone(),
        };
        self.call(gateway, completion, req, info)
    }
}
