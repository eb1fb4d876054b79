use serde_json::Value;

use super::{Flag, FlawCategory};
use crate::gateway::schema::{IwfProbeSchema, OutputSchema, IWF_PROBE_V1};
use crate::gateway::{CompletionRequest, Gateway, GatewayError, CRITIC_TEMPERATURE};
use crate::mcq::Mcq;
use crate::prompt::{distractor_lines, render};

pub const PROBE_PROMPT_ID: &str = "iwf_probe.v1";

const PROBE_TEMPLATE: &str = include_str!("../../prompts/iwf_probe.v1.txt");

pub fn build_probe_prompt(mcq: &Mcq, model: &str) -> CompletionRequest {
    let grades = mcq.grade_band.to_string();
    let lines = distractor_lines(&mcq.distractors);
    let prompt = render(
        PROBE_TEMPLATE,
        &[
            ("grades", &grades),
            ("objective", mcq.learning_objective.trim()),
            ("stem", &mcq.stem),
            ("key", &mcq.key),
            ("distractor_lines", &lines),
            ("schema", IwfProbeSchema.describe()),
        ],
    );
    CompletionRequest::new(PROBE_PROMPT_ID, prompt, IWF_PROBE_V1)
        .with_model(model)
        .with_temperature(CRITIC_TEMPERATURE)
}

/// Converts a schema-checked probe payload into flags for every "yes" verdict.
pub fn parse_probe_output(payload: &Value) -> Vec<Flag> {
    FlawCategory::LLM_ASSISTED
        .iter()
        .filter_map(|&category| {
            let verdict = payload.get(category.name())?;
            let yes = verdict
                .get("verdict")
                .and_then(Value::as_str)
                .is_some_and(|v| v.eq_ignore_ascii_case("yes"));
            if !yes {
                return None;
            }
            let justification = verdict
                .get("justification")
                .and_then(Value::as_str)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .unwrap_or("flagged by model review");
            Some(Flag { category, evidence: justification.to_string() })
        })
        .collect()
}

/// Asks the model about the semantically judged flaws.
pub fn llm_flaw_probe(mcq: &Mcq, gateway: &Gateway, model: &str) -> Result<Vec<Flag>, GatewayError> {
    let completion = gateway.complete_structured(&build_probe_prompt(mcq, model))?;
    Ok(parse_probe_output(&completion.payload))
}
