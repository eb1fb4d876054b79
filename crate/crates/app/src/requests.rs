//! Objectives files for `generate`.
//!
//! One request per line. A line starting with `{` is a JSON object:
//!
//! ```text
//! {"learning_objective": "recognize bias in training data", "bloom_level": "analyze", "scenario": "face recognition"}
//! ```
//!
//! with optional `grade_band` and `option_count`. Any other nonblank line is
//! taken as the objective text. Lines starting with `#` are comments. Fields
//! a line leaves out are filled from the command-line defaults.

use mcq_core::mcq::{BloomLevel, GenerationRequest, GradeBand};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RequestError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("no objectives given")]
    Empty,
}

/// Values used where a line is silent.
#[derive(Debug, Clone, Default)]
pub struct RequestDefaults {
    pub bloom: Option<BloomLevel>,
    pub grades: Option<GradeBand>,
    pub scenario: Option<String>,
    pub option_count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectiveLine {
    #[serde(alias = "objective")]
    learning_objective: String,
    #[serde(default, alias = "bloom")]
    bloom_level: Option<BloomLevel>,
    #[serde(default, alias = "grades")]
    grade_band: Option<GradeBand>,
    #[serde(default)]
    scenario: Option<String>,
    #[serde(default)]
    option_count: Option<usize>,
}

impl RequestDefaults {
    /// Builds one request from an objective, line values first.
    pub fn request(
        &self,
        objective: &str,
        bloom: Option<BloomLevel>,
        grades: Option<GradeBand>,
        scenario: Option<String>,
        option_count: Option<usize>,
    ) -> Result<GenerationRequest, String> {
        let bloom = bloom
            .or(self.bloom)
            .ok_or("no Bloom level: set bloom_level or pass --bloom")?;
        let grades = grades
            .or(self.grades)
            .ok_or("no grade band: set grade_band or pass --grades")?;
        let mut req = GenerationRequest::new(objective.trim(), bloom, grades)
            .with_option_count(option_count.unwrap_or(self.option_count));
        req.scenario = scenario.or_else(|| self.scenario.clone());
        req.validate().map_err(|e| e.to_string())?;
        Ok(req)
    }
}

pub fn parse_objectives(text: &str, defaults: &RequestDefaults) -> Result<Vec<GenerationRequest>, RequestError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| RequestError::Line { line: idx + 1, message };
        let req = if line.starts_with('{') {
            let parsed: ObjectiveLine = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            defaults.request(
                &parsed.learning_objective,
                parsed.bloom_level,
                parsed.grade_band,
                parsed.scenario,
                parsed.option_count,
            )
        } else {
            defaults.request(line, None, None, None, None)
        };
        out.push(req.map_err(err)?);
    }
    if out.is_empty() {
        return Err(RequestError::Empty);
    }
    Ok(out)
}
