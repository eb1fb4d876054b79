//! Structured output shapes the agents ask the model for, registered by id.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;

pub const MCQ_V1: &str = "mcq.v1";
pub const IWF_PROBE_V1: &str = "iwf_probe.v1";
pub const LANGUAGE_REVIEW_V1: &str = "language_review.v1";

/// A named payload shape. `check` validates structure only; agents apply
/// their own semantic checks on top.
pub trait OutputSchema: Send + Sync {
    fn id(&self) -> &'static str;
    /// Shape description embedded in prompts.
    fn describe(&self) -> &'static str;
    fn check(&self, payload: &Value) -> Result<(), String>;
}

#[derive(Clone, Default)]
pub struct SchemaRegistry {
    schemas: BTreeMap<&'static str, Arc<dyn OutputSchema>>,
}

impl SchemaRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn standard() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(McqSchema));
        registry.register(Arc::new(IwfProbeSchema));
        registry.register(Arc::new(LanguageReviewSchema));
        registry
    }

    pub fn register(&mut self, schema: Arc<dyn OutputSchema>) {
        self.schemas.insert(schema.id(), schema);
    }

    pub fn get(&self, id: &str) -> Option<&Arc<dyn OutputSchema>> {
        self.schemas.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.schemas.keys().copied()
    }
}

fn object(payload: &Value) -> Result<&serde_json::Map<String, Value>, String> {
    payload.as_object().ok_or_else(|| "payload is not a JSON object".to_string())
}

fn string_field<'a>(obj: &'a serde_json::Map<String, Value>, name: &str) -> Result<&'a str, String> {
    match obj.get(name) {
        None | Some(Value::Null) => Err(format!("missing field `{name}`")),
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(format!("field `{name}` must be a string")),
    }
}

pub struct McqSchema;

impl OutputSchema for McqSchema {
    fn id(&self) -> &'static str {
        MCQ_V1
    }

    fn describe(&self) -> &'static str {
        r#"{"stem": string, "key": string, "distractors": [string, ...]}"#
    }

    fn check(&self, payload: &Value) -> Result<(), String> {
        let obj = object(payload)?;
        string_field(obj, "stem")?;
        string_field(obj, "key")?;
        match obj.get("distractors") {
            None | Some(Value::Null) => Err("missing field `distractors`".into()),
            Some(Value::Array(items)) if items.iter().all(Value::is_string) => Ok(()),
            Some(_) => Err("field `distractors` must be an array of strings".into()),
        }
    }
}

/// Names of the semantically judged flaw categories, as they appear in probe payloads.
pub const PROBE_CATEGORIES: [&str; 3] = ["ImplausibleDistractor", "MultipleCorrect", "AmbiguousInformation"];

pub struct IwfProbeSchema;

impl OutputSchema for IwfProbeSchema {
    fn id(&self) -> &'static str {
        IWF_PROBE_V1
    }

    fn describe(&self) -> &'static str {
        r#"{"ImplausibleDistractor": {"verdict": "yes"|"no", "justification": string}, "MultipleCorrect": {...same...}, "AmbiguousInformation": {...same...}}"#
    }

    fn check(&self, payload: &Value) -> Result<(), String> {
        let obj = object(payload)?;
        for name in PROBE_CATEGORIES {
            let verdict = obj
                .get(name)
                .and_then(Value::as_object)
                .ok_or_else(|| format!("missing object `{name}`"))?;
            match string_field(verdict, "verdict")?.to_ascii_lowercase().as_str() {
                "yes" | "no" => {}
                other => return Err(format!("`{name}.verdict` must be yes or no, got `{other}`")),
            }
            string_field(verdict, "justification")?;
        }
        Ok(())
    }
}

pub struct LanguageReviewSchema;

impl OutputSchema for LanguageReviewSchema {
    fn id(&self) -> &'static str {
        LANGUAGE_REVIEW_V1
    }

    fn describe(&self) -> &'static str {
        r#"{"verdict": "pass"|"fail", "feedback": [string, ...]}"#
    }

    fn check(&self, payload: &Value) -> Result<(), String> {
        let obj = object(payload)?;
        match string_field(obj, "verdict")?.to_ascii_lowercase().as_str() {
            "pass" | "fail" => {}
            other => return Err(format!("`verdict` must be pass or fail, got `{other}`")),
        }
        match obj.get("feedback") {
            None | Some(Value::Null) => Ok(()),
            Some(Value::Array(items)) if items.iter().all(Value::is_string) => Ok(()),
            Some(_) => Err("field `feedback` must be an array of strings".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn standard_registry_has_three_schemas() {
        let r = SchemaRegistry::standard();
        assert_eq!(r.ids().collect::<Vec<_>>(), vec![IWF_PROBE_V1, LANGUAGE_REVIEW_V1, MCQ_V1]);
    }

    #[test]
    fn mcq_shape() {
        let s = McqSchema;
        assert!(s.check(&json!({"stem": "s", "key": "k", "distractors": ["a"]})).is_ok());
        assert_eq!(
            s.check(&json!({"stem": "s", "distractors": ["a"]})),
            Err("missing field `key`".into())
        );
        assert!(s.check(&json!({"stem": "s", "key": "k", "distractors": [1]})).is_err());
        assert!(s.check(&json!(["not", "object"])).is_err());
    }

    #[test]
    fn probe_shape() {
        let ok = json!({
            "ImplausibleDistractor": {"verdict": "yes", "justification": "C is unrelated"},
            "MultipleCorrect": {"verdict": "no", "justification": "-"},
            "AmbiguousInformation": {"verdict": "No", "justification": "-"},
        });
        assert!(IwfProbeSchema.check(&ok).is_ok());
        let mut bad = ok.clone();
        bad["MultipleCorrect"]["verdict"] = json!("maybe");
        assert!(IwfProbeSchema.check(&bad).is_err());
    }

    #[test]
    fn language_shape() {
        assert!(LanguageReviewSchema.check(&json!({"verdict": "pass"})).is_ok());
        assert!(LanguageReviewSchema.check(&json!({"verdict": "meh"})).is_err());
    }
}
