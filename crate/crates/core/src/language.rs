//! The language critic: Flesch-Kincaid readability against the grade band,
//! with an optional model review of wording.
//!
//! Formula: `0.39 * (words/sentences) + 11.8 * (syllables/words) - 15.59`.
//! A question passes the deterministic gate when its grade is at most one
//! above the top of the band. There is no lower bound.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::gateway::schema::{LanguageReviewSchema, OutputSchema, LANGUAGE_REVIEW_V1};
use crate::gateway::{CompletionRequest, Gateway, GatewayError, CRITIC_TEMPERATURE};
use crate::mcq::{GradeBand, Mcq};
use crate::prompt::render;

pub const LANGUAGE_PROMPT_ID: &str = "language_review.v1";

const LANGUAGE_TEMPLATE: &str = include_str!("../prompts/language_review.v1.txt");

/// Grade levels a question may sit above the top of its band.
pub const GRADE_TOLERANCE: f64 = 1.0;

const LONG_SENTENCE_WORDS: f64 = 20.0;
const LONG_WORD_SYLLABLES: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReadabilityError {
    #[error("text contains no words")]
    EmptyText,
    #[error("word contains no letters")]
    EmptyWord,
}

#[derive(Debug, Error)]
pub enum LanguageError {
    #[error(transparent)]
    Readability(#[from] ReadabilityError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic syllable count.
///
/// Counts runs of vowels (a, e, i, o, u, y), then subtracts a final silent
/// "e" (an "e" ending the word after a consonant) unless the word ends in
/// consonant + "le". Never returns less than 1. Non-letters are ignored.
pub fn count_syllables(word: &str) -> Result<usize, ReadabilityError> {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if letters.is_empty() {
        return Err(ReadabilityError::EmptyWord);
    }
    let mut groups = 0usize;
    let mut in_vowels = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !in_vowels {
            groups += 1;
        }
        in_vowels = v;
    }
    let n = letters.len();
    if n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2]) {
        let consonant_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    Ok(groups.max(1))
}

/// Word, sentence and syllable counts behind a grade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityStats {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub grade: f64,
}

impl ReadabilityStats {
    pub fn words_per_sentence(&self) -> f64 {
        self.words as f64 / self.sentences as f64
    }
}

/// Counts sentences as runs of `.`, `!` or `?`, with a minimum of one.
fn count_sentences(text: &str) -> usize {
    let mut runs = 0;
    let mut in_run = false;
    for c in text.chars() {
        let terminal = matches!(c, '.' | '!' | '?');
        if terminal && !in_run {
            runs += 1;
        }
        in_run = terminal;
    }
    runs.max(1)
}

/// Words are whitespace-separated tokens containing a letter or digit;
/// digit-only tokens count as one syllable.
fn words_with_syllables(text: &str) -> impl Iterator<Item = (&str, usize)> {
    text.split_whitespace().filter_map(|token| {
        if token.chars().any(char::is_alphabetic) {
            Some((token, count_syllables(token).expect("token has letters")))
        } else if token.chars().any(|c| c.is_ascii_digit()) {
            Some((token, 1))
        } else {
            None
        }
    })
}

pub fn readability(text: &str) -> Result<ReadabilityStats, ReadabilityError> {
    let (words, syllables) = words_with_syllables(text).fold((0usize, 0usize), |(w, s), (_, n)| (w + 1, s + n));
    if words == 0 {
        return Err(ReadabilityError::EmptyText);
    }
    let sentences = count_sentences(text);
    let grade = 0.39 * (words as f64 / sentences as f64) + 11.8 * (syllables as f64 / words as f64) - 15.59;
    Ok(ReadabilityStats { words, sentences, syllables, grade })
}

/// Flesch-Kincaid grade level; may be negative for very simple text.
pub fn flesch_kincaid_grade(text: &str) -> Result<f64, ReadabilityError> {
    readability(text).map(|s| s.grade)
}

/// Stem and options joined as separate sentences, the text a student reads.
pub fn question_text(mcq: &Mcq) -> String {
    mcq.all_text()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            if s.ends_with(['.', '!', '?']) {
                s.to_string()
            } else {
                format!("{s}.")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageReport {
    pub fk_grade: f64,
    pub verdict: Verdict,
    pub feedback: Vec<String>,
    pub llm_review_used: bool,
}

impl LanguageReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Deterministic grade gate. Returns the failure message, or `None` when
/// `grade <= band.high + 1`.
pub fn readability_gate(grade: f64, band: GradeBand) -> Option<String> {
    let limit = band.high() as f64 + GRADE_TOLERANCE;
    (grade > limit).then(|| {
        format!(
            "reduce sentence length or vocabulary complexity: reading grade {grade:.1} exceeds the limit of {limit:.0} for grades {band}"
        )
    })
}

fn concrete_feedback(text: &str, stats: &ReadabilityStats) -> Vec<String> {
    let mut feedback = Vec::new();
    if stats.words_per_sentence() > LONG_SENTENCE_WORDS {
        feedback.push(format!(
            "shorten sentences: they average {:.0} words",
            stats.words_per_sentence()
        ));
    }
    let mut long_words: Vec<(usize, String)> = words_with_syllables(text)
        .filter(|(_, n)| *n >= LONG_WORD_SYLLABLES)
        .map(|(w, n)| (n, w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()))
        .collect();
    long_words.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    long_words.dedup_by(|a, b| a.1 == b.1);
    for (_, word) in long_words.into_iter().take(3) {
        feedback.push(format!("replace word \"{word}\" with a simpler one"));
    }
    feedback
}

pub fn build_language_prompt(mcq: &Mcq, band: GradeBand, model: &str) -> CompletionRequest {
    let grades = band.to_string();
    let option_lines: String = mcq.options().map(|o| format!("- {o}\n")).collect();
    let prompt = render(
        LANGUAGE_TEMPLATE,
        &[
            ("grades", &grades),
            ("stem", &mcq.stem),
            ("option_lines", &option_lines),
            ("schema", LanguageReviewSchema.describe()),
        ],
    );
    CompletionRequest::new(LANGUAGE_PROMPT_ID, prompt, LANGUAGE_REVIEW_V1)
        .with_model(model)
        .with_temperature(CRITIC_TEMPERATURE)
}

fn parse_language_output(payload: &Value) -> (Verdict, Vec<String>) {
    let verdict = match payload.get("verdict").and_then(Value::as_str) {
        Some(v) if v.eq_ignore_ascii_case("pass") => Verdict::Pass,
        _ => Verdict::Fail,
    };
    let feedback = payload
        .get("feedback")
        .and_then(Value::as_array)
        .map(|items| {
            items
                .iter()
                .filter_map(Value::as_str)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default();
    (verdict, feedback)
}

/// Reviews a question's language against `band`. When `llm` is given the
/// model's verdict must also be pass; the deterministic gate always applies.
pub fn review_language(
    mcq: &Mcq,
    band: GradeBand,
    llm: Option<(&Gateway, &str)>,
) -> Result<LanguageReport, LanguageError> {
    let text = question_text(mcq);
    let stats = readability(&text)?;
    let mut feedback = Vec::new();
    let mut verdict = Verdict::Pass;
    if let Some(message) = readability_gate(stats.grade, band) {
        verdict = Verdict::Fail;
        feedback.push(message);
        feedback.extend(concrete_feedback(&text, &stats));
    }
    if let Some((gateway, model)) = llm {
        let completion = gateway.complete_structured(&build_language_prompt(mcq, band, model))?;
        let (llm_verdict, llm_feedback) = parse_language_output(&completion.payload);
        if llm_verdict == Verdict::Fail {
            verdict = Verdict::Fail;
            if llm_feedback.is_empty() {
                feedback.push(format!("revise the wording for students in grades {band}"));
            }
            feedback.extend(llm_feedback);
        }
    }
    Ok(LanguageReport {
        fk_grade: stats.grade,
        verdict,
        feedback,
        llm_review_used: llm.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{fingerprint, Transcript, TranscriptEntry, DEFAULT_MODEL};
    use crate::mcq::fixtures::sample_question;
    use proptest::prelude::*;
    use serde_json::json;

    fn band() -> GradeBand {
        GradeBand::new(7, 9).unwrap()
    }

    #[test]
    fn syllable_examples() {
        assert_eq!(count_syllables("cat"), Ok(1));
        assert_eq!(count_syllables("originality"), Ok(6));
        assert_eq!(count_syllables("store"), Ok(1));
        assert_eq!(count_syllables("table"), Ok(2));
        assert_eq!(count_syllables("the"), Ok(1));
        assert_eq!(count_syllables("Story,"), Ok(2));
        assert_eq!(count_syllables("--"), Err(ReadabilityError::EmptyWord));
    }

    #[test]
    fn grade_examples() {
        let g = flesch_kincaid_grade("The cat sat on the mat.").unwrap();
        assert!((g - (-1.45)).abs() < 1e-9, "{g}");
        let g = flesch_kincaid_grade("cat").unwrap();
        assert!((g - (0.39 + 11.8 - 15.59)).abs() < 1e-9);
        assert!((g - (-3.40)).abs() < 1e-9);
        assert_eq!(flesch_kincaid_grade(""), Err(ReadabilityError::EmptyText));
        assert_eq!(flesch_kincaid_grade(" ... !"), Err(ReadabilityError::EmptyText));
    }

    #[test]
    fn sentence_counting() {
        assert_eq!(count_sentences("no terminal"), 1);
        assert_eq!(count_sentences("One. Two! Three?"), 3);
        assert_eq!(count_sentences("Wait... what?!"), 2);
    }

    #[test]
    fn gate_thresholds() {
        assert_eq!(readability_gate(8.2, band()), None);
        assert_eq!(readability_gate(10.0, band()), None);
        let msg = readability_gate(13.0, band()).unwrap();
        assert!(msg.contains("reduce sentence length or vocabulary complexity"));
        assert!(readability_gate(-3.0, band()).is_none());
    }

    #[test]
    fn sample_question_passes_for_grades_7_to_9() {
        let report = review_language(&sample_question(), band(), None).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.feedback.is_empty());
        assert!(!report.llm_review_used);
    }

    #[test]
    fn dense_question_fails_with_concrete_feedback() {
        let mut q = sample_question();
        q.stem = "Considering the organizational implications of implementing artificial intelligence \
                  technologies within educational institutions, which consideration is most \
                  fundamentally significant for administrators evaluating comprehensive adoption?"
            .into();
        let report = review_language(&q, band(), None).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.fk_grade > 10.0);
        assert!(report.feedback[0].contains("reduce sentence length or vocabulary complexity"));
        assert!(report.feedback.iter().any(|f| f.starts_with("replace word")));
    }

    fn replay_language(payload: Value) -> Gateway {
        let q = sample_question();
        let mut t = Transcript::new();
        t.insert(TranscriptEntry {
            fingerprint: fingerprint(&build_language_prompt(&q, band(), DEFAULT_MODEL)),
            prompt_id: None,
            response: payload,
        });
        Gateway::replay(t)
    }

    #[test]
    fn llm_fail_feedback_is_appended() {
        let gateway = replay_language(json!({"verdict": "fail", "feedback": ["define 'originality' or simplify"]}));
        let report = review_language(&sample_question(), band(), Some((&gateway, DEFAULT_MODEL))).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.llm_review_used);
        assert_eq!(report.feedback, vec!["define 'originality' or simplify".to_string()]);
    }

    #[test]
    fn llm_pass_cannot_override_gate() {
        let gateway = replay_language(json!({"verdict": "pass", "feedback": []}));
        let report = review_language(&sample_question(), GradeBand::new(1, 2).unwrap(), None).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        // the replayed prompt is for 7-9, so a 1-2 review would miss; check the pass path on 7-9
        let ok = review_language(&sample_question(), band(), Some((&gateway, DEFAULT_MODEL))).unwrap();
        assert!(ok.passed());
    }

    #[test]
    fn llm_fail_without_feedback_still_explains() {
        let gateway = replay_language(json!({"verdict": "fail"}));
        let report = review_language(&sample_question(), band(), Some((&gateway, DEFAULT_MODEL))).unwrap();
        assert_eq!(report.feedback.len(), 1);
    }

    proptest! {
        #[test]
        fn repeating_text_keeps_grade(words in proptest::collection::vec("[a-z]{1,12}", 1..25)) {
            let sentence = format!("{}.", words.join(" "));
            let once = flesch_kincaid_grade(&sentence).unwrap();
            let twice = flesch_kincaid_grade(&format!("{sentence} {sentence}")).unwrap();
            prop_assert!((once - twice).abs() < 1e-9);
        }

        #[test]
        fn syllables_at_least_one(word in "[a-zA-Z]{1,20}") {
            prop_assert!(count_syllables(&word).unwrap() >= 1);
        }
    }
}
