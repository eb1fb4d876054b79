//! Question domain types, validation and the canonical question-bank format.
//!
//! A bank file is JSONL: one [`BankEntry`] per line, fields in a fixed order
//! (`id`, `stem`, `key`, `distractors`, `bloom_level`, `grade_band`,
//! `learning_objective`, `scenario`, `status`, `revision`, `provenance`,
//! `display_order`). The key is always stored first in the semantic option
//! list; the letter it is shown under lives only in `display_order`.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Default number of options (key plus distractors) per question.
pub const DEFAULT_OPTION_COUNT: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("unknown Bloom level `{0}`")]
    UnknownBloomLevel(String),
    #[error("invalid grade band `{0}`: expected LOW-HIGH with 1 <= LOW <= HIGH <= 12")]
    InvalidGradeBand(String),
    #[error("learning objective must not be empty")]
    EmptyObjective,
    #[error("option_count must be at least 3, got {0}")]
    OptionCountTooSmall(usize),
    #[error("display order {0:?} is not a permutation of 0..{1}")]
    InvalidDisplayOrder(Vec<usize>, usize),
}

#[derive(Debug, Error)]
pub enum BankError {
    #[error("io error on question bank: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: question `{id}` is invalid: {violations}")]
    Invalid {
        line: usize,
        id: String,
        violations: String,
    },
    #[error("duplicate question id `{0}`")]
    DuplicateId(String),
}

// ---------------------------------------------------------------------------
// Bloom levels

/// The six cognitive levels of the revised Bloom taxonomy, lowest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BloomLevel {
    Remember,
    Understand,
    Apply,
    Analyze,
    Evaluate,
    Create,
}

impl BloomLevel {
    pub const ALL: [BloomLevel; 6] = [
        BloomLevel::Remember,
        BloomLevel::Understand,
        BloomLevel::Apply,
        BloomLevel::Analyze,
        BloomLevel::Evaluate,
        BloomLevel::Create,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BloomLevel::Remember => "Remember",
            BloomLevel::Understand => "Understand",
            BloomLevel::Apply => "Apply",
            BloomLevel::Analyze => "Analyze",
            BloomLevel::Evaluate => "Evaluate",
            BloomLevel::Create => "Create",
        }
    }

    /// One-line definition embedded in generation prompts.
    pub fn definition(self) -> &'static str {
        match self {
            BloomLevel::Remember => "recall facts, terms and basic concepts from memory",
            BloomLevel::Understand => "explain ideas or concepts in one's own words",
            BloomLevel::Apply => "use known information or procedures in a new situation",
            BloomLevel::Analyze => "break information into parts and identify relationships, causes or patterns",
            BloomLevel::Evaluate => "justify a decision or judgement by weighing evidence against criteria",
            BloomLevel::Create => "combine elements into a new idea, design or solution",
        }
    }
}

impl fmt::Display for BloomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a Bloom level label, case-insensitively.
///
/// Accepts the revised-taxonomy verbs, their gerunds, and the original
/// taxonomy nouns (Knowledge, Comprehension, Application, Analysis,
/// Synthesis, Evaluation), which map onto the revised levels.
pub fn parse_bloom(label: &str) -> Result<BloomLevel, DomainError> {
    let lowered = label.trim().to_lowercase();
    let level = match lowered.as_str() {
        "remember" | "remembering" | "knowledge" | "recall" => BloomLevel::Remember,
        "understand" | "understanding" | "comprehension" | "comprehend" => BloomLevel::Understand,
        "apply" | "applying" | "application" => BloomLevel::Apply,
        "analyze" | "analyse" | "analyzing" | "analysing" | "analysis" => BloomLevel::Analyze,
        "evaluate" | "evaluating" | "evaluation" => BloomLevel::Evaluate,
        "create" | "creating" | "synthesis" | "synthesize" | "synthesise" => BloomLevel::Create,
        _ => return Err(DomainError::UnknownBloomLevel(label.to_string())),
    };
    Ok(level)
}

impl FromStr for BloomLevel {
    type Err = DomainError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bloom(s)
    }
}

impl Serialize for BloomLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name().to_lowercase())
    }
}

impl<'de> Deserialize<'de> for BloomLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_bloom(&s).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Grade bands

/// Inclusive school-grade range, e.g. 7-9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GradeBand {
    low: u8,
    high: u8,
}

impl GradeBand {
    pub fn new(low: u8, high: u8) -> Result<Self, DomainError> {
        if low < 1 || low > high || high > 12 {
            return Err(DomainError::InvalidGradeBand(format!("{low}-{high}")));
        }
        Ok(Self { low, high })
    }

    pub fn low(self) -> u8 {
        self.low
    }

    pub fn high(self) -> u8 {
        self.high
    }
}

impl fmt::Display for GradeBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.low, self.high)
    }
}

impl FromStr for GradeBand {
    type Err = DomainError;

    /// Accepts "7-9", "K7-9", "7–9" and a single grade "8".
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DomainError::InvalidGradeBand(s.to_string());
        let trimmed = s.trim().trim_start_matches(['K', 'k']);
        let (lo, hi) = match trimmed.split_once(['-', '–']) {
            Some((lo, hi)) => (lo.trim(), hi.trim()),
            None => (trimmed, trimmed),
        };
        let low = lo.parse::<u8>().map_err(|_| bad())?;
        let high = hi.parse::<u8>().map_err(|_| bad())?;
        GradeBand::new(low, high).map_err(|_| bad())
    }
}

impl Serialize for GradeBand {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GradeBand {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Requests

/// The user inputs that steer generation of one question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub learning_objective: String,
    pub bloom_level: BloomLevel,
    pub grade_band: GradeBand,
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default = "default_option_count")]
    pub option_count: usize,
}

fn default_option_count() -> usize {
    DEFAULT_OPTION_COUNT
}

impl GenerationRequest {
    pub fn new(
        learning_objective: impl Into<String>,
        bloom_level: BloomLevel,
        grade_band: GradeBand,
    ) -> Self {
        Self {
            learning_objective: learning_objective.into(),
            bloom_level,
            grade_band,
            scenario: None,
            option_count: DEFAULT_OPTION_COUNT,
        }
    }

    pub fn with_scenario(mut self, scenario: impl Into<String>) -> Self {
        self.scenario = Some(scenario.into());
        self
    }

    pub fn with_option_count(mut self, option_count: usize) -> Self {
        self.option_count = option_count;
        self
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.learning_objective.trim().is_empty() {
            return Err(DomainError::EmptyObjective);
        }
        if self.option_count < 3 {
            return Err(DomainError::OptionCountTooSmall(self.option_count));
        }
        Ok(())
    }

    /// Scenario text, treating blank strings as absent.
    pub fn scenario(&self) -> Option<&str> {
        self.scenario.as_deref().map(str::trim).filter(|s| !s.is_empty())
    }

    pub fn distractor_count(&self) -> usize {
        self.option_count.saturating_sub(1)
    }
}

// ---------------------------------------------------------------------------
// Questions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionStatus {
    Draft,
    Approved,
    NeedsHumanReview,
}

/// Where a question's text came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Prompt template id that produced this text, e.g. `generate.v1`.
    pub template: String,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mcq {
    pub id: String,
    pub stem: String,
    pub key: String,
    pub distractors: Vec<String>,
    pub bloom_level: BloomLevel,
    pub grade_band: GradeBand,
    pub learning_objective: String,
    pub scenario: Option<String>,
    pub status: QuestionStatus,
    pub revision: u32,
    pub provenance: Provenance,
}

impl Mcq {
    /// Semantic option list: key first, then distractors in stored order.
    pub fn options(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.key.as_str()).chain(self.distractors.iter().map(String::as_str))
    }

    pub fn option_count(&self) -> usize {
        1 + self.distractors.len()
    }

    /// Stem followed by every option, used where text is scanned as a whole.
    pub fn all_text(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.stem.as_str()).chain(self.options())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Id,
    Stem,
    Key,
    Distractor(usize),
    Distractors,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Id => f.write_str("id"),
            Field::Stem => f.write_str("stem"),
            Field::Key => f.write_str("key"),
            Field::Distractor(i) => write!(f, "distractors[{i}]"),
            Field::Distractors => f.write_str("distractors"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Empty,
    NoDistractors,
    DuplicateOfKey,
    DuplicateOfDistractor(usize),
}

/// One broken question invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: Field,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::Empty => match self.field {
                Field::Stem => f.write_str("empty stem"),
                Field::Key => f.write_str("empty key"),
                Field::Id => f.write_str("empty id"),
                other => write!(f, "empty {other}"),
            },
            ViolationKind::NoDistractors => f.write_str("no distractors"),
            ViolationKind::DuplicateOfKey => write!(f, "{}: duplicate of key", self.field),
            ViolationKind::DuplicateOfDistractor(j) => {
                write!(f, "{}: duplicate of distractors[{j}]", self.field)
            }
        }
    }
}

/// Checks every question invariant; an empty list means the question is valid.
pub fn validate_mcq(mcq: &Mcq) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut push = |field, kind| violations.push(Violation { field, kind });

    if mcq.id.trim().is_empty() {
        push(Field::Id, ViolationKind::Empty);
    }
    if normalize_whitespace(&mcq.stem).is_empty() {
        push(Field::Stem, ViolationKind::Empty);
    }
    let key = normalize_text(&mcq.key);
    if normalize_whitespace(&mcq.key).is_empty() {
        push(Field::Key, ViolationKind::Empty);
    }
    if mcq.distractors.is_empty() {
        push(Field::Distractors, ViolationKind::NoDistractors);
    }

    let normalized: Vec<String> = mcq.distractors.iter().map(|d| normalize_text(d)).collect();
    for (i, d) in mcq.distractors.iter().enumerate() {
        if normalize_whitespace(d).is_empty() {
            push(Field::Distractor(i), ViolationKind::Empty);
            continue;
        }
        if !key.is_empty() && normalized[i] == key {
            push(Field::Distractor(i), ViolationKind::DuplicateOfKey);
            continue;
        }
        if let Some(j) = normalized[..i].iter().position(|earlier| *earlier == normalized[i]) {
            push(Field::Distractor(i), ViolationKind::DuplicateOfDistractor(j));
        }
    }
    violations
}

pub fn describe_violations(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

// ---------------------------------------------------------------------------
// Text normalization

const TERMINAL_PUNCTUATION: &[char] = &['.', '!', '?', ',', ';', ':', '…'];

fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Comparison form of a piece of option text.
///
/// Lowercases, collapses whitespace runs to one space, trims, and strips
/// trailing punctuation. Only ever used for comparisons; stored text keeps
/// its original form.
pub fn normalize_text(s: &str) -> String {
    let mut out = normalize_whitespace(&s.to_lowercase());
    loop {
        let stripped = out.trim_end_matches(TERMINAL_PUNCTUATION).trim_end();
        if stripped.len() == out.len() {
            break;
        }
        out.truncate(stripped.len());
    }
    out
}

// ---------------------------------------------------------------------------
// Display order

/// Presentation order of a question's options.
///
/// Entry `i` is the index into the semantic option list (`0` = key,
/// `1..` = distractors) shown under letter `i` (A, B, C, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DisplayOrder(Vec<usize>);

impl DisplayOrder {
    pub fn new(order: Vec<usize>) -> Result<Self, DomainError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(DomainError::InvalidDisplayOrder(order, n));
            }
        }
        Ok(Self(order))
    }

    /// Key under A, distractors in stored order.
    pub fn identity(option_count: usize) -> Self {
        Self((0..option_count).collect())
    }

    /// Reproducible shuffle derived from a run seed and the question id, so the
    /// result does not depend on which worker processed which question.
    pub fn seeded(option_count: usize, seed: u64, question_id: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(question_id.as_bytes());
        let digest = hasher.finalize();
        let mut bytes = [0u8; 32];
        bytes.copy_from_slice(&digest[..32]);
        let mut rng = ChaCha8Rng::from_seed(bytes);
        let mut order: Vec<usize> = (0..option_count).collect();
        order.shuffle(&mut rng);
        Self(order)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Position (0-based) at which the key is displayed.
    pub fn key_position(&self) -> usize {
        self.0.iter().position(|&i| i == 0).unwrap_or(0)
    }

    /// Options of `mcq` in display order.
    pub fn arrange<'a>(&self, mcq: &'a Mcq) -> Vec<&'a str> {
        let options: Vec<&str> = mcq.options().collect();
        self.0.iter().map(|&i| options[i]).collect()
    }
}

/// Letter shown for a 0-based display position: A, B, ..., Z, AA, AB, ...
pub fn option_letter(position: usize) -> String {
    let mut n = position;
    let mut letters = Vec::new();
    loop {
        letters.push((b'A' + (n % 26) as u8) as char);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    letters.iter().rev().collect()
}

// ---------------------------------------------------------------------------
// Bank persistence

/// One line of a question-bank file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankEntry {
    #[serde(flatten)]
    pub mcq: Mcq,
    pub display_order: DisplayOrder,
}

impl BankEntry {
    pub fn new(mcq: Mcq, seed: u64) -> Self {
        let display_order = DisplayOrder::seeded(mcq.option_count(), seed, &mcq.id);
        Self { mcq, display_order }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("bank entries always serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self, String> {
        let entry: BankEntry = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if entry.display_order.len() != entry.mcq.option_count() {
            return Err(format!(
                "display_order has {} entries but the question has {} options",
                entry.display_order.len(),
                entry.mcq.option_count()
            ));
        }
        DisplayOrder::new(entry.display_order.0.clone()).map_err(|e| e.to_string())?;
        Ok(entry)
    }
}

pub fn write_bank<W: Write>(mut out: W, bank: &[BankEntry]) -> std::io::Result<()> {
    for entry in bank {
        writeln!(out, "{}", entry.to_json_line())?;
    }
    out.flush()
}

pub fn bank_to_string(bank: &[BankEntry]) -> String {
    bank.iter().map(|e| e.to_json_line() + "\n").collect()
}

/// Reads a JSONL bank, validating every question. Blank lines are skipped.
pub fn read_bank<R: BufRead>(input: R) -> Result<Vec<BankEntry>, BankError> {
    let mut bank: Vec<BankEntry> = Vec::new();
    let mut ids = std::collections::HashSet::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = BankEntry::from_json_line(&line).map_err(|message| BankError::Parse {
            line: line_no,
            message,
        })?;
        let violations = validate_mcq(&entry.mcq);
        if !violations.is_empty() {
            return Err(BankError::Invalid {
                line: line_no,
                id: entry.mcq.id.clone(),
                violations: describe_violations(&violations),
            });
        }
        if !ids.insert(entry.mcq.id.clone()) {
            return Err(BankError::DuplicateId(entry.mcq.id));
        }
        bank.push(entry);
    }
    Ok(bank)
}

pub fn load_bank(path: impl AsRef<Path>) -> Result<Vec<BankEntry>, BankError> {
    let file = std::fs::File::open(path)?;
    read_bank(std::io::BufReader::new(file))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// The sample AI-literacy question used throughout the tests.
    pub fn sample_question() -> Mcq {
        Mcq {
            id: "sample".into(),
            stem: "Ben is considering using an AI tool to help him write a creative story. \
                   Which of the following reasons best explains when using AI might be a bad \
                   choice for his learning?"
                .into(),
            key: "It may produce a story that lacks originality and personal expression.".into(),
            distractors: vec![
                "AI can provide quick feedback on grammar and structure.".into(),
                "Using AI can help him brainstorm new ideas for his story.".into(),
                "AI tools can assist in organizing his thoughts more effectively.".into(),
            ],
            bloom_level: BloomLevel::Evaluate,
            grade_band: GradeBand::new(7, 9).unwrap(),
            learning_objective: "evaluate when AI use helps or harms learning".into(),
            scenario: Some("creative writing".into()),
            status: QuestionStatus::Draft,
            revision: 0,
            provenance: Provenance {
                template: "generate.v1".into(),
                model: "gpt-4o-mini-2024-07-18".into(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::sample_question;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sample_question_is_valid() {
        assert!(validate_mcq(&sample_question()).is_empty());
    }

    #[test]
    fn distractor_equal_to_key_is_one_violation() {
        let mut q = sample_question();
        q.distractors[1] = "  it may produce a story that lacks originality and personal expression".into();
        let v = validate_mcq(&q);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::DuplicateOfKey);
        assert!(v[0].to_string().contains("duplicate of key"));
    }

    #[test]
    fn empty_stem_is_one_violation() {
        let mut q = sample_question();
        q.stem = " \t ".into();
        let v = validate_mcq(&q);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "empty stem");
    }

    #[test]
    fn duplicate_distractors_and_missing_distractors() {
        let mut q = sample_question();
        q.distractors[2] = q.distractors[0].to_uppercase();
        let v = validate_mcq(&q);
        assert_eq!(v, vec![Violation {
            field: Field::Distractor(2),
            kind: ViolationKind::DuplicateOfDistractor(0)
        }]);

        q.distractors.clear();
        assert_eq!(validate_mcq(&q)[0].kind, ViolationKind::NoDistractors);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_text("  All of the Above. "), "all of the above");
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("AI\ttools"), "ai tools");
        assert_eq!(normalize_text("Really?! ."), "really");
    }

    #[test]
    fn bloom_parsing() {
        assert_eq!(parse_bloom("evaluate").unwrap(), BloomLevel::Evaluate);
        assert_eq!(parse_bloom("Knowledge").unwrap(), BloomLevel::Remember);
        assert_eq!(parse_bloom("comprehension").unwrap(), BloomLevel::Understand);
        assert_eq!(parse_bloom("Synthesis").unwrap(), BloomLevel::Create);
        assert_eq!(
            parse_bloom("bloomish"),
            Err(DomainError::UnknownBloomLevel("bloomish".into()))
        );
        assert!(BloomLevel::Remember < BloomLevel::Create);
        assert_eq!(BloomLevel::ALL.len(), 6);
        assert!(BloomLevel::ALL.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grade_band_parsing_and_bounds() {
        assert_eq!("7-9".parse::<GradeBand>().unwrap(), GradeBand::new(7, 9).unwrap());
        assert_eq!("K7-9".parse::<GradeBand>().unwrap(), GradeBand::new(7, 9).unwrap());
        assert_eq!("8".parse::<GradeBand>().unwrap(), GradeBand::new(8, 8).unwrap());
        assert!("9-7".parse::<GradeBand>().is_err());
        assert!("0-3".parse::<GradeBand>().is_err());
        assert!("10-13".parse::<GradeBand>().is_err());
    }

    #[test]
    fn request_validation() {
        let band = GradeBand::new(7, 9).unwrap();
        let req = GenerationRequest::new("x", BloomLevel::Apply, band);
        assert_eq!(req.option_count, 4);
        assert!(req.validate().is_ok());
        assert_eq!(
            req.clone().with_option_count(2).validate(),
            Err(DomainError::OptionCountTooSmall(2))
        );
        let empty = GenerationRequest::new("  ", BloomLevel::Apply, band);
        assert_eq!(empty.validate(), Err(DomainError::EmptyObjective));
    }

    #[test]
    fn display_order_is_seeded_and_bijective() {
        let a = DisplayOrder::seeded(4, 42, "q1");
        let b = DisplayOrder::seeded(4, 42, "q1");
        assert_eq!(a, b);
        let mut sorted = a.as_slice().to_vec();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        assert!(DisplayOrder::new(vec![0, 0, 1]).is_err());
        assert!(DisplayOrder::new(vec![0, 3, 1]).is_err());

        // across many ids the key is not pinned to one letter
        let positions: std::collections::HashSet<usize> = (0..40)
            .map(|i| DisplayOrder::seeded(4, 7, &format!("q{i}")).key_position())
            .collect();
        assert!(positions.len() > 1);
    }

    #[test]
    fn letters() {
        assert_eq!(option_letter(0), "A");
        assert_eq!(option_letter(3), "D");
        assert_eq!(option_letter(25), "Z");
        assert_eq!(option_letter(26), "AA");
    }

    #[test]
    fn bank_line_field_order() {
        let entry = BankEntry {
            mcq: sample_question(),
            display_order: DisplayOrder::identity(4),
        };
        let line = entry.to_json_line();
        let fields = [
            "\"id\"", "\"stem\"", "\"key\"", "\"distractors\"", "\"bloom_level\"",
            "\"grade_band\"", "\"learning_objective\"", "\"scenario\"", "\"status\"",
            "\"revision\"", "\"provenance\"", "\"display_order\"",
        ];
        let positions: Vec<usize> = fields.iter().map(|f| line.find(f).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{line}");
        assert!(line.contains("\"grade_band\":\"7-9\""));
        assert!(line.contains("\"bloom_level\":\"evaluate\""));
    }

    #[test]
    fn bank_reader_rejects_bad_lines() {
        let good = BankEntry::new(sample_question(), 1).to_json_line();
        let text = format!("{good}\n\n{{not json}}\n");
        match read_bank(text.as_bytes()) {
            Err(BankError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let dup = format!("{good}\n{good}\n");
        assert!(matches!(read_bank(dup.as_bytes()), Err(BankError::DuplicateId(_))));
    }

    fn arb_text() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-zA-Z ,.?!\t\"\\\\/]{1,40}",
            any::<String>(),
        ]
        .prop_filter("needs visible text", |s| !s.trim().is_empty())
    }

    prop_compose! {
        fn arb_mcq()(
            id in "[a-z0-9]{1,8}",
            stem in arb_text(),
            key in arb_text(),
            distractors in proptest::collection::vec(arb_text(), 1..5),
            bloom in 0usize..6,
            low in 1u8..=12,
            span in 0u8..4,
            objective in arb_text(),
            scenario in proptest::option::of(arb_text()),
            revision in 0u32..5,
        ) -> Mcq {
            Mcq {
                id,
                stem,
                key,
                distractors,
                bloom_level: BloomLevel::ALL[bloom],
                grade_band: GradeBand::new(low, (low + span).min(12)).unwrap(),
                learning_objective: objective,
                scenario,
                status: QuestionStatus::Draft,
                revision,
                provenance: Provenance { template: "generate.v1".into(), model: "m".into() },
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn normalize_is_idempotent(s in any::<String>()) {
            let once = normalize_text(&s);
            prop_assert_eq!(normalize_text(&once), once);
        }

        #[test]
        fn serialization_round_trip_is_byte_identical(mcq in arb_mcq(), seed in any::<u64>()) {
            let entry = BankEntry::new(mcq, seed);
            let line = entry.to_json_line();
            let parsed = BankEntry::from_json_line(&line).unwrap();
            prop_assert_eq!(&parsed, &entry);
            prop_assert_eq!(parsed.to_json_line(), line);
        }

        #[test]
        fn validation_is_pure(mcq in arb_mcq()) {
            prop_assert_eq!(validate_mcq(&mcq), validate_mcq(&mcq));
        }
    }
}
