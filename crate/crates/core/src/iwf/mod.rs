//! The item-writing-flaw critic.
//!
//! Fourteen deterministic rules (see [`rules`]) plus an optional model probe
//! for the three flaws that need semantic judgement. A report's flaw count is
//! the number of distinct categories flagged, not the number of triggers.

mod config;
mod probe;
pub mod rules;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{parse_lexicon, IwfConfig, Lexicons};
pub use probe::{build_probe_prompt, llm_flaw_probe, parse_probe_output, PROBE_PROMPT_ID};
pub use rules::{FlawRule, LintContext, RuleRegistry};

use crate::gateway::{Gateway, GatewayError};
use crate::mcq::Mcq;

/// Default acceptance threshold: zero or one flaw is acceptable.
pub const DEFAULT_MAX_FLAWS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FlawCategory {
    LongestOptionCorrect,
    AllOfTheAbove,
    NoneOfTheAbove,
    AbsoluteTerms,
    VagueFrequencyTerms,
    UnemphasizedNegation,
    TrueFalseOptions,
    ComplexKType,
    ClangAssociation,
    GrammaticalCue,
    FillInTheBlank,
    UnfocusedStem,
    GratuitousStem,
    DuplicateOptions,
    ImplausibleDistractor,
    MultipleCorrect,
    AmbiguousInformation,
}

impl FlawCategory {
    pub const DETERMINISTIC: [FlawCategory; 14] = [
        FlawCategory::LongestOptionCorrect,
        FlawCategory::AllOfTheAbove,
        FlawCategory::NoneOfTheAbove,
        FlawCategory::AbsoluteTerms,
        FlawCategory::VagueFrequencyTerms,
        FlawCategory::UnemphasizedNegation,
        FlawCategory::TrueFalseOptions,
        FlawCategory::ComplexKType,
        FlawCategory::ClangAssociation,
        FlawCategory::GrammaticalCue,
        FlawCategory::FillInTheBlank,
        FlawCategory::UnfocusedStem,
        FlawCategory::GratuitousStem,
        FlawCategory::DuplicateOptions,
    ];

    pub const LLM_ASSISTED: [FlawCategory; 3] = [
        FlawCategory::ImplausibleDistractor,
        FlawCategory::MultipleCorrect,
        FlawCategory::AmbiguousInformation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FlawCategory::LongestOptionCorrect => "LongestOptionCorrect",
            FlawCategory::AllOfTheAbove => "AllOfTheAbove",
            FlawCategory::NoneOfTheAbove => "NoneOfTheAbove",
            FlawCategory::AbsoluteTerms => "AbsoluteTerms",
            FlawCategory::VagueFrequencyTerms => "VagueFrequencyTerms",
            FlawCategory::UnemphasizedNegation => "UnemphasizedNegation",
            FlawCategory::TrueFalseOptions => "TrueFalseOptions",
            FlawCategory::ComplexKType => "ComplexKType",
            FlawCategory::ClangAssociation => "ClangAssociation",
            FlawCategory::GrammaticalCue => "GrammaticalCue",
            FlawCategory::FillInTheBlank => "FillInTheBlank",
            FlawCategory::UnfocusedStem => "UnfocusedStem",
            FlawCategory::GratuitousStem => "GratuitousStem",
            FlawCategory::DuplicateOptions => "DuplicateOptions",
            FlawCategory::ImplausibleDistractor => "ImplausibleDistractor",
            FlawCategory::MultipleCorrect => "MultipleCorrect",
            FlawCategory::AmbiguousInformation => "AmbiguousInformation",
        }
    }

    pub fn is_deterministic(self) -> bool {
        !Self::LLM_ASSISTED.contains(&self)
    }

    /// Revision instruction sent to the generator when this flaw is flagged.
    pub fn remediation(self) -> &'static str {
        match self {
            FlawCategory::LongestOptionCorrect => "make the correct answer about the same length as the distractors",
            FlawCategory::AllOfTheAbove => "replace the 'all of the above' option with a plausible distractor",
            FlawCategory::NoneOfTheAbove => "replace the 'none of the above' option with a plausible distractor",
            FlawCategory::AbsoluteTerms => "remove absolute words such as 'always', 'never' or 'only' from the options",
            FlawCategory::VagueFrequencyTerms => "replace vague frequency words such as 'often' or 'sometimes' with precise wording",
            FlawCategory::UnemphasizedNegation => "rephrase the stem positively, or write the negation in capitals (NOT, EXCEPT)",
            FlawCategory::TrueFalseOptions => "replace true/false or yes/no options with substantive answer choices",
            FlawCategory::ComplexKType => "remove options that combine other options (such as 'A and B')",
            FlawCategory::ClangAssociation => "avoid repeating a stem word only in the correct answer",
            FlawCategory::GrammaticalCue => "make every option fit the stem grammatically, including the article a/an",
            FlawCategory::FillInTheBlank => "rewrite the stem as a complete question instead of a fill-in-the-blank",
            FlawCategory::UnfocusedStem => "expand the stem into a clear, focused question",
            FlawCategory::GratuitousStem => "shorten the stem by removing information not needed to answer",
            FlawCategory::DuplicateOptions => "make every option express a distinct idea",
            FlawCategory::ImplausibleDistractor => "replace implausible distractors with ones a student might believe",
            FlawCategory::MultipleCorrect => "make sure exactly one option is defensibly correct",
            FlawCategory::AmbiguousInformation => "remove ambiguity from the stem and options",
        }
    }
}

impl fmt::Display for FlawCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlawCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::DETERMINISTIC
            .iter()
            .chain(Self::LLM_ASSISTED.iter())
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown flaw category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flag {
    pub category: FlawCategory,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IwfReport {
    pub flags: Vec<Flag>,
    pub flaw_count: usize,
    pub llm_probe_used: bool,
}

impl IwfReport {
    /// Sorts and de-duplicates `flags` and counts distinct categories.
    pub fn from_flags(mut flags: Vec<Flag>, llm_probe_used: bool) -> Self {
        flags.sort();
        flags.dedup();
        let mut categories: Vec<FlawCategory> = flags.iter().map(|f| f.category).collect();
        categories.dedup();
        Self {
            flaw_count: categories.len(),
            flags,
            llm_probe_used,
        }
    }

    pub fn categories(&self) -> Vec<FlawCategory> {
        let mut c: Vec<FlawCategory> = self.flags.iter().map(|f| f.category).collect();
        c.dedup();
        c
    }

    pub fn has(&self, category: FlawCategory) -> bool {
        self.flags.iter().any(|f| f.category == category)
    }
}

/// Runs the standard deterministic rules.
pub fn lint(mcq: &Mcq, config: &IwfConfig) -> IwfReport {
    IwfCritic::new(config.clone()).lint(mcq)
}

/// Zero to `max_flaws` distinct flaws is acceptable.
pub fn is_acceptable(report: &IwfReport, max_flaws: usize) -> bool {
    report.flaw_count <= max_flaws
}

/// The critic agent: a rule registry plus configuration.
#[derive(Clone)]
pub struct IwfCritic {
    registry: RuleRegistry,
    config: IwfConfig,
}

impl Default for IwfCritic {
    fn default() -> Self {
        Self::new(IwfConfig::default())
    }
}

impl IwfCritic {
    pub fn new(config: IwfConfig) -> Self {
        Self::with_registry(RuleRegistry::standard(), config)
    }

    pub fn with_registry(registry: RuleRegistry, config: IwfConfig) -> Self {
        Self { registry, config }
    }

    pub fn config(&self) -> &IwfConfig {
        &self.config
    }

    pub fn registry(&self) -> &RuleRegistry {
        &self.registry
    }

    fn deterministic_flags(&self, mcq: &Mcq) -> Vec<Flag> {
        let ctx = LintContext::new(mcq);
        self.registry
            .rules()
            .filter(|rule| !self.config.disabled.contains(&rule.category()))
            .flat_map(|rule| {
                rule.check(&ctx, &self.config)
                    .into_iter()
                    .map(move |evidence| Flag { category: rule.category(), evidence })
            })
            .collect()
    }

    pub fn lint(&self, mcq: &Mcq) -> IwfReport {
        IwfReport::from_flags(self.deterministic_flags(mcq), false)
    }

    /// Deterministic rules, then the model probe when `probe` is given.
    pub fn review(&self, mcq: &Mcq, probe: Option<(&Gateway, &str)>) -> Result<IwfReport, GatewayError> {
        let mut flags = self.deterministic_flags(mcq);
        let Some((gateway, model)) = probe else {
            return Ok(IwfReport::from_flags(flags, false));
        };
        flags.extend(
            llm_flaw_probe(mcq, gateway, model)?
                .into_iter()
                .filter(|f| !self.config.disabled.contains(&f.category)),
        );
        Ok(IwfReport::from_flags(flags, true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcq::fixtures::sample_question;

    fn with_options(key: &str, distractors: &[&str]) -> Mcq {
        let mut q = sample_question();
        q.stem = "Which statement best describes how this chatbot handles student questions?".into();
        q.key = key.into();
        q.distractors = distractors.iter().map(|s| s.to_string()).collect();
        q
    }

    #[test]
    fn sample_question_has_no_deterministic_flaws() {
        let report = lint(&sample_question(), &IwfConfig::default());
        assert_eq!(report.flaw_count, 0, "{:?}", report.flags);
        assert!(!report.llm_probe_used);
    }

    #[test]
    fn all_of_the_above_is_flagged() {
        let q = with_options("It helps", &["All of the above", "It hinders", "It varies"]);
        let report = lint(&q, &IwfConfig::default());
        assert!(report.has(FlawCategory::AllOfTheAbove));
        assert!(!report.has(FlawCategory::AbsoluteTerms));
    }

    #[test]
    fn absolute_term_in_key_is_flagged_with_evidence() {
        let q = with_options(
            "AI always produces perfect text",
            &["AI may produce some errors", "AI can misread a prompt", "AI might repeat itself"],
        );
        let report = lint(&q, &IwfConfig::default());
        let flags: Vec<_> = report.flags.iter().filter(|f| f.category == FlawCategory::AbsoluteTerms).collect();
        assert_eq!(flags.len(), 1);
        assert!(flags[0].evidence.contains("always"));
    }

    #[test]
    fn acceptance_threshold() {
        let flag = |c| Flag { category: c, evidence: "x".into() };
        let zero = IwfReport::from_flags(vec![], false);
        let one = IwfReport::from_flags(vec![flag(FlawCategory::AbsoluteTerms), flag(FlawCategory::AbsoluteTerms)], false);
        let two = IwfReport::from_flags(vec![flag(FlawCategory::AbsoluteTerms), flag(FlawCategory::AllOfTheAbove)], false);
        assert_eq!(one.flaw_count, 1);
        assert!(is_acceptable(&zero, DEFAULT_MAX_FLAWS));
        assert!(is_acceptable(&one, DEFAULT_MAX_FLAWS));
        assert!(!is_acceptable(&two, DEFAULT_MAX_FLAWS));
    }

    #[test]
    fn disabled_rules_are_skipped() {
        let q = with_options("It helps", &["All of the above", "It hinders", "It varies"]);
        let mut config = IwfConfig::default();
        config.disabled.insert(FlawCategory::AllOfTheAbove);
        assert!(!lint(&q, &config).has(FlawCategory::AllOfTheAbove));
    }

    #[test]
    fn category_names_round_trip() {
        for c in FlawCategory::DETERMINISTIC.iter().chain(FlawCategory::LLM_ASSISTED.iter()) {
            assert_eq!(c.name().parse::<FlawCategory>().unwrap(), *c);
            assert_eq!(serde_json::to_string(c).unwrap(), format!("\"{}\"", c.name()));
        }
        assert!(FlawCategory::DETERMINISTIC.iter().all(|c| c.is_deterministic()));
        assert!(FlawCategory::LLM_ASSISTED.iter().all(|c| !c.is_deterministic()));
    }
}
