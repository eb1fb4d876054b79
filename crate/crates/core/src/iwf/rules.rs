//! Deterministic item-writing-flaw rules.
//!
//! Each rule implements [`FlawRule`] and is registered by category name in a
//! [`RuleRegistry`]. Rules only see a [`LintContext`], which holds the
//! normalized and tokenized question, so casing and whitespace never change
//! a verdict.

use std::collections::{BTreeMap, HashSet};
use std::sync::{Arc, OnceLock};

use regex::Regex;

use super::config::IwfConfig;
use super::FlawCategory;
use crate::mcq::{normalize_text, Mcq};

const META_PHRASES: [&str; 6] = [
    "all of the above",
    "all the above",
    "all of these",
    "none of the above",
    "none the above",
    "none of these",
];

pub(crate) fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|t| t.trim_matches('\''))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn strip_meta_phrases(normalized: &str) -> String {
    META_PHRASES.iter().fold(normalized.to_string(), |acc, p| acc.replace(p, " "))
}

pub struct OptionView<'a> {
    pub text: &'a str,
    pub normalized: String,
    /// Tokens with catch-all phrases such as "all of the above" removed.
    pub tokens: Vec<String>,
    pub is_key: bool,
    /// A catch-all option ("all/none of the above").
    pub is_meta: bool,
}

/// Precomputed view of one question shared by every rule.
pub struct LintContext<'a> {
    pub mcq: &'a Mcq,
    pub stem_tokens: Vec<String>,
    pub options: Vec<OptionView<'a>>,
}

impl<'a> LintContext<'a> {
    pub fn new(mcq: &'a Mcq) -> Self {
        let options = mcq
            .options()
            .enumerate()
            .map(|(i, text)| {
                let normalized = normalize_text(text);
                let is_meta = META_PHRASES.iter().any(|p| normalized.contains(p));
                let tokens = tokenize(&strip_meta_phrases(&normalized));
                OptionView { text, normalized, tokens, is_key: i == 0, is_meta }
            })
            .collect();
        Self {
            mcq,
            stem_tokens: tokenize(&mcq.stem),
            options,
        }
    }

    pub fn key(&self) -> &OptionView<'a> {
        &self.options[0]
    }

    pub fn distractors(&self) -> impl Iterator<Item = &OptionView<'a>> {
        self.options.iter().skip(1)
    }
}

/// One deterministic check. Returns one evidence string per trigger; an empty
/// vector means the rule did not fire.
pub trait FlawRule: Send + Sync {
    fn category(&self) -> FlawCategory;
    fn check(&self, ctx: &LintContext<'_>, config: &IwfConfig) -> Vec<String>;
}

#[derive(Clone, Default)]
pub struct RuleRegistry {
    rules: BTreeMap<FlawCategory, Arc<dyn FlawRule>>,
}

impl RuleRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// All fourteen deterministic rules.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(LongestOptionCorrect));
        r.register(Arc::new(AllOfTheAbove));
        r.register(Arc::new(NoneOfTheAbove));
        r.register(Arc::new(AbsoluteTerms));
        r.register(Arc::new(VagueFrequencyTerms));
        r.register(Arc::new(UnemphasizedNegation));
        r.register(Arc::new(TrueFalseOptions));
        r.register(Arc::new(ComplexKType));
        r.register(Arc::new(ClangAssociation));
        r.register(Arc::new(GrammaticalCue));
        r.register(Arc::new(FillInTheBlank));
        r.register(Arc::new(UnfocusedStem));
        r.register(Arc::new(GratuitousStem));
        r.register(Arc::new(DuplicateOptions));
        r
    }

    /// Registers `rule`, replacing any rule for the same category.
    pub fn register(&mut self, rule: Arc<dyn FlawRule>) {
        self.rules.insert(rule.category(), rule);
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn FlawRule>> {
        let category = name.parse::<FlawCategory>().ok()?;
        self.rules.get(&category)
    }

    pub fn categories(&self) -> impl Iterator<Item = FlawCategory> + '_ {
        self.rules.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rules(&self) -> impl Iterator<Item = &Arc<dyn FlawRule>> {
        self.rules.values()
    }
}

fn quote(text: &str) -> String {
    format!("\"{}\"", text.trim())
}

pub struct LongestOptionCorrect;

impl FlawRule for LongestOptionCorrect {
    fn category(&self) -> FlawCategory {
        FlawCategory::LongestOptionCorrect
    }

    fn check(&self, ctx: &LintContext<'_>, config: &IwfConfig) -> Vec<String> {
        let lengths: Vec<usize> = ctx
            .distractors()
            .filter(|d| !d.is_meta)
            .map(|d| d.normalized.chars().count())
            .collect();
        if lengths.is_empty() {
            return vec![];
        }
        let mean = lengths.iter().sum::<usize>() as f64 / lengths.len() as f64;
        let key_len = ctx.key().normalized.chars().count();
        if key_len as f64 > config.longest_option_ratio * mean {
            vec![format!(
                "key {} has {key_len} characters, more than {}x the mean distractor length {mean:.1}",
                quote(ctx.key().text),
                config.longest_option_ratio
            )]
        } else {
            vec![]
        }
    }
}

fn phrase_rule(ctx: &LintContext<'_>, phrases: &[&str]) -> Vec<String> {
    ctx.options
        .iter()
        .filter(|o| phrases.iter().any(|p| o.normalized.contains(p)))
        .map(|o| format!("option {}", quote(o.text)))
        .collect()
}

pub struct AllOfTheAbove;

impl FlawRule for AllOfTheAbove {
    fn category(&self) -> FlawCategory {
        FlawCategory::AllOfTheAbove
    }

    fn check(&self, ctx: &LintContext<'_>, _: &IwfConfig) -> Vec<String> {
        phrase_rule(ctx, &META_PHRASES[..3])
    }
}

pub struct NoneOfTheAbove;

impl FlawRule for NoneOfTheAbove {
    fn category(&self) -> FlawCategory {
        FlawCategory::NoneOfTheAbove
    }

    fn check(&self, ctx: &LintContext<'_>, _: &IwfConfig) -> Vec<String> {
        phrase_rule(ctx, &META_PHRASES[3..])
    }
}

fn lexicon_hits<'c>(
    ctx: &'c LintContext<'_>,
    lexicon: &'c std::collections::BTreeSet<String>,
) -> impl Iterator<Item = String> + 'c {
    ctx.options.iter().flat_map(move |o| {
        o.tokens
            .iter()
            .filter(|t| lexicon.contains(t.as_str()))
            .map(move |t| format!("\"{t}\" in option {}", quote(o.text)))
    })
}

pub struct AbsoluteTerms;

impl FlawRule for AbsoluteTerms {
    fn category(&self) -> FlawCategory {
        FlawCategory::AbsoluteTerms
    }

    fn check(&self, ctx: &LintContext<'_>, config: &IwfConfig) -> Vec<String> {
        lexicon_hits(ctx, &config.lexicons.absolute_terms).collect()
    }
}

pub struct VagueFrequencyTerms;

impl FlawRule for VagueFrequencyTerms {
    fn category(&self) -> FlawCategory {
        FlawCategory::VagueFrequencyTerms
    }

    fn check(&self, ctx: &LintContext<'_>, config: &IwfConfig) -> Vec<String> {
        let lexicon = &config.lexicons.vague_frequency_terms;
        let mut hits: Vec<String> = ctx
            .stem_tokens
            .iter()
            .filter(|t| lexicon.contains(t.as_str()))
            .map(|t| format!("\"{t}\" in stem"))
            .collect();
        hits.extend(lexicon_hits(ctx, lexicon));
        hits
    }
}

/// A negation keyword in the stem passes only when written in capitals or
/// wrapped in `*`/`_` emphasis markers.
pub struct UnemphasizedNegation;

impl FlawRule for UnemphasizedNegation {
    fn category(&self) -> FlawCategory {
        FlawCategory::UnemphasizedNegation
    }

    fn check(&self, ctx: &LintContext<'_>, config: &IwfConfig) -> Vec<String> {
        let words: Vec<String> = config.lexicons.negation_keywords.iter().map(|w| regex::escape(w)).collect();
        if words.is_empty() {
            return vec![];
        }
        let pattern = format!(r"(?i)([*_]+)?\b({})\b([*_]+)?", words.join("|"));
        let re = Regex::new(&pattern).expect("negation pattern is valid");
        re.captures_iter(&ctx.mcq.stem)
            .filter(|c| {
                let word = c.get(2).unwrap().as_str();
                let capitalized = word.chars().all(|ch| ch.is_uppercase());
                let marked = c.get(1).is_some() && c.get(3).is_some();
                !(capitalized || marked)
            })
            .map(|c| format!("\"{}\" in stem is not emphasized", c.get(2).unwrap().as_str()))
            .collect()
    }
}

pub struct TrueFalseOptions;

impl FlawRule for TrueFalseOptions {
    fn category(&self) -> FlawCategory {
        FlawCategory::TrueFalseOptions
    }

    fn check(&self, ctx: &LintContext<'_>, _: &IwfConfig) -> Vec<String> {
        ctx.options
            .iter()
            .filter(|o| matches!(o.normalized.as_str(), "true" | "false" | "yes" | "no"))
            .map(|o| format!("option {}", quote(o.text)))
            .collect()
    }
}

fn complex_k_type_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let label = r"(?:[a-e]|i{1,3}|iv|[1-5])";
        Regex::new(&format!(
            r"^(?:(?:both|options?|choices?|answers?)\s+)*(?:{label}(?:\s*,\s*{label})*\s*,?\s*(?:and|&|or)\s+{label}|neither\s+{label}\s+nor\s+{label})$"
        ))
        .expect("complex k-type pattern is valid")
    })
}

/// Options that combine other options ("A and B", "both I and III").
pub struct ComplexKType;

impl FlawRule for ComplexKType {
    fn category(&self) -> FlawCategory {
        FlawCategory::ComplexKType
    }

    fn check(&self, ctx: &LintContext<'_>, _: &IwfConfig) -> Vec<String> {
        ctx.options
            .iter()
            .filter(|o| complex_k_type_pattern().is_match(&o.normalized))
            .map(|o| format!("option {} combines other options", quote(o.text)))
            .collect()
    }
}

/// A content word repeated from the stem in the key and in no other option.
pub struct ClangAssociation;

impl FlawRule for ClangAssociation {
    fn category(&self) -> FlawCategory {
        FlawCategory::ClangAssociation
    }

    fn check(&self, ctx: &LintContext<'_>, config: &IwfConfig) -> Vec<String> {
        let stopwords = &config.lexicons.stopwords;
        let mut seen = HashSet::new();
        let option_sets: Vec<HashSet<&str>> = ctx
            .options
            .iter()
            .map(|o| o.tokens.iter().map(String::as_str).collect())
            .collect();
        ctx.stem_tokens
            .iter()
            .filter(|w| w.chars().count() >= config.min_clang_word_len && !stopwords.contains(w.as_str()))
            .filter(|w| seen.insert(w.as_str()))
            .filter(|w| {
                let holders: Vec<usize> = option_sets
                    .iter()
                    .enumerate()
                    .filter(|(_, set)| set.contains(w.as_str()))
                    .map(|(i, _)| i)
                    .collect();
                holders == [0]
            })
            .map(|w| format!("\"{w}\" appears in the stem and only in the key"))
            .collect()
    }
}

/// Initialisms read letter by letter that start with a vowel sound ("an LLM").
const VOWEL_SOUND_INITIALISMS: [&str; 12] =
    ["llm", "llms", "ml", "nlp", "mlp", "sms", "html", "xml", "mri", "fbi", "rgb", "sql"];

/// Whether `word` is pronounced starting with a vowel sound, which decides
/// between "a" and "an". Case-insensitive.
pub(crate) fn starts_with_vowel_sound(word: &str) -> bool {
    let lower: String = word
        .chars()
        .take_while(|c| c.is_alphanumeric() || *c == '-')
        .collect::<String>()
        .to_lowercase();
    if VOWEL_SOUND_INITIALISMS.contains(&lower.as_str()) {
        return true;
    }
    const CONSONANT_SOUND: [&str; 6] = ["uni", "use", "usu", "eu", "one", "once"];
    const VOWEL_SOUND: [&str; 5] = ["hour", "honest", "honor", "heir", "x-ray"];
    if CONSONANT_SOUND.iter().any(|p| lower.starts_with(p)) {
        return false;
    }
    if VOWEL_SOUND.iter().any(|p| lower.starts_with(p)) {
        return true;
    }
    if lower.starts_with(|c: char| c.is_ascii_digit()) {
        return lower.starts_with('8') || lower.starts_with("11") || lower.starts_with("18");
    }
    matches!(lower.chars().next(), Some('a' | 'e' | 'i' | 'o' | 'u'))
}

/// The stem ends in "a"/"an" and an option does not agree with the article.
pub struct GrammaticalCue;

impl FlawRule for GrammaticalCue {
    fn category(&self) -> FlawCategory {
        FlawCategory::GrammaticalCue
    }

    fn check(&self, ctx: &LintContext<'_>, _: &IwfConfig) -> Vec<String> {
        let trimmed = ctx
            .mcq
            .stem
            .trim_end_matches(|c: char| c.is_whitespace() || c == '_' || c == ':' || c == '…' || c == '.');
        let article = match trimmed.rsplit(char::is_whitespace).next().map(str::to_lowercase) {
            Some(a) if a == "a" || a == "an" => a,
            _ => return vec![],
        };
        let wants_vowel = article == "an";
        ctx.options
            .iter()
            .filter(|o| !o.is_meta)
            .filter_map(|o| {
                let first = o.text.split_whitespace().next()?;
                (starts_with_vowel_sound(first) != wants_vowel)
                    .then(|| format!("stem ends with \"{article}\" but option {} does not agree", quote(o.text)))
            })
            .collect()
    }
}

fn blank_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)_{2,}|\[blank\]|\(blank\)").expect("blank pattern is valid"))
}

pub struct FillInTheBlank;

impl FlawRule for FillInTheBlank {
    fn category(&self) -> FlawCategory {
        FlawCategory::FillInTheBlank
    }

    fn check(&self, ctx: &LintContext<'_>, _: &IwfConfig) -> Vec<String> {
        blank_pattern()
            .find_iter(&ctx.mcq.stem)
            .map(|m| format!("stem contains blank \"{}\"", m.as_str()))
            .collect()
    }
}

pub struct UnfocusedStem;

impl FlawRule for UnfocusedStem {
    fn category(&self) -> FlawCategory {
        FlawCategory::UnfocusedStem
    }

    fn check(&self, ctx: &LintContext<'_>, config: &IwfConfig) -> Vec<String> {
        let words = ctx.stem_tokens.len();
        if words < config.min_stem_words {
            vec![format!("stem {} has only {words} words", quote(&ctx.mcq.stem))]
        } else {
            vec![]
        }
    }
}

pub struct GratuitousStem;

impl FlawRule for GratuitousStem {
    fn category(&self) -> FlawCategory {
        FlawCategory::GratuitousStem
    }

    fn check(&self, ctx: &LintContext<'_>, config: &IwfConfig) -> Vec<String> {
        let words = ctx.stem_tokens.len();
        if words > config.max_stem_words {
            vec![format!("stem has {words} words (limit {})", config.max_stem_words)]
        } else {
            vec![]
        }
    }
}

/// Options that say the same thing: identical after normalization, or with
/// the same set of content words.
pub struct DuplicateOptions;

impl FlawRule for DuplicateOptions {
    fn category(&self) -> FlawCategory {
        FlawCategory::DuplicateOptions
    }

    fn check(&self, ctx: &LintContext<'_>, config: &IwfConfig) -> Vec<String> {
        let stopwords = &config.lexicons.stopwords;
        let content: Vec<std::collections::BTreeSet<&str>> = ctx
            .options
            .iter()
            .map(|o| {
                o.tokens
                    .iter()
                    .map(String::as_str)
                    .filter(|t| !stopwords.contains(*t))
                    .collect()
            })
            .collect();
        let mut evidence = Vec::new();
        for i in 0..ctx.options.len() {
            for j in i + 1..ctx.options.len() {
                let same_text = ctx.options[i].normalized == ctx.options[j].normalized;
                let same_content = !content[i].is_empty() && content[i] == content[j];
                if same_text || same_content {
                    evidence.push(format!(
                        "options {} and {} are equivalent",
                        quote(ctx.options[i].text),
                        quote(ctx.options[j].text)
                    ));
                }
            }
        }
        evidence
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn article_sounds() {
        assert!(starts_with_vowel_sound("apple"));
        assert!(starts_with_vowel_sound("AI"));
        assert!(starts_with_vowel_sound("LLM"));
        assert!(starts_with_vowel_sound("hour"));
        assert!(!starts_with_vowel_sound("university"));
        assert!(!starts_with_vowel_sound("GPU"));
        assert_eq!(starts_with_vowel_sound("Llm"), starts_with_vowel_sound("llm"));
        assert!(!starts_with_vowel_sound("robot"));
        assert!(starts_with_vowel_sound("8-bit"));
    }

    #[test]
    fn complex_k_type_matches() {
        let re = complex_k_type_pattern();
        for s in ["a and b", "both a and c", "i and iii", "a, b and c", "a, b, and c", "neither a nor b", "options 1 & 2"] {
            assert!(re.is_match(s), "{s}");
        }
        for s in ["a robot and a human", "apples and bananas", "a"] {
            assert!(!re.is_match(s), "{s}");
        }
    }

    #[test]
    fn tokenizer() {
        assert_eq!(tokenize("AI's 'data', ok?"), vec!["ai's", "data", "ok"]);
    }

    #[test]
    fn registry_lookup_by_name() {
        let r = RuleRegistry::standard();
        assert_eq!(r.len(), 14);
        assert!(r.get("AllOfTheAbove").is_some());
        assert!(r.get("ImplausibleDistractor").is_none());
        assert!(r.get("bogus").is_none());
    }
}
