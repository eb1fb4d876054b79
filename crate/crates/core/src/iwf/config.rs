use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::FlawCategory;

const ABSOLUTE_TERMS: &str = include_str!("../../data/lexicons/absolute_terms.txt");
const VAGUE_TERMS: &str = include_str!("../../data/lexicons/vague_frequency_terms.txt");
const NEGATIONS: &str = include_str!("../../data/lexicons/negation_keywords.txt");
const STOPWORDS: &str = include_str!("../../data/lexicons/stopwords.txt");

/// Parses a lexicon file: whitespace-separated lowercase words, `#` starts a comment line.
pub fn parse_lexicon(text: &str) -> BTreeSet<String> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace)
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicons {
    pub absolute_terms: BTreeSet<String>,
    pub vague_frequency_terms: BTreeSet<String>,
    pub negation_keywords: BTreeSet<String>,
    pub stopwords: HashSet<String>,
}

impl Default for Lexicons {
    fn default() -> Self {
        Self {
            absolute_terms: parse_lexicon(ABSOLUTE_TERMS),
            vague_frequency_terms: parse_lexicon(VAGUE_TERMS),
            negation_keywords: parse_lexicon(NEGATIONS),
            stopwords: parse_lexicon(STOPWORDS).into_iter().collect(),
        }
    }
}

/// Thresholds and lexicons for the rule engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IwfConfig {
    /// LongestOptionCorrect fires when the key is longer than this multiple
    /// of the mean distractor length (characters).
    pub longest_option_ratio: f64,
    /// UnfocusedStem fires below this many words.
    pub min_stem_words: usize,
    /// GratuitousStem fires above this many words.
    pub max_stem_words: usize,
    /// Shortest word considered by ClangAssociation.
    pub min_clang_word_len: usize,
    pub lexicons: Lexicons,
    /// Categories whose rules are skipped.
    pub disabled: BTreeSet<FlawCategory>,
}

impl Default for IwfConfig {
    fn default() -> Self {
        Self {
            longest_option_ratio: 1.5,
            min_stem_words: 5,
            max_stem_words: 60,
            min_clang_word_len: 4,
            lexicons: Lexicons::default(),
            disabled: BTreeSet::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_lexicons() {
        let l = Lexicons::default();
        let absolute: Vec<_> = l.absolute_terms.iter().map(String::as_str).collect();
        assert_eq!(absolute, vec!["all", "always", "every", "must", "never", "none", "only"]);
        assert_eq!(l.vague_frequency_terms.len(), 5);
        assert!(l.negation_keywords.contains("except"));
        assert!(l.stopwords.contains("above"));
        assert!(!l.stopwords.contains("#"));
    }
}
