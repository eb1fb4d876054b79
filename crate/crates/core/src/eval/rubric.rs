use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The ten rubric items raters answer for every question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RubricItem {
    Understandable,
    LORelated,
    Grammatical,
    Clear,
    Rephrase,
    Answerable,
    Central,
    WouldYouUseIt,
    BloomsLevel,
    GradeLevel,
}

const YES_NO: &[&str] = &["yes", "no"];
const CLEAR: &[&str] = &["yes", "more_or_less", "no"];
const USE: &[&str] = &["this", "rephrased", "both", "neither"];

/// WouldYouUseIt answers counted as "usable".
pub const USABLE: &[&str] = &["this", "rephrased", "both"];

impl RubricItem {
    pub const ALL: [RubricItem; 10] = [
        RubricItem::Understandable,
        RubricItem::LORelated,
        RubricItem::Grammatical,
        RubricItem::Clear,
        RubricItem::Rephrase,
        RubricItem::Answerable,
        RubricItem::Central,
        RubricItem::WouldYouUseIt,
        RubricItem::BloomsLevel,
        RubricItem::GradeLevel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RubricItem::Understandable => "Understandable",
            RubricItem::LORelated => "LORelated",
            RubricItem::Grammatical => "Grammatical",
            RubricItem::Clear => "Clear",
            RubricItem::Rephrase => "Rephrase",
            RubricItem::Answerable => "Answerable",
            RubricItem::Central => "Central",
            RubricItem::WouldYouUseIt => "WouldYouUseIt",
            RubricItem::BloomsLevel => "BloomsLevel",
            RubricItem::GradeLevel => "GradeLevel",
        }
    }

    pub fn prompt_text(self) -> &'static str {
        match self {
            RubricItem::Understandable => "Could you understand what the question is asking?",
            RubricItem::LORelated => "Is the question related to the learning objective?",
            RubricItem::Grammatical => "Is the question grammatically well-formed?",
            RubricItem::Clear => "Is it clear what the question asks for?",
            RubricItem::Rephrase => "Could you rephrase the question to make it clearer and error-free?",
            RubricItem::Answerable => {
                "Can students answer the question with the information or context provided within?"
            }
            RubricItem::Central => {
                "Do you think being able to answer the question is important to work on the topic given in the prompt?"
            }
            RubricItem::WouldYouUseIt => {
                "If you were a teacher teaching the course topic would you use this question or the rephrased version in the course?"
            }
            RubricItem::BloomsLevel => "Do you think the question is of the Bloom's taxonomy level labeled?",
            RubricItem::GradeLevel => "Do you think the question is appropriate for K7-9?",
        }
    }

    /// The closed set of accepted responses.
    pub fn options(self) -> &'static [&'static str] {
        match self {
            RubricItem::Clear => CLEAR,
            RubricItem::WouldYouUseIt => USE,
            _ => YES_NO,
        }
    }

    /// Responses counted toward the headline percentage for this item.
    pub fn positive(self) -> &'static [&'static str] {
        match self {
            RubricItem::WouldYouUseIt => USABLE,
            _ => &["yes"],
        }
    }

    /// Label of the headline measure: "yes" or "usable".
    pub fn measure(self) -> &'static str {
        match self {
            RubricItem::WouldYouUseIt => "usable",
            _ => "yes",
        }
    }

    /// Canonical form of `response` if it is in the closed set.
    pub fn canonical_response(self, response: &str) -> Option<&'static str> {
        let r = response.trim().to_ascii_lowercase().replace([' ', '-'], "_");
        self.options().iter().copied().find(|o| *o == r)
    }
}

impl fmt::Display for RubricItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownRubricItem(pub String);

impl fmt::Display for UnknownRubricItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown rubric item {:?}", self.0)
    }
}

impl std::error::Error for UnknownRubricItem {}

impl FromStr for RubricItem {
    type Err = UnknownRubricItem;

    /// Case-insensitive; apostrophes, spaces and underscores are ignored, so
    /// "Bloom'sLevel" and "blooms_level" both parse.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '\'' | '’' | ' ' | '_' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        RubricItem::ALL
            .into_iter()
            .find(|item| item.name().to_lowercase() == key)
            .ok_or_else(|| UnknownRubricItem(s.to_string()))
    }
}

impl Serialize for RubricItem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for RubricItem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One rubric entry as served to the review UI.
#[derive(Debug, Clone, Serialize)]
pub struct RubricEntry {
    pub id: RubricItem,
    pub prompt_text: &'static str,
    pub response_options: &'static [&'static str],
}

pub fn rubric() -> Vec<RubricEntry> {
    RubricItem::ALL
        .into_iter()
        .map(|id| RubricEntry { id, prompt_text: id.prompt_text(), response_options: id.options() })
        .collect()
}
