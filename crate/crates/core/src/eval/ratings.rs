//! Rating records and the ratings file formats.
//!
//! JSONL: one object per line with `rater_id`, `question_id`,
//! `chosen_answer`, optional `timestamp`, and `responses` keyed by rubric
//! item name.
//!
//! CSV: header `rater_id,question_id,chosen_answer,timestamp` followed by one
//! column per rubric item (any order, names as in the JSONL keys).
//!
//! A later rating for the same (rater, question) replaces the earlier one.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rubric::RubricItem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub rater_id: String,
    pub question_id: String,
    pub responses: BTreeMap<RubricItem, String>,
    /// Text of the option the rater believes is correct.
    pub chosen_answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// A rating as submitted, before validation.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct RatingInput {
    #[serde(default)]
    pub rater_id: String,
    #[serde(default)]
    pub question_id: String,
    #[serde(default)]
    pub responses: BTreeMap<String, String>,
    #[serde(default)]
    pub chosen_answer: String,
    #[serde(default)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RatingError {
    #[error("{0} is empty")]
    EmptyField(&'static str),
    #[error("missing response for {0}")]
    MissingItem(RubricItem),
    #[error("unknown rubric item {0:?}")]
    UnknownItem(String),
    #[error("duplicate response for {0}")]
    DuplicateItem(RubricItem),
    #[error("{item}: {response:?} is not one of {}", .item.options().join("/"))]
    InvalidResponse { item: RubricItem, response: String },
}

impl RatingError {
    /// The rubric item the error concerns, if any.
    pub fn item(&self) -> Option<RubricItem> {
        match self {
            RatingError::MissingItem(i) | RatingError::DuplicateItem(i) => Some(*i),
            RatingError::InvalidResponse { item, .. } => Some(*item),
            _ => None,
        }
    }
}

impl RatingInput {
    /// Checks required fields and closed-set responses. Responses are stored
    /// in canonical form.
    pub fn validate(self) -> Result<Rating, RatingError> {
        for (name, value) in [
            ("rater_id", &self.rater_id),
            ("question_id", &self.question_id),
            ("chosen_answer", &self.chosen_answer),
        ] {
            if value.trim().is_empty() {
                return Err(RatingError::EmptyField(name));
            }
        }
        let mut responses = BTreeMap::new();
        for (name, response) in &self.responses {
            let item: RubricItem = name.parse().map_err(|_| RatingError::UnknownItem(name.clone()))?;
            let canonical = item
                .canonical_response(response)
                .ok_or_else(|| RatingError::InvalidResponse { item, response: response.clone() })?;
            if responses.insert(item, canonical.to_string()).is_some() {
                return Err(RatingError::DuplicateItem(item));
            }
        }
        if let Some(missing) = RubricItem::ALL.into_iter().find(|i| !responses.contains_key(i)) {
            return Err(RatingError::MissingItem(missing));
        }
        Ok(Rating {
            rater_id: self.rater_id.trim().to_string(),
            question_id: self.question_id.trim().to_string(),
            responses,
            chosen_answer: self.chosen_answer.trim().to_string(),
            timestamp: self.timestamp.filter(|t| !t.trim().is_empty()),
        })
    }
}

impl Rating {
    pub fn response(&self, item: RubricItem) -> &str {
        self.responses.get(&item).map(String::as_str).unwrap_or_default()
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("ratings serialize")
    }
}

/// Ratings keyed by (rater, question); iteration is in key order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RatingSet {
    ratings: BTreeMap<(String, String), Rating>,
}

impl RatingSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `rating`, returning the one it replaced.
    pub fn insert(&mut self, rating: Rating) -> Option<Rating> {
        let key = (rating.rater_id.clone(), rating.question_id.clone());
        self.ratings.insert(key, rating)
    }

    pub fn contains(&self, rater_id: &str, question_id: &str) -> bool {
        self.ratings.contains_key(&(rater_id.to_string(), question_id.to_string()))
    }

    pub fn get(&self, rater_id: &str, question_id: &str) -> Option<&Rating> {
        self.ratings.get(&(rater_id.to_string(), question_id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.ratings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ratings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rating> {
        self.ratings.values()
    }

    pub fn raters(&self) -> Vec<String> {
        let mut r: Vec<String> = self.ratings.keys().map(|(r, _)| r.clone()).collect();
        r.dedup();
        r
    }

    pub fn questions(&self) -> Vec<String> {
        let mut q: Vec<String> = self.ratings.keys().map(|(_, q)| q.clone()).collect();
        q.sort();
        q.dedup();
        q
    }

    pub fn by_rater<'a>(&'a self, rater_id: &'a str) -> impl Iterator<Item = &'a Rating> + 'a {
        self.ratings.values().filter(move |r| r.rater_id == rater_id)
    }
}

impl FromIterator<Rating> for RatingSet {
    fn from_iter<I: IntoIterator<Item = Rating>>(iter: I) -> Self {
        let mut set = RatingSet::new();
        for r in iter {
            set.insert(r);
        }
        set
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("reading ratings: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: RatingError },
}

pub fn parse_jsonl<R: BufRead>(reader: R) -> Result<RatingSet, LoadError> {
    let mut set = RatingSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let input: RatingInput =
            serde_json::from_str(&line).map_err(|e| LoadError::Parse { line: i + 1, message: e.to_string() })?;
        let rating = input.validate().map_err(|source| LoadError::Invalid { line: i + 1, source })?;
        set.insert(rating);
    }
    Ok(set)
}

const CSV_FIELDS: [&str; 4] = ["rater_id", "question_id", "chosen_answer", "timestamp"];

pub fn parse_csv<R: std::io::Read>(reader: R) -> Result<RatingSet, LoadError> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header_err = |e: csv::Error| LoadError::Parse { line: 1, message: e.to_string() };
    let headers = csv.headers().map_err(header_err)?.clone();
    let mut set = RatingSet::new();
    for record in csv.records() {
        let record = record.map_err(|e| LoadError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let mut input = RatingInput::default();
        for (name, value) in headers.iter().zip(record.iter()) {
            match name {
                "rater_id" => input.rater_id = value.to_string(),
                "question_id" => input.question_id = value.to_string(),
                "chosen_answer" => input.chosen_answer = value.to_string(),
                "timestamp" => input.timestamp = Some(value.to_string()),
                item => {
                    input.responses.insert(item.to_string(), value.to_string());
                }
            }
        }
        let rating = input.validate().map_err(|source| LoadError::Invalid { line, source })?;
        set.insert(rating);
    }
    Ok(set)
}

/// Writes ratings as CSV with the documented header.
pub fn to_csv(set: &RatingSet) -> String {
    let mut out = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = CSV_FIELDS.iter().copied().chain(RubricItem::ALL.iter().map(|i| i.name())).collect();
    out.write_record(&header).expect("in-memory write");
    for r in set.iter() {
        let mut row = vec![
            r.rater_id.clone(),
            r.question_id.clone(),
            r.chosen_answer.clone(),
            r.timestamp.clone().unwrap_or_default(),
        ];
        row.extend(RubricItem::ALL.iter().map(|&i| r.response(i).to_string()));
        out.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(out.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Loads JSONL, or CSV when the extension is `.csv`. An empty file yields
/// an empty set with a warning.
pub fn load_ratings(path: impl AsRef<Path>) -> Result<RatingSet, LoadError> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let set = if is_csv {
        if bytes.iter().all(u8::is_ascii_whitespace) {
            RatingSet::new()
        } else {
            parse_csv(bytes.as_slice())?
        }
    } else {
        parse_jsonl(bytes.as_slice())?
    };
    if set.is_empty() {
        log::warn!("{}: no ratings", path.display());
    }
    Ok(set)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn input(rater: &str, question: &str, chosen: &str) -> RatingInput {
        RatingInput {
            rater_id: rater.into(),
            question_id: question.into(),
            chosen_answer: chosen.into(),
            timestamp: None,
            responses: RubricItem::ALL
                .iter()
                .map(|i| (i.name().to_string(), i.options()[0].to_string()))
                .collect(),
        }
    }

    #[test]
    fn validation_names_the_problem() {
        let mut missing = input("e1", "q01", "A");
        missing.responses.remove("BloomsLevel");
        assert_eq!(missing.validate(), Err(RatingError::MissingItem(RubricItem::BloomsLevel)));

        let mut maybe = input("e1", "q01", "A");
        maybe.responses.insert("Understandable".into(), "maybe".into());
        let err = maybe.validate().unwrap_err();
        assert_eq!(err.item(), Some(RubricItem::Understandable));
        assert_eq!(err.to_string(), "Understandable: \"maybe\" is not one of yes/no");

        let mut unknown = input("e1", "q01", "A");
        unknown.responses.insert("Clarity".into(), "yes".into());
        assert_eq!(unknown.validate(), Err(RatingError::UnknownItem("Clarity".into())));

        let mut dup = input("e1", "q01", "A");
        dup.responses.insert("Bloom'sLevel".into(), "no".into());
        assert_eq!(dup.validate(), Err(RatingError::DuplicateItem(RubricItem::BloomsLevel)));

        assert_eq!(input(" ", "q01", "A").validate(), Err(RatingError::EmptyField("rater_id")));
    }

    #[test]
    fn jsonl_errors_carry_line_numbers() {
        let good = input("e1", "q01", "A").validate().unwrap().to_json_line();
        let text = format!("{good}\n\n{{\"rater_id\": \"e2\", \"question_id\": \"q01\", \"chosen_answer\": \"A\", \"responses\": {{\"Understandable\": \"maybe\"}}}}\n");
        match parse_jsonl(text.as_bytes()) {
            Err(LoadError::Invalid { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_jsonl("not json\n".as_bytes()) {
            Err(LoadError::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn later_rating_replaces_earlier() {
        let first = input("e1", "q01", "A").validate().unwrap();
        let second = input("e1", "q01", "B").validate().unwrap();
        let set: RatingSet = [first, second].into_iter().collect();
        assert_eq!(set.len(), 1);
        assert_eq!(set.get("e1", "q01").unwrap().chosen_answer, "B");
    }

    #[test]
    fn csv_round_trip() {
        let set: RatingSet = [input("e1", "q01", "Yes, it, \"quoted\""), input("e2", "q01", "B")]
            .into_iter()
            .map(|i| i.validate().unwrap())
            .collect();
        let text = to_csv(&set);
        assert!(text.starts_with("rater_id,question_id,chosen_answer,timestamp,Understandable,"));
        assert_eq!(parse_csv(text.as_bytes()).unwrap(), set);
    }

    #[test]
    fn empty_files_give_empty_sets() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["r.jsonl", "r.csv"] {
            let p = dir.path().join(name);
            fs::write(&p, "").unwrap();
            assert!(load_ratings(&p).unwrap().is_empty());
        }
    }
}
