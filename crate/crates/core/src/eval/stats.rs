use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ratings::RatingSet;
use super::rubric::RubricItem;
use crate::mcq::{normalize_text, Mcq};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("rater {rater_id} rated unknown question {question_id}")]
    UnknownQuestion { rater_id: String, question_id: String },
    #[error("rater {rater_id} chose {chosen:?} for {question_id}, which is not one of its options")]
    NotAnOption { rater_id: String, question_id: String, chosen: String },
    #[error("{0}: at least two raters with overlapping questions are needed")]
    InsufficientRaters(RubricItem),
}

/// `count` of `total`, as a percentage on demand.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Share {
    pub count: usize,
    pub total: usize,
}

impl Share {
    pub fn percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.count as f64 / self.total as f64)
    }
}

/// Index of the option whose text matches `chosen` after normalization.
pub fn chosen_option(mcq: &Mcq, chosen: &str) -> Option<usize> {
    let chosen = normalize_text(chosen);
    mcq.options().position(|o| normalize_text(o) == chosen)
}

/// Per rater: questions where the chosen answer is the key, out of questions
/// rated.
pub fn key_agreement(set: &RatingSet, bank: &BTreeMap<String, Mcq>) -> Result<BTreeMap<String, Share>, EvalError> {
    let mut out: BTreeMap<String, Share> = BTreeMap::new();
    for r in set.iter() {
        let mcq = bank.get(&r.question_id).ok_or_else(|| EvalError::UnknownQuestion {
            rater_id: r.rater_id.clone(),
            question_id: r.question_id.clone(),
        })?;
        let index = chosen_option(mcq, &r.chosen_answer).ok_or_else(|| EvalError::NotAnOption {
            rater_id: r.rater_id.clone(),
            question_id: r.question_id.clone(),
            chosen: r.chosen_answer.clone(),
        })?;
        let share = out.entry(r.rater_id.clone()).or_default();
        share.total += 1;
        if index == 0 {
            share.count += 1;
        }
    }
    Ok(out)
}

/// One rater's responses to one item.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distribution {
    /// Every option of the item, zero counts included.
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
}

impl Distribution {
    fn empty(item: RubricItem) -> Self {
        Self {
            counts: item.options().iter().map(|o| (o.to_string(), 0)).collect(),
            total: 0,
        }
    }

    pub fn share_of(&self, responses: &[&str]) -> Share {
        Share {
            count: responses.iter().map(|r| self.counts.get(*r).copied().unwrap_or(0)).sum(),
            total: self.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriterionStats {
    pub item: RubricItem,
    pub per_rater: BTreeMap<String, Distribution>,
}

impl CriterionStats {
    /// Headline share per rater: percent "yes", or percent usable for
    /// WouldYouUseIt.
    pub fn headline(&self) -> BTreeMap<String, Share> {
        self.per_rater
            .iter()
            .map(|(rater, d)| (rater.clone(), d.share_of(self.item.positive())))
            .collect()
    }

    /// Mean of the per-rater headline percentages, skipping raters with no
    /// ratings.
    pub fn average(&self) -> Option<f64> {
        mean_percent(self.headline().values())
    }
}

pub fn mean_percent<'a>(shares: impl IntoIterator<Item = &'a Share>) -> Option<f64> {
    let values: Vec<f64> = shares.into_iter().filter_map(Share::percent).collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn criterion_stats(set: &RatingSet) -> Vec<CriterionStats> {
    let raters = set.raters();
    RubricItem::ALL
        .into_iter()
        .map(|item| {
            let mut per_rater: BTreeMap<String, Distribution> =
                raters.iter().map(|r| (r.clone(), Distribution::empty(item))).collect();
            for r in set.iter() {
                let d = per_rater.get_mut(&r.rater_id).expect("rater listed");
                *d.counts.entry(r.response(item).to_string()).or_default() += 1;
                d.total += 1;
            }
            CriterionStats { item, per_rater }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAgreement {
    pub a: String,
    pub b: String,
    /// Co-rated questions with identical responses, out of co-rated.
    pub share: Share,
}

/// Percent identical responses on co-rated questions, per rater pair.
pub fn pairwise_agreement(set: &RatingSet, item: RubricItem) -> Result<Vec<PairAgreement>, EvalError> {
    let raters = set.raters();
    let mut pairs = Vec::new();
    for (i, a) in raters.iter().enumerate() {
        for b in &raters[i + 1..] {
            let mut share = Share::default();
            for ra in set.by_rater(a) {
                if let Some(rb) = set.get(b, &ra.question_id) {
                    share.total += 1;
                    if ra.response(item) == rb.response(item) {
                        share.count += 1;
                    }
                }
            }
            pairs.push(PairAgreement { a: a.clone(), b: b.clone(), share });
        }
    }
    if pairs.iter().all(|p| p.share.total == 0) {
        return Err(EvalError::InsufficientRaters(item));
    }
    Ok(pairs)
}

/// Fleiss' kappa from per-subject category counts. Every row must have the
/// same number of ratings (at least two). `None` when undefined.
pub fn fleiss_kappa_counts(table: &[Vec<usize>]) -> Option<f64> {
    let n: usize = table.first()?.iter().sum();
    if n < 2 || table.iter().any(|row| row.iter().sum::<usize>() != n) {
        return None;
    }
    let subjects = table.len() as f64;
    let n = n as f64;
    let categories = table[0].len();
    let p_bar = table
        .iter()
        .map(|row| row.iter().map(|&c| (c * c) as f64).sum::<f64>() - n)
        .sum::<f64>()
        / (subjects * n * (n - 1.0));
    let p_e: f64 = (0..categories)
        .map(|j| {
            let pj = table.iter().map(|row| row[j] as f64).sum::<f64>() / (subjects * n);
            pj * pj
        })
        .sum();
    if (1.0 - p_e).abs() < 1e-12 {
        return None;
    }
    Some((p_bar - p_e) / (1.0 - p_e))
}

/// Fleiss' kappa over the questions rated by every rater.
pub fn fleiss_kappa(set: &RatingSet, item: RubricItem) -> Option<f64> {
    let raters = set.raters();
    if raters.len() < 2 {
        return None;
    }
    let table: Vec<Vec<usize>> = set
        .questions()
        .iter()
        .filter_map(|q| {
            let responses: Option<Vec<&str>> =
                raters.iter().map(|r| set.get(r, q).map(|x| x.response(item))).collect();
            let responses = responses?;
            Some(item.options().iter().map(|o| responses.iter().filter(|r| *r == o).count()).collect())
        })
        .collect();
    fleiss_kappa_counts(&table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::ratings::tests::input;
    use crate::eval::ratings::Rating;
    use crate::mcq::fixtures::sample_question;

    fn rating(rater: &str, question: &str, item: RubricItem, response: &str) -> Rating {
        let mut i = input(rater, question, "x");
        i.responses.insert(item.name().into(), response.into());
        i.validate().unwrap()
    }

    #[test]
    fn fleiss_textbook_example() {
        // 10 subjects, 14 raters, 5 categories; published kappa 0.210
        let table = vec![
            vec![0, 0, 0, 0, 14],
            vec![0, 2, 6, 4, 2],
            vec![0, 0, 3, 5, 6],
            vec![0, 3, 9, 2, 0],
            vec![2, 2, 8, 1, 1],
            vec![7, 7, 0, 0, 0],
            vec![3, 2, 6, 3, 0],
            vec![2, 5, 3, 2, 2],
            vec![6, 5, 2, 1, 0],
            vec![0, 2, 2, 3, 7],
        ];
        let k = fleiss_kappa_counts(&table).unwrap();
        assert!((k - 0.210).abs() < 0.0005, "{k}");
        assert_eq!(fleiss_kappa_counts(&[vec![3, 0], vec![3, 0]]), None);
        assert_eq!(fleiss_kappa_counts(&[]), None);
        assert_eq!(fleiss_kappa_counts(&[vec![2, 0], vec![1, 0]]), None);
    }

    #[test]
    fn fleiss_perfect_agreement_is_one() {
        let table = vec![vec![3, 0], vec![0, 3], vec![3, 0]];
        assert!((fleiss_kappa_counts(&table).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_counts_co_rated_only() {
        let mut set = RatingSet::new();
        for q in 0..40 {
            let q = format!("q{q:02}");
            set.insert(rating("a", &q, RubricItem::Clear, "yes"));
            let other = if q.as_str() < "q30" { "yes" } else { "no" };
            set.insert(rating("b", &q, RubricItem::Clear, other));
        }
        set.insert(rating("a", "extra", RubricItem::Clear, "yes"));
        let pairs = pairwise_agreement(&set, RubricItem::Clear).unwrap();
        assert_eq!(pairs[0].share, Share { count: 30, total: 40 });
        assert_eq!(pairs[0].share.percent(), Some(75.0));
    }

    #[test]
    fn pairwise_needs_two_raters() {
        let set: RatingSet = [rating("a", "q1", RubricItem::Clear, "yes")].into_iter().collect();
        assert_eq!(pairwise_agreement(&set, RubricItem::Clear), Err(EvalError::InsufficientRaters(RubricItem::Clear)));
    }

    #[test]
    fn key_agreement_matches_normalized_text() {
        let q = sample_question();
        let bank = BTreeMap::from([(q.id.clone(), q.clone())]);
        let mut i = input("a", "sample", &format!("  {} ", q.key.to_uppercase()));
        i.chosen_answer = i.chosen_answer.trim_end_matches('.').to_string();
        let mut set: RatingSet = [i.validate().unwrap()].into_iter().collect();
        assert_eq!(key_agreement(&set, &bank).unwrap()["a"], Share { count: 1, total: 1 });

        set.insert(input("b", "sample", &q.distractors[1]).validate().unwrap());
        assert_eq!(key_agreement(&set, &bank).unwrap()["b"], Share { count: 0, total: 1 });

        set.insert(input("c", "sample", "something else").validate().unwrap());
        assert!(matches!(key_agreement(&set, &bank), Err(EvalError::NotAnOption { .. })));

        let unknown: RatingSet = [input("a", "nope", "x").validate().unwrap()].into_iter().collect();
        assert!(matches!(key_agreement(&unknown, &bank), Err(EvalError::UnknownQuestion { .. })));
    }

    #[test]
    fn usable_aggregate_counts_three_responses() {
        let set: RatingSet = ["this", "rephrased", "both", "neither"]
            .iter()
            .enumerate()
            .map(|(i, r)| rating("a", &format!("q{i}"), RubricItem::WouldYouUseIt, r))
            .collect();
        let stats = criterion_stats(&set);
        let wyui = stats.iter().find(|s| s.item == RubricItem::WouldYouUseIt).unwrap();
        assert_eq!(wyui.headline()["a"], Share { count: 3, total: 4 });
        assert_eq!(wyui.per_rater["a"].counts["neither"], 1);
    }
}
