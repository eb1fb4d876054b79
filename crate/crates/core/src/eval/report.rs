//! The evaluation report and its JSON and CSV renderings.
//!
//! Percentages keep full precision in `value`; `display` is the value rounded
//! half-up to one decimal. Averages are taken over unrounded per-rater values.
//!
//! CSV columns: `criterion,measure,<one column per rater id>,average`. The
//! first row is `KeyAgreement,key_match,...`, then one row per rubric item
//! with its headline measure (`yes`, or `usable` for WouldYouUseIt). Empty
//! cells mean a zero denominator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ratings::RatingSet;
use super::rubric::RubricItem;
use super::stats::{
    criterion_stats, fleiss_kappa, key_agreement, mean_percent, pairwise_agreement, Distribution, EvalError, Share,
};
use crate::mcq::Mcq;

/// `value` rounded half-up to one decimal. The small epsilon absorbs binary
/// representation error for ratios that sit exactly on a half.
pub fn round_half_up_1(value: f64) -> f64 {
    (value * 10.0 + 0.5 + 1e-9).floor() / 10.0
}

pub fn format_percent(value: f64) -> String {
    format!("{:.1}", round_half_up_1(value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Percent {
    pub value: f64,
    pub display: String,
}

impl Percent {
    pub fn new(value: f64) -> Self {
        Self { value, display: format_percent(value) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterFigure {
    pub rater_id: String,
    pub count: usize,
    pub total: usize,
    pub percent: Option<Percent>,
}

impl RaterFigure {
    fn new(rater_id: &str, share: Share) -> Self {
        Self {
            rater_id: rater_id.to_string(),
            count: share.count,
            total: share.total,
            percent: share.percent().map(Percent::new),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterDistribution {
    pub rater_id: String,
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFigure {
    pub a: String,
    pub b: String,
    pub agree: usize,
    pub total: usize,
    pub percent: Option<Percent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub item: RubricItem,
    pub measure: String,
    pub per_rater: Vec<RaterFigure>,
    pub average: Option<Percent>,
    pub distributions: Vec<RaterDistribution>,
    pub pairwise: Vec<PairFigure>,
    pub fleiss_kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rating_count: usize,
    pub question_count: usize,
    pub raters: Vec<String>,
    pub key_agreement: Vec<RaterFigure>,
    pub key_agreement_average: Option<Percent>,
    pub criteria: Vec<CriterionReport>,
    pub warnings: Vec<String>,
}

fn figures(shares: &BTreeMap<String, Share>) -> Vec<RaterFigure> {
    shares.iter().map(|(r, s)| RaterFigure::new(r, *s)).collect()
}

fn distributions(per_rater: &BTreeMap<String, Distribution>) -> Vec<RaterDistribution> {
    per_rater
        .iter()
        .map(|(r, d)| RaterDistribution { rater_id: r.clone(), counts: d.counts.clone(), total: d.total })
        .collect()
}

/// Builds the report. Every rated question must be in `bank`.
pub fn build_report(set: &RatingSet, bank: &BTreeMap<String, Mcq>) -> Result<EvalReport, EvalError> {
    let raters = set.raters();
    let questions = set.questions();
    let keys = key_agreement(set, bank)?;
    let mut warnings = Vec::new();
    if set.is_empty() {
        warnings.push("no ratings: every denominator is zero".to_string());
    }
    for rater in &raters {
        let rated = set.by_rater(rater).count();
        if rated < questions.len() {
            warnings.push(format!("rater {rater} rated {rated} of {} questions", questions.len()));
        }
    }
    let criteria = criterion_stats(set)
        .into_iter()
        .map(|stats| {
            let headline = stats.headline();
            let pairwise = pairwise_agreement(set, stats.item)
                .map(|pairs| {
                    pairs
                        .into_iter()
                        .map(|p| PairFigure {
                            a: p.a,
                            b: p.b,
                            agree: p.share.count,
                            total: p.share.total,
                            percent: p.share.percent().map(Percent::new),
                        })
                        .collect()
                })
                .unwrap_or_default();
            CriterionReport {
                item: stats.item,
                measure: stats.item.measure().to_string(),
                per_rater: figures(&headline),
                average: stats.average().map(Percent::new),
                distributions: distributions(&stats.per_rater),
                pairwise,
                fleiss_kappa: fleiss_kappa(set, stats.item),
            }
        })
        .collect();
    Ok(EvalReport {
        rating_count: set.len(),
        question_count: questions.len(),
        raters,
        key_agreement_average: mean_percent(keys.values()).map(Percent::new),
        key_agreement: figures(&keys),
        criteria,
        warnings,
    })
}

impl EvalReport {
    pub fn criterion(&self, item: RubricItem) -> &CriterionReport {
        self.criteria.iter().find(|c| c.item == item).expect("report covers every item")
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = ["criterion", "measure"]
            .into_iter()
            .chain(self.raters.iter().map(String::as_str))
            .chain(["average"])
            .collect();
        out.write_record(&header).expect("in-memory write");
        let cell = |p: &Option<Percent>| p.as_ref().map(|p| p.display.clone()).unwrap_or_default();
        let row = |name: &str, measure: &str, figures: &[RaterFigure], average: &Option<Percent>| {
            let mut cells = vec![name.to_string(), measure.to_string()];
            for rater in &self.raters {
                let figure = figures.iter().find(|f| &f.rater_id == rater);
                cells.push(figure.map(|f| cell(&f.percent)).unwrap_or_default());
            }
            cells.push(cell(average));
            cells
        };
        out.write_record(row("KeyAgreement", "key_match", &self.key_agreement, &self.key_agreement_average))
            .expect("in-memory write");
        for c in &self.criteria {
            out.write_record(row(c.item.name(), &c.measure, &c.per_rater, &c.average))
                .expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}
