//! Bank exporters, looked up by format name.
//!
//! - `json`: the bank's own JSONL form; [`import_json`] reads it back.
//! - `csv`: `id,status,revision,bloom_level,grade_band,learning_objective,
//!   scenario,stem,key_letter,option_a,option_b,...` with options in display
//!   order and as many option columns as the largest question needs.
//! - `gift`: GIFT text for LMS import, options in display order.

pub mod gift;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::mcq::{bank_to_string, option_letter, read_bank, BankEntry, BankError};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("unknown export format {0:?} (known: {1})")]
    UnknownFormat(String, String),
}

pub trait Exporter: Send + Sync {
    fn name(&self) -> &'static str;
    fn extension(&self) -> &'static str;
    fn export(&self, bank: &[BankEntry]) -> String;
}

pub struct JsonExporter;

impl Exporter for JsonExporter {
    fn name(&self) -> &'static str {
        "json"
    }

    fn extension(&self) -> &'static str {
        "jsonl"
    }

    fn export(&self, bank: &[BankEntry]) -> String {
        bank_to_string(bank)
    }
}

pub fn import_json(text: &str) -> Result<Vec<BankEntry>, BankError> {
    read_bank(text.as_bytes())
}

pub struct CsvExporter;

impl Exporter for CsvExporter {
    fn name(&self) -> &'static str {
        "csv"
    }

    fn extension(&self) -> &'static str {
        "csv"
    }

    fn export(&self, bank: &[BankEntry]) -> String {
        if bank.is_empty() {
            return String::new();
        }
        let width = bank.iter().map(|e| e.mcq.option_count()).max().unwrap_or(0);
        let mut header: Vec<String> = [
            "id",
            "status",
            "revision",
            "bloom_level",
            "grade_band",
            "learning_objective",
            "scenario",
            "stem",
            "key_letter",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend((0..width).map(|i| format!("option_{}", option_letter(i).to_lowercase())));
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(&header).expect("in-memory write");
        for entry in bank {
            let mcq = &entry.mcq;
            let status = serde_json::to_value(mcq.status).expect("status serializes");
            let mut row = vec![
                mcq.id.clone(),
                status.as_str().unwrap_or_default().to_string(),
                mcq.revision.to_string(),
                mcq.bloom_level.name().to_string(),
                mcq.grade_band.to_string(),
                mcq.learning_objective.clone(),
                mcq.scenario.clone().unwrap_or_default(),
                mcq.stem.clone(),
                option_letter(entry.display_order.key_position()),
            ];
            let options = entry.display_order.arrange(mcq);
            row.extend((0..width).map(|i| options.get(i).map(|s| s.to_string()).unwrap_or_default()));
            out.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(out.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }
}

pub struct GiftExporter;

impl Exporter for GiftExporter {
    fn name(&self) -> &'static str {
        "gift"
    }

    fn extension(&self) -> &'static str {
        "gift"
    }

    fn export(&self, bank: &[BankEntry]) -> String {
        gift::write_gift(bank)
    }
}

#[derive(Clone, Default)]
pub struct ExporterRegistry {
    exporters: BTreeMap<&'static str, Arc<dyn Exporter>>,
}

impl ExporterRegistry {
    pub fn standard() -> Self {
        let mut r = Self::default();
        r.register(Arc::new(JsonExporter));
        r.register(Arc::new(CsvExporter));
        r.register(Arc::new(GiftExporter));
        r
    }

    pub fn register(&mut self, exporter: Arc<dyn Exporter>) {
        self.exporters.insert(exporter.name(), exporter);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.exporters.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Exporter, ExportError> {
        self.exporters
            .get(name.to_ascii_lowercase().as_str())
            .map(|e| e.as_ref())
            .ok_or_else(|| ExportError::UnknownFormat(name.to_string(), self.names().join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcq::fixtures::sample_question;

    fn bank() -> Vec<BankEntry> {
        let mut second = sample_question();
        second.id = "q2".into();
        second.distractors.pop();
        vec![BankEntry::new(sample_question(), 7), BankEntry::new(second, 7)]
    }

    #[test]
    fn registry_lookup() {
        let r = ExporterRegistry::standard();
        assert_eq!(r.names(), vec!["csv", "gift", "json"]);
        assert_eq!(r.get("GIFT").unwrap().name(), "gift");
        let err = r.get("qti").err().unwrap();
        assert_eq!(err.to_string(), "unknown export format \"qti\" (known: csv, gift, json)");
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let bank = bank();
        let text = JsonExporter.export(&bank);
        let back = import_json(&text).unwrap();
        assert_eq!(back, bank);
        assert_eq!(JsonExporter.export(&back), text);
    }

    #[test]
    fn csv_uses_display_order() {
        let bank = bank();
        let text = CsvExporter.export(&bank);
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader.headers().unwrap().clone();
        assert_eq!(headers.len(), 9 + 4);
        let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
        for (row, entry) in rows.iter().zip(&bank) {
            let key_col = 9 + entry.display_order.key_position();
            assert_eq!(&row[8], option_letter(entry.display_order.key_position()));
            assert_eq!(&row[key_col], entry.mcq.key);
        }
        assert_eq!(&rows[1][12], "");
    }

    #[test]
    fn empty_bank_exports_empty_text() {
        for name in ["json", "csv", "gift"] {
            assert_eq!(ExporterRegistry::standard().get(name).unwrap().export(&[]), "");
        }
    }
}
