use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::EvaluationReport;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 8] = [
    "model",
    "set_length",
    "adj_r2",
    "nrmse_pct",
    "peak_pct",
    "energy_pct",
    "peak_hour",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", content = "message", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: String,
    /// Split label, e.g. `1y-train/2y-test`.
    pub set_length: String,
    /// Residual order actually fitted, for candidates with a SARIMA stage.
    pub residual_order: Option<String>,
    pub status: RowStatus,
    pub report: Option<EvaluationReport>,
}

/// Ranking criteria, compared in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankKey {
    Nrmse,
    /// `|peak_pct - 100|`
    PeakCloseness,
    /// `|energy_pct - 100|`; a missing value ranks last.
    EnergyCloseness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRule {
    pub keys: Vec<RankKey>,
}

impl Default for SelectionRule {
    fn default() -> Self {
        Self {
            keys: vec![RankKey::Nrmse, RankKey::PeakCloseness, RankKey::EnergyCloseness],
        }
    }
}

impl RankKey {
    fn value(self, r: &EvaluationReport) -> f64 {
        match self {
            Self::Nrmse => r.nrmse_pct,
            Self::PeakCloseness => (r.peak_pct - 100.0).abs(),
            Self::EnergyCloseness => r.energy_pct.map_or(f64::INFINITY, |e| (e - 100.0).abs()),
        }
    }
}

impl SelectionRule {
    /// Successful rows by the keys then by model name; failed rows last, by
    /// name.
    fn compare(&self, a: &ComparisonRow, b: &ComparisonRow) -> Ordering {
        match (&a.report, &b.report) {
            (Some(ra), Some(rb)) => self
                .keys
                .iter()
                .map(|k| k.value(ra).total_cmp(&k.value(rb)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.model.cmp(&b.model)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => a.model.cmp(&b.model),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    /// In candidate-list order.
    pub rows: Vec<ComparisonRow>,
    /// Row indices, best first.
    pub ranking: Vec<usize>,
    pub rule: SelectionRule,
    pub seed: u64,
    /// Design columns the candidates were fitted with.
    pub columns: Vec<String>,
}

impl ComparisonTable {
    pub fn new(rows: Vec<ComparisonRow>, rule: &SelectionRule, seed: u64, columns: &[String]) -> Self {
        let mut ranking: Vec<usize> = (0..rows.len()).collect();
        ranking.sort_by(|&i, &j| rule.compare(&rows[i], &rows[j]).then(i.cmp(&j)));
        Self {
            rows,
            ranking,
            rule: rule.clone(),
            seed,
            columns: columns.to_vec(),
        }
    }

    pub fn ranked(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.ranking.iter().map(|&i| &self.rows[i])
    }

    /// CSV in ranked order with the columns of [`CSV_COLUMNS`].
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv encoding: {e}"));
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for row in self.ranked() {
            let fields = match &row.report {
                Some(r) => [
                    format!("{:.4}", r.adj_r2),
                    format!("{:.3}", r.nrmse_pct),
                    format!("{:.2}", r.peak_pct),
                    r.energy_pct.map_or(String::new(), |e| format!("{e:.2}")),
                    format!("{:02}:00", r.peak_hour),
                ],
                None => Default::default(),
            };
            let status = match &row.status {
                RowStatus::Ok => "ok".to_string(),
                RowStatus::Failed(m) => format!("failed: {m}"),
            };
            let mut record = vec![row.model.clone(), row.set_length.clone()];
            record.extend(fields);
            record.push(status);
            w.write_record(&record).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv encoding: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Index of the best successful row.
pub fn select_best(table: &ComparisonTable) -> Result<usize> {
    table
        .ranking
        .first()
        .copied()
        .filter(|&i| table.rows[i].report.is_some())
        .ok_or(Error::NoSuccessfulCandidate)
}
