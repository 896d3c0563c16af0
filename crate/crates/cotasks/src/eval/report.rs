//! Condition-comparison tables: one row per condition, one column per
//! question-type code plus the overall average.

use serde::{Deserialize, Serialize};

use crate::annotation::QType;
use crate::error::CotasksError;

use super::aggregate::ScoreReport;
use super::condition::ConditionId;

/// Column order of the comparison table.
pub const COLUMNS: [QType; 8] =
    [QType::CW, QType::CH, QType::TP, QType::TC, QType::TN, QType::DC, QType::DL, QType::DO];

/// One rendered row: the eight per-type means plus the overall mean, each
/// absent when the run had no judged records for that slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub condition: ConditionId,
    pub model_id: String,
    /// Means for [`COLUMNS`], then the overall mean in the last slot.
    pub cells: [Option<f64>; 9],
}

/// A cross-condition comparison over the same question set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub qid_digest: String,
    pub rows: Vec<TableRow>,
}

/// Build the comparison from per-condition score reports. Every report
/// must cover the same question set; otherwise the rows would not be
/// comparable and the table is refused.
pub fn comparison(reports: &[ScoreReport]) -> Result<ComparisonTable, CotasksError> {
    let first = reports
        .first()
        .ok_or_else(|| CotasksError::Config("cannot build a table from zero runs".into()))?;
    for report in reports {
        if report.qid_digest != first.qid_digest {
            return Err(CotasksError::Config(format!(
                "non-comparable runs: {} and {} cover different question sets",
                first.condition, report.condition
            )));
        }
    }

    let rows = reports
        .iter()
        .map(|report| {
            let mut cells: [Option<f64>; 9] = [None; 9];
            for (i, qtype) in COLUMNS.iter().enumerate() {
                cells[i] = report.per_qtype.get(qtype).map(|m| m.mean);
            }
            cells[8] = report.overall.map(|m| m.mean);
            TableRow {
                condition: report.condition,
                model_id: report.model_id.clone(),
                cells,
            }
        })
        .collect();

    Ok(ComparisonTable { qid_digest: first.qid_digest.clone(), rows })
}

/// Render as a markdown table, bolding each column's best value (ties are
/// all bolded). Empty cells render as `-`.
pub fn render_markdown(table: &ComparisonTable) -> String {
    let mut best: [Option<f64>; 9] = [None; 9];
    for row in &table.rows {
        for (i, cell) in row.cells.iter().enumerate() {
            if let Some(v) = *cell {
                best[i] = Some(best[i].map_or(v, |b: f64| b.max(v)));
            }
        }
    }

    let mut out = String::new();
    out.push_str("| Condition | ");
    for qtype in COLUMNS {
        out.push_str(qtype.as_str());
        out.push_str(" | ");
    }
    out.push_str("Avg |\n");
    out.push_str("|---|");
    out.push_str(&"---|".repeat(9));
    out.push('\n');

    for row in &table.rows {
        out.push_str(&format!("| {} |", row.condition));
        for (i, cell) in row.cells.iter().enumerate() {
            match *cell {
                Some(v) => {
                    let text = format!("{v:.1}");
                    if best[i].is_some_and(|b| (v - b).abs() < 1e-9) {
                        out.push_str(&format!(" **{text}** |"));
                    } else {
                        out.push_str(&format!(" {text} |"));
                    }
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}
