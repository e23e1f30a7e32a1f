//! Evaluation reports as aligned text or JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::metrics::{BinaryMetrics, ConfusionMatrix, Prf};
use super::pipeline::{QuestionOutcome, ScopeReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?} (expected text or json)")),
        }
    }
}

/// Any subset of classification, retrieval and cell-level results.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub title: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binary: Option<BinaryMetrics>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub p_at_k: BTreeMap<usize, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub adjusted_p_at_k: BTreeMap<usize, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<QuestionOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_prf: Option<Prf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<ScopeReport>,
}

impl EvalReport {
    pub fn new(title: impl Into<String>) -> EvalReport {
        EvalReport {
            title: title.into(),
            ..EvalReport::default()
        }
    }

    /// Fills the confusion, accuracy and (for two labels) binary sections.
    pub fn with_confusion(mut self, m: ConfusionMatrix) -> EvalReport {
        self.accuracy = Some(m.accuracy());
        self.binary = m.binary();
        self.confusion = Some(m);
        self
    }

    pub fn with_cells(mut self, r: &ScopeReport) -> EvalReport {
        self.cells = r.outcomes.clone();
        self.macro_prf = Some(r.macro_prf);
        self
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            ReportFormat::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        if let Some(m) = &self.confusion {
            out.push('\n');
            out.push_str(&confusion_table(m));
        }
        if let Some(a) = self.accuracy {
            let _ = writeln!(out, "\naccuracy   {:.3}", a);
        }
        if let Some(b) = &self.binary {
            let _ = writeln!(out, "precision  {:.3}", b.precision);
            let _ = writeln!(out, "recall     {:.3}", b.recall);
            let _ = writeln!(out, "f1         {:.3}", b.f1);
        }
        if !self.p_at_k.is_empty() {
            let mut rows = vec![vec![
                "k".to_string(),
                "P@k".to_string(),
                "adjusted".to_string(),
            ]];
            for (k, p) in &self.p_at_k {
                let adj = self
                    .adjusted_p_at_k
                    .get(k)
                    .map_or("-".to_string(), |a| format!("{a:.3}"));
                rows.push(vec![k.to_string(), format!("{p:.3}"), adj]);
            }
            out.push('\n');
            out.push_str(&aligned(&rows));
        }
        if !self.cells.is_empty() {
            out.push('\n');
            out.push_str(&outcome_table(&self.cells));
        }
        if let Some(p) = &self.macro_prf {
            let _ = writeln!(
                out,
                "\nmacro      precision {:.3}  recall {:.3}  f1 {:.3}",
                p.precision, p.recall, p.f1
            );
        }
        if !self.sweep.is_empty() {
            out.push('\n');
            out.push_str(&sweep_grid(&self.sweep));
            let failures: Vec<String> = self
                .sweep
                .iter()
                .flat_map(|r| {
                    r.failures().map(move |o| {
                        format!(
                            "{} / {} / {}: {}",
                            r.scope,
                            r.row_mode,
                            o.id,
                            o.error.as_deref().unwrap_or("")
                        )
                    })
                })
                .collect();
            if !failures.is_empty() {
                let _ = writeln!(out, "\nfailed questions ({}):", failures.len());
                for f in failures {
                    let _ = writeln!(out, "  {f}");
                }
            }
        }
        out
    }
}

/// Left-aligns each column to its widest cell, two spaces apart.
fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{:<w$}", s, w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn confusion_table(m: &ConfusionMatrix) -> String {
    let mut rows = vec![std::iter::once("gold \\ predicted".to_string())
        .chain(m.labels.iter().cloned())
        .collect::<Vec<_>>()];
    for (label, counts) in m.labels.iter().zip(&m.counts) {
        rows.push(
            std::iter::once(label.clone())
                .chain(counts.iter().map(u64::to_string))
                .collect(),
        );
    }
    aligned(&rows)
}

fn outcome_table(cells: &[QuestionOutcome]) -> String {
    let mut rows = vec![[
        "question",
        "table",
        "precision",
        "recall",
        "f1",
        "query / error",
    ]
    .map(String::from)
    .to_vec()];
    for o in cells {
        rows.push(vec![
            o.id.clone(),
            o.table.clone().unwrap_or_else(|| "-".into()),
            format!("{:.3}", o.prf.precision),
            format!("{:.3}", o.prf.recall),
            format!("{:.3}", o.prf.f1),
            o.error
                .clone()
                .or_else(|| o.query.clone())
                .unwrap_or_default(),
        ]);
    }
    aligned(&rows)
}

/// Scopes down, row modes across; each cell is macro P / R / F1.
fn sweep_grid(reports: &[ScopeReport]) -> String {
    let mut modes: Vec<_> = reports.iter().map(|r| r.row_mode).collect();
    modes.dedup();
    modes.sort();
    modes.dedup();
    let mut scopes: Vec<_> = reports.iter().map(|r| r.scope).collect();
    scopes.sort();
    scopes.dedup();
    let mut rows = vec![std::iter::once("scope".to_string())
        .chain(modes.iter().map(|m| format!("{m} (P / R / F1)")))
        .chain(std::iter::once("table hit".to_string()))
        .collect::<Vec<_>>()];
    for s in scopes {
        let mut row = vec![s.to_string()];
        let mut hit = None;
        for m in &modes {
            match reports.iter().find(|r| r.scope == s && r.row_mode == *m) {
                Some(r) => {
                    let p = r.macro_prf;
                    row.push(format!(
                        "{:.3} / {:.3} / {:.3}",
                        p.precision, p.recall, p.f1
                    ));
                    hit = Some(r.table_hit_rate);
                }
                None => row.push("-".into()),
            }
        }
        row.push(hit.map_or("-".into(), |h| format!("{h:.3}")));
        rows.push(row);
    }
    aligned(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::metrics::metrics_from_confusion;

    #[test]
    fn text_report_lists_counts_and_rates() {
        let mut m = ConfusionMatrix::new(vec!["negative".into(), "positive".into()]);
        m.record(1, 1);
        m.record(0, 0);
        m.record(0, 1);
        let r = EvalReport::new("select / dev").with_confusion(m);
        let text = r.render(ReportFormat::Text);
        assert!(text.starts_with("select / dev\n"));
        assert!(text.contains("accuracy   0.667"), "{text}");
        assert!(text.contains("precision  0.500"), "{text}");
    }

    #[test]
    fn json_report_recomputes_from_counts() {
        let mut r = EvalReport::new("x");
        r.binary = Some(metrics_from_confusion(182, 209, 30, 1001).unwrap());
        let v: serde_json::Value = serde_json::from_str(&r.render(ReportFormat::Json)).unwrap();
        let b = &v["binary"];
        let (tp, fp) = (b["tp"].as_f64().unwrap(), b["fp"].as_f64().unwrap());
        assert_eq!(b["precision"].as_f64().unwrap(), tp / (tp + fp));
        assert_eq!(b["fn"].as_u64(), Some(30));
        assert!(v.get("p_at_k").is_none());
    }

    #[test]
    fn aligned_pads_columns() {
        let t = aligned(&[
            vec!["a".into(), "b".into()],
            vec!["long".into(), "c".into()],
        ]);
        assert_eq!(t, "a     b\nlong  c\n");
    }

    #[test]
    fn formats_parse() {
        assert_eq!("JSON".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert!("yaml".parse::<ReportFormat>().is_err());
    }
}
