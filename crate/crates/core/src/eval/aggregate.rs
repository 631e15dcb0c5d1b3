use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{mean_sem, MeanSem};
use super::pipeline::{EvalReport, Method};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    pub num_splits: usize,
    pub acc_seen: MeanSem,
    pub acc_unseen: MeanSem,
    /// Mean of the per-split harmonic means.
    pub h: MeanSem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
}

/// Folds per-split reports into one row per method, in method order.
/// Reports of one method must share the same config echo.
pub fn aggregate(reports: &[EvalReport]) -> Result<AggregateReport> {
    let mut methods: Vec<Method> = reports.iter().map(|r| r.method).collect();
    methods.sort_unstable();
    methods.dedup();
    let mut rows = Vec::with_capacity(methods.len());
    for method in methods {
        let group: Vec<&EvalReport> = reports.iter().filter(|r| r.method == method).collect();
        if let Some(odd) = group.iter().find(|r| r.config != group[0].config) {
            return Err(Error::Config(format!(
                "{method}: split {} was run with a different config than split {}",
                odd.split_id, group[0].split_id
            )));
        }
        let stat = |f: fn(&EvalReport) -> f64| {
            let v: Vec<f64> = group.iter().map(|r| f(r)).collect();
            mean_sem(&v).expect("group is nonempty")
        };
        rows.push(AggregateRow {
            method,
            num_splits: group.len(),
            acc_seen: stat(|r| r.acc_seen),
            acc_unseen: stat(|r| r.acc_unseen),
            h: stat(|r| r.h),
        });
    }
    Ok(AggregateReport { rows })
}

fn pct(s: &MeanSem) -> String {
    match s.sem {
        Some(sem) => format!("{:.2} ± {:.2}", 100.0 * s.mean, 100.0 * sem),
        None => format!("{:.2}", 100.0 * s.mean),
    }
}

impl AggregateReport {
    pub fn row(&self, method: Method) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// Aligned text table, accuracies in percent as mean ± SEM.
    pub fn to_table(&self) -> String {
        let header = ["Method", "Splits", "Acc_seen", "Acc_unseen", "H"];
        let body: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.method.label().to_string(),
                    r.num_splits.to_string(),
                    pct(&r.acc_seen),
                    pct(&r.acc_unseen),
                    pct(&r.h),
                ]
            })
            .collect();
        let mut widths = header.map(|h| h.chars().count());
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&header.map(String::from));
        for row in &body {
            line(row);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,splits,acc_seen_mean,acc_seen_sem,acc_unseen_mean,acc_unseen_sem,h_mean,h_sem\n");
        let cell = |s: &MeanSem| {
            let sem = s.sem.map(|v| format!("{v:.6}")).unwrap_or_default();
            format!("{:.6},{sem}", s.mean)
        };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.method.key(),
                r.num_splits,
                cell(&r.acc_seen),
                cell(&r.acc_unseen),
                cell(&r.h)
            );
        }
        out
    }
}
