//! Configuration grids of the published result tables and side-by-side
//! comparison of measured runs against the published accuracies.

use std::fmt::Write as _;

use serde::Serialize;

use super::{ExperimentConfig, RunReport};
use crate::data::DatasetName;
use crate::error::{Error, Result};
use crate::model::DefaultContext;

/// One run of a table grid with its published test accuracy (percent).
#[derive(Clone, Debug, PartialEq)]
pub struct TableEntry {
    pub label: String,
    pub config: ExperimentConfig,
    pub reference: f64,
}

/// Published Universal Sentence Encoder accuracies (percent); reference
/// constants only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UseBaseline {
    pub dataset: DatasetName,
    pub transformer: f64,
    pub dan: f64,
}

pub const USE_BASELINES: [UseBaseline; 4] = [
    UseBaseline { dataset: DatasetName::Mr, transformer: 81.4, dan: 74.5 },
    UseBaseline { dataset: DatasetName::Cr, transformer: 87.4, dan: 81.0 },
    UseBaseline { dataset: DatasetName::Subj, transformer: 93.9, dan: 92.7 },
    UseBaseline { dataset: DatasetName::Mpqa, transformer: 87.0, dan: 85.4 },
];

/// The runs behind table 2 (depth), 3 (default context) or 4 (datasets).
pub fn table_grid(table: u8, seed: u64) -> Result<Vec<TableEntry>> {
    let base = ExperimentConfig {
        seed,
        ..ExperimentConfig::frozen_profile(DatasetName::Mr)
    };
    let entry = |label: String, config: ExperimentConfig, reference: f64| TableEntry {
        label,
        config,
        reference,
    };
    match table {
        2 => {
            let published = [(1, 57.9, 57.8), (5, 72.4, 70.7), (10, 72.8, 72.1), (20, 72.3, 71.4)];
            let mut out = Vec::new();
            for (k, rec, reg) in published {
                for (recurrent, reference) in [(true, rec), (false, reg)] {
                    let config = ExperimentConfig {
                        steps: k,
                        recurrent,
                        default_context: DefaultContext::Random,
                        ..base.clone()
                    };
                    let kind = if recurrent { "recurrent" } else { "regular" };
                    out.push(entry(format!("K={k} {kind}"), config, reference));
                }
            }
            Ok(out)
        }
        3 => {
            let published = [
                (DefaultContext::Ones, 73.1, 71.2),
                (DefaultContext::Learned, 73.5, 72.2),
                (DefaultContext::Random, 57.9, 72.4),
            ];
            let mut out = Vec::new();
            for (dc, k1, k5) in published {
                for (k, reference) in [(1, k1), (5, k5)] {
                    let config = ExperimentConfig {
                        steps: k,
                        recurrent: true,
                        default_context: dc,
                        ..base.clone()
                    };
                    out.push(entry(format!("{dc} K={k}"), config, reference));
                }
            }
            Ok(out)
        }
        4 => {
            let published = [
                (DatasetName::Mr, 76.6),
                (DatasetName::Cr, 79.0),
                (DatasetName::Subj, 91.2),
                (DatasetName::Mpqa, 85.3),
            ];
            Ok(published
                .into_iter()
                .map(|(ds, reference)| {
                    let config = ExperimentConfig {
                        seed,
                        ..ExperimentConfig::learned_profile(ds)
                    };
                    entry(ds.to_string(), config, reference)
                })
                .collect())
        }
        other => Err(Error::Input(format!("no table {other}; expected 2, 3 or 4"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub run_id: String,
    pub reference: f64,
    /// Mean test accuracy in percent, if the run exists.
    pub measured: Option<f64>,
    pub std: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub table: u8,
    pub build: String,
    pub rows: Vec<ComparisonRow>,
    pub use_baselines: Vec<UseBaseline>,
}

impl Comparison {
    /// Pairs each grid entry with the report of the same run, if any.
    pub fn new(table: u8, grid: &[TableEntry], reports: &[Option<RunReport>]) -> Self {
        let rows = grid
            .iter()
            .zip(reports)
            .map(|(e, r)| {
                let measured = r.as_ref().map(|r| 100.0 * r.mean_test_accuracy);
                ComparisonRow {
                    label: e.label.clone(),
                    run_id: e.config.run_id(),
                    reference: e.reference,
                    measured,
                    std: r.as_ref().map(|r| 100.0 * r.std_test_accuracy),
                    delta: measured.map(|m| m - e.reference),
                }
            })
            .collect();
        Self {
            table,
            build: super::build_id(),
            rows,
            use_baselines: if table == 4 { USE_BASELINES.to_vec() } else { Vec::new() },
        }
    }

    pub fn measured(&self, label: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.label == label).and_then(|r| r.measured)
    }

    /// Plain-text side-by-side table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "table {} (test accuracy %, build {})", self.table, self.build);
        let _ = writeln!(out, "{:<18} {:>9} {:>9} {:>7} {:>7}", "run", "published", "measured", "std", "delta");
        for r in &self.rows {
            let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.1}"));
            let delta = r.delta.map_or("-".to_string(), |x| format!("{x:+.1}"));
            let _ = writeln!(
                out,
                "{:<18} {:>9.1} {:>9} {:>7} {:>7}",
                r.label,
                r.reference,
                cell(r.measured),
                cell(r.std),
                delta
            );
        }
        for b in &self.use_baselines {
            let _ = writeln!(out, "USE reference {:<5} T {:.1}  D {:.1}", b.dataset.to_string(), b.transformer, b.dan);
        }
        out
    }
}
