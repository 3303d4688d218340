//! Run reports: JSON document plus one CSV row per fold.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, FoldResult};
use crate::data::{Dataset, DatasetName, FileChecksum};
use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "contextualizer.run-report/1";

pub const CSV_HEADER: &str = "run_id,dataset,K,recurrent,default_context,v,p,u,learn_embeddings,seed,\
fold,best_epoch,best_dev_accuracy,test_accuracy,parameter_count,vocabulary_size,wall_time_secs";

/// Package version and git revision baked in at build time.
pub fn build_id() -> String {
    format!("{}+{}", env!("CARGO_PKG_VERSION"), env!("CONTEXTUALIZER_GIT_REV"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: DatasetName,
    pub documents: usize,
    /// `[negative, positive]`.
    pub class_counts: [usize; 2],
    pub checksums: Vec<FileChecksum>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub build: String,
    pub run_id: String,
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub folds: Vec<FoldResult>,
    pub mean_test_accuracy: f64,
    /// Sample standard deviation over folds.
    pub std_test_accuracy: f64,
    pub mean_best_dev_accuracy: f64,
}

impl RunReport {
    pub fn new(config: ExperimentConfig, ds: &Dataset, folds: Vec<FoldResult>) -> Self {
        let test: Vec<f64> = folds.iter().map(|f| f.test_accuracy).collect();
        let dev: Vec<f64> = folds.iter().map(|f| f.best_dev_accuracy).collect();
        let (mean, std) = mean_std(&test);
        Self {
            schema: REPORT_SCHEMA.to_string(),
            build: build_id(),
            run_id: config.run_id(),
            dataset: DatasetSummary {
                name: ds.name,
                documents: ds.len(),
                class_counts: ds.class_counts(),
                checksums: ds.checksums.clone(),
            },
            config,
            folds,
            mean_test_accuracy: mean,
            std_test_accuracy: std,
            mean_best_dev_accuracy: mean_std(&dev).0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// JSON with wall-clock fields zeroed; identical across reruns.
    pub fn metrics_json(&self) -> Result<String> {
        let mut copy = self.clone();
        for f in &mut copy.folds {
            f.wall_time_secs = 0.0;
        }
        copy.to_json()
    }

    pub fn csv_rows(&self) -> Vec<String> {
        let c = &self.config;
        self.folds
            .iter()
            .map(|f| {
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
                    self.run_id,
                    c.dataset,
                    c.steps,
                    c.recurrent,
                    c.default_context,
                    c.embedding_dim,
                    c.position_dim,
                    c.rank,
                    c.learn_embeddings,
                    c.seed,
                    f.fold,
                    f.best_epoch,
                    f.best_dev_accuracy,
                    f.test_accuracy,
                    f.parameter_count,
                    f.vocabulary_size,
                    f.wall_time_secs
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in self.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }

    /// Writes `report.json` and `folds.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = dir.join("report.json");
        std::fs::write(&json, self.to_json()?).map_err(|e| Error::io(&json, e))?;
        let csv = dir.join("folds.csv");
        std::fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let report: RunReport = serde_json::from_str(&text)?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Format(format!("{}: unknown schema {:?}", path.display(), report.schema)));
        }
        Ok(report)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
