//! End-to-end run: encrypt, split, fit both detectors, score on the test subset.

use std::collections::HashSet;

use crate::aes::Key128;
use crate::cipher::{run_pipeline, BlockRecord};
use crate::error::{Error, Result};
use crate::forest::{
    build_dataset, fit_forest, split_train_test, ByteSource, ForestHyperparams, ForestModel,
};
use crate::metrics::{compare, score_indexed, ComparisonReport, DetectionReport, Detector};
use crate::threshold::{fit_threshold, ThresholdFit, ThresholdModel};
use crate::workload::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    pub run: RunConfig,
    pub forest: ForestHyperparams,
    pub byte_source: ByteSource,
    pub threshold_fit: ThresholdFit,
    pub key: Key128,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            run: RunConfig::default(),
            forest: ForestHyperparams::default(),
            byte_source: ByteSource::Plaintext,
            threshold_fit: ThresholdFit::All,
            key: Key128::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subset {
    Train,
    Test,
}

impl Subset {
    pub fn as_str(&self) -> &'static str {
        match self {
            Subset::Train => "train",
            Subset::Test => "test",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// Sorted by block index.
    pub records: Vec<BlockRecord>,
    /// Bytes used as features 1..=16, per record.
    pub feature_bytes: Vec<[u8; 16]>,
    pub subsets: Vec<Subset>,
    pub threshold: ThresholdModel,
    pub forest: ForestModel,
    /// Predictions for every record, test and train alike.
    pub threshold_preds: Vec<bool>,
    pub forest_preds: Vec<bool>,
    pub threshold_report: DetectionReport,
    pub forest_report: DetectionReport,
    pub comparison: ComparisonReport,
}

impl ExperimentOutcome {
    pub fn test_indices(&self) -> Vec<usize> {
        self.threshold_report.indices.clone()
    }

    /// Fraction of blocks matching `select` that `preds` flags, over the test subset.
    pub fn test_recall_where(
        &self,
        preds: &[bool],
        select: impl Fn(&BlockRecord) -> bool,
    ) -> Option<f64> {
        let hits: Vec<bool> = self
            .records
            .iter()
            .zip(&self.subsets)
            .filter(|(r, s)| **s == Subset::Test && select(r))
            .map(|(r, _)| preds[r.index])
            .collect();
        if hits.is_empty() {
            None
        } else {
            Some(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
        }
    }
}

pub fn run_experiment(settings: &ExperimentSettings) -> Result<ExperimentOutcome> {
    let records = run_pipeline(&settings.run, &settings.key)?;
    evaluate_records(records, settings)
}

/// Everything after encryption, for callers that already hold records.
pub fn evaluate_records(
    mut records: Vec<BlockRecord>,
    settings: &ExperimentSettings,
) -> Result<ExperimentOutcome> {
    records.sort_by_key(|r| r.index);
    if records.iter().enumerate().any(|(i, r)| r.index != i) {
        return Err(Error::Shape(
            "record indices must run contiguously from 0".into(),
        ));
    }
    let data = build_dataset(&records, settings.byte_source)?;
    let (train, test) = split_train_test(&data, settings.forest.train_fraction, settings.run.seed)?;
    let train_set: HashSet<usize> = train.iter().map(|v| v.index).collect();

    let times: Vec<f64> = match settings.threshold_fit {
        ThresholdFit::All => records.iter().map(|r| r.time_us).collect(),
        ThresholdFit::Train => train.iter().map(|v| v.values[0]).collect(),
    };
    let threshold = fit_threshold(&times)?;
    let forest = fit_forest(&train, &settings.forest)?;

    let threshold_preds: Vec<bool> = records
        .iter()
        .map(|r| threshold.is_anomalous(r.time_us))
        .collect();
    let forest_preds = forest.predict_all(&data)?;

    let test_idx: Vec<usize> = test.iter().map(|v| v.index).collect();
    let truths: Vec<bool> = test.iter().map(|v| v.label).collect();
    let pick = |preds: &[bool]| test_idx.iter().map(|&i| preds[i]).collect::<Vec<_>>();
    let threshold_report = score_indexed(
        Detector::Threshold,
        &test_idx,
        &pick(&threshold_preds),
        &truths,
    )?;
    let forest_report = score_indexed(Detector::Forest, &test_idx, &pick(&forest_preds), &truths)?;
    let comparison = compare(&threshold_report, &forest_report)?;

    let feature_bytes = data.iter().map(|v| v.bytes()).collect();
    let subsets = records
        .iter()
        .map(|r| {
            if train_set.contains(&r.index) {
                Subset::Train
            } else {
                Subset::Test
            }
        })
        .collect();

    Ok(ExperimentOutcome {
        records,
        feature_bytes,
        subsets,
        threshold,
        forest,
        threshold_preds,
        forest_preds,
        threshold_report,
        forest_report,
        comparison,
    })
}
