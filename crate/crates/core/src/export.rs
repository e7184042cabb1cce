//! CSV export of per-block results and per-detector summaries.
//!
//! Per-block columns:
//! `index,subset,time_us,tag,delay_us,truth_label,threshold_pred,forest_pred,feature_hex`.
//! Booleans are `1`/`0`; an empty cell means "not available". `time_us`
//! carries three decimals, `feature_hex` is the 16 feature bytes as 32 hex
//! digits.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Writer};

use crate::error::{Error, Result};
use crate::experiment::{ExperimentOutcome, ExperimentSettings};
use crate::metrics::DetectionReport;

pub const BLOCK_HEADER: [&str; 9] = [
    "index",
    "subset",
    "time_us",
    "tag",
    "delay_us",
    "truth_label",
    "threshold_pred",
    "forest_pred",
    "feature_hex",
];

pub const SUMMARY_HEADER: [&str; 25] = [
    "detector",
    "tp",
    "fp",
    "fn",
    "tn",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "threshold_us",
    "accuracy_gain",
    "eval_blocks",
    "seed",
    "n_blocks",
    "inject_pct",
    "mode",
    "input_dist",
    "anomaly_kinds",
    "byte_source",
    "threshold_fit",
    "n_trees",
    "max_depth",
    "train_fraction",
    "delay_min_us",
    "delay_max_us",
];

/// One row of a per-block CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRow {
    pub index: usize,
    pub subset: Option<String>,
    pub time_us: f64,
    pub tag: Option<String>,
    pub delay_us: Option<u64>,
    pub truth_label: Option<bool>,
    pub threshold_pred: Option<bool>,
    pub forest_pred: Option<bool>,
    pub feature_bytes: [u8; 16],
}

pub fn run_id(seed: u64, n_blocks: usize, inject_pct: f64) -> String {
    format!("s{seed}_n{n_blocks}_p{inject_pct}")
}

pub fn block_rows(outcome: &ExperimentOutcome) -> Vec<BlockRow> {
    outcome
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| BlockRow {
            index: r.index,
            subset: Some(outcome.subsets[i].as_str().to_string()),
            time_us: r.time_us,
            tag: Some(r.tag.name().to_string()),
            delay_us: r.tag.delay_us(),
            truth_label: Some(r.truth_label),
            threshold_pred: Some(outcome.threshold_preds[i]),
            forest_pred: Some(outcome.forest_preds[i]),
            feature_bytes: outcome.feature_bytes[i],
        })
        .collect()
}

fn flag(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "1",
        Some(false) => "0",
        None => "",
    }
}

pub fn write_block_csv(rows: &[BlockRow], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = Writer::from_writer(file);
    let csv_err = |e| Error::csv(path, e);
    w.write_record(BLOCK_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            r.subset.clone().unwrap_or_default(),
            format!("{:.3}", r.time_us),
            r.tag.clone().unwrap_or_default(),
            r.delay_us.map(|d| d.to_string()).unwrap_or_default(),
            flag(r.truth_label).to_string(),
            flag(r.threshold_pred).to_string(),
            flag(r.forest_pred).to_string(),
            hex::encode(r.feature_bytes),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn summary_row(
    report: &DetectionReport,
    threshold_us: Option<f64>,
    gain: Option<f64>,
    settings: &ExperimentSettings,
) -> Vec<String> {
    let c = &report.counts;
    let run = &settings.run;
    let f = &settings.forest;
    vec![
        report.detector.to_string(),
        c.tp.to_string(),
        c.fp.to_string(),
        c.fn_.to_string(),
        c.tn.to_string(),
        format!("{:.6}", report.accuracy),
        format!("{:.6}", report.precision),
        format!("{:.6}", report.recall),
        format!("{:.6}", report.f1),
        threshold_us.map(|t| format!("{t:.3}")).unwrap_or_default(),
        gain.map(|g| format!("{g:.6}")).unwrap_or_default(),
        c.total().to_string(),
        run.seed.to_string(),
        run.n_blocks.to_string(),
        run.inject_pct.to_string(),
        run.mode.to_string(),
        run.input_dist.to_string(),
        run.anomaly_kinds.to_string(),
        settings.byte_source.to_string(),
        settings.threshold_fit.to_string(),
        f.n_trees.to_string(),
        f.max_depth
            .map(|d| d.to_string())
            .unwrap_or_else(|| "none".into()),
        f.train_fraction.to_string(),
        run.delay_min_us.to_string(),
        run.delay_max_us.to_string(),
    ]
}

/// Writes `blocks_<runid>.csv` and `summary_<runid>.csv` into `out_dir`.
/// The worker count is left out so that files do not depend on it.
pub fn export_csv(
    outcome: &ExperimentOutcome,
    settings: &ExperimentSettings,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let id = run_id(
        settings.run.seed,
        settings.run.n_blocks,
        settings.run.inject_pct,
    );
    let blocks_path = out_dir.join(format!("blocks_{id}.csv"));
    let summary_path = out_dir.join(format!("summary_{id}.csv"));

    write_block_csv(&block_rows(outcome), &blocks_path)?;

    let file = File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    let mut w = Writer::from_writer(file);
    let csv_err = |e| Error::csv(&summary_path, e);
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    w.write_record(summary_row(
        &outcome.threshold_report,
        Some(outcome.threshold.threshold_us),
        None,
        settings,
    ))
    .map_err(csv_err)?;
    w.write_record(summary_row(
        &outcome.forest_report,
        None,
        Some(outcome.comparison.accuracy_gain),
        settings,
    ))
    .map_err(csv_err)?;
    w.flush().map_err(|e| Error::io(&summary_path, e))?;

    Ok((blocks_path, summary_path))
}

fn parse_flag(s: &str, col: &str, line: usize) -> Result<Option<bool>> {
    match s.trim() {
        "" => Ok(None),
        "1" | "true" => Ok(Some(true)),
        "0" | "false" => Ok(Some(false)),
        other => Err(Error::Parse(format!(
            "line {line}: bad {col} value `{other}`"
        ))),
    }
}

/// Reads a per-block CSV. Only `index`, `time_us` and `feature_hex` are
/// required; other columns may be missing or empty.
pub fn read_block_csv(path: &Path) -> Result<Vec<BlockRow>> {
    let mut rdr = ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let need = |name: &str| {
        col(name)
            .ok_or_else(|| Error::Parse(format!("{}: missing column `{name}`", path.display())))
    };
    let (i_index, i_time, i_hex) = (need("index")?, need("time_us")?, need("feature_hex")?);
    let (i_subset, i_tag, i_delay) = (col("subset"), col("tag"), col("delay_us"));
    let (i_truth, i_thr, i_forest) = (
        col("truth_label"),
        col("threshold_pred"),
        col("forest_pred"),
    );

    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec: StringRecord = rec.map_err(|e| Error::csv(path, e))?;
        let line = n + 2;
        let get = |i: Option<usize>| i.and_then(|i| rec.get(i)).unwrap_or("");
        let text = |i: Option<usize>| Some(get(i).to_string()).filter(|s| !s.is_empty());
        let bad = |what: &str| Error::Parse(format!("{}: line {line}: bad {what}", path.display()));

        let bytes = hex::decode(get(Some(i_hex)).trim()).map_err(|_| bad("feature_hex"))?;
        let feature_bytes: [u8; 16] = bytes.try_into().map_err(|_| bad("feature_hex length"))?;
        let delay = get(i_delay).trim();
        rows.push(BlockRow {
            index: get(Some(i_index))
                .trim()
                .parse()
                .map_err(|_| bad("index"))?,
            subset: text(i_subset),
            time_us: get(Some(i_time))
                .trim()
                .parse()
                .map_err(|_| bad("time_us"))?,
            tag: text(i_tag),
            delay_us: if delay.is_empty() {
                None
            } else {
                Some(delay.parse().map_err(|_| bad("delay_us"))?)
            },
            truth_label: parse_flag(get(i_truth), "truth_label", line)?,
            threshold_pred: parse_flag(get(i_thr), "threshold_pred", line)?,
            forest_pred: parse_flag(get(i_forest), "forest_pred", line)?,
            feature_bytes,
        });
    }
    Ok(rows)
}
