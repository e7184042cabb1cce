//! Command-line interface. Every flag can also be set through an
//! `AESLAB_*` environment variable.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::aes::Key128;
use crate::bench::{export_bench, sweep};
use crate::cipher::run_pipeline;
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentOutcome, ExperimentSettings};
use crate::export::{export_csv, read_block_csv, run_id};
use crate::forest::{
    build_dataset, fit_forest, ByteSource, FeatureVector, ForestHyperparams, ForestModel,
};
use crate::kat;
use crate::metrics::{score, DetectionReport, Detector};
use crate::threshold::ThresholdFit;
use crate::workload::{AnomalyKinds, InputDistribution, RunConfig, TimingMode};

#[derive(Debug, Parser)]
#[command(
    name = "aeslab",
    version,
    about = "AES-128 anomaly injection and detection lab"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encrypt, inject, detect with both detectors and export CSVs.
    Run(RunCmd),
    /// Latency/throughput/memory sweep over block and worker counts.
    Bench(BenchCmd),
    /// Run the AES-128 known-answer suite.
    Kat,
    /// Train a forest on a per-block CSV or a fresh run and save it.
    Train(TrainCmd),
    /// Classify a per-block CSV with a saved forest.
    Predict(PredictCmd),
}

#[derive(Debug, Clone, Args)]
pub struct WorkloadArgs {
    /// Number of 16-byte blocks.
    #[arg(long, env = "AESLAB_BLOCKS", default_value_t = 1024)]
    pub blocks: usize,
    /// Per-block anomaly probability, percent in [0, 100].
    #[arg(long, env = "AESLAB_INJECT_PCT", default_value_t = 20.0, value_parser = parse_pct)]
    pub inject_pct: f64,
    /// Worker threads for encryption.
    #[arg(long, env = "AESLAB_WORKERS", default_value_t = 1)]
    pub workers: usize,
    /// Seed for every random stream of the run.
    #[arg(long, env = "AESLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Timing mode: real (sleep and measure) or simulated (additive model).
    #[arg(long, env = "AESLAB_MODE", default_value = "real")]
    pub mode: TimingMode,
    /// Smallest injected delay, microseconds.
    #[arg(long, env = "AESLAB_DELAY_MIN_US", default_value_t = 5_000)]
    pub delay_min_us: u64,
    /// Largest injected delay, microseconds.
    #[arg(long, env = "AESLAB_DELAY_MAX_US", default_value_t = 20_000)]
    pub delay_max_us: u64,
    /// Plaintext byte distribution: uniform or ascii (0x20..=0x7E).
    #[arg(long, env = "AESLAB_INPUT_DIST", default_value = "uniform")]
    pub input_dist: InputDistribution,
    /// Anomaly variants to inject: both, delay or fault.
    #[arg(long, env = "AESLAB_ANOMALY_KINDS", default_value = "both")]
    pub anomaly_kinds: AnomalyKinds,
    /// Encryptions per block (work amplification), >= 1.
    #[arg(long, env = "AESLAB_WORK_AMP", default_value_t = 1)]
    pub work_amp: u32,
    /// Simulated mode: benign block time, microseconds.
    #[arg(long, env = "AESLAB_BASE_US", default_value_t = 100.0)]
    pub base_us: f64,
    /// Simulated mode: uniform jitter upper bound, microseconds.
    #[arg(long, env = "AESLAB_JITTER_US", default_value_t = 10.0)]
    pub jitter_us: f64,
    /// AES-128 key as 32 hex digits (default: the FIPS-197 example key).
    #[arg(long, env = "AESLAB_KEY_HEX")]
    pub key_hex: Option<String>,
}

impl WorkloadArgs {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            n_blocks: self.blocks,
            inject_pct: self.inject_pct,
            workers: self.workers,
            seed: self.seed,
            mode: self.mode,
            delay_min_us: self.delay_min_us,
            delay_max_us: self.delay_max_us,
            input_dist: self.input_dist,
            anomaly_kinds: self.anomaly_kinds,
            work_amplification: self.work_amp,
            base_time_us: self.base_us,
            jitter_us: self.jitter_us,
        }
    }

    pub fn key(&self) -> Result<Key128> {
        self.key_hex
            .as_deref()
            .map_or(Ok(Key128::default()), Key128::from_hex)
    }
}

fn parse_pct(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=100.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 100]"))
    }
}

/// Tree depth cap; `none` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthLimit(pub Option<usize>);

fn parse_depth(s: &str) -> std::result::Result<DepthLimit, String> {
    match s {
        "none" | "unlimited" => Ok(DepthLimit(None)),
        d => d
            .parse()
            .map(|d| DepthLimit(Some(d)))
            .map_err(|_| format!("expected a depth or `none`, got `{d}`")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct ForestArgs {
    /// Number of trees in the forest.
    #[arg(long, env = "AESLAB_TREES", default_value_t = 101)]
    pub trees: usize,
    /// Maximum tree depth, or `none` for unlimited.
    #[arg(long, env = "AESLAB_MAX_DEPTH", default_value = "16", value_parser = parse_depth)]
    pub max_depth: DepthLimit,
    /// Minimum node size that may still be split.
    #[arg(long, env = "AESLAB_MIN_SAMPLES_SPLIT", default_value_t = 2)]
    pub min_samples_split: usize,
    /// Features drawn at each split, in [1, 17].
    #[arg(long, env = "AESLAB_FEATURES_PER_SPLIT", default_value_t = 5)]
    pub features_per_split: usize,
    /// Fraction of each class used for training, in (0, 1).
    #[arg(long, env = "AESLAB_TRAIN_FRACTION", default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Block bytes used as features: plaintext (post-fault) or ciphertext.
    #[arg(long, env = "AESLAB_BYTE_SOURCE", default_value = "plaintext")]
    pub byte_source: ByteSource,
}

impl ForestArgs {
    pub fn hyper(&self, seed: u64) -> ForestHyperparams {
        ForestHyperparams {
            n_trees: self.trees,
            max_depth: self.max_depth.0,
            min_samples_split: self.min_samples_split,
            features_per_split: self.features_per_split,
            seed,
            train_fraction: self.train_fraction,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunCmd {
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Timing population for the threshold fit: all blocks or the training subset.
    #[arg(long, env = "AESLAB_THRESHOLD_FIT", default_value = "all")]
    pub threshold_fit: ThresholdFit,
    /// Directory for exported CSV files.
    #[arg(long, env = "AESLAB_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,
}

/// Comma-separated list of counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountList(pub Vec<usize>);

fn parse_list(s: &str) -> std::result::Result<CountList, String> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad list entry `{x}`"))
        })
        .collect::<std::result::Result<_, _>>()
        .map(CountList)
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    #[command(flatten)]
    pub workload: WorkloadArgs,
    /// Comma-separated block counts to sweep.
    #[arg(long, env = "AESLAB_BLOCK_COUNTS", default_value = "1024,4096,8192,16384", value_parser = parse_list)]
    pub block_counts: CountList,
    /// Comma-separated worker counts to sweep.
    #[arg(long, env = "AESLAB_WORKER_COUNTS", default_value = "1,2,4", value_parser = parse_list)]
    pub worker_counts: CountList,
    /// Directory for the bench CSV.
    #[arg(long, env = "AESLAB_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    /// Per-block CSV to train on. Without it, a fresh run is generated from the workload flags.
    #[arg(long, env = "AESLAB_INPUT")]
    pub input: Option<PathBuf>,
    /// Where to write the trained model.
    #[arg(long, env = "AESLAB_MODEL")]
    pub model: PathBuf,
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Args)]
pub struct PredictCmd {
    /// Saved model file.
    #[arg(long, env = "AESLAB_MODEL")]
    pub model: PathBuf,
    /// Per-block CSV to classify.
    #[arg(long, env = "AESLAB_INPUT")]
    pub input: PathBuf,
    /// Prediction CSV path (default: standard output).
    #[arg(long, env = "AESLAB_OUTPUT")]
    pub output: Option<PathBuf>,
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(cmd) => cmd_run(&cmd),
        Command::Bench(cmd) => cmd_bench(&cmd),
        Command::Kat => cmd_kat(),
        Command::Train(cmd) => cmd_train(&cmd),
        Command::Predict(cmd) => cmd_predict(&cmd),
    }
}

fn report_table(out: &mut impl Write, reports: &[&DetectionReport]) -> io::Result<()> {
    writeln!(
        out,
        "{:<10} {:>6} {:>6} {:>6} {:>6} {:>9} {:>9} {:>7} {:>7}",
        "detector", "tp", "fp", "fn", "tn", "accuracy", "precision", "recall", "f1"
    )?;
    for r in reports {
        let c = &r.counts;
        writeln!(
            out,
            "{:<10} {:>6} {:>6} {:>6} {:>6} {:>9.4} {:>9.4} {:>7.4} {:>7.4}",
            r.detector.to_string(),
            c.tp,
            c.fp,
            c.fn_,
            c.tn,
            r.accuracy,
            r.precision,
            r.recall,
            r.f1
        )?;
    }
    Ok(())
}

fn print_summary(o: &ExperimentOutcome, s: &ExperimentSettings) -> io::Result<()> {
    let mut out = io::stdout().lock();
    let delays = o.records.iter().filter(|r| r.tag.is_delay()).count();
    let faults = o.records.iter().filter(|r| r.tag.is_fault()).count();
    writeln!(
        out,
        "run {}: {} blocks, {} malicious ({} delay, {} fault), mode {}, {} worker(s)",
        run_id(s.run.seed, s.run.n_blocks, s.run.inject_pct),
        o.records.len(),
        delays + faults,
        delays,
        faults,
        s.run.mode,
        s.run.workers
    )?;
    let t = &o.threshold;
    writeln!(
        out,
        "threshold T = {:.3} us (mean {:.3}, min {:.3}, max {:.3}, n {}, fit on {})",
        t.threshold_us, t.mean_us, t.min_us, t.max_us, t.n, s.threshold_fit
    )?;
    writeln!(
        out,
        "test subset: {} blocks; forest: {} trees on {} bytes",
        o.threshold_report.counts.total(),
        o.forest.trees.len(),
        s.byte_source
    )?;
    report_table(&mut out, &[&o.threshold_report, &o.forest_report])?;
    writeln!(
        out,
        "accuracy gain (forest - threshold): {:+.4}",
        o.comparison.accuracy_gain
    )
}

pub fn cmd_run(cmd: &RunCmd) -> Result<()> {
    let run = cmd.workload.run_config();
    let settings = ExperimentSettings {
        forest: cmd.forest.hyper(run.seed),
        run,
        byte_source: cmd.forest.byte_source,
        threshold_fit: cmd.threshold_fit,
        key: cmd.workload.key()?,
    };
    let outcome = run_experiment(&settings)?;
    let (blocks, summary) = export_csv(&outcome, &settings, &cmd.out_dir)?;
    print_summary(&outcome, &settings).map_err(|e| Error::io("<stdout>", e))?;
    println!("wrote {}", blocks.display());
    println!("wrote {}", summary.display());
    Ok(())
}

pub fn cmd_kat() -> Result<()> {
    let outcome = kat::run_suite();
    for v in kat::VECTORS {
        let failed = outcome.failures.iter().any(|f| f.name == v.name);
        println!("{} {}", if failed { "FAIL" } else { "ok  " }, v.name);
    }
    println!(
        "{}/{} known-answer vectors passed",
        outcome.total - outcome.failures.len(),
        outcome.total
    );
    if outcome.passed() {
        Ok(())
    } else {
        let detail: Vec<String> = outcome
            .failures
            .iter()
            .map(|f| format!("{}: expected {}, got {}", f.name, f.expected, f.actual))
            .collect();
        Err(Error::Pipeline(format!(
            "known-answer mismatch: {}",
            detail.join("; ")
        )))
    }
}

pub fn cmd_bench(cmd: &BenchCmd) -> Result<()> {
    let base = cmd.workload.run_config();
    let key = cmd.workload.key()?;
    let records = sweep(&cmd.block_counts.0, &cmd.worker_counts.0, &base, &key)?;
    println!(
        "{:>8} {:>7} {:>14} {:>14} {:>10} {:>10}",
        "blocks", "workers", "latency_us", "blocks/s", "peak_MiB", "wall_s"
    );
    for r in &records {
        match &r.error {
            Some(e) => println!("{:>8} {:>7} error: {e}", r.block_count, r.workers),
            None => println!(
                "{:>8} {:>7} {:>14.3} {:>14.2} {:>10} {:>10.4}",
                r.block_count,
                r.workers,
                r.mean_latency_us,
                r.throughput_bps,
                r.peak_memory_mb
                    .map(|m| format!("{m:.1}"))
                    .unwrap_or_else(|| "n/a".into()),
                r.wall_time_s
            ),
        }
    }
    let path = export_bench(&records, &cmd.out_dir)?;
    println!("wrote {}", path.display());
    if records.iter().any(|r| r.error.is_some()) {
        return Err(Error::Pipeline("one or more bench cells failed".into()));
    }
    Ok(())
}

fn csv_features(path: &Path, need_labels: bool) -> Result<(Vec<FeatureVector>, bool)> {
    let rows = read_block_csv(path)?;
    if rows.is_empty() {
        return Err(Error::EmptySample("input CSV has no rows"));
    }
    let labelled = rows.iter().all(|r| r.truth_label.is_some());
    if need_labels && !labelled {
        return Err(Error::Parse(format!(
            "{}: every row needs a truth_label",
            path.display()
        )));
    }
    let data = rows
        .iter()
        .map(|r| {
            FeatureVector::new(
                r.index,
                r.time_us,
                &r.feature_bytes,
                r.truth_label.unwrap_or(false),
            )
        })
        .collect();
    Ok((data, labelled))
}

pub fn cmd_train(cmd: &TrainCmd) -> Result<()> {
    let hyper = cmd.forest.hyper(cmd.workload.seed);
    let data = match &cmd.input {
        Some(path) => csv_features(path, true)?.0,
        None => {
            let records = run_pipeline(&cmd.workload.run_config(), &cmd.workload.key()?)?;
            build_dataset(&records, cmd.forest.byte_source)?
        }
    };
    let model = fit_forest(&data, &hyper)?;
    let acc = model.accuracy(&data)?;
    model.save(&cmd.model)?;
    println!(
        "trained {} trees on {} samples; training accuracy {:.6}",
        model.trees.len(),
        data.len(),
        acc
    );
    println!("wrote {}", cmd.model.display());
    Ok(())
}

pub fn cmd_predict(cmd: &PredictCmd) -> Result<()> {
    let model = ForestModel::load(&cmd.model)?;
    let (data, labelled) = csv_features(&cmd.input, false)?;
    let preds = model.predict_all(&data)?;

    let write_preds = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "index,forest_pred")?;
        for (v, p) in data.iter().zip(&preds) {
            writeln!(w, "{},{}", v.index, u8::from(*p))?;
        }
        w.flush()
    };
    match &cmd.output {
        Some(path) => {
            let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
            write_preds(&mut f).map_err(|e| Error::io(path, e))?;
        }
        None => write_preds(&mut io::stdout().lock()).map_err(|e| Error::io("<stdout>", e))?,
    }

    if labelled {
        let truths: Vec<bool> = data.iter().map(|v| v.label).collect();
        let report = score(Detector::Forest, &preds, &truths)?;
        let result = match &cmd.output {
            Some(_) => report_table(&mut io::stdout().lock(), &[&report]),
            None => report_table(&mut io::stderr().lock(), &[&report]),
        };
        result.map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}
