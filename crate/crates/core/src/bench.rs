//! Latency / throughput / peak-memory sweep over block counts and worker counts.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use csv::Writer;

use crate::aes::Key128;
use crate::cipher::run_pipeline;
use crate::error::{Error, Result};
use crate::workload::{RunConfig, TimingMode};

pub const BENCH_HEADER: [&str; 7] = [
    "block_count",
    "workers",
    "mean_latency_us",
    "throughput_bps",
    "peak_memory_mb",
    "wall_time_s",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub block_count: usize,
    pub workers: usize,
    /// Mean of the per-block measured spans.
    pub mean_latency_us: f64,
    pub throughput_bps: f64,
    /// Peak resident set in MiB; `None` where the platform does not expose it.
    pub peak_memory_mb: Option<f64>,
    pub wall_time_s: f64,
    /// Set when the cell failed; the numeric fields are then zero.
    pub error: Option<String>,
}

/// Peak resident set size of this process in MiB, from `/proc/self/status`.
pub fn peak_memory_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let field = |name: &str| {
        status.lines().find_map(|l| {
            let rest = l.strip_prefix(name)?;
            rest.trim()
                .trim_end_matches("kB")
                .trim()
                .parse::<f64>()
                .ok()
        })
    };
    let kib = field("VmHWM:").or_else(|| field("VmRSS:"))?;
    Some(kib / 1024.0)
}

/// One warm-up run, then one measured run of the pipeline.
pub fn measure_run(cfg: &RunConfig, key: &Key128) -> Result<BenchRecord> {
    if cfg.mode != TimingMode::Real {
        return Err(Error::InvalidConfig(
            "benchmarks require real timing mode".into(),
        ));
    }
    run_pipeline(cfg, key)?;

    let start = Instant::now();
    let records = run_pipeline(cfg, key)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let mean_latency_us = records.iter().map(|r| r.time_us).sum::<f64>() / records.len() as f64;
    Ok(BenchRecord {
        block_count: records.len(),
        workers: cfg.workers,
        mean_latency_us,
        throughput_bps: records.len() as f64 / wall_time_s,
        peak_memory_mb: peak_memory_mb(),
        wall_time_s,
        error: None,
    })
}

/// Runs every (block count, workers) cell in ascending order. A failing
/// cell is recorded with its error and the sweep moves on.
pub fn sweep(
    block_counts: &[usize],
    worker_counts: &[usize],
    base: &RunConfig,
    key: &Key128,
) -> Result<Vec<BenchRecord>> {
    if block_counts.is_empty() || worker_counts.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep needs at least one block count and one worker count".into(),
        ));
    }
    let mut blocks = block_counts.to_vec();
    blocks.sort_unstable();
    blocks.dedup();
    let mut workers = worker_counts.to_vec();
    workers.sort_unstable();
    workers.dedup();

    let mut out = Vec::with_capacity(blocks.len() * workers.len());
    for &n in &blocks {
        for &w in &workers {
            let cfg = RunConfig {
                n_blocks: n,
                workers: w,
                ..base.clone()
            };
            out.push(measure_run(&cfg, key).unwrap_or_else(|e| BenchRecord {
                block_count: n,
                workers: w,
                mean_latency_us: 0.0,
                throughput_bps: 0.0,
                peak_memory_mb: None,
                wall_time_s: 0.0,
                error: Some(e.to_string()),
            }));
        }
    }
    Ok(out)
}

pub fn bench_file_name() -> String {
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("bench_{ts}.csv")
}

pub fn write_bench_csv(records: &[BenchRecord], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = Writer::from_writer(file);
    let csv_err = |e| Error::csv(path, e);
    w.write_record(BENCH_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.block_count.to_string(),
            r.workers.to_string(),
            format!("{:.3}", r.mean_latency_us),
            format!("{:.2}", r.throughput_bps),
            r.peak_memory_mb
                .map(|m| format!("{m:.1}"))
                .unwrap_or_default(),
            format!("{:.6}", r.wall_time_s),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `bench_<timestamp>.csv` into `out_dir`.
pub fn export_bench(records: &[BenchRecord], out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(bench_file_name());
    write_bench_csv(records, &path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunConfig {
        RunConfig {
            inject_pct: 0.0,
            mode: TimingMode::Real,
            ..RunConfig::default()
        }
    }

    #[test]
    fn measure_passes_block_count_through() {
        let r = measure_run(
            &RunConfig {
                n_blocks: 1024,
                ..quick()
            },
            &Key128::default(),
        )
        .unwrap();
        assert_eq!(r.block_count, 1024);
        assert_eq!(r.workers, 1);
        let derived = r.block_count as f64 / r.wall_time_s;
        assert!((r.throughput_bps - derived).abs() <= 0.01 * derived);
        assert!(r.mean_latency_us > 0.0);
    }

    #[test]
    fn simulated_mode_rejected() {
        let cfg = RunConfig {
            mode: TimingMode::Simulated,
            ..quick()
        };
        assert!(measure_run(&cfg, &Key128::default()).is_err());
    }

    #[test]
    fn sweep_shape_and_order() {
        let rs = sweep(&[256], &[4, 1, 2], &quick(), &Key128::default()).unwrap();
        assert_eq!(rs.len(), 3);
        assert_eq!(
            rs.iter().map(|r| r.workers).collect::<Vec<_>>(),
            vec![1, 2, 4]
        );

        let rs = sweep(&[512, 64, 256, 128], &[1], &quick(), &Key128::default()).unwrap();
        assert_eq!(
            rs.iter().map(|r| r.block_count).collect::<Vec<_>>(),
            vec![64, 128, 256, 512]
        );
        assert!(sweep(&[], &[1], &quick(), &Key128::default()).is_err());
    }

    #[test]
    fn failing_cell_is_recorded() {
        let rs = sweep(&[16], &[0, 1], &quick(), &Key128::default()).unwrap();
        assert_eq!(rs.len(), 2);
        assert!(rs[0].error.is_some());
        assert!(rs[1].error.is_none());
    }

    #[test]
    fn memory_probe_on_linux() {
        if cfg!(target_os = "linux") {
            assert!(peak_memory_mb().unwrap() > 0.0);
        }
    }
}
