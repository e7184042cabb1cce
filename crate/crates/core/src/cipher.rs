//! Timed AES-128-ECB encryption of a tagged block schedule over a worker pool.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::aes::{Aes128, Key128, BLOCK_LEN};
use crate::error::{Error, Result};
use crate::seed::{stream_rng, STREAM_JITTER};
use crate::workload::{build_schedule, fault_bytes, AnomalyTag, PlainBlock, RunConfig, TimingMode};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub index: usize,
    /// Plaintext after any fault, i.e. what was actually encrypted.
    pub plaintext_effective: [u8; BLOCK_LEN],
    pub ciphertext: [u8; BLOCK_LEN],
    pub time_us: f64,
    pub tag: AnomalyTag,
    pub truth_label: bool,
}

/// Encrypts one block, applying its anomaly, and records the encryption span.
///
/// In real mode the span is measured on the monotonic clock and covers the
/// injected sleep plus all `work_amplification` encryptions. In simulated
/// mode nothing sleeps and the span is `base + U[0, jitter] + delay`, with
/// the jitter drawn from a stream keyed by `(seed, block.index)`.
pub fn encrypt_timed(
    block: &PlainBlock,
    cipher: &Aes128,
    cfg: &RunConfig,
    seed: u64,
) -> BlockRecord {
    let plaintext = match block.tag {
        AnomalyTag::Fault => fault_bytes(block.bytes),
        _ => block.bytes,
    };
    let reps = cfg.work_amplification.max(1);

    let (ciphertext, time_us) = match cfg.mode {
        TimingMode::Real => {
            let start = Instant::now();
            if let AnomalyTag::Delay { delay_us } = block.tag {
                std::thread::sleep(Duration::from_micros(delay_us));
            }
            let mut ct = [0u8; BLOCK_LEN];
            for _ in 0..reps {
                ct = cipher.encrypt_block(black_box(&plaintext));
                black_box(&ct);
            }
            (ct, start.elapsed().as_secs_f64() * 1e6)
        }
        TimingMode::Simulated => {
            let mut ct = [0u8; BLOCK_LEN];
            for _ in 0..reps {
                ct = cipher.encrypt_block(&plaintext);
            }
            let jitter = if cfg.jitter_us > 0.0 {
                stream_rng(seed, STREAM_JITTER, block.index as u64).gen_range(0.0..=cfg.jitter_us)
            } else {
                0.0
            };
            let delay = block.tag.delay_us().unwrap_or(0) as f64;
            (ct, cfg.base_time_us + jitter + delay)
        }
    };

    BlockRecord {
        index: block.index,
        plaintext_effective: plaintext,
        ciphertext,
        time_us,
        tag: block.tag,
        truth_label: block.tag.is_malicious(),
    }
}

/// Encrypts an already-built schedule on a pool of `cfg.workers` threads.
/// Records come back sorted by index.
pub fn encrypt_schedule(
    blocks: &[PlainBlock],
    cfg: &RunConfig,
    key: &Key128,
) -> Result<Vec<BlockRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .thread_name(|i| format!("aeslab-worker-{i}"))
        .build()
        .map_err(|e| Error::Pipeline(format!("worker pool: {e}")))?;
    let cipher = Aes128::new(key);

    let mut records: Vec<BlockRecord> = pool.install(|| {
        blocks
            .par_iter()
            .with_max_len(1)
            .map(|b| encrypt_timed(b, &cipher, cfg, cfg.seed))
            .collect()
    });
    records.sort_by_key(|r| r.index);
    Ok(records)
}

/// Generates, tags and encrypts `cfg.n_blocks` blocks.
pub fn run_pipeline(cfg: &RunConfig, key: &Key128) -> Result<Vec<BlockRecord>> {
    let blocks = build_schedule(cfg)?;
    encrypt_schedule(&blocks, cfg, key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::InputDistribution;

    fn sim_cfg() -> RunConfig {
        RunConfig {
            mode: TimingMode::Simulated,
            jitter_us: 0.0,
            base_time_us: 100.0,
            ..RunConfig::default()
        }
    }

    fn block(tag: AnomalyTag) -> PlainBlock {
        PlainBlock {
            index: 0,
            bytes: [0x41; 16],
            tag,
        }
    }

    #[test]
    fn simulated_additive_model() {
        let cipher = Aes128::new(&Key128::default());
        let cfg = sim_cfg();
        let r = encrypt_timed(&block(AnomalyTag::None), &cipher, &cfg, 1);
        assert_eq!(r.time_us, 100.0);
        assert!(!r.truth_label);
        let r = encrypt_timed(
            &block(AnomalyTag::Delay { delay_us: 5000 }),
            &cipher,
            &cfg,
            1,
        );
        assert_eq!(r.time_us, 5100.0);
        assert!(r.truth_label);
    }

    #[test]
    fn simulated_jitter_bounded() {
        let cipher = Aes128::new(&Key128::default());
        let cfg = RunConfig {
            jitter_us: 10.0,
            ..sim_cfg()
        };
        for i in 0..200 {
            let b = PlainBlock {
                index: i,
                ..block(AnomalyTag::None)
            };
            let t = encrypt_timed(&b, &cipher, &cfg, 3).time_us;
            assert!((100.0..=110.0).contains(&t));
        }
    }

    #[test]
    fn fault_changes_encrypted_plaintext() {
        let cipher = Aes128::new(&Key128::default());
        let r = encrypt_timed(&block(AnomalyTag::Fault), &cipher, &sim_cfg(), 1);
        assert_eq!(r.plaintext_effective[0], 0x41 ^ 0xff);
        assert_eq!(r.ciphertext, cipher.encrypt_block(&r.plaintext_effective));
    }

    #[test]
    fn real_mode_span_covers_sleep() {
        let cipher = Aes128::new(&Key128::default());
        let cfg = RunConfig {
            mode: TimingMode::Real,
            ..RunConfig::default()
        };
        let r = encrypt_timed(
            &block(AnomalyTag::Delay { delay_us: 5000 }),
            &cipher,
            &cfg,
            1,
        );
        assert!(r.time_us >= 5000.0, "{}", r.time_us);
        let r = encrypt_timed(&block(AnomalyTag::None), &cipher, &cfg, 1);
        assert!(r.time_us >= 0.0);
    }

    #[test]
    fn pipeline_cardinality_and_order() {
        let cfg = RunConfig {
            n_blocks: 16384,
            ..sim_cfg()
        };
        let records = run_pipeline(&cfg, &Key128::default()).unwrap();
        assert_eq!(records.len(), 16384);
        assert!(records.iter().enumerate().all(|(i, r)| r.index == i));
    }

    #[test]
    fn pipeline_is_worker_count_independent() {
        let base = RunConfig {
            n_blocks: 1024,
            jitter_us: 10.0,
            seed: 99,
            input_dist: InputDistribution::StructuredAscii,
            ..sim_cfg()
        };
        let one = run_pipeline(&base, &Key128::default()).unwrap();
        for workers in [2, 4] {
            let cfg = RunConfig {
                workers,
                ..base.clone()
            };
            assert_eq!(run_pipeline(&cfg, &Key128::default()).unwrap(), one);
        }
    }

    #[test]
    fn injection_count_near_expectation() {
        let cfg = RunConfig {
            n_blocks: 1024,
            inject_pct: 20.0,
            seed: 17,
            ..sim_cfg()
        };
        let records = run_pipeline(&cfg, &Key128::default()).unwrap();
        let positives = records.iter().filter(|r| r.truth_label).count() as f64;
        // mean 204.8, sigma = sqrt(1024 * 0.2 * 0.8) = 12.8
        assert!((positives - 204.8).abs() <= 3.0 * 12.8, "{positives}");
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = RunConfig {
            workers: 0,
            ..sim_cfg()
        };
        assert!(run_pipeline(&cfg, &Key128::default()).is_err());
        let cfg = RunConfig {
            n_blocks: 0,
            ..sim_cfg()
        };
        assert!(matches!(
            run_pipeline(&cfg, &Key128::default()),
            Err(Error::EmptyWorkload)
        ));
    }
}
