//! Anomaly injection and detection around AES-128-ECB encryption.
//!
//! Blocks are generated, tagged with timing-delay or fault anomalies,
//! encrypted with per-block timing on a worker pool, and then classified by
//! a timing-threshold rule and by a random forest over timing and block
//! bytes.

pub mod aes;
pub mod bench;
pub mod cipher;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod export;
pub mod forest;
pub mod kat;
pub mod metrics;
pub mod seed;
pub mod threshold;
pub mod workload;

pub use aes::{aes128_encrypt_block, Aes128, Key128};
pub use cipher::{encrypt_timed, run_pipeline, BlockRecord};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentOutcome, ExperimentSettings};
