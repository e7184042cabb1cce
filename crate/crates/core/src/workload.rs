//! Plaintext generation and anomaly scheduling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::aes::BLOCK_LEN;
use crate::error::{Error, Result};
use crate::seed::{stream_rng, STREAM_PLAINTEXT, STREAM_SCHEDULE};

pub const ASCII_LOW: u8 = 0x20;
pub const ASCII_HIGH: u8 = 0x7e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputDistribution {
    /// Each byte i.i.d. over 0x00..=0xFF.
    #[default]
    UniformRandom,
    /// Each byte i.i.d. over printable ASCII, 0x20..=0x7E.
    StructuredAscii,
}

impl FromStr for InputDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::UniformRandom),
            "ascii" => Ok(Self::StructuredAscii),
            other => Err(Error::Parse(format!(
                "unknown input distribution `{other}`"
            ))),
        }
    }
}

impl fmt::Display for InputDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::UniformRandom => "uniform",
            Self::StructuredAscii => "ascii",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnomalyTag {
    None,
    Delay { delay_us: u64 },
    Fault,
}

impl AnomalyTag {
    pub fn is_malicious(&self) -> bool {
        !matches!(self, AnomalyTag::None)
    }

    pub fn is_delay(&self) -> bool {
        matches!(self, AnomalyTag::Delay { .. })
    }

    pub fn is_fault(&self) -> bool {
        matches!(self, AnomalyTag::Fault)
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnomalyTag::None => "none",
            AnomalyTag::Delay { .. } => "delay",
            AnomalyTag::Fault => "fault",
        }
    }

    pub fn delay_us(&self) -> Option<u64> {
        match self {
            AnomalyTag::Delay { delay_us } => Some(*delay_us),
            _ => None,
        }
    }
}

/// Which anomaly variants the scheduler may pick for an anomalous block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnomalyKinds {
    /// Fair coin between delay and fault.
    #[default]
    Both,
    DelayOnly,
    FaultOnly,
}

impl FromStr for AnomalyKinds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(Self::Both),
            "delay" => Ok(Self::DelayOnly),
            "fault" => Ok(Self::FaultOnly),
            other => Err(Error::Parse(format!("unknown anomaly kinds `{other}`"))),
        }
    }
}

impl fmt::Display for AnomalyKinds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Both => "both",
            Self::DelayOnly => "delay",
            Self::FaultOnly => "fault",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimingMode {
    /// Sleep for real and measure on the monotonic clock.
    #[default]
    Real,
    /// Additive timing model, no sleeping. Fully deterministic.
    Simulated,
}

impl FromStr for TimingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Self::Real),
            "simulated" => Ok(Self::Simulated),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for TimingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Real => "real",
            Self::Simulated => "simulated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainBlock {
    pub index: usize,
    pub bytes: [u8; BLOCK_LEN],
    pub tag: AnomalyTag,
}

/// Injection parameters consumed by [`assign_anomalies`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionPlan {
    pub inject_pct: f64,
    pub delay_min_us: u64,
    pub delay_max_us: u64,
    pub kinds: AnomalyKinds,
}

impl Default for InjectionPlan {
    fn default() -> Self {
        Self {
            inject_pct: 20.0,
            delay_min_us: 5_000,
            delay_max_us: 20_000,
            kinds: AnomalyKinds::Both,
        }
    }
}

impl InjectionPlan {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.inject_pct) {
            return Err(Error::InvalidConfig(format!(
                "inject_pct must be in [0, 100], got {}",
                self.inject_pct
            )));
        }
        if self.delay_min_us < 1 {
            return Err(Error::InvalidConfig("delay_min_us must be >= 1".into()));
        }
        if self.delay_min_us > self.delay_max_us {
            return Err(Error::InvalidConfig(format!(
                "delay_min_us ({}) exceeds delay_max_us ({})",
                self.delay_min_us, self.delay_max_us
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_blocks: usize,
    /// Per-block injection probability in percent.
    pub inject_pct: f64,
    pub workers: usize,
    pub seed: u64,
    pub mode: TimingMode,
    pub delay_min_us: u64,
    pub delay_max_us: u64,
    pub input_dist: InputDistribution,
    pub anomaly_kinds: AnomalyKinds,
    /// Number of times each block is encrypted back to back.
    pub work_amplification: u32,
    /// Simulated mode: benign encryption time.
    pub base_time_us: f64,
    /// Simulated mode: upper bound of the uniform jitter added to every block.
    pub jitter_us: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let plan = InjectionPlan::default();
        Self {
            n_blocks: 1024,
            inject_pct: plan.inject_pct,
            workers: 1,
            seed: 0,
            mode: TimingMode::Real,
            delay_min_us: plan.delay_min_us,
            delay_max_us: plan.delay_max_us,
            input_dist: InputDistribution::UniformRandom,
            anomaly_kinds: AnomalyKinds::Both,
            work_amplification: 1,
            base_time_us: 100.0,
            jitter_us: 10.0,
        }
    }
}

impl RunConfig {
    pub fn injection_plan(&self) -> InjectionPlan {
        InjectionPlan {
            inject_pct: self.inject_pct,
            delay_min_us: self.delay_min_us,
            delay_max_us: self.delay_max_us,
            kinds: self.anomaly_kinds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_blocks == 0 {
            return Err(Error::EmptyWorkload);
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be >= 1".into()));
        }
        if self.work_amplification == 0 {
            return Err(Error::InvalidConfig(
                "work_amplification must be >= 1".into(),
            ));
        }
        for (name, v) in [
            ("base_time_us", self.base_time_us),
            ("jitter_us", self.jitter_us),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be a non-negative number"
                )));
            }
        }
        self.injection_plan().validate()
    }
}

/// Generates `n` untagged blocks. Block `i` draws from its own seeded stream.
pub fn generate_blocks(n: usize, dist: InputDistribution, seed: u64) -> Result<Vec<PlainBlock>> {
    if n == 0 {
        return Err(Error::EmptyWorkload);
    }
    Ok((0..n)
        .map(|index| {
            let mut rng = stream_rng(seed, STREAM_PLAINTEXT, index as u64);
            let mut bytes = [0u8; BLOCK_LEN];
            match dist {
                InputDistribution::UniformRandom => rng.fill(&mut bytes[..]),
                InputDistribution::StructuredAscii => {
                    for b in bytes.iter_mut() {
                        *b = rng.gen_range(ASCII_LOW..=ASCII_HIGH);
                    }
                }
            }
            PlainBlock {
                index,
                bytes,
                tag: AnomalyTag::None,
            }
        })
        .collect())
}

/// Tags each block independently: anomalous with probability `inject_pct / 100`,
/// then delay or fault according to `plan.kinds`.
pub fn assign_anomalies(
    mut blocks: Vec<PlainBlock>,
    plan: &InjectionPlan,
    seed: u64,
) -> Result<Vec<PlainBlock>> {
    plan.validate()?;
    let p = plan.inject_pct / 100.0;
    for block in blocks.iter_mut() {
        let mut rng = stream_rng(seed, STREAM_SCHEDULE, block.index as u64);
        let draw: f64 = rng.gen();
        let coin: bool = rng.gen();
        let delay_us = rng.gen_range(plan.delay_min_us..=plan.delay_max_us);
        block.tag = if draw >= p {
            AnomalyTag::None
        } else {
            let delay = match plan.kinds {
                AnomalyKinds::Both => coin,
                AnomalyKinds::DelayOnly => true,
                AnomalyKinds::FaultOnly => false,
            };
            if delay {
                AnomalyTag::Delay { delay_us }
            } else {
                AnomalyTag::Fault
            }
        };
    }
    Ok(blocks)
}

/// Generated and tagged blocks for a run configuration.
pub fn build_schedule(cfg: &RunConfig) -> Result<Vec<PlainBlock>> {
    cfg.validate()?;
    let blocks = generate_blocks(cfg.n_blocks, cfg.input_dist, cfg.seed)?;
    assign_anomalies(blocks, &cfg.injection_plan(), cfg.seed)
}

/// Complements the first byte (XOR 0xFF).
pub fn apply_fault(mut block: PlainBlock) -> PlainBlock {
    block.bytes = fault_bytes(block.bytes);
    block
}

pub fn fault_bytes(mut bytes: [u8; BLOCK_LEN]) -> [u8; BLOCK_LEN] {
    bytes[0] ^= 0xff;
    bytes
}

/// Truncates or zero-pads to exactly 16 bytes.
pub fn normalize_block(raw: &[u8]) -> [u8; BLOCK_LEN] {
    let mut out = [0u8; BLOCK_LEN];
    let n = raw.len().min(BLOCK_LEN);
    out[..n].copy_from_slice(&raw[..n]);
    out
}
