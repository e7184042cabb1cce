use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::cipher::BlockRecord;
use crate::error::{Error, Result};
use crate::seed::{stream_rng, STREAM_SPLIT};

/// Feature 0 is the encryption time, features 1..=16 the block bytes.
pub const N_FEATURES: usize = 17;

/// Which 16 bytes of a record become features 1..=16.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ByteSource {
    /// Post-fault plaintext, the bytes that were actually encrypted.
    #[default]
    Plaintext,
    Ciphertext,
}

impl FromStr for ByteSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plaintext" => Ok(Self::Plaintext),
            "ciphertext" => Ok(Self::Ciphertext),
            other => Err(Error::Parse(format!("unknown byte source `{other}`"))),
        }
    }
}

impl fmt::Display for ByteSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plaintext => "plaintext",
            Self::Ciphertext => "ciphertext",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    /// Index of the originating block.
    pub index: usize,
    pub values: [f64; N_FEATURES],
    pub label: bool,
}

impl FeatureVector {
    pub fn new(index: usize, time_us: f64, bytes: &[u8; 16], label: bool) -> Self {
        let mut values = [0.0; N_FEATURES];
        values[0] = time_us;
        for (v, &b) in values[1..].iter_mut().zip(bytes) {
            *v = f64::from(b);
        }
        Self {
            index,
            values,
            label,
        }
    }

    pub fn bytes(&self) -> [u8; 16] {
        let mut out = [0u8; 16];
        for (o, v) in out.iter_mut().zip(&self.values[1..]) {
            *o = *v as u8;
        }
        out
    }
}

pub fn build_dataset(records: &[BlockRecord], source: ByteSource) -> Result<Vec<FeatureVector>> {
    if records.is_empty() {
        return Err(Error::EmptySample("dataset needs at least one record"));
    }
    let mut data: Vec<FeatureVector> = records
        .iter()
        .map(|r| {
            let bytes = match source {
                ByteSource::Plaintext => &r.plaintext_effective,
                ByteSource::Ciphertext => &r.ciphertext,
            };
            FeatureVector::new(r.index, r.time_us, bytes, r.truth_label)
        })
        .collect();
    data.sort_by_key(|v| v.index);
    Ok(data)
}

/// Stratified split: each class is shuffled with its own seeded stream and
/// `round(count * train_fraction)` of it (at least one, leaving at least one)
/// goes to training. Both partitions keep the input order.
pub fn split_train_test(
    data: &[FeatureVector],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<FeatureVector>, Vec<FeatureVector>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptySample("cannot split an empty dataset"));
    }

    let mut in_train = vec![false; data.len()];
    for label in [false, true] {
        let mut members: Vec<usize> = (0..data.len())
            .filter(|&i| data[i].label == label)
            .collect();
        match members.len() {
            0 => continue,
            1 => return Err(Error::Stratification { label, count: 1 }),
            _ => {}
        }
        members.shuffle(&mut stream_rng(seed, STREAM_SPLIT, u64::from(label)));
        let count = members.len();
        let k = ((count as f64 * train_fraction).round() as usize).clamp(1, count - 1);
        for &i in &members[..k] {
            in_train[i] = true;
        }
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (v, t) in data.iter().zip(in_train) {
        if t {
            train.push(v.clone());
        } else {
            test.push(v.clone());
        }
    }
    Ok((train, test))
}
