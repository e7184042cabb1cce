//! Timing-threshold detector: a block is malicious when its encryption time
//! strictly exceeds `mean + 3 * (max - min) / n` over the fitted population.

use std::fmt;
use std::str::FromStr;

use crate::cipher::BlockRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdModel {
    pub mean_us: f64,
    pub min_us: f64,
    pub max_us: f64,
    pub n: usize,
    pub threshold_us: f64,
}

/// Which timing population the threshold is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdFit {
    /// Every block of the run.
    #[default]
    All,
    /// Training subset only.
    Train,
}

impl FromStr for ThresholdFit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Self::All),
            "train" => Ok(Self::Train),
            other => Err(Error::Parse(format!("unknown threshold fit `{other}`"))),
        }
    }
}

impl fmt::Display for ThresholdFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::All => "all",
            Self::Train => "train",
        })
    }
}

pub fn fit_threshold(times: &[f64]) -> Result<ThresholdModel> {
    if times.is_empty() {
        return Err(Error::EmptySample(
            "threshold fit needs at least one timing",
        ));
    }
    let n = times.len();
    let (min_us, max_us) = times
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        });
    // Rounding in the sum can push the mean a hair outside [min, max].
    let mean_us = (times.iter().sum::<f64>() / n as f64).clamp(min_us, max_us);
    let threshold_us = mean_us + 3.0 * (max_us - min_us) / n as f64;
    Ok(ThresholdModel {
        mean_us,
        min_us,
        max_us,
        n,
        threshold_us,
    })
}

impl ThresholdModel {
    pub fn is_anomalous(&self, time_us: f64) -> bool {
        time_us > self.threshold_us
    }
}

pub fn classify_threshold(records: &[BlockRecord], model: &ThresholdModel) -> Vec<bool> {
    records
        .iter()
        .map(|r| model.is_anomalous(r.time_us))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_times() {
        let m = fit_threshold(&[1.0; 4]).unwrap();
        assert_eq!((m.mean_us, m.threshold_us), (1.0, 1.0));
        assert!(!m.is_anomalous(1.0));
    }

    #[test]
    fn single_spike() {
        let mut times = vec![1.0; 9];
        times.push(9.0);
        let m = fit_threshold(&times).unwrap();
        assert!((m.mean_us - 1.8).abs() < 1e-12);
        assert!((m.threshold_us - 4.2).abs() < 1e-12);
        let flags: Vec<bool> = times.iter().map(|&t| m.is_anomalous(t)).collect();
        assert_eq!(flags.iter().filter(|&&f| f).count(), 1);
        assert!(flags[9]);
    }

    #[test]
    fn strict_boundary() {
        let m = fit_threshold(&[2.0, 2.0, 2.0, 10.0]).unwrap();
        assert_eq!(m.threshold_us, 10.0);
        assert!(!m.is_anomalous(10.0));
        assert!(m.is_anomalous(10.000001));
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(fit_threshold(&[]), Err(Error::EmptySample(_))));
    }

    proptest! {
        #[test]
        fn constant_population_never_flagged(v in 0.0f64..1e7, n in 1usize..500) {
            let m = fit_threshold(&vec![v; n]).unwrap();
            prop_assert!(!m.is_anomalous(v));
        }

        #[test]
        fn mean_within_range(times in proptest::collection::vec(0.0f64..1e6, 1..200)) {
            let m = fit_threshold(&times).unwrap();
            prop_assert!(m.min_us <= m.mean_us && m.mean_us <= m.max_us);
            prop_assert!(m.threshold_us >= m.mean_us);
        }

        #[test]
        fn translation_equivariance(
            times in proptest::collection::vec(0u32..100_000, 1..200),
            shift in 0u32..1_000_000,
        ) {
            // Integer-valued times keep every sum exact.
            let a: Vec<f64> = times.iter().map(|&t| t as f64).collect();
            let b: Vec<f64> = times.iter().map(|&t| (t + shift) as f64).collect();
            let ma = fit_threshold(&a).unwrap();
            let mb = fit_threshold(&b).unwrap();
            let tol = 1e-9 * mb.threshold_us.abs().max(1.0);
            prop_assert!((mb.threshold_us - ma.threshold_us - shift as f64).abs() <= tol);
            for (x, y) in a.iter().zip(&b) {
                if (y - mb.threshold_us).abs() <= tol {
                    continue;
                }
                prop_assert_eq!(ma.is_anomalous(*x), mb.is_anomalous(*y));
            }
        }
    }
}
