//! Confusion counts, derived metrics and detector comparison.
//! The positive class is "malicious". Zero denominators yield 0.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    Threshold,
    Forest,
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Detector::Threshold => "threshold",
            Detector::Forest => "forest",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub detector: Detector,
    pub counts: ConfusionCounts,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Block indices of the evaluated records, aligned with `predictions`.
    pub indices: Vec<usize>,
    pub predictions: Vec<bool>,
    pub truths: Vec<bool>,
}

pub fn score(detector: Detector, predictions: &[bool], truths: &[bool]) -> Result<DetectionReport> {
    let indices: Vec<usize> = (0..predictions.len()).collect();
    score_indexed(detector, &indices, predictions, truths)
}

/// Scores predictions for the blocks named by `indices`.
pub fn score_indexed(
    detector: Detector,
    indices: &[usize],
    predictions: &[bool],
    truths: &[bool],
) -> Result<DetectionReport> {
    if predictions.len() != truths.len() || indices.len() != truths.len() {
        return Err(Error::Shape(format!(
            "{} predictions, {} truths, {} indices",
            predictions.len(),
            truths.len(),
            indices.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::EmptySample("nothing to score"));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in predictions.iter().zip(truths) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(DetectionReport {
        detector,
        counts: c,
        accuracy: c.accuracy(),
        precision: c.precision(),
        recall: c.recall(),
        f1: c.f1(),
        indices: indices.to_vec(),
        predictions: predictions.to_vec(),
        truths: truths.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub fp: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// Candidate accuracy minus baseline accuracy.
    pub accuracy_gain: f64,
    pub baseline: ErrorPair,
    pub candidate: ErrorPair,
}

/// Compares a candidate detector against a baseline scored on the same
/// blocks. In the usual reading the baseline is the threshold detector and
/// the candidate the forest.
pub fn compare(
    baseline: &DetectionReport,
    candidate: &DetectionReport,
) -> Result<ComparisonReport> {
    if baseline.indices != candidate.indices || baseline.truths != candidate.truths {
        return Err(Error::Comparison);
    }
    let pair = |r: &DetectionReport| ErrorPair {
        fp: r.counts.fp,
        fn_: r.counts.fn_,
    };
    Ok(ComparisonReport {
        accuracy_gain: candidate.accuracy - baseline.accuracy,
        baseline: pair(baseline),
        candidate: pair(candidate),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> (Vec<bool>, Vec<bool>) {
        let mut p = Vec::new();
        let mut t = Vec::new();
        for (n, pv, tv) in [
            (tp, true, true),
            (fp, true, false),
            (fn_, false, true),
            (tn, false, false),
        ] {
            p.extend(std::iter::repeat_n(pv, n));
            t.extend(std::iter::repeat_n(tv, n));
        }
        (p, t)
    }

    #[test]
    fn definitional_arithmetic() {
        let (p, t) = from_counts(8, 2, 2, 8);
        let r = score(Detector::Forest, &p, &t).unwrap();
        for v in [r.precision, r.recall, r.f1, r.accuracy] {
            assert!((v - 0.8).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_and_degenerate() {
        let t = [true, false, true, false, false];
        let r = score(Detector::Threshold, &t, &t).unwrap();
        assert_eq!((r.accuracy, r.counts.fp, r.counts.fn_), (1.0, 0, 0));
        let r = score(Detector::Threshold, &[false; 5], &t).unwrap();
        assert_eq!((r.recall, r.precision, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            score(Detector::Forest, &[true], &[true, false]),
            Err(Error::Shape(_))
        ));
        assert!(score(Detector::Forest, &[], &[]).is_err());
    }

    #[test]
    fn comparison() {
        let t = [
            true, true, false, false, true, false, true, false, true, false,
        ];
        let a = score(Detector::Threshold, &t, &t).unwrap();
        assert_eq!(compare(&a, &a).unwrap().accuracy_gain, 0.0);

        // 6/10 vs 9/10
        let mut p = t;
        p[0] = !p[0];
        let forest = score(Detector::Forest, &p, &t).unwrap();
        let mut q = t;
        for x in q.iter_mut().take(4) {
            *x = !*x;
        }
        let thr = score(Detector::Threshold, &q, &t).unwrap();
        let c = compare(&thr, &forest).unwrap();
        assert!((c.accuracy_gain - 0.3).abs() < 1e-12);
        assert!((compare(&forest, &thr).unwrap().accuracy_gain + 0.3).abs() < 1e-12);
        assert_eq!(c.candidate, ErrorPair { fp: 0, fn_: 1 });
    }

    #[test]
    fn mismatched_subsets_rejected() {
        let a =
            score_indexed(Detector::Threshold, &[0, 1], &[true, false], &[true, false]).unwrap();
        let b = score_indexed(Detector::Forest, &[0, 2], &[true, false], &[true, false]).unwrap();
        assert!(matches!(compare(&a, &b), Err(Error::Comparison)));
    }
}
