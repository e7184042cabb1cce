//! Shared test oracles.

#![allow(dead_code)]

use aeslab::forest::best_split;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Independent brute force: every feature, every midpoint between distinct
/// values, gain from directly counted partitions. Returns the left partition.
pub fn brute_force(rows: &[Vec<f64>], labels: &[bool]) -> Option<(usize, Vec<bool>, f64)> {
    fn gini(pos: usize, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let p = pos as f64 / n as f64;
        1.0 - p * p - (1.0 - p) * (1.0 - p)
    }
    let n = rows.len();
    let pos = labels.iter().filter(|&&l| l).count();
    let parent = gini(pos, n);
    let mut best: Option<(usize, Vec<bool>, f64)> = None;
    for f in 0..rows[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let mid = (w[0] + w[1]) / 2.0;
            let left: Vec<bool> = rows.iter().map(|r| r[f] <= mid).collect();
            let nl = left.iter().filter(|&&l| l).count();
            let pl = left.iter().zip(labels).filter(|(l, y)| **l && **y).count();
            let (nr, pr) = (n - nl, pos - pl);
            let gain = parent
                - (nl as f64 / n as f64) * gini(pl, nl)
                - (nr as f64 / n as f64) * gini(pr, nr);
            if best.as_ref().is_none_or(|b| gain > b.2 + 1e-12) {
                best = Some((f, left, gain));
            }
        }
    }
    best.filter(|b| b.2 > 1e-12)
}

pub fn random_dataset(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<bool>) {
    let n = rng.gen_range(2..=64);
    let d = rng.gen_range(1..=4);
    let coarse = rng.gen_bool(0.5);
    let rows = (0..n)
        .map(|_| {
            (0..d)
                .map(|_| {
                    if coarse {
                        rng.gen_range(0..6) as f64
                    } else {
                        rng.gen_range(-100.0..100.0)
                    }
                })
                .collect()
        })
        .collect();
    let bias = rng.gen_range(0.1..0.9);
    let labels = (0..n).map(|_| rng.gen_bool(bias)).collect();
    (rows, labels)
}

pub fn check_against_oracle(rows: &[Vec<f64>], labels: &[bool]) -> Result<(), String> {
    let d = rows[0].len();
    let all: Vec<usize> = (0..d).collect();
    let got = best_split(rows, labels, &all);
    let want = brute_force(rows, labels);
    match (got, want) {
        (None, None) => Ok(()),
        (Some(s), Some((f, left, gain))) => {
            let got_left: Vec<bool> = rows.iter().map(|r| r[s.feature] <= s.threshold).collect();
            if s.feature != f || got_left != left {
                return Err(format!(
                    "split mismatch: got feature {} thr {}, want feature {f}",
                    s.feature, s.threshold
                ));
            }
            if (s.gain - gain).abs() > 1e-9 {
                return Err(format!("gain {} vs {gain}", s.gain));
            }
            Ok(())
        }
        (g, w) => Err(format!(
            "presence mismatch: got {g:?}, oracle {:?}",
            w.map(|w| (w.0, w.2))
        )),
    }
}
