//! CART classification trees with Gini impurity.

use std::cmp::Ordering;

use rand::seq::index;
use rand::Rng;

use super::ForestHyperparams;

/// Class counts as `[benign, malicious]`.
pub type ClassCounts = [usize; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: ClassCounts,
    },
}

/// Nodes in pre-order; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

pub fn gini(counts: ClassCounts) -> f64 {
    let total = counts[0] + counts[1];
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn count(labels: &[bool], idx: &[usize]) -> ClassCounts {
    let pos = idx.iter().filter(|&&i| labels[i]).count();
    [idx.len() - pos, pos]
}

fn sum_sq(c: ClassCounts) -> u128 {
    (c[0] as u128).pow(2) + (c[1] as u128).pow(2)
}

/// `sum_sq(left) / n_left + sum_sq(right) / n_right` as an exact fraction.
/// Minimizing weighted child Gini is maximizing this quantity, and keeping
/// it rational makes tie-breaking exact.
#[derive(Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn of(left: ClassCounts, right: ClassCounts) -> Self {
        let nl = (left[0] + left[1]) as u128;
        let nr = (right[0] + right[1]) as u128;
        Purity {
            num: sum_sq(left) * nr + sum_sq(right) * nl,
            den: nl * nr,
        }
    }

    fn cmp(&self, other: &Purity) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

fn weighted_gain(parent: ClassCounts, left: ClassCounts, right: ClassCounts) -> f64 {
    let n = (parent[0] + parent[1]) as f64;
    let nl = (left[0] + left[1]) as f64;
    let nr = (right[0] + right[1]) as f64;
    gini(parent) - (nl / n) * gini(left) - (nr / n) * gini(right)
}

/// Midpoint between two distinct sorted values, nudged down so that `hi`
/// never satisfies `hi <= threshold`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Best Gini split of `rows[idx]` over `candidates`.
///
/// Thresholds are midpoints between consecutive distinct values. Ties go to
/// the lowest feature index, then the lowest threshold. Returns `None` when
/// no split strictly reduces impurity, unless `allow_zero_gain` is set, in
/// which case any admissible threshold on an impure node qualifies.
pub(crate) fn best_split_indexed<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[bool],
    idx: &[usize],
    candidates: &[usize],
    allow_zero_gain: bool,
) -> Option<Split> {
    let parent = count(labels, idx);
    if parent[0] == 0 || parent[1] == 0 {
        return None;
    }
    let n = idx.len();
    let mut features = candidates.to_vec();
    features.sort_unstable();
    features.dedup();

    let mut best: Option<(usize, f64, Purity, ClassCounts, ClassCounts)> = None;
    let mut order = idx.to_vec();
    for &f in &features {
        order.sort_by(|&a, &b| rows[a].as_ref()[f].total_cmp(&rows[b].as_ref()[f]));
        let mut left = [0usize; 2];
        for i in 0..n - 1 {
            left[usize::from(labels[order[i]])] += 1;
            let lo = rows[order[i]].as_ref()[f];
            let hi = rows[order[i + 1]].as_ref()[f];
            if lo >= hi {
                continue;
            }
            let right = [parent[0] - left[0], parent[1] - left[1]];
            let purity = Purity::of(left, right);
            let better = match &best {
                None => true,
                Some((_, _, b, _, _)) => purity.cmp(b) == Ordering::Greater,
            };
            if better {
                best = Some((f, midpoint(lo, hi), purity, left, right));
            }
        }
    }

    let (feature, threshold, purity, left, right) = best?;
    // Positive gain iff purity exceeds the parent's sum_sq / n.
    if !allow_zero_gain && purity.num * n as u128 <= sum_sq(parent) * purity.den {
        return None;
    }
    Some(Split {
        feature,
        threshold,
        gain: weighted_gain(parent, left, right),
    })
}

/// Best split over all `rows` considering only `candidates`.
pub fn best_split<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[bool],
    candidates: &[usize],
) -> Option<Split> {
    assert_eq!(rows.len(), labels.len(), "rows and labels differ in length");
    if rows.len() < 2 {
        return None;
    }
    let idx: Vec<usize> = (0..rows.len()).collect();
    best_split_indexed(rows, labels, &idx, candidates, false)
}

impl DecisionTree {
    /// Fits a tree on `rows[idx]` (`idx` may repeat entries, as a bootstrap
    /// sample does). Each node draws its candidate features from `rng`.
    pub fn fit<R: AsRef<[f64]>>(
        rows: &[R],
        labels: &[bool],
        idx: &[usize],
        hyper: &ForestHyperparams,
        rng: &mut impl Rng,
    ) -> Self {
        assert!(!idx.is_empty(), "cannot fit a tree on zero samples");
        let n_features = rows[idx[0]].as_ref().len();
        let mut tree = DecisionTree { nodes: Vec::new() };
        let mut builder = Builder {
            rows,
            labels,
            hyper,
            n_features,
            per_split: hyper.features_per_split.clamp(1, n_features),
        };
        builder.grow(&mut tree.nodes, idx.to_vec(), 0, rng);
        tree
    }

    /// Position in `nodes()` of the leaf that `x` lands in.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn leaf_counts(&self, x: &[f64]) -> ClassCounts {
        match &self.nodes[self.leaf_index(x)] {
            Node::Leaf { counts } => *counts,
            Node::Split { .. } => unreachable!("leaf_index stops at a leaf"),
        }
    }

    /// Leaf majority; a tied leaf votes benign.
    pub fn predict(&self, x: &[f64]) -> bool {
        let c = self.leaf_counts(x);
        c[1] > c[0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct Builder<'a, R> {
    rows: &'a [R],
    labels: &'a [bool],
    hyper: &'a ForestHyperparams,
    n_features: usize,
    per_split: usize,
}

impl<R: AsRef<[f64]>> Builder<'_, R> {
    fn grow(
        &mut self,
        nodes: &mut Vec<Node>,
        idx: Vec<usize>,
        depth: usize,
        rng: &mut impl Rng,
    ) -> usize {
        let at = nodes.len();
        let counts = count(self.labels, &idx);
        let stop = self.hyper.max_depth.is_some_and(|d| depth >= d)
            || idx.len() < self.hyper.min_samples_split
            || counts[0] == 0
            || counts[1] == 0;
        if stop {
            nodes.push(Node::Leaf { counts });
            return at;
        }

        let candidates = index::sample(rng, self.n_features, self.per_split).into_vec();
        // XOR-like nodes have no positive-gain split but still separate
        // further down, so a zero-gain split is taken when nothing better exists.
        let Some(split) = best_split_indexed(self.rows, self.labels, &idx, &candidates, true)
        else {
            nodes.push(Node::Leaf { counts });
            return at;
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i].as_ref()[split.feature] <= split.threshold);
        nodes.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(nodes, left_idx, depth + 1, rng);
        let right = self.grow(nodes, right_idx, depth + 1, rng);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut nodes[at]
        {
            *l = left;
            *r = right;
        }
        at
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hyper(max_depth: Option<usize>, features_per_split: usize) -> ForestHyperparams {
        ForestHyperparams {
            max_depth,
            features_per_split,
            ..ForestHyperparams::default()
        }
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini([4, 0]), 0.0);
        assert_eq!(gini([2, 2]), 0.5);
        assert!((gini([3, 1]) - 0.375).abs() < 1e-15);
        assert_eq!(gini([0, 0]), 0.0);
    }

    #[test]
    fn split_on_four_points() {
        let rows = [[1.0], [2.0], [3.0], [4.0]];
        let s = best_split(&rows, &[false, false, true, true], &[0]).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.5);
        assert!((s.gain - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_split_when_pure_or_constant() {
        let rows = [[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]];
        assert!(best_split(&rows, &[true; 3], &[0, 1]).is_none());
        let flat = [[1.0, 5.0], [1.0, 5.0], [1.0, 5.0]];
        assert!(best_split(&flat, &[true, false, true], &[0, 1]).is_none());
    }

    #[test]
    fn tie_prefers_lowest_feature_then_threshold() {
        // Both features separate perfectly.
        let rows = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let s = best_split(&rows, &[false, false, true, true], &[1, 0]).unwrap();
        assert_eq!((s.feature, s.threshold), (0, 1.5));
        // Splits at 0.5 and 2.5 both gain 1/6; 1.5 gains nothing.
        let rows = [[0.0], [1.0], [2.0], [3.0]];
        let s = best_split(&rows, &[true, false, false, true], &[0]).unwrap();
        assert_eq!(s.threshold, 0.5);
        assert!((s.gain - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn candidates_restrict_search() {
        let rows = [[0.0, 9.0], [0.0, 8.0], [1.0, 7.0], [1.0, 6.0]];
        let labels = [false, false, true, true];
        assert_eq!(best_split(&rows, &labels, &[1]).unwrap().feature, 1);
    }

    #[test]
    fn midpoint_never_captures_upper_value() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let m = midpoint(lo, hi);
        assert!(lo <= m && m < hi);
    }

    #[test]
    fn separable_single_feature() {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [i as f64]).collect();
        let labels: Vec<bool> = (0..20).map(|i| i >= 12).collect();
        let idx: Vec<usize> = (0..20).collect();
        let t = DecisionTree::fit(
            &rows,
            &labels,
            &idx,
            &hyper(None, 1),
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        assert_eq!(t.depth(), 1);
        assert!(rows.iter().zip(&labels).all(|(r, &y)| t.predict(r) == y));
    }

    #[test]
    fn depth_cap_zero_is_majority_leaf() {
        let rows: Vec<[f64; 1]> = (0..10).map(|i| [i as f64]).collect();
        let labels: Vec<bool> = (0..10).map(|i| i >= 3).collect();
        let idx: Vec<usize> = (0..10).collect();
        let t = DecisionTree::fit(
            &rows,
            &labels,
            &idx,
            &hyper(Some(0), 1),
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        assert_eq!(t.nodes, vec![Node::Leaf { counts: [3, 7] }]);
        assert!(t.predict(&[0.0]));
    }

    #[test]
    fn pure_input_is_single_leaf() {
        let rows = [[1.0], [2.0]];
        let t = DecisionTree::fit(
            &rows,
            &[true, true],
            &[0, 1],
            &hyper(None, 1),
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn xor_is_still_fitted() {
        let rows = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let labels = [false, true, true, false];
        assert!(best_split(&rows, &labels, &[0, 1]).is_none());
        let t = DecisionTree::fit(
            &rows,
            &labels,
            &[0, 1, 2, 3],
            &hyper(None, 2),
            &mut ChaCha8Rng::seed_from_u64(1),
        );
        assert!(rows.iter().zip(&labels).all(|(r, &y)| t.predict(r) == y));
    }

    #[test]
    fn tied_leaf_votes_benign() {
        let t = DecisionTree {
            nodes: vec![Node::Leaf { counts: [3, 3] }],
        };
        assert!(!t.predict(&[0.0]));
    }
}
