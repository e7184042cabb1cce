//! Random forest detector: bagged CART trees over timing and block-byte
//! features, combined by majority vote.

mod dataset;
mod model_io;
mod tree;

pub use dataset::{build_dataset, split_train_test, ByteSource, FeatureVector, N_FEATURES};
pub use model_io::{FORMAT_MAGIC, FORMAT_VERSION};
pub use tree::{best_split, gini, ClassCounts, DecisionTree, Node, Split};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed::{stream_rng, STREAM_TREE};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    /// `None` grows until purity or `min_samples_split`.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_split: usize,
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        Self {
            n_trees: 101,
            max_depth: Some(16),
            min_samples_split: 2,
            // ceil(sqrt(17))
            features_per_split: 5,
            seed: 0,
            train_fraction: 0.7,
        }
    }
}

impl ForestHyperparams {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
        }
        if self.features_per_split == 0 || self.features_per_split > n_features {
            return Err(Error::InvalidConfig(format!(
                "features_per_split must be in [1, {n_features}], got {}",
                self.features_per_split
            )));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidConfig(
                "min_samples_split must be >= 2".into(),
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub hyper: ForestHyperparams,
    pub n_features: usize,
}

/// Fits a forest on arbitrary-width rows. Tree `t` bootstraps `rows.len()`
/// samples with replacement from the stream keyed by `(seed, t)`.
pub fn fit_forest_rows<R: AsRef<[f64]> + Sync>(
    rows: &[R],
    labels: &[bool],
    hyper: &ForestHyperparams,
) -> Result<ForestModel> {
    if rows.is_empty() {
        return Err(Error::EmptySample("training set is empty"));
    }
    if rows.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let n_features = rows[0].as_ref().len();
    if rows.iter().any(|r| r.as_ref().len() != n_features) {
        return Err(Error::Shape("rows have differing widths".into()));
    }
    hyper.validate(n_features)?;
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::DegenerateTraining);
    }

    let n = rows.len();
    let trees = (0..hyper.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(hyper.seed, STREAM_TREE, t as u64);
            let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            DecisionTree::fit(rows, labels, &sample, hyper, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        trees,
        hyper: hyper.clone(),
        n_features,
    })
}

pub fn fit_forest(train: &[FeatureVector], hyper: &ForestHyperparams) -> Result<ForestModel> {
    let rows: Vec<&[f64]> = train.iter().map(|v| &v.values[..]).collect();
    let labels: Vec<bool> = train.iter().map(|v| v.label).collect();
    fit_forest_rows(&rows, &labels, hyper)
}

impl ForestModel {
    pub fn votes(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::Shape(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        Ok(self.trees.iter().filter(|t| t.predict(x)).count())
    }

    /// Majority vote over trees; a tie is benign.
    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(2 * self.votes(x)? > self.trees.len())
    }

    pub fn predict_all(&self, data: &[FeatureVector]) -> Result<Vec<bool>> {
        data.iter().map(|v| self.predict(&v.values)).collect()
    }

    pub fn accuracy(&self, data: &[FeatureVector]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptySample("accuracy over no samples"));
        }
        let preds = self.predict_all(data)?;
        let hits = preds
            .iter()
            .zip(data)
            .filter(|(p, v)| **p == v.label)
            .count();
        Ok(hits as f64 / data.len() as f64)
    }
}

pub fn predict(model: &ForestModel, v: &FeatureVector) -> Result<bool> {
    model.predict(&v.values)
}
