//! Line-oriented text format for trained forests.
//!
//! ```text
//! aeslab-forest 1
//! n_features 17
//! n_trees 3
//! max_depth 16            (or `none`)
//! min_samples_split 2
//! features_per_split 5
//! seed 7
//! train_fraction 0.7
//! tree 0
//! S <feature> <threshold>
//! L <benign> <malicious>
//! ...
//! end
//! ```
//!
//! Each tree is dumped in pre-order. Thresholds are written with Rust's
//! shortest round-trip float formatting, so a reload is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DecisionTree, ForestHyperparams, ForestModel, Node};
use crate::error::{Error, Result};

pub const FORMAT_MAGIC: &str = "aeslab-forest";
pub const FORMAT_VERSION: u32 = 1;

impl ForestModel {
    pub fn to_text(&self) -> String {
        let h = &self.hyper;
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_MAGIC} {FORMAT_VERSION}");
        let _ = writeln!(out, "n_features {}", self.n_features);
        let _ = writeln!(out, "n_trees {}", self.trees.len());
        match h.max_depth {
            Some(d) => {
                let _ = writeln!(out, "max_depth {d}");
            }
            None => out.push_str("max_depth none\n"),
        }
        let _ = writeln!(out, "min_samples_split {}", h.min_samples_split);
        let _ = writeln!(out, "features_per_split {}", h.features_per_split);
        let _ = writeln!(out, "seed {}", h.seed);
        let _ = writeln!(out, "train_fraction {}", h.train_fraction);
        for (i, tree) in self.trees.iter().enumerate() {
            let _ = writeln!(out, "tree {i}");
            dump(&tree.nodes, 0, &mut out);
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .peekable();

        let header = lines.next().ok_or_else(|| load_err("empty model file"))?;
        match header.split_once(' ') {
            Some((FORMAT_MAGIC, v)) => {
                let version: u32 = v
                    .parse()
                    .map_err(|_| load_err(format!("bad version `{v}`")))?;
                if version != FORMAT_VERSION {
                    return Err(load_err(format!(
                        "model format version {version} is not supported (expected {FORMAT_VERSION})"
                    )));
                }
            }
            _ => return Err(load_err(format!("not a forest model: `{header}`"))),
        }

        let mut field = |name: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| load_err(format!("missing `{name}`")))?;
            match line.split_once(' ') {
                Some((k, v)) if k == name => Ok(v.to_string()),
                _ => Err(load_err(format!("expected `{name}`, found `{line}`"))),
            }
        };
        let n_features: usize = parse(&field("n_features")?)?;
        let n_trees: usize = parse(&field("n_trees")?)?;
        let max_depth = match field("max_depth")?.as_str() {
            "none" => None,
            d => Some(parse(d)?),
        };
        let hyper = ForestHyperparams {
            n_trees,
            max_depth,
            min_samples_split: parse(&field("min_samples_split")?)?,
            features_per_split: parse(&field("features_per_split")?)?,
            seed: parse(&field("seed")?)?,
            train_fraction: parse(&field("train_fraction")?)?,
        };

        let mut trees = Vec::with_capacity(n_trees);
        for i in 0..n_trees {
            let expected = format!("tree {i}");
            match lines.next() {
                Some(l) if l == expected => {}
                other => return Err(load_err(format!("expected `{expected}`, found {other:?}"))),
            }
            let mut nodes = Vec::new();
            read_node(&mut lines, &mut nodes, n_features)?;
            trees.push(DecisionTree { nodes });
        }
        match lines.next() {
            Some("end") => {}
            other => return Err(load_err(format!("expected `end`, found {other:?}"))),
        }
        if lines.next().is_some() {
            return Err(load_err("trailing content after `end`"));
        }
        Ok(ForestModel {
            trees,
            hyper,
            n_features,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn load_err(msg: impl Into<String>) -> Error {
    Error::ModelLoad(msg.into())
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| load_err(format!("cannot parse `{s}`")))
}

fn dump(nodes: &[Node], at: usize, out: &mut String) {
    match &nodes[at] {
        Node::Leaf { counts } => {
            let _ = writeln!(out, "L {} {}", counts[0], counts[1]);
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let _ = writeln!(out, "S {feature} {threshold}");
            dump(nodes, *left, out);
            dump(nodes, *right, out);
        }
    }
}

fn read_node<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    nodes: &mut Vec<Node>,
    n_features: usize,
) -> Result<usize> {
    let line = lines.next().ok_or_else(|| load_err("truncated tree"))?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    let at = nodes.len();
    match parts.as_slice() {
        ["L", benign, malicious] => {
            nodes.push(Node::Leaf {
                counts: [parse(benign)?, parse(malicious)?],
            });
        }
        ["S", feature, threshold] => {
            let feature: usize = parse(feature)?;
            if feature >= n_features {
                return Err(load_err(format!("feature {feature} out of range")));
            }
            nodes.push(Node::Split {
                feature,
                threshold: parse(threshold)?,
                left: 0,
                right: 0,
            });
            let left = read_node(lines, nodes, n_features)?;
            let right = read_node(lines, nodes, n_features)?;
            nodes[at] = Node::Split {
                feature,
                threshold: parse(threshold)?,
                left,
                right,
            };
        }
        _ => return Err(load_err(format!("bad node line `{line}`"))),
    }
    Ok(at)
}
