//! Balanced random forest of CART trees split on Gini impurity.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{require_both_classes, ClassifierSpec, FittedModel, TrainedModel};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Positive-class fraction of the training rows reaching the leaf.
    Leaf { value: f64 },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Mean leaf value over trees, per row.
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        let n_trees = self.trees.len() as f64;
        (0..x.n_rows())
            .into_par_iter()
            .map(|i| {
                let row = x.row(i);
                self.trees.iter().map(|t| t.score(row)).sum::<f64>() / n_trees
            })
            .collect()
    }
}

struct GrowParams {
    mtry: usize,
    min_node_size: usize,
}

/// Sum of squared class counts over size, per side. Larger is purer;
/// maximizing it minimizes the size-weighted Gini impurity.
fn purity(pos: usize, n: usize) -> f64 {
    let (p, q) = (pos as f64, (n - pos) as f64);
    (p * p + q * q) / n as f64
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn find_split<R: Rng>(
    x: &Matrix,
    y: &[bool],
    rows: &[usize],
    params: &GrowParams,
    rng: &mut R,
    pairs: &mut Vec<(f64, bool)>,
) -> Option<BestSplit> {
    let m = x.n_cols();
    let n = rows.len();
    let n_pos = rows.iter().filter(|&&i| y[i]).count();
    let parent = purity(n_pos, n);

    let mut candidates: Vec<usize> = index::sample(rng, m, params.mtry.min(m)).into_vec();
    candidates.sort_unstable();

    let mut best: Option<BestSplit> = None;
    for &f in &candidates {
        pairs.clear();
        pairs.extend(rows.iter().map(|&i| (x.get(i, f), y[i])));
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_pos = 0usize;
        for k in 0..n - 1 {
            if pairs[k].1 {
                left_pos += 1;
            }
            let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
            if lo == hi {
                continue;
            }
            let n_left = k + 1;
            let score = purity(left_pos, n_left) + purity(n_pos - left_pos, n - n_left);
            // strict comparison keeps the lowest feature, then lowest threshold
            if score > parent + 1e-12 && best.as_ref().is_none_or(|b| score > b.score) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

fn grow_tree<R: Rng>(x: &Matrix, y: &[bool], rows: Vec<usize>, params: &GrowParams, rng: &mut R) -> Tree {
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut stack = vec![(0usize, rows)];
    let mut pairs = Vec::new();
    while let Some((slot, rows)) = stack.pop() {
        let n = rows.len();
        let n_pos = rows.iter().filter(|&&i| y[i]).count();
        let leaf = Node::Leaf {
            value: n_pos as f64 / n as f64,
        };
        if n_pos == 0 || n_pos == n || n <= params.min_node_size {
            nodes[slot] = leaf;
            continue;
        }
        let Some(split) = find_split(x, y, &rows, params, rng, &mut pairs) else {
            nodes[slot] = leaf;
            continue;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| x.get(i, split.feature) <= split.threshold);
        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[slot] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: left as u32,
            right: left as u32 + 1,
        };
        // right first so the left subtree is expanded (and draws randomness) first
        stack.push((left + 1, right_rows));
        stack.push((left, left_rows));
    }
    Tree { nodes }
}

/// Grows `n_trees` trees, each on its own class-balanced bootstrap sample
/// (`min(class counts)` rows drawn with replacement from each class).
pub fn fit_balanced_rf(
    x: &Matrix,
    y: &[bool],
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<TrainedModel> {
    require_both_classes(x, y)?;
    spec.validate(x.n_cols())?;
    let m = x.n_cols();
    if m == 0 {
        return Err(Error::InvalidInput("random forest needs at least one column".into()));
    }
    let n_trees = spec.int_param("n_trees", 1000)?;
    let default_mtry = ((m as f64).sqrt().floor() as usize).max(1);
    let mtry = spec.int_param("mtry", default_mtry)?;
    if mtry > m {
        return Err(Error::Validation(format!("mtry {mtry} exceeds {m} columns")));
    }
    let params = GrowParams {
        mtry,
        min_node_size: spec.int_param("min_node_size", 1)?,
    };
    let balanced = spec.param("balanced").unwrap_or(1.0) != 0.0;
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    let n_min = pos.len().min(neg.len());

    let trees = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeds::rng(seed, t as u64);
            let rows: Vec<usize> = if balanced {
                let mut rows: Vec<usize> = (0..n_min).map(|_| pos[rng.random_range(0..pos.len())]).collect();
                rows.extend((0..n_min).map(|_| neg[rng.random_range(0..neg.len())]));
                rows
            } else {
                (0..y.len()).map(|_| rng.random_range(0..y.len())).collect()
            };
            grow_tree(x, y, rows, &params, &mut rng)
        })
        .collect();

    let mut fitted_spec = spec.clone();
    fitted_spec.set_param("mtry", mtry as f64);
    Ok(TrainedModel {
        spec: fitted_spec,
        columns: x.names().to_vec(),
        fitted: FittedModel::Forest(Forest { trees }),
        converged: true,
        notes: vec![],
    })
}
