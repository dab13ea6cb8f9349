use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::features::DailyFeatureRow;
use super::scaler::ScalerStats;
use super::MileageError;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_FORMAT: &str = "refuel-forest";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 150,
            max_depth: 6,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node<T> {
    Leaf(T),
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
}

/// Regression tree stored as an arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Tree<T> {
    /// Greedy variance-reduction splits over all features, thresholds at
    /// midpoints between consecutive distinct values, `x <= t` goes left.
    /// `sample` lists training row indices (with repetition for bootstrap).
    pub fn fit(x: &[Vec<T>], y: &[T], sample: Vec<usize>, params: &ForestParams) -> Self {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow(x, y, sample, 0, params);
        tree
    }

    fn grow(&mut self, x: &[Vec<T>], y: &[T], sample: Vec<usize>, depth: usize, params: &ForestParams) -> usize {
        let id = self.nodes.len();
        let n = sample.len();
        let total: T = sample.iter().map(|&i| y[i]).sum();
        let leaf = total / T::count(n.max(1));
        self.nodes.push(Node::Leaf(leaf));

        let pure = sample.iter().all(|&i| y[i] == y[sample[0]]);
        if depth >= params.max_depth || n < params.min_samples_split || pure {
            return id;
        }
        let Some((feature, threshold)) = best_split(x, y, &sample, total) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = sample.into_iter().partition(|&i| x[i][feature] <= threshold);
        let left = self.grow(x, y, l, depth + 1, params);
        let right = self.grow(x, y, r, depth + 1, params);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    pub fn predict(&self, x: &[T]) -> T {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Maximizes `S_l²/n_l + S_r²/n_r`, which is equivalent to minimizing the
/// summed squared error of the two children. First feature and first
/// position win ties.
#[allow(clippy::needless_range_loop)]
fn best_split<T: Scalar>(x: &[Vec<T>], y: &[T], sample: &[usize], total: T) -> Option<(usize, T)> {
    let n = sample.len();
    let n_features = x.first().map_or(0, Vec::len);
    let mut best: Option<(T, usize, T)> = None;
    let mut order = sample.to_vec();
    for f in 0..n_features {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
        let mut left_sum = T::zero();
        for k in 0..n - 1 {
            left_sum = left_sum + y[order[k]];
            let (a, b) = (x[order[k]][f], x[order[k + 1]][f]);
            if a >= b {
                continue;
            }
            let nl = T::count(k + 1);
            let nr = T::count(n - k - 1);
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / nl + right_sum * right_sum / nr;
            if best.is_none_or(|(s, _, _)| score > s) {
                let mut t = (a + b) / T::lit(2.0);
                if t >= b {
                    t = a;
                }
                best = Some((score, f, t));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// Bagged regression trees over standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel<T> {
    pub params: ForestParams,
    pub seed: u64,
    pub feature_names: Vec<String>,
    pub scaler: ScalerStats<T>,
    pub trees: Vec<Tree<T>>,
    /// No feature varied over the training window; the model is a constant.
    pub degenerate: bool,
}

/// Fits `params.n_trees` trees in parallel. Tree `k` draws its bootstrap
/// from stream `k` of a ChaCha8 generator seeded with `seed`, so the result
/// does not depend on thread count.
pub fn fit_forest<T: Scalar>(
    rows: &[DailyFeatureRow],
    params: ForestParams,
    seed: u64,
) -> Result<ForestModel<T>, MileageError> {
    const MIN_ROWS: usize = 14;
    if rows.len() < MIN_ROWS {
        return Err(MileageError::TooFewRows {
            rows: rows.len(),
            needed: MIN_ROWS,
        });
    }
    let feature_names = rows[0].schema();
    check_schema(&feature_names, rows)?;
    let mut y = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        match r.target {
            Some(t) if t.is_finite() => y.push(T::lit(t)),
            Some(_) => return Err(MileageError::NonFiniteTarget { date: r.date }),
            None => return Err(MileageError::MissingTarget { index: i }),
        }
    }
    let raw: Vec<Vec<f64>> = rows.iter().map(DailyFeatureRow::values).collect();
    let scaler = ScalerStats::<T>::fit(&raw);
    let x: Vec<Vec<T>> = raw.iter().map(|r| scaler.transform(r)).collect();
    let n = rows.len();

    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            Tree::fit(&x, &y, sample, &params)
        })
        .collect();

    Ok(ForestModel {
        params,
        seed,
        feature_names,
        degenerate: scaler.is_empty(),
        scaler,
        trees,
    })
}

fn check_schema(expected: &[String], rows: &[DailyFeatureRow]) -> Result<(), MileageError> {
    match rows.iter().map(|r| r.schema()).find(|s| s != expected) {
        Some(found) => Err(MileageError::FeatureMismatch {
            expected: expected.to_vec(),
            found,
        }),
        None => Ok(()),
    }
}

impl<T: Scalar> ForestModel<T> {
    /// Mean tree output, clamped at 0. Tree outputs are summed in sorted
    /// order so the result does not depend on tree storage order.
    pub fn predict_row(&self, row: &DailyFeatureRow) -> Result<T, MileageError> {
        check_schema(&self.feature_names, std::slice::from_ref(row))?;
        let x = self.scaler.transform(&row.values());
        let mut outs: Vec<T> = self.trees.iter().map(|t| t.predict(&x)).collect();
        outs.sort_by(|a, b| a.total_cmp(b));
        let mean = outs.iter().copied().sum::<T>() / T::count(outs.len().max(1));
        Ok(mean.max(T::zero()))
    }

    pub fn predict(&self, rows: &[DailyFeatureRow]) -> Result<Vec<T>, MileageError> {
        rows.iter().map(|r| self.predict_row(r)).collect()
    }
}

/// Forecasts for exactly seven rows.
pub fn predict_week<T: Scalar>(model: &ForestModel<T>, next_week: &[DailyFeatureRow]) -> Result<Vec<T>, MileageError> {
    if next_week.len() != 7 {
        return Err(MileageError::LengthMismatch {
            expected: 7,
            found: next_week.len(),
        });
    }
    model.predict(next_week)
}

#[derive(Serialize)]
struct EnvelopeRef<'a, T> {
    format: &'a str,
    version: u32,
    model: &'a ForestModel<T>,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct Envelope<T> {
    model: ForestModel<T>,
}

impl<T: Scalar + Serialize + DeserializeOwned> ForestModel<T> {
    pub fn to_json(&self) -> Result<String, MileageError> {
        Ok(serde_json::to_string(&EnvelopeRef {
            format: MODEL_FORMAT,
            version: MODEL_FORMAT_VERSION,
            model: self,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self, MileageError> {
        let header: Header = serde_json::from_str(text)?;
        if header.format != MODEL_FORMAT || header.version != MODEL_FORMAT_VERSION {
            return Err(MileageError::UnsupportedVersion {
                found: header.version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        Ok(serde_json::from_str::<Envelope<T>>(text)?.model)
    }

    pub fn save(&self, path: &Path) -> Result<(), MileageError> {
        if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, MileageError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
