//! Supervised q* tuner: distance-weighted nearest-neighbor regression over
//! z-score-normalized (κ, s, r), predicting a weighted geometric mean of
//! neighbor labels (q spans 3.5 orders of magnitude), plus a depth-limited
//! regression-tree variant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::seed::rng_for;

use super::{FeatureVector, QGridRecord};

const TUNER_FORMAT_VERSION: u32 = 1;
const KNN_K: usize = 5;
const TREE_MAX_DEPTH: usize = 10;
const TREE_MIN_LEAF: usize = 2;

/// Supervised learning algorithm behind the tuner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TunerAlgorithm {
    /// Distance-weighted k-nearest-neighbor (the reference algorithm).
    Knn,
    /// Depth-limited regression tree.
    Tree,
}

impl TunerAlgorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "knn" => Ok(TunerAlgorithm::Knn),
            "tree" => Ok(TunerAlgorithm::Tree),
            other => Err(Error::config(format!("unknown tuner algorithm '{other}'"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TunerAlgorithm::Knn => "knn",
            TunerAlgorithm::Tree => "tree",
        }
    }
}

/// One training point held by the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunerRecord {
    pub kappa: f64,
    pub speed: f64,
    pub r: f64,
    pub q_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        log_q: f64,
    },
}

/// Trained map f(κ, s, r) → q*, serializable as self-describing JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunerModel {
    pub version: u32,
    pub model_kind: ModelKind,
    pub algorithm: TunerAlgorithm,
    pub feat_mean: [f64; 3],
    pub feat_std: [f64; 3],
    pub records: Vec<TunerRecord>,
    tree: Vec<TreeNode>,
    pub q_min: f64,
    pub q_max: f64,
    pub cv_rmse: f64,
}

fn feature_array(f: &FeatureVector) -> [f64; 3] {
    [f.kappa, f.speed, f.r]
}

fn normalization(records: &[TunerRecord]) -> ([f64; 3], [f64; 3]) {
    let n = records.len() as f64;
    let mut mean = [0.0; 3];
    for rec in records {
        mean[0] += rec.kappa;
        mean[1] += rec.speed;
        mean[2] += rec.r;
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = [0.0; 3];
    for rec in records {
        let raw = [rec.kappa, rec.speed, rec.r];
        for i in 0..3 {
            var[i] += (raw[i] - mean[i]).powi(2);
        }
    }
    let mut std = [0.0; 3];
    for i in 0..3 {
        std[i] = (var[i] / n).sqrt();
        if std[i] < 1e-12 {
            std[i] = 1.0;
        }
    }
    (mean, std)
}

fn fit(
    records: Vec<TunerRecord>,
    model_kind: ModelKind,
    algorithm: TunerAlgorithm,
) -> TunerModel {
    let (feat_mean, feat_std) = normalization(&records);
    let q_min = records.iter().map(|r| r.q_star).fold(f64::INFINITY, f64::min);
    let q_max = records
        .iter()
        .map(|r| r.q_star)
        .fold(f64::NEG_INFINITY, f64::max);
    let tree = match algorithm {
        TunerAlgorithm::Knn => Vec::new(),
        TunerAlgorithm::Tree => build_tree(&records),
    };
    TunerModel {
        version: TUNER_FORMAT_VERSION,
        model_kind,
        algorithm,
        feat_mean,
        feat_std,
        records,
        tree,
        q_min,
        q_max,
        cv_rmse: f64::NAN,
    }
}

/// Trains the tuner on oracle records and records its five-fold
/// cross-validation RMSE (on q*, in the label's units).
pub fn train_tuner(dataset: &[QGridRecord], algorithm: TunerAlgorithm) -> Result<TunerModel> {
    if dataset.is_empty() {
        return Err(Error::config("tuner training set is empty"));
    }
    let model_kind = dataset[0].model_kind;
    if dataset.iter().any(|r| r.model_kind != model_kind) {
        return Err(Error::config(
            "tuner training set mixes CV and CA records",
        ));
    }
    let records: Vec<TunerRecord> = dataset
        .iter()
        .map(|r| TunerRecord {
            kappa: r.features.kappa,
            speed: r.features.speed,
            r: r.features.r,
            q_star: r.q_star,
        })
        .collect();

    let cv_rmse = cross_validate(&records, model_kind, algorithm);
    let mut model = fit(records, model_kind, algorithm);
    model.cv_rmse = cv_rmse;
    Ok(model)
}

fn cross_validate(
    records: &[TunerRecord],
    model_kind: ModelKind,
    algorithm: TunerAlgorithm,
) -> f64 {
    let n = records.len();
    let folds = n.min(5);
    if folds < 2 {
        return 0.0;
    }
    // Deterministic shuffled fold assignment.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(0xADA9, &[n as u64]);
    for i in (1..n).rev() {
        let j = rand::Rng::random_range(&mut rng, 0..=i);
        order.swap(i, j);
    }
    let mut sq_sum = 0.0;
    for fold in 0..folds {
        let held: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|(pos, _)| pos % folds == fold)
            .map(|(_, &i)| i)
            .collect();
        let train: Vec<TunerRecord> = (0..n)
            .filter(|i| !held.contains(i))
            .map(|i| records[i])
            .collect();
        let sub = fit(train, model_kind, algorithm);
        for &i in &held {
            let f = FeatureVector {
                kappa: records[i].kappa,
                speed: records[i].speed,
                r: records[i].r,
            };
            let pred = predict_q(&sub, &f);
            sq_sum += (pred - records[i].q_star).powi(2);
        }
    }
    (sq_sum / n as f64).sqrt()
}

impl TunerModel {
    fn normalize(&self, f: &FeatureVector) -> [f64; 3] {
        let raw = feature_array(f);
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = (raw[i] - self.feat_mean[i]) / self.feat_std[i];
        }
        out
    }

    fn predict_knn(&self, f: &FeatureVector) -> f64 {
        let query = self.normalize(f);
        let mut dists: Vec<(f64, f64)> = self
            .records
            .iter()
            .map(|rec| {
                let p = self.normalize(&FeatureVector {
                    kappa: rec.kappa,
                    speed: rec.speed,
                    r: rec.r,
                });
                let d2: f64 = (0..3).map(|i| (p[i] - query[i]).powi(2)).sum();
                (d2, rec.q_star)
            })
            .collect();
        // Exact node hit: recall its label directly.
        let exact: Vec<f64> = dists
            .iter()
            .filter(|(d2, _)| *d2 < 1e-18)
            .map(|(_, q)| *q)
            .collect();
        if !exact.is_empty() {
            let mean_log = exact.iter().map(|q| q.ln()).sum::<f64>() / exact.len() as f64;
            return mean_log.exp();
        }
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let k = KNN_K.min(dists.len());
        let mut wsum = 0.0;
        let mut lsum = 0.0;
        for &(d2, q) in &dists[..k] {
            let w = 1.0 / (d2.sqrt() + 1e-12);
            wsum += w;
            lsum += w * q.ln();
        }
        (lsum / wsum).exp()
    }

    fn predict_tree(&self, f: &FeatureVector) -> f64 {
        let raw = feature_array(f);
        let mut idx = 0;
        loop {
            match &self.tree[idx] {
                TreeNode::Leaf { log_q } => return log_q.exp(),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if raw[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn save_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tuner serialization cannot fail")
    }

    pub fn load_json(text: &str) -> Result<Self> {
        let model: TunerModel =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("tuner file: {e}")))?;
        if model.version != TUNER_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported tuner format version {}",
                model.version
            )));
        }
        if model.records.is_empty() {
            return Err(Error::Format("tuner file has no training records".into()));
        }
        Ok(model)
    }
}

/// Predicts the process-noise intensity for a feature triple. Features are
/// clamped into the training ranges; the prediction is bounded by the
/// training labels.
pub fn predict_q(tuner: &TunerModel, features: &FeatureVector) -> f64 {
    let f = features.clamped();
    let raw = match tuner.algorithm {
        TunerAlgorithm::Knn => tuner.predict_knn(&f),
        TunerAlgorithm::Tree => tuner.predict_tree(&f),
    };
    raw.clamp(tuner.q_min, tuner.q_max)
}

fn build_tree(records: &[TunerRecord]) -> Vec<TreeNode> {
    let mut nodes = Vec::new();
    let idx: Vec<usize> = (0..records.len()).collect();
    grow(records, &idx, 0, &mut nodes);
    nodes
}

fn leaf(records: &[TunerRecord], idx: &[usize]) -> TreeNode {
    let mean_log = idx.iter().map(|&i| records[i].q_star.ln()).sum::<f64>() / idx.len() as f64;
    TreeNode::Leaf { log_q: mean_log }
}

fn sse(records: &[TunerRecord], idx: &[usize]) -> f64 {
    let mean = idx.iter().map(|&i| records[i].q_star.ln()).sum::<f64>() / idx.len() as f64;
    idx.iter()
        .map(|&i| (records[i].q_star.ln() - mean).powi(2))
        .sum()
}

fn grow(records: &[TunerRecord], idx: &[usize], depth: usize, nodes: &mut Vec<TreeNode>) -> usize {
    let here = nodes.len();
    if depth >= TREE_MAX_DEPTH || idx.len() < 2 * TREE_MIN_LEAF {
        nodes.push(leaf(records, idx));
        return here;
    }
    let parent_sse = sse(records, idx);
    let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, gain)
    for feature in 0..3 {
        let mut values: Vec<f64> = idx
            .iter()
            .map(|&i| feature_array_of(&records[i])[feature])
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for w in values.windows(2) {
            let threshold = (w[0] + w[1]) * 0.5;
            let (left, right): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| feature_array_of(&records[i])[feature] <= threshold);
            if left.len() < TREE_MIN_LEAF || right.len() < TREE_MIN_LEAF {
                continue;
            }
            let gain = parent_sse - sse(records, &left) - sse(records, &right);
            if best.map_or(true, |(_, _, g)| gain > g + 1e-15) {
                best = Some((feature, threshold, gain));
            }
        }
    }
    match best {
        Some((feature, threshold, gain)) if gain > 1e-12 => {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
                .iter()
                .partition(|&&i| feature_array_of(&records[i])[feature] <= threshold);
            nodes.push(TreeNode::Split {
                feature,
                threshold,
                left: 0,
                right: 0,
            });
            let left = grow(records, &left_idx, depth + 1, nodes);
            let right = grow(records, &right_idx, depth + 1, nodes);
            if let TreeNode::Split {
                left: l, right: r, ..
            } = &mut nodes[here]
            {
                *l = left;
                *r = right;
            }
            here
        }
        _ => {
            nodes.push(leaf(records, idx));
            here
        }
    }
}

fn feature_array_of(rec: &TunerRecord) -> [f64; 3] {
    [rec.kappa, rec.speed, rec.r]
}
