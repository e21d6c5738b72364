//! Gradient-boosted regression trees for the kick direction classifier and
//! the kick distance regressor, with grouped nested cross-validation and
//! evaluation metrics.
//!
//! Splits are exact: every distinct feature value is a candidate threshold.
//! Rows with a missing (NaN) value are tried on both sides of each split and
//! the side with the larger gain becomes the node's default direction.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{PenaltyRecord, TakerStrategy, Zone, MAX_ON_TARGET_DISTANCE};
use crate::error::{invalid, Error, Result};
use crate::features::{schema_hash, FeatureVector, N_FEATURES};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MIN_SPLIT_GAIN: f64 = 1e-12;
const MIN_HESSIAN: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Three classes: natural, center, nonnatural.
    Multiclass3,
    Regression,
}

impl Task {
    fn n_outputs(self) -> usize {
        match self {
            Task::Multiclass3 => 3,
            Task::Regression => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_trees: usize,
    #[serde(default = "default_min_child_weight")]
    pub min_child_weight: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_min_child_weight() -> f64 {
    1.0
}

fn default_lambda() -> f64 {
    1.0
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams { learning_rate: 0.1, max_depth: 3, n_trees: 100, min_child_weight: 1.0, lambda: 1.0 }
    }
}

impl HyperParams {
    pub fn new(learning_rate: f64, max_depth: usize, n_trees: usize) -> Self {
        HyperParams { learning_rate, max_depth, n_trees, ..Default::default() }
    }

    /// Full search grid: 3 learning rates x 4 depths x 3 ensemble sizes.
    pub fn search_grid() -> Vec<HyperParams> {
        let mut grid = Vec::new();
        for lr in [0.01, 0.05, 0.1] {
            for depth in [3, 4, 5, 6] {
                for n in [50, 100, 250] {
                    grid.push(HyperParams::new(lr, depth, n));
                }
            }
        }
        grid
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(invalid("learning_rate must be > 0"));
        }
        if self.max_depth == 0 {
            return Err(invalid("max_depth must be >= 1"));
        }
        if !(self.min_child_weight >= 0.0) {
            return Err(invalid("min_child_weight must be >= 0"));
        }
        if !(self.lambda >= 0.0) {
            return Err(invalid("lambda must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split { feature: usize, threshold: f64, missing_left: bool, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, missing_left, left, right } => {
                    let v = row[*feature];
                    let go_left = if v.is_nan() { *missing_left } else { v < *threshold };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub version: u32,
    pub schema_hash: String,
    pub task: Task,
    pub n_features: usize,
    pub hyper_params: HyperParams,
    /// One entry per output (class scores, or the single regression output).
    pub base_score: Vec<f64>,
    /// `trees[round][output]`; leaf values already include the learning rate.
    pub trees: Vec<Vec<Tree>>,
}

impl BoostedModel {
    /// Untrained model returning `base_score`.
    pub fn constant(task: Task, base_score: Vec<f64>, n_features: usize) -> Result<Self> {
        if base_score.len() != task.n_outputs() {
            return Err(invalid("base_score length does not match the task"));
        }
        Ok(BoostedModel {
            version: MODEL_FORMAT_VERSION,
            schema_hash: schema_for(n_features),
            task,
            n_features,
            hyper_params: HyperParams { n_trees: 0, ..Default::default() },
            base_score,
            trees: Vec::new(),
        })
    }

    pub fn predict_raw(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.n_features {
            return Err(invalid(format!("expected {} features, got {}", self.n_features, row.len())));
        }
        let mut out = self.base_score.clone();
        for round in &self.trees {
            for (o, tree) in out.iter_mut().zip(round) {
                *o += tree.predict(row);
            }
        }
        Ok(out)
    }

    pub fn save<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    /// Reads a model and rejects files from another format version or built
    /// for a different feature layout.
    pub fn load<R: Read>(reader: R) -> Result<Self> {
        let model: BoostedModel = serde_json::from_reader(reader)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::SchemaMismatch {
                expected: format!("model format {MODEL_FORMAT_VERSION}"),
                found: format!("model format {}", model.version),
            });
        }
        let expected = schema_for(model.n_features);
        if model.schema_hash != expected {
            return Err(Error::SchemaMismatch { expected, found: model.schema_hash });
        }
        Ok(model)
    }

    pub fn save_file(&self, path: &std::path::Path) -> Result<()> {
        self.save(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load_file(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::MissingModel(format!("{}: {e}", path.display())))?;
        Self::load(std::io::BufReader::new(file))
    }
}

fn schema_for(n_features: usize) -> String {
    if n_features == N_FEATURES {
        schema_hash()
    } else {
        format!("custom:{n_features}")
    }
}

fn softmax(scores: &[f64]) -> [f64; 3] {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
    let total: f64 = e.iter().sum();
    [e[0] / total, e[1] / total, e[2] / total]
}

/// Probabilities over (natural, center, nonnatural).
pub fn predict_direction(model: &BoostedModel, fv: &FeatureVector) -> Result<[f64; 3]> {
    predict_direction_row(model, &fv.values)
}

pub fn predict_direction_row(model: &BoostedModel, row: &[f64]) -> Result<[f64; 3]> {
    if model.task != Task::Multiclass3 {
        return Err(Error::WrongTask { expected: "multiclass_3".into(), found: "regression".into() });
    }
    Ok(softmax(&model.predict_raw(row)?))
}

/// Predicted distance from the goal center, clamped to the goal mouth.
pub fn predict_distance(model: &BoostedModel, fv: &FeatureVector) -> Result<f64> {
    predict_distance_row(model, &fv.values)
}

pub fn predict_distance_row(model: &BoostedModel, row: &[f64]) -> Result<f64> {
    if model.task != Task::Regression {
        return Err(Error::WrongTask { expected: "regression".into(), found: "multiclass_3".into() });
    }
    Ok(clamp_distance(model.predict_raw(row)?[0]))
}

pub fn clamp_distance(raw: f64) -> f64 {
    raw.clamp(0.0, MAX_ON_TARGET_DISTANCE)
}

/// Column-major copy of the training rows with per-feature sort orders.
struct Columns {
    cols: Vec<Vec<f64>>,
    sorted: Vec<Vec<u32>>,
    missing: Vec<Vec<u32>>,
}

impl Columns {
    fn new<R: AsRef<[f64]>>(rows: &[R], n_features: usize) -> Self {
        let cols: Vec<Vec<f64>> = (0..n_features).map(|f| rows.iter().map(|r| r.as_ref()[f]).collect()).collect();
        let (sorted, missing) = cols
            .par_iter()
            .map(|col| {
                let mut present: Vec<u32> = (0..col.len() as u32).filter(|i| !col[*i as usize].is_nan()).collect();
                present.sort_by(|a, b| col[*a as usize].total_cmp(&col[*b as usize]).then(a.cmp(b)));
                let missing = (0..col.len() as u32).filter(|i| col[*i as usize].is_nan()).collect();
                (present, missing)
            })
            .unzip();
        Columns { cols, sorted, missing }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
    missing_left: bool,
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Best split of one feature for every active node.
fn best_splits_for_feature(
    data: &Columns,
    f: usize,
    node_slot: &[i32],
    row_node: &[u32],
    totals: &[(f64, f64)],
    grad: &[f64],
    hess: &[f64],
    hp: &HyperParams,
) -> Vec<Option<Candidate>> {
    let n_slots = totals.len();
    let slot_of = |row: u32| -> Option<usize> {
        let s = node_slot[row_node[row as usize] as usize];
        (s >= 0).then_some(s as usize)
    };
    let mut miss = vec![(0.0, 0.0); n_slots];
    for &r in &data.missing[f] {
        if let Some(s) = slot_of(r) {
            miss[s].0 += grad[r as usize];
            miss[s].1 += hess[r as usize];
        }
    }
    let mut left = vec![(0.0f64, 0.0f64); n_slots];
    let mut last: Vec<Option<f64>> = vec![None; n_slots];
    let mut best: Vec<Option<Candidate>> = vec![None; n_slots];
    let col = &data.cols[f];
    let lambda = hp.lambda;
    let mcw = hp.min_child_weight;

    let consider = |best: &mut Option<Candidate>, (gl, hl): (f64, f64), (gm, hm): (f64, f64), (g, h): (f64, f64), threshold: f64, any_missing: bool| {
        let parent = score(g, h, lambda);
        let gr = g - gl - gm;
        let hr = h - hl - hm;
        let mut options = [(gl + gm, hl + hm, gr, hr, true), (gl, hl, gr + gm, hr + hm, false)];
        if !any_missing {
            // No missing rows here: default to the heavier child.
            let missing_left = hl >= hr;
            options = [(gl, hl, gr, hr, missing_left); 2];
        }
        for (gl, hl, gr, hr, missing_left) in options {
            if hl < mcw || hr < mcw || hl <= 0.0 || hr <= 0.0 {
                continue;
            }
            let gain = score(gl, hl, lambda) + score(gr, hr, lambda) - parent;
            if gain > MIN_SPLIT_GAIN && best.map_or(true, |b| gain > b.gain) {
                *best = Some(Candidate { gain, feature: f, threshold, missing_left });
            }
        }
    };

    for &r in &data.sorted[f] {
        let Some(s) = slot_of(r) else { continue };
        let x = col[r as usize];
        if let Some(prev) = last[s] {
            if x > prev {
                let mut t = 0.5 * (prev + x);
                if t <= prev {
                    t = x;
                }
                let any_missing = miss[s].1 > 0.0;
                consider(&mut best[s], left[s], miss[s], totals[s], t, any_missing);
            }
        }
        left[s].0 += grad[r as usize];
        left[s].1 += hess[r as usize];
        last[s] = Some(x);
    }
    // Present values on the left, missing on the right.
    for s in 0..n_slots {
        if miss[s].1 > 0.0 && left[s].1 > 0.0 {
            let (g, h) = totals[s];
            let (gm, hm) = miss[s];
            let (gl, hl) = (g - gm, h - hm);
            if hl >= mcw && hm >= mcw {
                let gain = score(gl, hl, lambda) + score(gm, hm, lambda) - score(g, h, lambda);
                if gain > MIN_SPLIT_GAIN && best[s].map_or(true, |b| gain > b.gain) {
                    best[s] = Some(Candidate { gain, feature: f, threshold: f64::MAX, missing_left: false });
                }
            }
        }
    }
    best
}

fn build_tree(data: &Columns, grad: &[f64], hess: &[f64], hp: &HyperParams) -> Tree {
    let n = grad.len();
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut row_node = vec![0u32; n];
    let mut active: Vec<usize> = vec![0];
    let leaf_value = |g: f64, h: f64| -hp.learning_rate * g / (h + hp.lambda);

    for depth in 0..=hp.max_depth {
        if active.is_empty() {
            break;
        }
        let mut node_slot = vec![-1i32; nodes.len()];
        for (s, node) in active.iter().enumerate() {
            node_slot[*node] = s as i32;
        }
        let mut totals = vec![(0.0, 0.0); active.len()];
        for r in 0..n {
            let s = node_slot[row_node[r] as usize];
            if s >= 0 {
                totals[s as usize].0 += grad[r];
                totals[s as usize].1 += hess[r];
            }
        }
        if depth == hp.max_depth {
            for (s, node) in active.iter().enumerate() {
                nodes[*node] = Node::Leaf { value: leaf_value(totals[s].0, totals[s].1) };
            }
            break;
        }

        let per_feature: Vec<Vec<Option<Candidate>>> = (0..data.cols.len())
            .into_par_iter()
            .map(|f| best_splits_for_feature(data, f, &node_slot, &row_node, &totals, grad, hess, hp))
            .collect();
        // Features are visited in index order, so ties keep the lowest index.
        let mut chosen: Vec<Option<Candidate>> = vec![None; active.len()];
        for cands in &per_feature {
            for (s, c) in cands.iter().enumerate() {
                if let Some(c) = c {
                    if chosen[s].map_or(true, |b| c.gain > b.gain) {
                        chosen[s] = Some(*c);
                    }
                }
            }
        }

        let mut next = Vec::new();
        let mut split_of: Vec<Option<(Candidate, usize, usize)>> = vec![None; nodes.len()];
        for (s, node) in active.iter().enumerate() {
            match chosen[s] {
                Some(c) => {
                    let l = nodes.len();
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes[*node] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        missing_left: c.missing_left,
                        left: l,
                        right: l + 1,
                    };
                    split_of[*node] = Some((c, l, l + 1));
                    next.push(l);
                    next.push(l + 1);
                }
                None => nodes[*node] = Node::Leaf { value: leaf_value(totals[s].0, totals[s].1) },
            }
        }
        for r in 0..n {
            let node = row_node[r] as usize;
            if let Some(Some((c, l, rr))) = split_of.get(node) {
                let x = data.cols[c.feature][r];
                let go_left = if x.is_nan() { c.missing_left } else { x < c.threshold };
                row_node[r] = if go_left { *l as u32 } else { *rr as u32 };
            }
        }
        active = next;
    }
    Tree { nodes }
}

/// Fit a boosted ensemble. Training is deterministic: there is no row or
/// column subsampling, so identical inputs give identical models.
///
/// Multiclass labels are class indices 0, 1, 2 stored as `f64`.
pub fn train<R: AsRef<[f64]> + Sync>(task: Task, rows: &[R], labels: &[f64], hp: &HyperParams) -> Result<BoostedModel> {
    hp.validate()?;
    if rows.is_empty() {
        return Err(invalid("empty training set"));
    }
    if rows.len() != labels.len() {
        return Err(invalid("feature rows and labels differ in length"));
    }
    let n_features = rows[0].as_ref().len();
    if rows.iter().any(|r| r.as_ref().len() != n_features) {
        return Err(invalid("feature rows differ in width"));
    }
    let n = rows.len();
    let base_score = match task {
        Task::Regression => {
            if labels.iter().any(|y| !y.is_finite()) {
                return Err(invalid("regression labels must be finite"));
            }
            vec![labels.iter().sum::<f64>() / n as f64]
        }
        Task::Multiclass3 => {
            let mut counts = [0usize; 3];
            for y in labels {
                let c = *y as usize;
                if *y < 0.0 || c > 2 || c as f64 != *y {
                    return Err(invalid(format!("class label {y} is not one of 0, 1, 2")));
                }
                counts[c] += 1;
            }
            if counts.iter().filter(|c| **c > 0).count() < 2 {
                return Err(invalid("multiclass training needs at least two classes"));
            }
            counts.iter().map(|c| (*c as f64 / n as f64).max(1e-6).ln()).collect()
        }
    };

    let data = Columns::new(rows, n_features);
    let k = task.n_outputs();
    let mut raw: Vec<f64> = (0..n).flat_map(|_| base_score.iter().cloned()).collect();
    let mut trees = Vec::with_capacity(hp.n_trees);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    for _ in 0..hp.n_trees {
        let probs: Vec<[f64; 3]> = match task {
            Task::Multiclass3 => raw.chunks(3).map(softmax).collect(),
            Task::Regression => Vec::new(),
        };
        let mut round = Vec::with_capacity(k);
        for c in 0..k {
            for i in 0..n {
                match task {
                    Task::Regression => {
                        grad[i] = raw[i] - labels[i];
                        hess[i] = 1.0;
                    }
                    Task::Multiclass3 => {
                        let p = probs[i][c];
                        let y = (labels[i] as usize == c) as u8 as f64;
                        grad[i] = p - y;
                        hess[i] = (p * (1.0 - p)).max(MIN_HESSIAN);
                    }
                }
            }
            round.push(build_tree(&data, &grad, &hess, hp));
        }
        for (i, row) in rows.iter().enumerate() {
            for (c, tree) in round.iter().enumerate() {
                raw[i * k + c] += tree.predict(row.as_ref());
            }
        }
        trees.push(round);
    }
    Ok(BoostedModel {
        version: MODEL_FORMAT_VERSION,
        schema_hash: schema_for(n_features),
        task,
        n_features,
        hyper_params: *hp,
        base_score,
        trees,
    })
}

// ---------------------------------------------------------------- metrics

/// Mean negative log probability of the true class, probabilities clipped
/// to [1e-15, 1 - 1e-15].
pub fn logloss(predictions: &[[f64; 3]], labels: &[usize]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(invalid("predictions and labels differ in length"));
    }
    if predictions.is_empty() {
        return Err(invalid("logloss of an empty set"));
    }
    let mut total = 0.0;
    for (p, y) in predictions.iter().zip(labels) {
        let q = p.get(*y).ok_or_else(|| invalid(format!("label {y} out of range")))?;
        total -= q.clamp(1e-15, 1.0 - 1e-15).ln();
    }
    Ok(total / predictions.len() as f64)
}

pub fn brier(probs: &[f64], outcomes: &[bool]) -> Result<f64> {
    if probs.len() != outcomes.len() {
        return Err(invalid("probabilities and outcomes differ in length"));
    }
    if probs.is_empty() {
        return Err(invalid("brier score of an empty set"));
    }
    if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid("probabilities must lie in [0, 1]"));
    }
    let sum: f64 = probs.iter().zip(outcomes).map(|(p, o)| (p - (*o as u8 as f64)).powi(2)).sum();
    Ok(sum / probs.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub lower: f64,
    pub upper: f64,
    /// `None` for empty bins.
    pub mean_predicted: Option<f64>,
    pub observed: Option<f64>,
    pub count: usize,
}

/// Equal-width bins on [0, 1]; a prediction of exactly 1 falls in the top bin.
pub fn calibration_bins(probs: &[f64], outcomes: &[bool], n_bins: usize) -> Result<Vec<CalibrationBin>> {
    if n_bins < 2 {
        return Err(invalid("need at least 2 bins"));
    }
    if probs.len() != outcomes.len() {
        return Err(invalid("probabilities and outcomes differ in length"));
    }
    let mut sums = vec![(0.0, 0.0, 0usize); n_bins];
    for (p, o) in probs.iter().zip(outcomes) {
        let b = ((p * n_bins as f64).floor() as usize).min(n_bins - 1);
        sums[b].0 += p;
        sums[b].1 += *o as u8 as f64;
        sums[b].2 += 1;
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(b, (sp, so, n))| CalibrationBin {
            lower: b as f64 / n_bins as f64,
            upper: (b + 1) as f64 / n_bins as f64,
            mean_predicted: (n > 0).then(|| sp / n as f64),
            observed: (n > 0).then(|| so / n as f64),
            count: n,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdAccuracy {
    pub threshold: f64,
    pub accuracy: f64,
    /// Constant prediction equal to the training mean.
    pub mean_baseline: f64,
    /// Expected accuracy of guessing "within" with the base rate.
    pub random_baseline: f64,
}

/// Share of rows where prediction and truth fall on the same side of
/// `threshold` (a value equal to it counts as within).
pub fn threshold_accuracy(predicted: &[f64], actual: &[f64], threshold: f64, train_mean: f64) -> Result<ThresholdAccuracy> {
    if !(threshold > 0.0) {
        return Err(invalid("threshold must be > 0"));
    }
    if predicted.len() != actual.len() {
        return Err(invalid("predicted and actual differ in length"));
    }
    if actual.is_empty() {
        return Err(invalid("threshold accuracy of an empty set"));
    }
    let n = actual.len() as f64;
    let within = |d: f64| d <= threshold;
    let agree = predicted.iter().zip(actual).filter(|(p, a)| within(**p) == within(**a)).count() as f64;
    let q = actual.iter().filter(|a| within(**a)).count() as f64 / n;
    let mean_agree = actual.iter().filter(|a| within(**a) == within(train_mean)).count() as f64;
    Ok(ThresholdAccuracy {
        threshold,
        accuracy: agree / n,
        mean_baseline: mean_agree / n,
        random_baseline: q * q + (1.0 - q) * (1.0 - q),
    })
}

// ------------------------------------------------------- cross-validation

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub hyper_params: HyperParams,
    pub n_train: usize,
    pub n_test: usize,
    /// Logloss for direction, mean squared error for distance.
    pub metric: f64,
    /// Same metric for the fold-train base model (class frequencies or mean).
    pub base_metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedCvResult {
    pub task: Task,
    pub folds: Vec<FoldResult>,
    /// Out-of-fold model outputs per row: three probabilities, or one clamped distance.
    pub oof: Vec<Vec<f64>>,
    /// Out-of-fold base-model outputs, same layout as `oof`.
    pub oof_base: Vec<Vec<f64>>,
    pub mean: f64,
    pub std: f64,
    pub base_mean: f64,
    pub base_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

fn predict_output(model: &BoostedModel, row: &[f64]) -> Result<Vec<f64>> {
    Ok(match model.task {
        Task::Multiclass3 => predict_direction_row(model, row)?.to_vec(),
        Task::Regression => vec![predict_distance_row(model, row)?],
    })
}

fn metric(task: Task, outputs: &[Vec<f64>], labels: &[f64]) -> Result<f64> {
    match task {
        Task::Multiclass3 => {
            let p: Vec<[f64; 3]> = outputs.iter().map(|o| [o[0], o[1], o[2]]).collect();
            let y: Vec<usize> = labels.iter().map(|y| *y as usize).collect();
            logloss(&p, &y)
        }
        Task::Regression => {
            if outputs.is_empty() {
                return Err(invalid("mean squared error of an empty set"));
            }
            Ok(outputs.iter().zip(labels).map(|(o, y)| (o[0] - y).powi(2)).sum::<f64>() / labels.len() as f64)
        }
    }
}

fn base_model(task: Task, labels: &[f64], n_features: usize) -> Result<BoostedModel> {
    let base = match task {
        Task::Regression => vec![labels.iter().sum::<f64>() / labels.len() as f64],
        Task::Multiclass3 => {
            let mut counts = [0.0; 3];
            for y in labels {
                counts[*y as usize] += 1.0;
            }
            counts.iter().map(|c| (c / labels.len() as f64).max(1e-15).ln()).collect()
        }
    };
    BoostedModel::constant(task, base, n_features)
}

fn select<'a, T: Clone>(xs: &'a [T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|i| xs[*i].clone()).collect()
}

/// Mean validation metric of `hp` over inner folds of `train_idx`.
fn inner_score<R: AsRef<[f64]> + Sync + Clone>(task: Task, rows: &[R], labels: &[f64], folds: &[usize], train_idx: &[usize], hp: &HyperParams) -> Result<f64> {
    let mut inner_folds: Vec<usize> = train_idx.iter().map(|i| folds[*i]).collect();
    inner_folds.sort();
    inner_folds.dedup();
    let mut scores = Vec::new();
    for f in inner_folds {
        let tr: Vec<usize> = train_idx.iter().copied().filter(|i| folds[*i] != f).collect();
        let va: Vec<usize> = train_idx.iter().copied().filter(|i| folds[*i] == f).collect();
        let model = train(task, &select(rows, &tr), &select(labels, &tr), hp)?;
        let outs: Vec<Vec<f64>> = va.iter().map(|i| predict_output(&model, rows[*i].as_ref())).collect::<Result<_>>()?;
        scores.push(metric(task, &outs, &select(labels, &va))?);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

fn best_entry<R: AsRef<[f64]> + Sync + Clone>(task: Task, rows: &[R], labels: &[f64], folds: &[usize], train_idx: &[usize], grid: &[HyperParams]) -> Result<(HyperParams, Vec<f64>)> {
    let scores: Vec<f64> = grid.iter().map(|hp| inner_score(task, rows, labels, folds, train_idx, hp)).collect::<Result<_>>()?;
    let best = (0..grid.len()).fold(0, |b, i| if scores[i] < scores[b] { i } else { b });
    Ok((grid[best], scores))
}

/// Grouped cross-validated grid search over every row. Returns the entry
/// with the lowest mean validation metric (earliest on ties) and the mean
/// metric of each entry.
pub fn grid_search<R: AsRef<[f64]> + Sync + Clone>(task: Task, rows: &[R], labels: &[f64], folds: &[usize], grid: &[HyperParams]) -> Result<(HyperParams, Vec<f64>)> {
    if grid.is_empty() {
        return Err(invalid("hyperparameter grid is empty"));
    }
    if rows.len() != labels.len() || rows.len() != folds.len() {
        return Err(invalid("rows, labels and folds differ in length"));
    }
    let all: Vec<usize> = (0..rows.len()).collect();
    let mut distinct = folds.to_vec();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(invalid("need at least 2 folds"));
    }
    best_entry(task, rows, labels, folds, &all, grid)
}

/// Grouped nested cross-validation.
///
/// `folds[i]` is the outer fold of row `i` (see
/// [`crate::features::grouped_folds`]). For each outer fold, the remaining
/// folds serve as the inner folds for choosing hyperparameters, so inner
/// splits stay grouped by taker too. Ties in the inner score keep the
/// earliest grid entry.
pub fn nested_cv<R: AsRef<[f64]> + Sync + Clone>(task: Task, rows: &[R], labels: &[f64], folds: &[usize], grid: &[HyperParams]) -> Result<NestedCvResult> {
    if grid.is_empty() {
        return Err(invalid("hyperparameter grid is empty"));
    }
    if rows.len() != labels.len() || rows.len() != folds.len() {
        return Err(invalid("rows, labels and folds differ in length"));
    }
    if rows.is_empty() {
        return Err(invalid("empty data set"));
    }
    let n_features = rows[0].as_ref().len();
    let k = folds.iter().max().unwrap() + 1;
    if k < 2 {
        return Err(invalid("need at least 2 folds"));
    }
    let mut oof = vec![Vec::new(); rows.len()];
    let mut oof_base = vec![Vec::new(); rows.len()];
    let mut results = Vec::new();
    for fold in 0..k {
        let train_idx: Vec<usize> = (0..rows.len()).filter(|i| folds[*i] != fold).collect();
        let test_idx: Vec<usize> = (0..rows.len()).filter(|i| folds[*i] == fold).collect();
        if test_idx.is_empty() {
            continue;
        }
        let hp = if grid.len() == 1 { grid[0] } else { best_entry(task, rows, labels, folds, &train_idx, grid)?.0 };
        let train_labels = select(labels, &train_idx);
        let model = train(task, &select(rows, &train_idx), &train_labels, &hp)?;
        let base = base_model(task, &train_labels, n_features)?;
        for i in &test_idx {
            oof[*i] = predict_output(&model, rows[*i].as_ref())?;
            oof_base[*i] = predict_output(&base, rows[*i].as_ref())?;
        }
        let test_labels = select(labels, &test_idx);
        results.push(FoldResult {
            fold,
            hyper_params: hp,
            n_train: train_idx.len(),
            n_test: test_idx.len(),
            metric: metric(task, &select(&oof, &test_idx), &test_labels)?,
            base_metric: metric(task, &select(&oof_base, &test_idx), &test_labels)?,
        });
    }
    let (mean, std) = mean_std(&results.iter().map(|r| r.metric).collect::<Vec<_>>());
    let (base_mean, base_std) = mean_std(&results.iter().map(|r| r.base_metric).collect::<Vec<_>>());
    Ok(NestedCvResult { task, folds: results, oof, oof_base, mean, std, base_mean, base_std })
}

// ---------------------------------------------------------- training sets

/// Rows for the direction model: keeper-independent on-target kicks,
/// labelled with their zone index.
pub fn direction_dataset(records: &[PenaltyRecord], features: &[FeatureVector]) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::new();
    let mut labels = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if r.taker_strategy != TakerStrategy::Independent {
            continue;
        }
        if let Some(z) = r.zone() {
            idx.push(i);
            labels.push(z.index() as f64);
        }
    }
    debug_assert_eq!(records.len(), features.len());
    (idx, labels)
}

/// Rows for the distance model: on-target kicks, labelled with the distance
/// of the end location from the goal center.
pub fn distance_dataset(records: &[PenaltyRecord], features: &[FeatureVector]) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::new();
    let mut labels = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if !r.on_target() {
            continue;
        }
        if let Some(d) = r.distance_from_center() {
            idx.push(i);
            labels.push(d);
        }
    }
    debug_assert_eq!(records.len(), features.len());
    (idx, labels)
}

/// Direction probabilities keyed by zone.
pub fn zone_probability(probs: &[f64; 3], zone: Zone) -> f64 {
    probs[zone.index()]
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}
