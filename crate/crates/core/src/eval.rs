//! Test-set metrics, stratified cross-validation, grid tuning and
//! parameter sensitivity sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::{stratified_resample, Dataset, ResamplePlan};
use crate::error::{Error, Result};
use crate::forests::{argmax, build_forest, ForestConfig, ForestModel, Transform};
use crate::rng::{derive_seed, SplitMix64};
use crate::trees::TreeKind;

/// Probabilities below this are clamped before taking logs.
pub const NLL_EPSILON: f64 = 1e-16;
pub const DEFAULT_FOLDS: usize = 10;

const FOLD_STREAM: u64 = 0xF01D;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub true_class: usize,
    pub distribution: Vec<f64>,
    pub predicted_class: usize,
}

impl PredictionRecord {
    pub fn new(true_class: usize, distribution: Vec<f64>) -> Self {
        let predicted_class = argmax(&distribution);
        PredictionRecord {
            true_class,
            distribution,
            predicted_class,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub error: f64,
    pub balanced_error: f64,
    pub auc: f64,
    pub nll: f64,
    pub n_test: usize,
}

impl MetricReport {
    /// All four metrics. `train_counts` supplies the AUC class weights.
    pub fn compute(preds: &[PredictionRecord], train_counts: &[usize]) -> Result<Self> {
        Ok(MetricReport {
            error: error_rate(preds)?,
            balanced_error: balanced_error(preds, train_counts.len())?.value,
            auc: auc_weighted(preds, train_counts)?,
            nll: nll(preds)?,
            n_test: preds.len(),
        })
    }
}

fn non_empty(preds: &[PredictionRecord]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::InvalidDataset("no predictions to score".into()));
    }
    Ok(())
}

pub fn error_rate(preds: &[PredictionRecord]) -> Result<f64> {
    non_empty(preds)?;
    let wrong = preds.iter().filter(|p| p.predicted_class != p.true_class).count();
    Ok(wrong as f64 / preds.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedError {
    pub value: f64,
    /// Classes with no test cases, left out of the mean recall.
    pub absent_classes: Vec<usize>,
}

/// One minus the mean per-class recall over the classes present among the
/// true labels.
pub fn balanced_error(preds: &[PredictionRecord], n_classes: usize) -> Result<BalancedError> {
    non_empty(preds)?;
    let n_classes = n_classes.max(preds.iter().map(|p| p.true_class + 1).max().unwrap_or(0));
    let mut total = vec![0usize; n_classes];
    let mut hit = vec![0usize; n_classes];
    for p in preds {
        total[p.true_class] += 1;
        if p.predicted_class == p.true_class {
            hit[p.true_class] += 1;
        }
    }
    let present: Vec<usize> = (0..n_classes).filter(|&j| total[j] > 0).collect();
    let recall: f64 = present.iter().map(|&j| hit[j] as f64 / total[j] as f64).sum::<f64>() / present.len() as f64;
    Ok(BalancedError {
        value: 1.0 - recall,
        absent_classes: (0..n_classes).filter(|&j| total[j] == 0).collect(),
    })
}

/// Mann–Whitney AUC of `scores` for the cases flagged positive, with
/// average ranks for ties. `None` if either side is empty.
pub fn auc_scores(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// One-vs-rest AUC per class weighted by the train class frequencies.
/// Classes without positives or negatives in the test set are skipped and
/// the remaining weights renormalised. With two classes this is the AUC of
/// the train-minority class.
pub fn auc_weighted(preds: &[PredictionRecord], train_counts: &[usize]) -> Result<f64> {
    non_empty(preds)?;
    let c = preds[0].distribution.len();
    if preds.iter().any(|p| p.distribution.len() != c) || train_counts.len() != c {
        return Err(Error::DimensionMismatch {
            expected: c,
            found: train_counts.len(),
        });
    }
    let auc_of = |j: usize| {
        let scores: Vec<f64> = preds.iter().map(|p| p.distribution[j]).collect();
        let positive: Vec<bool> = preds.iter().map(|p| p.true_class == j).collect();
        auc_scores(&scores, &positive)
    };
    if c == 2 {
        let minority = if train_counts[1] < train_counts[0] { 1 } else { 0 };
        return Ok(auc_of(minority).or_else(|| auc_of(1 - minority)).unwrap_or(0.5));
    }
    let (mut weighted, mut weight) = (0.0, 0.0);
    for (j, &w) in train_counts.iter().enumerate() {
        if let Some(a) = auc_of(j) {
            weighted += w as f64 * a;
            weight += w as f64;
        }
    }
    Ok(if weight > 0.0 { weighted / weight } else { 0.5 })
}

/// Mean negative log2 probability of the true class, clamped at 1e-16.
pub fn nll(preds: &[PredictionRecord]) -> Result<f64> {
    non_empty(preds)?;
    let total: f64 = preds
        .iter()
        .map(|p| -p.distribution[p.true_class].max(NLL_EPSILON).log2())
        .sum();
    Ok(total / preds.len() as f64)
}

pub trait Classifier: Send + Sync {
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>>;
}

pub trait Learner: Sync {
    fn fit(&self, train: &Dataset) -> Result<Box<dyn Classifier>>;
}

impl Classifier for ForestModel {
    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        ForestModel::predict_proba(self, x)
    }
}

impl Learner for ForestConfig {
    fn fit(&self, train: &Dataset) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(build_forest(train, self)?))
    }
}

pub fn predict_dataset(model: &dyn Classifier, test: &Dataset) -> Result<Vec<PredictionRecord>> {
    (0..test.n_cases())
        .map(|i| Ok(PredictionRecord::new(test.label(i), model.predict_proba(test.row(i))?)))
        .collect()
}

/// Named classifier presets: `rotf`, `randf`, `rotf<k>` (random-attribute
/// rotation forest with at most k attributes per tree) and the six
/// hybrids `{rt,c45}-{bag,bagpca,pca}`.
pub fn forest_preset(name: &str) -> Result<ForestConfig> {
    let lower = name.to_ascii_lowercase();
    let preset = match lower.as_str() {
        "rotf" => ForestConfig::rotation_forest(),
        "randf" => ForestConfig::random_forest(),
        _ => {
            if let Some(k) = lower.strip_prefix("rotf").and_then(|s| s.parse::<usize>().ok()) {
                if k == 0 {
                    return Err(Error::UnknownClassifier(name.into()));
                }
                ForestConfig {
                    max_attributes_per_tree: Some(k),
                    ..ForestConfig::rotation_forest()
                }
            } else {
                let (base, transform) = lower
                    .split_once('-')
                    .ok_or_else(|| Error::UnknownClassifier(name.into()))?;
                let base = match base {
                    "rt" => TreeKind::RandomTree,
                    "c45" => TreeKind::C45,
                    _ => return Err(Error::UnknownClassifier(name.into())),
                };
                let transform = match transform {
                    "bag" => Transform::Bag,
                    "bagpca" => Transform::BagPca,
                    "pca" => Transform::Pca,
                    _ => return Err(Error::UnknownClassifier(name.into())),
                };
                ForestConfig::hybrid(base, transform)
            }
        }
    };
    Ok(preset)
}

/// The six ablation hybrids in table order: RT with BAG, BAG+PCA, PCA,
/// then C4.5 with the same three.
pub fn ablation_combos() -> Vec<(String, TreeKind, Transform)> {
    let mut out = Vec::new();
    for (kind, tag) in [(TreeKind::RandomTree, "RT"), (TreeKind::C45, "C4.5")] {
        for t in Transform::ALL {
            out.push((format!("{tag}+{}", t.label()), kind, t));
        }
    }
    out
}

/// Fold index per case. Each class is shuffled and dealt round-robin, the
/// dealing position carrying over from one class to the next, so fold
/// sizes overall and per class differ by at most one.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 || labels.len() < folds {
        return Err(Error::InvalidConfig(format!(
            "{folds} folds need at least 2 folds and as many cases, found {}",
            labels.len()
        )));
    }
    let classes = labels.iter().max().map_or(0, |&c| c + 1);
    let mut by_class = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = SplitMix64::new(derive_seed(seed, FOLD_STREAM));
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for mut members in by_class {
        rng.shuffle(&mut members);
        for i in members {
            assignment[i] = next;
            next = (next + 1) % folds;
        }
    }
    Ok(assignment)
}

fn fold_split(data: &Dataset, assignment: &[usize], fold: usize) -> (Dataset, Vec<usize>) {
    let (test, train): (Vec<usize>, Vec<usize>) = (0..data.n_cases()).partition(|&i| assignment[i] == fold);
    (data.subset(&train), test)
}

/// Out-of-fold predictions, in case order.
pub fn cross_validate_predictions(learner: &dyn Learner, data: &Dataset, folds: usize, seed: u64) -> Result<Vec<PredictionRecord>> {
    let assignment = stratified_folds(data.labels(), folds, seed)?;
    let per_fold: Vec<Vec<(usize, PredictionRecord)>> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let (train, test) = fold_split(data, &assignment, fold);
            let model = learner.fit(&train)?;
            test.into_iter()
                .map(|i| Ok((i, PredictionRecord::new(data.label(i), model.predict_proba(data.row(i))?))))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut pooled: Vec<(usize, PredictionRecord)> = per_fold.into_iter().flatten().collect();
    pooled.sort_by_key(|(i, _)| *i);
    Ok(pooled.into_iter().map(|(_, p)| p).collect())
}

/// Error of the pooled out-of-fold predictions.
pub fn cross_validate(learner: &dyn Learner, data: &Dataset, folds: usize, seed: u64) -> Result<f64> {
    error_rate(&cross_validate_predictions(learner, data, folds, seed)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "param", content = "value", rename_all = "snake_case")]
pub enum Param {
    Trees(usize),
    GroupSize(usize),
    Proportion(f64),
    SubspaceSize(usize),
    /// `None` is unlimited depth.
    MaxDepth(Option<usize>),
}

impl Param {
    pub fn name(&self) -> &'static str {
        match self {
            Param::Trees(_) => "trees",
            Param::GroupSize(_) => "group_size",
            Param::Proportion(_) => "proportion",
            Param::SubspaceSize(_) => "subspace_size",
            Param::MaxDepth(_) => "max_depth",
        }
    }

    pub fn apply(&self, cfg: &mut ForestConfig) {
        match *self {
            Param::Trees(k) => cfg.trees = k,
            Param::GroupSize(f) => cfg.rotation.group_size = f,
            Param::Proportion(p) => cfg.rotation.sample_proportion = p,
            Param::SubspaceSize(s) => cfg.random_subspace_size = Some(s),
            Param::MaxDepth(d) => cfg.max_depth = d,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Trees(v) | Param::GroupSize(v) | Param::SubspaceSize(v) => write!(f, "{v}"),
            Param::Proportion(v) => write!(f, "{v}"),
            Param::MaxDepth(None) => write!(f, "unlimited"),
            Param::MaxDepth(Some(d)) => write!(f, "{d}"),
        }
    }
}

/// Named parameter axes; the grid is their cartesian product with the
/// first axis varying slowest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamGrid {
    pub axes: Vec<Vec<Param>>,
}

impl ParamGrid {
    pub fn new(axes: Vec<Vec<Param>>) -> Self {
        ParamGrid { axes }
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn combinations(&self) -> Vec<Vec<Param>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |p| {
                        let mut c = prefix.clone();
                        c.push(*p);
                        c
                    })
                })
                .collect();
        }
        out
    }

    /// Rotation forest grid: 10 tree counts × groups of 3..=12 ×
    /// proportions 0.1..=1.0.
    pub fn rotation_forest() -> Self {
        ParamGrid::new(vec![
            tree_axis(),
            (3..=12).map(Param::GroupSize).collect(),
            (1..=10).map(|i| Param::Proportion(i as f64 / 10.0)).collect(),
        ])
    }

    /// Random forest grid for `m` attributes: 10 tree counts × subspace
    /// sizes {√m, log2 m + 1, m/10, ..., m/3} × depths {unlimited, m/9,
    /// m/8, ..., m/2, m}.
    pub fn random_forest(m: usize) -> Self {
        let mf = m as f64;
        let clamp = |v: f64| (v.round() as usize).clamp(1, m.max(1));
        let mut subspace = vec![clamp(mf.sqrt().ceil()), clamp(mf.log2().floor() + 1.0)];
        subspace.extend((3..=10).rev().map(|d| clamp(mf / d as f64)));
        let mut depth = vec![Param::MaxDepth(None)];
        depth.extend((2..=9).rev().map(|d| Param::MaxDepth(Some(clamp(mf / d as f64)))));
        depth.push(Param::MaxDepth(Some(m.max(1))));
        ParamGrid::new(vec![
            tree_axis(),
            subspace.into_iter().map(Param::SubspaceSize).collect(),
            depth,
        ])
    }
}

fn tree_axis() -> Vec<Param> {
    let mut t = vec![Param::Trees(10)];
    t.extend((1..=9).map(|i| Param::Trees(i * 100)));
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub params: Vec<Param>,
    pub cv_error: f64,
}

#[derive(Debug, Clone)]
pub struct TuneResult {
    pub best: Vec<Param>,
    pub best_config: ForestConfig,
    pub cv_error: f64,
    /// Every combination in declaration order.
    pub table: Vec<GridCell>,
    /// The chosen configuration refit on all the training data.
    pub model: ForestModel,
}

/// Index of the smallest `(errors, (trees, group size))`, first on ties.
fn pick_best(keys: &[(usize, (usize, usize))]) -> usize {
    let mut best = 0;
    for (i, k) in keys.iter().enumerate().skip(1) {
        if *k < keys[best] {
            best = i;
        }
    }
    best
}

fn tie_key(params: &[Param], base: &ForestConfig) -> (usize, usize) {
    let mut cfg = base.clone();
    for p in params {
        p.apply(&mut cfg);
    }
    (cfg.trees, cfg.rotation.group_size)
}

/// Ten-fold (or `folds`-fold) CV over every grid combination with shared
/// folds; the lowest error wins, ties going to fewer trees, then smaller
/// groups, then declaration order.
///
/// Forests are prefix-stable in the tree count, so combinations that differ
/// only in `Trees` are scored from one forest per fold grown to the largest
/// count.
pub fn grid_tune(base: &ForestConfig, grid: &ParamGrid, train: &Dataset, folds: usize, seed: u64) -> Result<TuneResult> {
    let combos = grid.combinations();
    if grid.axes.is_empty() || combos.is_empty() {
        return Err(Error::InvalidConfig("parameter grid is empty".into()));
    }
    let assignment = stratified_folds(train.labels(), folds, seed)?;

    // group combinations by everything except the tree count
    let mut families: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (ci, combo) in combos.iter().enumerate() {
        let key: Vec<String> = combo
            .iter()
            .filter(|p| !matches!(p, Param::Trees(_)))
            .map(|p| format!("{}={p}", p.name()))
            .collect();
        families.entry(key.join(",")).or_default().push(ci);
    }
    let configs: Vec<ForestConfig> = combos
        .iter()
        .map(|combo| {
            let mut cfg = base.clone();
            for p in combo {
                p.apply(&mut cfg);
            }
            cfg
        })
        .collect();
    for cfg in &configs {
        cfg.validate(train.n_attributes())?;
    }

    let jobs: Vec<(&Vec<usize>, usize)> = families
        .values()
        .flat_map(|members| (0..folds).map(move |f| (members, f)))
        .collect();
    // (combo index, fold) → misclassified count
    let counts: Vec<Vec<(usize, usize)>> = jobs
        .par_iter()
        .map(|&(members, fold)| {
            let largest = members.iter().map(|&ci| configs[ci].trees).max().unwrap_or(1);
            let cfg = ForestConfig {
                trees: largest,
                ..configs[members[0]].clone()
            };
            let (fold_train, test) = fold_split(train, &assignment, fold);
            let forest = build_forest(&fold_train, &cfg)?;
            members
                .iter()
                .map(|&ci| {
                    let model = forest.truncated(configs[ci].trees);
                    let mut wrong = 0;
                    for &i in &test {
                        if model.predict(train.row(i))? != train.label(i) {
                            wrong += 1;
                        }
                    }
                    Ok((ci, wrong))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut wrong = vec![0usize; combos.len()];
    for (ci, w) in counts.into_iter().flatten() {
        wrong[ci] += w;
    }
    let n = train.n_cases() as f64;
    let table: Vec<GridCell> = combos
        .iter()
        .zip(&wrong)
        .map(|(params, &w)| GridCell {
            params: params.clone(),
            cv_error: w as f64 / n,
        })
        .collect();

    let keys: Vec<(usize, (usize, usize))> = table
        .iter()
        .zip(&wrong)
        .map(|(cell, &w)| (w, tie_key(&cell.params, base)))
        .collect();
    let best = pick_best(&keys);
    let model = build_forest(train, &configs[best])?;
    Ok(TuneResult {
        best: table[best].params.clone(),
        best_config: configs[best].clone(),
        cv_error: table[best].cv_error,
        table,
        model,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Trees,
    GroupSize,
    Proportion,
}

impl SweepParam {
    fn param(self, value: f64) -> Param {
        match self {
            SweepParam::Trees => Param::Trees(value as usize),
            SweepParam::GroupSize => Param::GroupSize(value as usize),
            SweepParam::Proportion => Param::Proportion(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub mean_diff: f64,
    /// `None` with fewer than two datasets.
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub values: Vec<f64>,
    pub baseline: f64,
    /// Mean test error over resamples, `errors[dataset][value]`.
    pub errors: Vec<Vec<f64>>,
    pub points: Vec<SweepPoint>,
}

/// Mean and 95% t-interval of paired differences.
pub fn mean_t_interval(diffs: &[f64]) -> (f64, Option<(f64, f64)>) {
    let n = diffs.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let half = t * (var / n as f64).sqrt();
    (mean, Some((mean - half, mean + half)))
}

/// Test error of `base` with `param` set to each value, relative to the
/// baseline value, averaged over stratified resamples per dataset and
/// summarised across datasets with a 95% t-interval.
pub fn sensitivity_sweep(
    datasets: &[Dataset],
    base: &ForestConfig,
    param: SweepParam,
    values: &[f64],
    baseline: f64,
    resamples: usize,
    train_fraction: f64,
) -> Result<SweepResult> {
    if values.is_empty() || resamples == 0 || datasets.is_empty() {
        return Err(Error::InvalidConfig("sweep needs values, datasets and resamples".into()));
    }
    let mut all = values.to_vec();
    if !all.contains(&baseline) {
        all.push(baseline);
    }
    let jobs: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..resamples).map(move |r| (d, r)))
        .collect();
    let per_job: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(d, r)| {
            let plan = ResamplePlan::fraction(r as u64, train_fraction);
            let (train, test) = stratified_resample(&datasets[d], &plan)?;
            let error_of = |model: &ForestModel| -> Result<f64> {
                let mut wrong = 0;
                for i in 0..test.n_cases() {
                    if model.predict(test.row(i))? != test.label(i) {
                        wrong += 1;
                    }
                }
                Ok(wrong as f64 / test.n_cases() as f64)
            };
            match param {
                SweepParam::Trees => {
                    let largest = all.iter().fold(0.0f64, |a, &b| a.max(b)) as usize;
                    let forest = build_forest(&train, &base.clone().with_trees(largest))?;
                    all.iter().map(|&v| error_of(&forest.truncated(v as usize))).collect()
                }
                _ => all
                    .iter()
                    .map(|&v| {
                        let mut cfg = base.clone();
                        param.param(v).apply(&mut cfg);
                        error_of(&build_forest(&train, &cfg)?)
                    })
                    .collect(),
            }
        })
        .collect::<Result<_>>()?;

    let mut errors = vec![vec![0.0; all.len()]; datasets.len()];
    for (&(d, _), errs) in jobs.iter().zip(&per_job) {
        for (slot, e) in errors[d].iter_mut().zip(errs) {
            *slot += e / resamples as f64;
        }
    }
    let base_idx = all.iter().position(|&v| v == baseline).expect("baseline present");
    let points = (0..values.len())
        .map(|vi| {
            let diffs: Vec<f64> = errors.iter().map(|row| row[vi] - row[base_idx]).collect();
            let (mean_diff, ci) = mean_t_interval(&diffs);
            SweepPoint {
                value: values[vi],
                mean_diff,
                ci,
            }
        })
        .collect();
    for row in &mut errors {
        row.truncate(values.len());
    }
    Ok(SweepResult {
        values: values.to_vec(),
        baseline,
        errors,
        points,
    })
}

/// One train/test resample of one classifier.
#[derive(Debug, Clone)]
pub struct ResampleOutcome {
    pub model: ForestModel,
    pub predictions: Vec<PredictionRecord>,
    pub report: MetricReport,
    pub build_seconds: f64,
}

pub fn run_resample(data: &Dataset, cfg: &ForestConfig, plan: &ResamplePlan) -> Result<ResampleOutcome> {
    let (train, test) = stratified_resample(data, plan)?;
    let start = Instant::now();
    let model = build_forest(&train, cfg)?;
    let build_seconds = start.elapsed().as_secs_f64();
    let predictions = predict_dataset(&model, &test)?;
    let report = MetricReport::compute(&predictions, &train.class_counts())?;
    Ok(ResampleOutcome {
        model,
        predictions,
        report,
        build_seconds,
    })
}

/// One row of the metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub dataset: String,
    pub classifier: String,
    pub resample: u64,
    pub error: f64,
    pub balanced_error: f64,
    pub auc: f64,
    pub nll: f64,
    pub build_seconds: f64,
}

impl MetricsRow {
    pub fn new(dataset: &str, classifier: &str, resample: u64, report: &MetricReport, build_seconds: f64) -> Self {
        MetricsRow {
            dataset: dataset.into(),
            classifier: classifier.into(),
            resample,
            error: report.error,
            balanced_error: report.balanced_error,
            auc: report.auc,
            nll: report.nll,
            build_seconds,
        }
    }
}

pub const METRICS_HEADER: [&str; 8] = [
    "dataset",
    "classifier",
    "resample",
    "error",
    "balanced_error",
    "auc",
    "nll",
    "build_seconds",
];
