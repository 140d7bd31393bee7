//! Tree ensembles: rotation forest, random forest, the six base/transform
//! hybrids and the random-attribute rotation forest.
//!
//! Member `i` of a forest depends only on the master seed and `i`, so
//! members can be built in any order (or in parallel) and a forest of `k`
//! trees is a prefix of the same forest grown to more trees.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};
use crate::rotation::{build_full_rotation, build_rotation, RotationConfig, RotationSet};
use crate::trees::{build_tree, Tree, TreeConfig, TreeKind};

pub const MODEL_FORMAT: &str = "rotforge-forest";
pub const MODEL_VERSION: u32 = 1;

// Sub-streams of a member seed.
const TREE_STREAM: u64 = 1;
const ATTRIBUTE_STREAM: u64 = 2;
const ROTATION_STREAM: u64 = 3;
const BOOTSTRAP_STREAM: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Bootstrap sample, no rotation.
    Bag,
    /// Bootstrap sample, then one PCA over all the tree's attributes.
    BagPca,
    /// Group-wise PCA with class/case subsampling, no bootstrap.
    Pca,
}

impl Transform {
    pub const ALL: [Transform; 3] = [Transform::Bag, Transform::BagPca, Transform::Pca];

    pub fn label(self) -> &'static str {
        match self {
            Transform::Bag => "BAG",
            Transform::BagPca => "BAG+PCA",
            Transform::Pca => "PCA",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub base: TreeKind,
    pub transform: Transform,
    pub rotation: RotationConfig,
    /// Bootstrap size as a fraction of n (with replacement) for BAG modes.
    pub bag_fraction: f64,
    /// Random attribute subset per tree; `None` uses all attributes.
    pub max_attributes_per_tree: Option<usize>,
    pub min_cases: usize,
    /// Per-node subspace of `RandomTree` bases; `None` means ⌈√m⌉.
    pub random_subspace_size: Option<usize>,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl ForestConfig {
    /// k = 200, f = 3, p = 0.5, C4.5 base.
    pub fn rotation_forest() -> Self {
        ForestConfig {
            trees: 200,
            base: TreeKind::C45,
            transform: Transform::Pca,
            rotation: RotationConfig::default(),
            bag_fraction: 1.0,
            max_attributes_per_tree: None,
            min_cases: 2,
            random_subspace_size: None,
            max_depth: None,
            seed: 0,
        }
    }

    /// 500 random trees on bootstrap samples, ⌈√m⌉ attributes per node.
    pub fn random_forest() -> Self {
        ForestConfig {
            trees: 500,
            base: TreeKind::RandomTree,
            transform: Transform::Bag,
            ..Self::rotation_forest()
        }
    }

    /// One of the six base × transform combinations with the rotation
    /// forest defaults otherwise.
    pub fn hybrid(base: TreeKind, transform: Transform) -> Self {
        ForestConfig {
            base,
            transform,
            ..Self::rotation_forest()
        }
    }

    pub fn with_trees(mut self, trees: usize) -> Self {
        self.trees = trees;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.trees < 1 {
            return Err(Error::InvalidConfig("forest needs at least one tree".into()));
        }
        if !(self.bag_fraction > 0.0) {
            return Err(Error::InvalidConfig("bag fraction must be positive".into()));
        }
        if let Some(a) = self.max_attributes_per_tree {
            if a < 1 {
                return Err(Error::InvalidConfig("max attributes per tree must be at least 1".into()));
            }
        }
        if self.transform == Transform::Pca {
            self.rotation.validate()?;
        }
        if m == 0 {
            return Err(Error::InvalidConfig("dataset has no attributes".into()));
        }
        self.tree_config(0).validate()
    }

    fn tree_config(&self, seed: u64) -> TreeConfig {
        TreeConfig {
            kind: self.base,
            min_cases: self.min_cases,
            random_subspace_size: self.random_subspace_size,
            max_depth: self.max_depth,
            seed,
            ..TreeConfig::default()
        }
    }

    pub fn member_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, index as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    /// Original attribute indices the member sees, ascending.
    pub attributes: Vec<usize>,
    pub rotation: Option<RotationSet>,
    pub tree: Tree,
}

impl Member {
    fn features_into(&self, x: &[f64], buf: &mut Vec<f64>) {
        match &self.rotation {
            Some(r) => r.apply_into(x, buf),
            None => {
                buf.clear();
                buf.extend(self.attributes.iter().map(|&a| x[a]));
            }
        }
    }

    pub fn estimated_bytes(&self) -> usize {
        8 * self.attributes.len()
            + self.rotation.as_ref().map_or(0, RotationSet::estimated_bytes)
            + self.tree.estimated_bytes()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format: String,
    pub version: u32,
    pub config: ForestConfig,
    pub class_names: Vec<String>,
    pub n_attributes: usize,
    pub members: Vec<Member>,
    pub build_seconds: f64,
    pub per_tree_seconds: Vec<f64>,
}

/// Builds member `index` of a forest on `train`. `attribute_count` and
/// `case_rows` override the per-tree attribute subset size and the training
/// rows (used by the contract trainer); both default to the configuration.
pub(crate) fn build_member(
    train: &Dataset,
    cfg: &ForestConfig,
    index: usize,
    attribute_count: Option<usize>,
    case_rows: Option<&[usize]>,
) -> Result<Member> {
    let m = train.n_attributes();
    let seed = cfg.member_seed(index);

    let attributes: Vec<usize> = match attribute_count.or(cfg.max_attributes_per_tree) {
        Some(a) if a < m => {
            let mut rng = SplitMix64::new(derive_seed(seed, ATTRIBUTE_STREAM));
            let mut s = rng.sample_indices(m, a);
            s.sort_unstable();
            s
        }
        _ => (0..m).collect(),
    };

    let owned;
    let base: &Dataset = match case_rows {
        Some(rows) => {
            owned = train.subset(rows);
            &owned
        }
        None => train,
    };

    let sample = match cfg.transform {
        Transform::Bag | Transform::BagPca => {
            let n = base.n_cases();
            let size = ((n as f64 * cfg.bag_fraction).round() as usize).max(1);
            let mut rng = SplitMix64::new(derive_seed(seed, BOOTSTRAP_STREAM));
            let rows: Vec<usize> = (0..size).map(|_| rng.below(n)).collect();
            Some(base.subset(&rows))
        }
        Transform::Pca => None,
    };
    let fit_on = sample.as_ref().unwrap_or(base);

    let rotation = match cfg.transform {
        Transform::Bag => None,
        Transform::BagPca => Some(build_full_rotation(fit_on, &attributes)?),
        Transform::Pca => {
            let rot_cfg = RotationConfig {
                seed: derive_seed(seed, ROTATION_STREAM),
                ..cfg.rotation.clone()
            };
            Some(build_rotation(fit_on, &attributes, &rot_cfg)?)
        }
    };

    let features = match &rotation {
        Some(r) => r.transform(fit_on)?,
        None if attributes.len() == m => fit_on.clone(),
        None => {
            let mut values = Vec::with_capacity(fit_on.n_cases() * attributes.len());
            for i in 0..fit_on.n_cases() {
                let row = fit_on.row(i);
                values.extend(attributes.iter().map(|&a| row[a]));
            }
            let names = attributes.iter().map(|&a| fit_on.feature_names[a].clone()).collect();
            fit_on.with_features(names, values)?
        }
    };
    let tree = build_tree(&features, &cfg.tree_config(derive_seed(seed, TREE_STREAM)));
    Ok(Member {
        attributes,
        rotation,
        tree,
    })
}

fn assemble(train: &Dataset, cfg: &ForestConfig) -> Result<ForestModel> {
    cfg.validate(train.n_attributes())?;
    let start = Instant::now();
    let built: Vec<Result<(Member, f64)>> = (0..cfg.trees)
        .into_par_iter()
        .map(|i| {
            let t = Instant::now();
            build_member(train, cfg, i, None, None).map(|m| (m, t.elapsed().as_secs_f64()))
        })
        .collect();
    let mut members = Vec::with_capacity(cfg.trees);
    let mut per_tree_seconds = Vec::with_capacity(cfg.trees);
    for b in built {
        let (m, s) = b?;
        members.push(m);
        per_tree_seconds.push(s);
    }
    Ok(ForestModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        config: cfg.clone(),
        class_names: train.class_names.clone(),
        n_attributes: train.n_attributes(),
        members,
        build_seconds: start.elapsed().as_secs_f64(),
        per_tree_seconds,
    })
}

/// Rotation forest: for every tree a fresh group-wise rotation over all
/// attributes, a C4.5 tree on the rotated training set.
pub fn build_rotation_forest(train: &Dataset, cfg: &ForestConfig) -> Result<ForestModel> {
    if cfg.transform != Transform::Pca {
        return Err(Error::InvalidConfig("rotation forest uses the PCA transform".into()));
    }
    assemble(train, cfg)
}

/// Random forest: random-subspace trees on bootstrap samples.
pub fn build_random_forest(train: &Dataset, cfg: &ForestConfig) -> Result<ForestModel> {
    if cfg.base != TreeKind::RandomTree || cfg.transform != Transform::Bag {
        return Err(Error::InvalidConfig(
            "random forest uses random trees with bagging".into(),
        ));
    }
    assemble(train, cfg)
}

/// Any of the six base × transform combinations. (RandomTree, Bag) is the
/// random forest and (C45, Pca) the rotation forest.
pub fn build_hybrid(train: &Dataset, base: TreeKind, transform: Transform, cfg: &ForestConfig) -> Result<ForestModel> {
    let cfg = ForestConfig {
        base,
        transform,
        ..cfg.clone()
    };
    assemble(train, &cfg)
}

/// Rotation forest where each tree sees a random subset of
/// `min(max_attributes, m)` attributes.
pub fn build_random_attribute_rotf(train: &Dataset, max_attributes: usize, cfg: &ForestConfig) -> Result<ForestModel> {
    let cfg = ForestConfig {
        transform: Transform::Pca,
        max_attributes_per_tree: Some(max_attributes),
        ..cfg.clone()
    };
    assemble(train, &cfg)
}

/// Builds whatever `cfg` describes.
pub fn build_forest(train: &Dataset, cfg: &ForestConfig) -> Result<ForestModel> {
    assemble(train, cfg)
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > dist[best] {
            best = i;
        }
    }
    best
}

impl ForestModel {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Mean of the members' leaf distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_attributes {
            return Err(Error::DimensionMismatch {
                expected: self.n_attributes,
                found: x.len(),
            });
        }
        let mut acc = vec![0.0; self.n_classes()];
        let mut buf = Vec::new();
        for member in &self.members {
            member.features_into(x, &mut buf);
            for (a, p) in acc.iter_mut().zip(member.tree.predict_unchecked(&buf)) {
                *a += p;
            }
        }
        let k = self.members.len() as f64;
        for a in &mut acc {
            *a /= k;
        }
        Ok(acc)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.predict_proba(x).map(|d| argmax(&d))
    }

    /// Per-member leaf distributions of `x`.
    pub fn member_distributions(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.n_attributes {
            return Err(Error::DimensionMismatch {
                expected: self.n_attributes,
                found: x.len(),
            });
        }
        let mut buf = Vec::new();
        Ok(self
            .members
            .iter()
            .map(|m| {
                m.features_into(x, &mut buf);
                m.tree.predict_unchecked(&buf).to_vec()
            })
            .collect())
    }

    /// First `k` members; identical to building the same config with `k` trees.
    pub fn truncated(&self, k: usize) -> ForestModel {
        let k = k.min(self.members.len()).max(1);
        let mut out = self.clone();
        out.members.truncate(k);
        out.per_tree_seconds.truncate(k);
        out.config.trees = k;
        out.build_seconds = out.per_tree_seconds.iter().sum();
        out
    }

    pub fn estimated_bytes(&self) -> usize {
        self.members.iter().map(Member::estimated_bytes).sum()
    }

    /// Zeroes the wall-clock fields so that saved models are reproducible.
    pub fn without_timings(mut self) -> Self {
        self.build_seconds = 0.0;
        for s in &mut self.per_tree_seconds {
            *s = 0.0;
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ForestModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT {
            return Err(Error::Schema(format!("unknown model format `{}`", self.format)));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::Schema(format!("unsupported model version {}", self.version)));
        }
        if self.members.is_empty() {
            return Err(Error::Schema("model has no members".into()));
        }
        for member in &self.members {
            if member.attributes.iter().any(|&a| a >= self.n_attributes) {
                return Err(Error::Schema("member attribute out of range".into()));
            }
            let dim = match &member.rotation {
                Some(r) => {
                    r.validate(self.n_attributes)?;
                    r.output_dim()
                }
                None => member.attributes.len(),
            };
            if member.tree.n_attributes != dim || member.tree.n_classes != self.n_classes() {
                return Err(Error::Schema("member tree does not match its feature space".into()));
            }
            member.tree.validate()?;
        }
        Ok(())
    }
}
