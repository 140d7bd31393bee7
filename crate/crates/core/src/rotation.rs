//! Group-wise PCA rotation: random feature groups, class and case
//! subsampling per group, and a PCA fitted on each subsample that is then
//! applied to every case.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::rng::SplitMix64;

/// Class-subset redraws before falling back to all classes.
pub const MAX_CLASS_REDRAWS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationConfig {
    /// Attributes per group.
    pub group_size: usize,
    /// Proportion of the selected-class cases drawn for each group's PCA.
    pub sample_proportion: f64,
    /// Inclusion probability of each class when forming the class subset.
    pub class_inclusion_prob: f64,
    pub seed: u64,
}

impl Default for RotationConfig {
    fn default() -> Self {
        RotationConfig {
            group_size: 3,
            sample_proportion: 0.5,
            class_inclusion_prob: 0.5,
            seed: 0,
        }
    }
}

impl RotationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.group_size < 1 {
            return Err(Error::InvalidConfig("group size must be at least 1".into()));
        }
        if !(self.sample_proportion > 0.0 && self.sample_proportion <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sample proportion must be in (0, 1], found {}",
                self.sample_proportion
            )));
        }
        if !(0.0..=1.0).contains(&self.class_inclusion_prob) {
            return Err(Error::InvalidConfig("class inclusion probability must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub attributes: Vec<usize>,
    pub means: Vec<f64>,
    /// Row-major `b`×`b`; rows are principal axes by descending variance.
    pub projection: Vec<f64>,
}

impl FeatureGroup {
    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationSet {
    pub source_attributes: Vec<usize>,
    pub groups: Vec<FeatureGroup>,
}

/// Shuffles `attrs` and cuts them into groups of `f`; the last group takes
/// the remainder.
pub fn partition_features(attrs: &[usize], f: usize, rng: &mut SplitMix64) -> Vec<Vec<usize>> {
    assert!(f >= 1, "group size must be positive");
    let mut shuffled = attrs.to_vec();
    rng.shuffle(&mut shuffled);
    shuffled.chunks(f).map(<[usize]>::to_vec).collect()
}

/// Case indices for one group's PCA: a non-empty random class subset, then
/// ⌈p·count⌉ cases drawn without replacement from the pooled cases of the
/// selected classes.
pub fn sample_group_cases(train: &Dataset, cfg: &RotationConfig, rng: &mut SplitMix64) -> Vec<usize> {
    let by_class = train.class_indices();
    let present: Vec<usize> = (0..by_class.len()).filter(|&j| !by_class[j].is_empty()).collect();
    let mut selected = Vec::new();
    for _ in 0..MAX_CLASS_REDRAWS {
        selected = present
            .iter()
            .copied()
            .filter(|_| rng.bernoulli(cfg.class_inclusion_prob))
            .collect();
        if !selected.is_empty() {
            break;
        }
    }
    if selected.is_empty() {
        selected = present;
    }
    let pool: Vec<usize> = selected
        .iter()
        .flat_map(|&j| by_class[j].iter().copied())
        .collect();
    let k = ((cfg.sample_proportion * pool.len() as f64).ceil() as usize).clamp(1, pool.len().max(1));
    rng.sample_from(&pool, k)
}

/// Fitted PCA of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaFit {
    pub means: Vec<f64>,
    pub projection: Vec<f64>,
    pub eigenvalues: Vec<f64>,
}

/// PCA of an `a`×`b` row-major matrix. Keeps all `b` components, including
/// zero-variance ones. Covariance divisor is `a − 1`; a single row gives a
/// zero covariance and the identity projection.
pub fn pca_fit(subset: &[f64], a: usize, b: usize) -> Result<PcaFit> {
    if a == 0 || b == 0 || subset.len() != a * b {
        return Err(Error::DimensionMismatch {
            expected: a * b,
            found: subset.len(),
        });
    }
    if subset.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut means = vec![0.0; b];
    for row in subset.chunks_exact(b) {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= a as f64;
    }
    let mut cov = vec![0.0; b * b];
    if a > 1 {
        for row in subset.chunks_exact(b) {
            for i in 0..b {
                let di = row[i] - means[i];
                for j in i..b {
                    cov[i * b + j] += di * (row[j] - means[j]);
                }
            }
        }
        let denom = (a - 1) as f64;
        for i in 0..b {
            for j in i..b {
                let v = cov[i * b + j] / denom;
                cov[i * b + j] = v;
                cov[j * b + i] = v;
            }
        }
    }
    let eig = symmetric_eigen(&cov, b)?;
    Ok(PcaFit {
        means,
        projection: eig.vectors,
        eigenvalues: eig.values,
    })
}

/// Fits one group on the given rows of `data`.
pub fn fit_group(data: &Dataset, rows: &[usize], attributes: &[usize]) -> Result<FeatureGroup> {
    let b = attributes.len();
    let mut subset = Vec::with_capacity(rows.len() * b);
    for &i in rows {
        subset.extend(attributes.iter().map(|&j| data.value(i, j)));
    }
    let fit = pca_fit(&subset, rows.len(), b)?;
    Ok(FeatureGroup {
        attributes: attributes.to_vec(),
        means: fit.means,
        projection: fit.projection,
    })
}

/// Rotation over `attrs`: random groups of `cfg.group_size`, each fitted on
/// its own class/case subsample of `train`.
pub fn build_rotation(train: &Dataset, attrs: &[usize], cfg: &RotationConfig) -> Result<RotationSet> {
    cfg.validate()?;
    if let Some(&bad) = attrs.iter().find(|&&a| a >= train.n_attributes()) {
        return Err(Error::InvalidConfig(format!("attribute {bad} out of range")));
    }
    let mut rng = SplitMix64::new(cfg.seed);
    let partition = partition_features(attrs, cfg.group_size, &mut rng);
    let mut groups = Vec::with_capacity(partition.len());
    for group in &partition {
        let rows = sample_group_cases(train, cfg, &mut rng);
        groups.push(fit_group(train, &rows, group)?);
    }
    Ok(RotationSet {
        source_attributes: attrs.to_vec(),
        groups,
    })
}

/// One group of every attribute in `attrs`, fitted on all cases of `train`.
pub fn build_full_rotation(train: &Dataset, attrs: &[usize]) -> Result<RotationSet> {
    let rows: Vec<usize> = (0..train.n_cases()).collect();
    Ok(RotationSet {
        source_attributes: attrs.to_vec(),
        groups: vec![fit_group(train, &rows, attrs)?],
    })
}

impl RotationSet {
    pub fn output_dim(&self) -> usize {
        self.groups.iter().map(FeatureGroup::len).sum()
    }

    /// Writes the rotated features of the full-space vector `x` into `out`.
    #[inline]
    pub(crate) fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let mut centered = [0.0f64; 64];
        for g in &self.groups {
            let b = g.len();
            let mut heap;
            let buf: &mut [f64] = if b <= centered.len() {
                &mut centered[..b]
            } else {
                heap = vec![0.0; b];
                &mut heap
            };
            for ((c, &a), m) in buf.iter_mut().zip(&g.attributes).zip(&g.means) {
                *c = x[a] - m;
            }
            for row in g.projection.chunks_exact(b) {
                out.push(row.iter().zip(buf.iter()).map(|(p, c)| p * c).sum());
            }
        }
    }

    /// Rotated features of `x`, a vector over all original attributes.
    /// Output segments follow group order.
    pub fn apply(&self, x: &[f64], m: usize) -> Result<Vec<f64>> {
        if x.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: x.len(),
            });
        }
        if let Some(&bad) = self.groups.iter().flat_map(|g| &g.attributes).find(|&&a| a >= m) {
            return Err(Error::InvalidConfig(format!("rotation uses attribute {bad} beyond {m}")));
        }
        let mut out = Vec::with_capacity(self.output_dim());
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// Rotates every case of `data`.
    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        let dim = self.output_dim();
        let mut values = Vec::with_capacity(data.n_cases() * dim);
        let mut out = Vec::with_capacity(dim);
        for i in 0..data.n_cases() {
            self.apply_into(data.row(i), &mut out);
            values.extend_from_slice(&out);
        }
        let names = self
            .groups
            .iter()
            .enumerate()
            .flat_map(|(g, grp)| (0..grp.len()).map(move |k| format!("g{g}_pc{k}")))
            .collect();
        data.with_features(names, values)
    }

    /// Groups must partition the source attributes and carry square
    /// projections of matching size.
    pub fn validate(&self, m: usize) -> Result<()> {
        let mut covered: Vec<usize> = self.groups.iter().flat_map(|g| g.attributes.iter().copied()).collect();
        covered.sort_unstable();
        let mut source = self.source_attributes.clone();
        source.sort_unstable();
        if covered != source {
            return Err(Error::Schema("rotation groups do not partition the source attributes".into()));
        }
        for g in &self.groups {
            let b = g.len();
            if g.means.len() != b || g.projection.len() != b * b {
                return Err(Error::Schema("rotation group has inconsistent sizes".into()));
            }
            if g.attributes.iter().any(|&a| a >= m) {
                return Err(Error::Schema("rotation group attribute out of range".into()));
            }
        }
        Ok(())
    }

    pub fn estimated_bytes(&self) -> usize {
        self.groups
            .iter()
            .map(|g| 8 * (g.attributes.len() + g.means.len() + g.projection.len()))
            .sum::<usize>()
            + 8 * self.source_attributes.len()
    }
}
