//! Base learners: a C4.5-style gain-ratio tree and a random-subspace tree.
//!
//! Both split numeric attributes as `x[attribute] <= threshold`, with
//! thresholds at midpoints between adjacent distinct values. Trees are
//! stored as a preorder node list; an internal node's left child is the
//! next node and its right child index is stored explicitly.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Gains at or below this are treated as zero.
pub const MIN_GAIN: f64 = 1e-12;
/// Scores within this of the incumbent count as ties (the incumbent stays).
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    C45,
    RandomTree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    Gain,
    GainRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub kind: TreeKind,
    /// Minimum cases per branch; nodes with fewer than twice this are leaves.
    pub min_cases: usize,
    /// Attributes drawn per node by `RandomTree`; `None` means ⌈√m⌉.
    pub random_subspace_size: Option<usize>,
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    /// Pessimistic error pruning (subtree replacement). Off by default.
    pub prune: bool,
    /// Confidence factor used by pruning.
    pub confidence: f64,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            kind: TreeKind::C45,
            min_cases: 2,
            random_subspace_size: None,
            max_depth: None,
            prune: false,
            confidence: 0.25,
            seed: 0,
        }
    }
}

impl TreeConfig {
    pub fn c45() -> Self {
        Self::default()
    }

    pub fn random_tree(seed: u64) -> Self {
        TreeConfig {
            kind: TreeKind::RandomTree,
            seed,
            ..Self::default()
        }
    }

    pub fn subspace_size(&self, m: usize) -> usize {
        self.random_subspace_size
            .unwrap_or_else(|| (m as f64).sqrt().ceil() as usize)
            .clamp(1, m.max(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_cases < 1 {
            return Err(Error::InvalidConfig("min_cases must be at least 1".into()));
        }
        if self.random_subspace_size == Some(0) {
            return Err(Error::InvalidConfig("random_subspace_size must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 0.5) {
            return Err(Error::InvalidConfig("confidence must be in (0, 0.5)".into()));
        }
        Ok(())
    }
}

/// Shannon entropy in bits of a class-count vector.
pub fn entropy(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidConfig("entropy of an all-zero count vector".into()));
    }
    Ok(entropy_of(counts, total))
}

#[inline]
fn entropy_of(counts: &[usize], total: usize) -> f64 {
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total as f64;
            h -= p * p.log2();
        }
    }
    h
}

#[inline]
fn split_gain(parent_entropy: f64, left: &[usize], left_n: usize, right: &[usize], right_n: usize) -> f64 {
    let n = (left_n + right_n) as f64;
    parent_entropy
        - ((left_n as f64 / n) * entropy_of(left, left_n)
            + (right_n as f64 / n) * entropy_of(right, right_n))
}

#[inline]
fn split_info(left_n: usize, right_n: usize) -> f64 {
    entropy_of(&[left_n, right_n], left_n + right_n)
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Best threshold on one attribute: the midpoint with maximal information
/// gain (lowest threshold on ties), with its gain and gain ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeSplit {
    pub attribute: usize,
    pub threshold: f64,
    pub gain: f64,
    pub gain_ratio: f64,
}

/// Scans `pairs` (value, label), sorting them in place.
fn scan_sorted(
    pairs: &mut [(f64, usize)],
    n_classes: usize,
    min_leaf: usize,
    attribute: usize,
    left: &mut Vec<usize>,
    right: &mut Vec<usize>,
) -> Option<AttributeSplit> {
    let total = pairs.len();
    if total < 2 {
        return None;
    }
    pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    if pairs[0].0 == pairs[total - 1].0 {
        return None;
    }
    left.clear();
    left.resize(n_classes, 0);
    right.clear();
    right.resize(n_classes, 0);
    for &(_, l) in pairs.iter() {
        right[l] += 1;
    }
    let parent_entropy = entropy_of(right, total);
    if parent_entropy <= 0.0 {
        return None;
    }
    let mut best: Option<AttributeSplit> = None;
    for i in 0..total - 1 {
        let l = pairs[i].1;
        left[l] += 1;
        right[l] -= 1;
        let left_n = i + 1;
        let right_n = total - left_n;
        if pairs[i].0 == pairs[i + 1].0 || left_n < min_leaf || right_n < min_leaf {
            continue;
        }
        let gain = split_gain(parent_entropy, left, left_n, right, right_n);
        if gain > MIN_GAIN && best.map_or(true, |b| gain > b.gain + TIE_TOLERANCE) {
            best = Some(AttributeSplit {
                attribute,
                threshold: midpoint(pairs[i].0, pairs[i + 1].0),
                gain,
                gain_ratio: gain / split_info(left_n, right_n),
            });
        }
    }
    best
}

/// Best `x <= t` split of a single attribute, evaluating every midpoint
/// between adjacent distinct values. The threshold maximizes information
/// gain; the returned score is the gain or the gain ratio of that
/// threshold. `None` when all values are equal or no split has positive
/// gain.
pub fn best_numeric_split(
    values: &[f64],
    labels: &[usize],
    criterion: SplitCriterion,
) -> Option<(f64, f64)> {
    assert_eq!(values.len(), labels.len());
    let n_classes = labels.iter().copied().max().map_or(0, |c| c + 1);
    let mut pairs: Vec<(f64, usize)> = values.iter().copied().zip(labels.iter().copied()).collect();
    let (mut l, mut r) = (Vec::new(), Vec::new());
    scan_sorted(&mut pairs, n_classes, 1, 0, &mut l, &mut r).map(|s| match criterion {
        SplitCriterion::Gain => (s.threshold, s.gain),
        SplitCriterion::GainRatio => (s.threshold, s.gain_ratio),
    })
}

/// Chooses among per-attribute best splits. `Gain` takes the maximal gain.
/// `GainRatio` takes the maximal gain ratio among attributes whose gain is
/// at least the mean gain of all candidates. Candidates must be in
/// ascending attribute order; ties keep the earlier one.
pub fn select_split(candidates: &[AttributeSplit], criterion: SplitCriterion) -> Option<AttributeSplit> {
    if candidates.is_empty() {
        return None;
    }
    match criterion {
        SplitCriterion::Gain => candidates
            .iter()
            .copied()
            .fold(None, |best: Option<AttributeSplit>, c| match best {
                Some(b) if c.gain <= b.gain + TIE_TOLERANCE => Some(b),
                _ => Some(c),
            }),
        SplitCriterion::GainRatio => {
            let mean = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
            candidates
                .iter()
                .copied()
                .filter(|c| c.gain >= mean - TIE_TOLERANCE)
                .fold(None, |best: Option<AttributeSplit>, c| match best {
                    Some(b) if c.gain_ratio <= b.gain_ratio + TIE_TOLERANCE => Some(b),
                    _ => Some(c),
                })
        }
    }
}

/// Best split of `rows` over `attributes` (ascending) with at least
/// `min_leaf` cases on each side.
pub fn best_split(
    data: &Dataset,
    rows: &[usize],
    attributes: &[usize],
    criterion: SplitCriterion,
    min_leaf: usize,
) -> Option<AttributeSplit> {
    let mut scratch = SplitScratch::default();
    scratch.best(data, rows, attributes, criterion, min_leaf)
}

#[derive(Default)]
struct SplitScratch {
    pairs: Vec<(f64, usize)>,
    left: Vec<usize>,
    right: Vec<usize>,
    candidates: Vec<AttributeSplit>,
}

impl SplitScratch {
    fn best(
        &mut self,
        data: &Dataset,
        rows: &[usize],
        attributes: &[usize],
        criterion: SplitCriterion,
        min_leaf: usize,
    ) -> Option<AttributeSplit> {
        self.candidates.clear();
        for &a in attributes {
            self.pairs.clear();
            self.pairs.extend(rows.iter().map(|&i| (data.value(i, a), data.label(i))));
            if let Some(s) = scan_sorted(
                &mut self.pairs,
                data.n_classes(),
                min_leaf,
                a,
                &mut self.left,
                &mut self.right,
            ) {
                self.candidates.push(s);
            }
        }
        select_split(&self.candidates, criterion)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        attribute: usize,
        threshold: f64,
        /// Preorder index of the right child; the left child follows this node.
        right: usize,
    },
    Leaf {
        distribution: Vec<f64>,
        support: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub n_attributes: usize,
    pub n_classes: usize,
    pub nodes: Vec<TreeNode>,
}

enum Grown {
    Leaf {
        counts: Vec<usize>,
    },
    Split {
        attribute: usize,
        threshold: f64,
        counts: Vec<usize>,
        left: Box<Grown>,
        right: Box<Grown>,
    },
}

impl Grown {
    fn counts(&self) -> &[usize] {
        match self {
            Grown::Leaf { counts } | Grown::Split { counts, .. } => counts,
        }
    }
}

struct Builder<'a> {
    data: &'a Dataset,
    config: &'a TreeConfig,
    criterion: SplitCriterion,
    all_attributes: Vec<usize>,
    subspace: usize,
    rng: SplitMix64,
    scratch: SplitScratch,
}

impl Builder<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> Grown {
        let mut counts = vec![0; self.data.n_classes()];
        for &i in rows.iter() {
            counts[self.data.label(i)] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_reached = self.config.max_depth.is_some_and(|d| depth >= d);
        if pure || rows.len() < 2 * self.config.min_cases || depth_reached {
            return Grown::Leaf { counts };
        }
        let attributes = match self.config.kind {
            TreeKind::C45 => self.all_attributes.clone(),
            TreeKind::RandomTree => {
                let mut a = self
                    .rng
                    .sample_indices(self.all_attributes.len(), self.subspace);
                a.sort_unstable();
                a
            }
        };
        let Some(split) = self.scratch.best(
            self.data,
            rows,
            &attributes,
            self.criterion,
            self.config.min_cases,
        ) else {
            return Grown::Leaf { counts };
        };
        // in-place partition, stable enough to be deterministic
        let mut boundary = 0;
        for k in 0..rows.len() {
            if self.data.value(rows[k], split.attribute) <= split.threshold {
                rows.swap(boundary, k);
                boundary += 1;
            }
        }
        let (left_rows, right_rows) = rows.split_at_mut(boundary);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        Grown::Split {
            attribute: split.attribute,
            threshold: split.threshold,
            counts,
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

/// Upper confidence bound on the extra errors at a leaf with `n` cases and
/// `e` observed errors (the C4.5 pessimistic estimate).
fn added_errors(n: f64, e: f64, cf: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (added_errors(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - cf);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - e
}

fn leaf_errors(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    (n - counts.iter().copied().max().unwrap_or(0)) as f64
}

/// Subtree replacement; returns the estimated errors of the kept subtree.
fn prune(node: &mut Grown, cf: f64) -> f64 {
    match node {
        Grown::Leaf { counts } => {
            let e = leaf_errors(counts);
            e + added_errors(counts.iter().sum::<usize>() as f64, e, cf)
        }
        Grown::Split {
            counts, left, right, ..
        } => {
            let subtree = prune(left, cf) + prune(right, cf);
            let e = leaf_errors(counts);
            let as_leaf = e + added_errors(counts.iter().sum::<usize>() as f64, e, cf);
            if as_leaf <= subtree + 0.1 {
                *node = Grown::Leaf {
                    counts: counts.clone(),
                };
                as_leaf
            } else {
                subtree
            }
        }
    }
}

fn flatten(node: &Grown, out: &mut Vec<TreeNode>) {
    match node {
        Grown::Leaf { counts } => {
            let support: usize = counts.iter().sum();
            let distribution = if support == 0 {
                vec![1.0 / counts.len() as f64; counts.len()]
            } else {
                counts.iter().map(|&c| c as f64 / support as f64).collect()
            };
            out.push(TreeNode::Leaf {
                distribution,
                support,
            });
        }
        Grown::Split {
            attribute,
            threshold,
            left,
            right,
            ..
        } => {
            let at = out.len();
            out.push(TreeNode::Internal {
                attribute: *attribute,
                threshold: *threshold,
                right: 0,
            });
            flatten(left, out);
            let right_index = out.len();
            if let TreeNode::Internal { right: r, .. } = &mut out[at] {
                *r = right_index;
            }
            flatten(right, out);
        }
    }
}

/// Top-down induction on all cases of `train`.
///
/// `C45` evaluates every attribute at each node and splits by gain ratio;
/// `RandomTree` draws `random_subspace_size` attributes per node and splits
/// by information gain. Growth stops on purity, fewer than `2 * min_cases`
/// cases, the depth limit, or when no admissible split exists.
pub fn build_tree(train: &Dataset, config: &TreeConfig) -> Tree {
    let m = train.n_attributes();
    let criterion = match config.kind {
        TreeKind::C45 => SplitCriterion::GainRatio,
        TreeKind::RandomTree => SplitCriterion::Gain,
    };
    let mut builder = Builder {
        data: train,
        config,
        criterion,
        all_attributes: (0..m).collect(),
        subspace: config.subspace_size(m),
        rng: SplitMix64::new(config.seed),
        scratch: SplitScratch::default(),
    };
    let mut rows: Vec<usize> = (0..train.n_cases()).collect();
    let mut root = builder.grow(&mut rows, 0);
    if config.prune {
        prune(&mut root, config.confidence);
    }
    debug_assert_eq!(root.counts().iter().sum::<usize>(), train.n_cases());
    let mut nodes = Vec::new();
    flatten(&root, &mut nodes);
    Tree {
        n_attributes: m,
        n_classes: train.n_classes(),
        nodes,
    }
}

impl Tree {
    /// Leaf distribution reached by `x`.
    pub fn predict(&self, x: &[f64]) -> Result<&[f64]> {
        if x.len() != self.n_attributes {
            return Err(Error::DimensionMismatch {
                expected: self.n_attributes,
                found: x.len(),
            });
        }
        Ok(self.predict_unchecked(x))
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Internal {
                    attribute,
                    threshold,
                    right,
                } => {
                    i = if x[*attribute] <= *threshold { i + 1 } else { *right };
                }
                TreeNode::Leaf { distribution, .. } => return distribution,
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { right, .. } => 1 + walk(nodes, i + 1).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        while let TreeNode::Internal {
            attribute,
            threshold,
            right,
        } = &self.nodes[i]
        {
            i = if x[*attribute] <= *threshold { i + 1 } else { *right };
        }
        i
    }

    /// Structural checks for trees read from disk.
    pub fn validate(&self) -> Result<()> {
        fn walk(t: &Tree, i: usize, budget: &mut usize) -> Result<usize> {
            let bad = |m: String| Err(Error::Schema(m));
            if *budget == 0 {
                return bad("tree has a cycle or excess nodes".into());
            }
            *budget -= 1;
            match t.nodes.get(i) {
                None => bad(format!("node index {i} out of range")),
                Some(TreeNode::Leaf { distribution, .. }) => {
                    if distribution.len() != t.n_classes {
                        return bad("leaf distribution has the wrong length".into());
                    }
                    Ok(i + 1)
                }
                Some(TreeNode::Internal {
                    attribute, right, ..
                }) => {
                    if *attribute >= t.n_attributes {
                        return bad(format!("attribute {attribute} out of range"));
                    }
                    let end = walk(t, i + 1, budget)?;
                    if end != *right {
                        return bad(format!("node {i}: right child index {right} is not preorder"));
                    }
                    walk(t, *right, budget)
                }
            }
        }
        let mut budget = self.nodes.len();
        let end = walk(self, 0, &mut budget)?;
        if end != self.nodes.len() {
            return Err(Error::Schema("trailing unreachable tree nodes".into()));
        }
        Ok(())
    }

    /// Rough in-memory footprint in bytes.
    pub fn estimated_bytes(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match n {
                TreeNode::Internal { .. } => 24,
                TreeNode::Leaf { distribution, .. } => 16 + 8 * distribution.len(),
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(rows: &[&[f64]], labels: &[usize]) -> Dataset {
        let m = rows[0].len();
        let c = labels.iter().max().unwrap() + 1;
        Dataset::from_parts(
            "t",
            (0..m).map(|j| format!("a{j}")).collect(),
            rows.iter().flat_map(|r| r.iter().copied()).collect(),
            labels.to_vec(),
            (0..c.max(2)).map(|j| format!("c{j}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[5, 5]).unwrap(), 1.0);
        assert_eq!(entropy(&[4, 0]).unwrap(), 0.0);
        let third: f64 = 1.0 / 3.0;
        let expected = -(2.0 * third) * (2.0 * third).log2() - third * third.log2();
        assert!((entropy(&[2, 1]).unwrap() - expected).abs() < 1e-15);
        assert!((entropy(&[2, 1]).unwrap() - 0.918296).abs() < 1e-6);
        assert!(entropy(&[0, 0]).is_err());
    }

    #[test]
    fn split_examples() {
        let s = best_numeric_split(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1], SplitCriterion::Gain).unwrap();
        assert_eq!(s, (2.5, 1.0));
        let s = best_numeric_split(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1], SplitCriterion::GainRatio).unwrap();
        assert_eq!(s, (2.5, 1.0));
        assert!(best_numeric_split(&[7.0, 7.0, 7.0], &[0, 1, 0], SplitCriterion::Gain).is_none());
        assert!(best_numeric_split(&[1.0, 2.0], &[0, 0], SplitCriterion::Gain).is_none());
    }

    #[test]
    fn unsorted_input_and_lowest_threshold_tie() {
        let s = best_numeric_split(&[3.0, 1.0, 4.0, 2.0], &[1, 0, 1, 0], SplitCriterion::Gain).unwrap();
        assert_eq!(s.0, 2.5);
        // 0 | 1 1 | 0 : the two outer splits tie on gain, lowest wins
        let s = best_numeric_split(&[1.0, 2.0, 3.0, 4.0], &[0, 1, 1, 0], SplitCriterion::Gain).unwrap();
        assert_eq!(s.0, 1.5);
    }

    #[test]
    fn gain_ratio_guard_skips_low_gain_attribute() {
        let a = AttributeSplit { attribute: 0, threshold: 0.0, gain: 0.01, gain_ratio: 0.9 };
        let b = AttributeSplit { attribute: 1, threshold: 0.0, gain: 0.5, gain_ratio: 0.5 };
        assert_eq!(select_split(&[a, b], SplitCriterion::GainRatio).unwrap().attribute, 1);
        assert_eq!(select_split(&[a, b], SplitCriterion::Gain).unwrap().attribute, 1);
    }

    #[test]
    fn depth_one_tree_on_separable_data() {
        let d = dataset(&[&[-2.0], &[-1.0], &[1.0], &[2.0]], &[0, 0, 1, 1]);
        let t = build_tree(&d, &TreeConfig::c45());
        assert_eq!(t.depth(), 1);
        assert_eq!(t.nodes.len(), 3);
        assert_eq!(t.predict(&[-5.0]).unwrap(), &[1.0, 0.0]);
        assert_eq!(t.predict(&[5.0]).unwrap(), &[0.0, 1.0]);
        // threshold is 0.0; ties route left
        assert_eq!(t.predict(&[0.0]).unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn single_class_gives_leaf() {
        let d = dataset(&[&[1.0], &[2.0], &[3.0]], &[1, 1, 1]);
        let t = build_tree(&d, &TreeConfig::c45());
        assert_eq!(t.nodes, vec![TreeNode::Leaf { distribution: vec![0.0, 1.0], support: 3 }]);
    }

    #[test]
    fn leaf_predicts_stored_distribution() {
        let t = Tree {
            n_attributes: 2,
            n_classes: 2,
            nodes: vec![TreeNode::Leaf { distribution: vec![0.25, 0.75], support: 4 }],
        };
        assert_eq!(t.predict(&[9.0, -9.0]).unwrap(), &[0.25, 0.75]);
        assert!(matches!(t.predict(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn random_tree_is_deterministic() {
        let mut rng = SplitMix64::new(11);
        let rows: Vec<Vec<f64>> = (0..60).map(|_| (0..9).map(|_| rng.normal()).collect()).collect();
        let labels: Vec<usize> = rows.iter().map(|r| usize::from(r[0] + r[3] > 0.0)).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let d = dataset(&refs, &labels);
        let cfg = TreeConfig::random_tree(5);
        let a = build_tree(&d, &cfg);
        let b = build_tree(&d, &cfg);
        assert_eq!(a, b);
        a.validate().unwrap();
        let other = build_tree(&d, &TreeConfig::random_tree(6));
        assert_ne!(a, other);
    }

    #[test]
    fn min_cases_limits_growth() {
        let d = dataset(&[&[1.0], &[2.0], &[3.0]], &[0, 1, 0]);
        let t = build_tree(&d, &TreeConfig::c45());
        // 3 cases < 2 * 2: no split
        assert_eq!(t.nodes.len(), 1);
        let t = build_tree(&d, &TreeConfig { min_cases: 1, ..TreeConfig::c45() });
        assert!(t.nodes.len() > 1);
    }

    #[test]
    fn max_depth_limits_growth() {
        let d = dataset(&[&[1.0], &[2.0], &[3.0], &[4.0], &[5.0], &[6.0]], &[0, 1, 0, 1, 0, 1]);
        let t = build_tree(&d, &TreeConfig { min_cases: 1, max_depth: Some(1), ..TreeConfig::c45() });
        assert!(t.depth() <= 1);
    }

    #[test]
    fn pruning_collapses_noise() {
        let mut rng = SplitMix64::new(2);
        let rows: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.next_f64()]).collect();
        // labels independent of the attribute, heavily skewed
        let labels: Vec<usize> = (0..200).map(|_| usize::from(rng.next_f64() < 0.1)).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let d = dataset(&refs, &labels);
        let full = build_tree(&d, &TreeConfig::c45());
        let pruned = build_tree(&d, &TreeConfig { prune: true, ..TreeConfig::c45() });
        assert!(pruned.nodes.len() < full.nodes.len());
        pruned.validate().unwrap();
    }

    #[test]
    fn validate_rejects_bad_right_index() {
        let t = Tree {
            n_attributes: 1,
            n_classes: 2,
            nodes: vec![
                TreeNode::Internal { attribute: 0, threshold: 0.0, right: 1 },
                TreeNode::Leaf { distribution: vec![1.0, 0.0], support: 1 },
                TreeNode::Leaf { distribution: vec![0.0, 1.0], support: 1 },
            ],
        };
        assert!(t.validate().is_err());
    }
}
