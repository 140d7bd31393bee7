//! Seeded synthetic datasets with correlated features and oblique class
//! boundaries. Used by the calibration workload, the examples and tests.

use crate::data::Dataset;
use crate::rng::{derive_seed, SplitMix64};

#[derive(Debug, Clone, PartialEq)]
pub struct ObliqueSpec {
    pub n: usize,
    pub m: usize,
    pub classes: usize,
    /// Number of latent factors driving the features.
    pub factors: usize,
    /// Standard deviation of per-feature noise.
    pub feature_noise: f64,
    /// Standard deviation of noise added to the class score.
    pub label_noise: f64,
}

impl Default for ObliqueSpec {
    fn default() -> Self {
        ObliqueSpec {
            n: 400,
            m: 20,
            classes: 2,
            factors: 20,
            feature_noise: 0.5,
            label_noise: 0.1,
        }
    }
}

/// Features `x = A z + e` with Gaussian loadings `A` and latent
/// `z ~ N(0, I)`, so the features are correlated. The class is the rank
/// bucket of `w·x + noise` for a random Gaussian direction `w`, giving
/// balanced classes separated by hyperplanes oblique to every axis.
pub fn oblique_dataset(spec: &ObliqueSpec, seed: u64) -> Dataset {
    assert!(spec.n >= spec.classes && spec.m >= 1 && spec.classes >= 2 && spec.factors >= 1);
    let mut rng = SplitMix64::new(derive_seed(seed, 0x0b11));
    let loadings: Vec<f64> = (0..spec.m * spec.factors).map(|_| rng.normal()).collect();
    let direction: Vec<f64> = (0..spec.m).map(|_| rng.normal()).collect();
    let scale = direction.iter().map(|w| w * w).sum::<f64>().sqrt();
    let mut values = Vec::with_capacity(spec.n * spec.m);
    let mut scores = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let z: Vec<f64> = (0..spec.factors).map(|_| rng.normal()).collect();
        let mut sum = 0.0;
        for j in 0..spec.m {
            let row = &loadings[j * spec.factors..(j + 1) * spec.factors];
            let x: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
                + spec.feature_noise * rng.normal();
            sum += direction[j] * x;
            values.push(x);
        }
        scores.push(sum / scale + spec.label_noise * rng.normal());
    }
    let mut order: Vec<usize> = (0..spec.n).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)));
    let mut labels = vec![0; spec.n];
    for (rank, &i) in order.iter().enumerate() {
        labels[i] = rank * spec.classes / spec.n;
    }
    Dataset::new(
        format!("oblique{seed}"),
        (0..spec.m).map(|j| format!("x{j}")).collect(),
        values,
        labels,
        (0..spec.classes).map(|c| format!("c{c}")).collect(),
    )
    .expect("synthetic dataset satisfies invariants")
    .with_provenance(format!("synthetic oblique seed={seed}"))
}
