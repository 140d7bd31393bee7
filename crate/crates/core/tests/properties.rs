use proptest::prelude::*;

use rotforge::data::{class_quotas, stratified_indices, Dataset, ResamplePlan};
use rotforge::eval::{auc_scores, nll, stratified_folds, PredictionRecord};
use rotforge::forests::{build_forest, ForestConfig, Transform};
use rotforge::rotation::pca_fit;
use rotforge::stats::{
    average_ranks, friedman, holm_reject, wilcoxon_signed_rank, Orientation, ResultsMatrix,
};
use rotforge::synth::{oblique_dataset, ObliqueSpec};
use rotforge::trees::TreeKind;

fn labelled(labels: &[usize], classes: usize) -> Dataset {
    let values: Vec<f64> = (0..labels.len()).map(|i| i as f64).collect();
    Dataset::new(
        "p",
        vec!["x".into()],
        values,
        labels.to_vec(),
        (0..classes).map(|c| format!("c{c}")).collect(),
    )
    .unwrap()
}

/// Labels where every one of `classes` classes occurs at least twice.
fn label_vec() -> impl Strategy<Value = (Vec<usize>, usize)> {
    (2usize..5).prop_flat_map(|k| {
        prop::collection::vec(0..k, 0..40).prop_map(move |mut extra| {
            for c in 0..k {
                extra.push(c);
                extra.push(c);
            }
            (extra, k)
        })
    })
}

proptest! {
    #[test]
    fn quotas_sum_and_bounds(counts in prop::collection::vec(1usize..50, 2..6), frac in 0.1f64..0.9) {
        let n: usize = counts.iter().sum();
        let target = (n as f64 * frac).round() as usize;
        let q = class_quotas(&counts, target);
        for (qi, ci) in q.iter().zip(&counts) {
            prop_assert!(*qi >= 1 && qi <= ci);
        }
        // the at-least-one clamp can push the total above target only by
        // the number of classes that would otherwise be empty
        let total: usize = q.iter().sum();
        prop_assert!(total >= target.min(n));
        prop_assert!(total <= target + counts.len());
    }

    #[test]
    fn resample_partitions_cases((labels, k) in label_vec(), id in 0u64..1000) {
        let d = labelled(&labels, k);
        let idx = stratified_indices(&d, &ResamplePlan::fraction(id, 0.5)).unwrap();
        let mut all: Vec<usize> = idx.train.iter().chain(&idx.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        let again = stratified_indices(&d, &ResamplePlan::fraction(id, 0.5)).unwrap();
        prop_assert_eq!(idx, again);
    }

    #[test]
    fn folds_are_balanced((labels, k) in label_vec(), folds in 2usize..6, seed in any::<u64>()) {
        prop_assume!(labels.len() >= folds);
        let f = stratified_folds(&labels, folds, seed).unwrap();
        let mut sizes = vec![0usize; folds];
        let mut per_class = vec![vec![0usize; folds]; k];
        for (i, &fi) in f.iter().enumerate() {
            sizes[fi] += 1;
            per_class[labels[i]][fi] += 1;
        }
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for row in per_class {
            prop_assert!(row.iter().max().unwrap() - row.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn auc_invariant_under_monotone_maps(
        scores in prop::collection::vec(-5.0f64..5.0, 2..40),
        flags in prop::collection::vec(any::<bool>(), 40),
    ) {
        let positive = &flags[..scores.len()];
        let a = auc_scores(&scores, positive);
        let mapped: Vec<f64> = scores.iter().map(|s| (2.0 * s).exp() + 3.0).collect();
        let b = auc_scores(&mapped, positive);
        match (a, b) {
            (Some(x), Some(y)) => {
                prop_assert!((x - y).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&x));
                // swapping the classes mirrors the AUC
                let flipped: Vec<bool> = positive.iter().map(|p| !p).collect();
                let c = auc_scores(&scores, &flipped).unwrap();
                prop_assert!((x + c - 1.0).abs() < 1e-12);
            }
            (None, None) => {}
            _ => prop_assert!(false, "degeneracy differs"),
        }
    }

    #[test]
    fn nll_decreases_as_truth_gains_mass(p in 0.01f64..0.98, bump in 0.001f64..0.01) {
        let q = (p + bump).min(0.99);
        let lo = nll(&[PredictionRecord::new(0, vec![p, 1.0 - p])]).unwrap();
        let hi = nll(&[PredictionRecord::new(0, vec![q, 1.0 - q])]).unwrap();
        prop_assert!(hi <= lo);
        prop_assert!(lo >= 0.0);
    }

    #[test]
    fn wilcoxon_shift_and_swap(
        x in prop::collection::vec(-10.0f64..10.0, 6..25),
        shift in -100.0f64..100.0,
    ) {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v * 0.5 + (i % 3) as f64).collect();
        let base = wilcoxon_signed_rank(&x, &y);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let ys: Vec<f64> = y.iter().map(|v| v + shift).collect();
        if let Ok(shifted) = wilcoxon_signed_rank(&xs, &ys) {
            // shifting both can only perturb differences by rounding
            if shifted.n_nonzero == base.n_nonzero && shifted.w_plus == base.w_plus {
                prop_assert!((shifted.p_value - base.p_value).abs() < 1e-12);
            }
        }
        let swapped = wilcoxon_signed_rank(&y, &x).unwrap();
        prop_assert!((swapped.p_value - base.p_value).abs() < 1e-12);
        prop_assert!(base.p_value > 0.0 && base.p_value <= 1.0);
    }

    #[test]
    fn holm_between_bonferroni_and_uncorrected(p in prop::collection::vec(0.0f64..0.2, 1..15)) {
        let alpha = 0.05;
        let k = p.len() as f64;
        let holm = holm_reject(&p, alpha);
        for (i, &r) in holm.iter().enumerate() {
            if p[i] <= alpha / k {
                prop_assert!(r, "Bonferroni rejection must survive Holm");
            }
            if r {
                prop_assert!(p[i] <= alpha);
            }
        }
    }

    #[test]
    fn rank_rows_sum_to_triangular(rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 2..10)) {
        let k = 4.0;
        for row in &rows {
            let s: f64 = average_ranks(row).iter().sum();
            prop_assert!((s - k * (k + 1.0) / 2.0).abs() < 1e-9);
        }
        let m = ResultsMatrix::new(
            (0..4).map(|c| format!("c{c}")).collect(),
            (0..rows.len()).map(|d| format!("d{d}")).collect(),
            rows.clone(),
            Orientation::LowerIsBetter,
        ).unwrap();
        let f = friedman(&m).unwrap();
        let total: f64 = f.mean_ranks.iter().sum();
        prop_assert!((total - k * (k + 1.0) / 2.0).abs() < 1e-9);
        prop_assert!(f.statistic >= -1e-12);
        prop_assert!((0.0..=1.0).contains(&f.p_value));
    }

    #[test]
    fn pca_projection_is_orthonormal(a in 1usize..30, b in 1usize..10, seed in any::<u64>()) {
        let mut rng = rotforge::rng::SplitMix64::new(seed);
        let data: Vec<f64> = (0..a * b).map(|_| rng.normal()).collect();
        let fit = pca_fit(&data, a, b).unwrap();
        for i in 0..b {
            for j in 0..b {
                let dot: f64 = (0..b).map(|t| fit.projection[i * b + t] * fit.projection[j * b + t]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-8);
            }
        }
        for w in fit.eigenvalues.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn forest_distributions_sum_to_one(seed in any::<u64>(), combo in 0usize..6) {
        let d = oblique_dataset(&ObliqueSpec { n: 60, m: 6, classes: 3, ..Default::default() }, seed);
        let kind = if combo < 3 { TreeKind::RandomTree } else { TreeKind::C45 };
        let transform = Transform::ALL[combo % 3];
        let cfg = ForestConfig::hybrid(kind, transform).with_trees(5).with_seed(seed);
        let model = build_forest(&d, &cfg).unwrap();
        for i in 0..d.n_cases() {
            let p = model.predict_proba(d.row(i)).unwrap();
            prop_assert_eq!(p.len(), 3);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn exact_and_normal_wilcoxon_agree_near_cutover(seed in any::<u64>(), n in 18usize..=20) {
        // exact p just below the cutover against a hand normal approximation
        let mut rng = rotforge::rng::SplitMix64::new(seed);
        let d: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0 + rng.next_f64() * 0.5) * if rng.bernoulli(0.5) { 1.0 } else { -1.0 }).collect();
        let zeros = vec![0.0; n];
        let exact = wilcoxon_signed_rank(&d, &zeros).unwrap();
        prop_assert!(exact.exact);
        // normal approximation with continuity correction, recomputed here
        let nn = n as f64;
        let mean = nn * (nn + 1.0) / 4.0;
        let sd = (nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0).sqrt();
        let z = ((exact.w_plus - mean).abs() - 0.5) / sd;
        let approx = (2.0 * (1.0 - normal_cdf(z.max(0.0)))).min(1.0);
        prop_assert!((exact.p_value - approx).abs() < 0.02, "exact {} approx {}", exact.p_value, approx);
    }
}

fn normal_cdf(z: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, 1.0).unwrap().cdf(z)
}
