//! Classifier comparison: paired tests on one dataset's resamples, the
//! Friedman test across datasets, Holm-corrected pairwise Wilcoxon tests
//! grouped into cliques, and critical-difference diagrams.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::eval::MetricsRow;

/// Largest number of nonzero differences handled by the exact Wilcoxon
/// distribution.
pub const EXACT_WILCOXON_MAX: usize = 20;
pub const MIN_WILCOXON_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub p_value: f64,
    /// Sum of the ranks of positive differences.
    pub w_plus: f64,
    pub n_nonzero: usize,
    pub exact: bool,
    /// Every difference was zero.
    pub all_zero: bool,
}

/// Average ranks (1-based) of `values`, ties sharing their mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn check_pairs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Two-sided Wilcoxon signed-rank test. Zero differences are dropped and
/// tied magnitudes share average ranks. Up to 20 nonzero pairs the exact
/// null distribution of `W+` (given the observed ranks) is used, beyond
/// that the normal approximation with tie and continuity corrections.
/// Fewer than five nonzero pairs is an error unless all are zero.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    check_pairs(x, y)?;
    let r = wilcoxon_unchecked(x, y);
    if !r.all_zero && r.n_nonzero < MIN_WILCOXON_PAIRS {
        return Err(Error::Stats(format!(
            "Wilcoxon test needs at least {MIN_WILCOXON_PAIRS} nonzero differences, found {}",
            r.n_nonzero
        )));
    }
    Ok(r)
}

fn wilcoxon_unchecked(x: &[f64], y: &[f64]) -> WilcoxonResult {
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return WilcoxonResult {
            p_value: 1.0,
            w_plus: 0.0,
            n_nonzero: 0,
            exact: true,
            all_zero: true,
        };
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let (p_value, exact) = if n <= EXACT_WILCOXON_MAX {
        (exact_signed_rank_p(&ranks, w_plus), true)
    } else {
        (normal_signed_rank_p(&ranks, w_plus), false)
    };
    WilcoxonResult {
        p_value,
        w_plus,
        n_nonzero: n,
        exact,
        all_zero: false,
    }
}

/// `2·min(P(W+ ≤ w), P(W+ ≥ w))` under random signs, capped at 1.
/// Average ranks are multiples of 1/2, so the distribution of twice the
/// rank sum is counted over integers.
fn exact_signed_rank_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut ways = vec![0.0f64; total + 1];
    ways[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            ways[s] += ways[s - r];
        }
    }
    let patterns = 2f64.powi(ranks.len() as i32);
    let w = (2.0 * w_plus).round() as usize;
    let lower: f64 = ways[..=w].iter().sum();
    let upper: f64 = ways[w..].iter().sum();
    (2.0 * lower.min(upper) / patterns).min(1.0)
}

fn normal_signed_rank_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTResult {
    pub p_value: f64,
    pub t: f64,
    pub mean_diff: f64,
    /// The differences had zero variance.
    pub degenerate: bool,
}

/// Two-sided paired t-test with `N − 1` degrees of freedom. Constant
/// differences give p = 1 when their mean is zero and p = 0 otherwise.
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<PairedTResult> {
    check_pairs(x, y)?;
    let n = x.len();
    if n < 2 {
        return Err(Error::Stats("paired t-test needs at least two pairs".into()));
    }
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Ok(PairedTResult {
            p_value: if mean == 0.0 { 1.0 } else { 0.0 },
            t: if mean == 0.0 { 0.0 } else { f64::INFINITY.copysign(mean) },
            mean_diff: mean,
            degenerate: true,
        });
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).map_err(|e| Error::Stats(e.to_string()))?;
    Ok(PairedTResult {
        p_value: (2.0 * (1.0 - dist.cdf(t.abs()))).min(1.0),
        t,
        mean_diff: mean,
        degenerate: false,
    })
}

/// Whether smaller or larger metric values are better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    LowerIsBetter,
    HigherIsBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Error,
    BalancedError,
    Auc,
    Nll,
}

impl Metric {
    pub fn orientation(self) -> Orientation {
        match self {
            Metric::Auc => Orientation::HigherIsBetter,
            _ => Orientation::LowerIsBetter,
        }
    }

    fn of(self, row: &MetricsRow) -> f64 {
        match self {
            Metric::Error => row.error,
            Metric::BalancedError => row.balanced_error,
            Metric::Auc => row.auc,
            Metric::Nll => row.nll,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(Metric::Error),
            "balanced_error" => Ok(Metric::BalancedError),
            "auc" => Ok(Metric::Auc),
            "nll" => Ok(Metric::Nll),
            _ => Err(Error::InvalidConfig(format!("unknown metric `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsMatrix {
    pub classifiers: Vec<String>,
    pub datasets: Vec<String>,
    /// `means[dataset][classifier]`, averaged over resamples.
    pub means: Vec<Vec<f64>>,
    /// `per_resample[dataset][classifier][resample]` when every cell has the
    /// same number of resamples.
    pub per_resample: Option<Vec<Vec<Vec<f64>>>>,
    pub orientation: Orientation,
}

impl ResultsMatrix {
    pub fn new(classifiers: Vec<String>, datasets: Vec<String>, means: Vec<Vec<f64>>, orientation: Orientation) -> Result<Self> {
        if means.len() != datasets.len() {
            return Err(Error::DimensionMismatch {
                expected: datasets.len(),
                found: means.len(),
            });
        }
        for row in &means {
            if row.len() != classifiers.len() {
                return Err(Error::DimensionMismatch {
                    expected: classifiers.len(),
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(ResultsMatrix {
            classifiers,
            datasets,
            means,
            per_resample: None,
            orientation,
        })
    }

    /// Builds the matrix from metrics rows. Classifiers and datasets are
    /// listed in first-appearance order; every pair must be present.
    pub fn from_rows(rows: &[MetricsRow], metric: Metric) -> Result<Self> {
        let mut classifiers: Vec<String> = Vec::new();
        let mut datasets: Vec<String> = Vec::new();
        let mut cells: BTreeMap<(usize, usize), BTreeMap<u64, f64>> = BTreeMap::new();
        for row in rows {
            let c = position_or_push(&mut classifiers, &row.classifier);
            let d = position_or_push(&mut datasets, &row.dataset);
            if cells.entry((d, c)).or_default().insert(row.resample, metric.of(row)).is_some() {
                return Err(Error::Schema(format!(
                    "duplicate row for {}/{} resample {}",
                    row.classifier, row.dataset, row.resample
                )));
            }
        }
        let mut means = vec![vec![0.0; classifiers.len()]; datasets.len()];
        let mut per = vec![vec![Vec::new(); classifiers.len()]; datasets.len()];
        for (d, dataset) in datasets.iter().enumerate() {
            for (c, classifier) in classifiers.iter().enumerate() {
                let cell = cells
                    .get(&(d, c))
                    .ok_or_else(|| Error::Schema(format!("no results for {classifier} on {dataset}")))?;
                let values: Vec<f64> = cell.values().copied().collect();
                means[d][c] = values.iter().sum::<f64>() / values.len() as f64;
                per[d][c] = values;
            }
        }
        let r = per.first().and_then(|row| row.first()).map_or(0, Vec::len);
        let constant = per.iter().flatten().all(|v| v.len() == r);
        let mut m = ResultsMatrix::new(classifiers, datasets, means, metric.orientation())?;
        if constant {
            m.per_resample = Some(per);
        }
        Ok(m)
    }

    /// Reads and concatenates metrics CSV files.
    pub fn from_csv_files(paths: &[impl AsRef<Path>], metric: Metric) -> Result<Self> {
        let mut rows = Vec::new();
        for path in paths {
            rows.extend(read_metrics_csv(path)?);
        }
        Self::from_rows(&rows, metric)
    }

    pub fn column(&self, classifier: usize) -> Vec<f64> {
        self.means.iter().map(|row| row[classifier]).collect()
    }

    /// Per-dataset ranks, 1 for the best, ties averaged.
    pub fn ranks(&self) -> Vec<Vec<f64>> {
        self.means
            .iter()
            .map(|row| {
                let keyed: Vec<f64> = match self.orientation {
                    Orientation::LowerIsBetter => row.clone(),
                    Orientation::HigherIsBetter => row.iter().map(|v| -v).collect(),
                };
                average_ranks(&keyed)
            })
            .collect()
    }

    pub fn mean_ranks(&self) -> Vec<f64> {
        let ranks = self.ranks();
        let n = ranks.len() as f64;
        (0..self.classifiers.len())
            .map(|c| ranks.iter().map(|r| r[c]).sum::<f64>() / n)
            .collect()
    }
}

fn position_or_push(list: &mut Vec<String>, name: &str) -> usize {
    match list.iter().position(|s| s == name) {
        Some(i) => i,
        None => {
            list.push(name.to_string());
            list.len() - 1
        }
    }
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::DatasetNotFound(path.to_path_buf()),
        _ => Error::Csv(e),
    })?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(crate::eval::METRICS_HEADER) {
        return Err(Error::Schema(format!(
            "{}: expected header {}",
            path.display(),
            crate::eval::METRICS_HEADER.join(",")
        )));
    }
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub statistic: f64,
    pub p_value: f64,
    pub mean_ranks: Vec<f64>,
}

/// `χ²_F = 12N / (K(K+1)) · (Σ R̄_j² − K(K+1)²/4)` against χ² with `K − 1`
/// degrees of freedom.
pub fn friedman(matrix: &ResultsMatrix) -> Result<FriedmanResult> {
    let k = matrix.classifiers.len();
    let n = matrix.datasets.len();
    if k < 2 || n < 2 {
        return Err(Error::Stats(format!(
            "Friedman test needs at least two classifiers and two datasets, found {k} and {n}"
        )));
    }
    let mean_ranks = matrix.mean_ranks();
    let (kf, nf) = (k as f64, n as f64);
    let sum_sq: f64 = mean_ranks.iter().map(|r| r * r).sum();
    let statistic = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let chi = ChiSquared::new(kf - 1.0).map_err(|e| Error::Stats(e.to_string()))?;
    Ok(FriedmanResult {
        statistic,
        p_value: (1.0 - chi.cdf(statistic)).clamp(0.0, 1.0),
        mean_ranks,
    })
}

/// Holm step-down: walking the p-values in ascending order, the i-th
/// smallest (1-based) is rejected while `p ≤ alpha / (M − i + 1)`.
pub fn holm_reject(p_values: &[f64], alpha: f64) -> Vec<bool> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut rejected = vec![false; m];
    for (i, &idx) in order.iter().enumerate() {
        if p_values[idx] <= alpha / (m - i) as f64 {
            rejected[idx] = true;
        } else {
            break;
        }
    }
    rejected
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliqueReport {
    pub classifiers: Vec<String>,
    pub average_ranks: Vec<f64>,
    pub pairwise_p: Vec<Vec<f64>>,
    pub rejected: Vec<Vec<bool>>,
    /// Classifier indices of each clique, in mean-rank order.
    pub cliques: Vec<Vec<usize>>,
}

/// Pairwise two-sided Wilcoxon tests on the per-dataset means, Holm
/// correction at `alpha`, and cliques: with classifiers ordered by mean
/// rank, the maximal contiguous runs containing no rejected pair.
pub fn holm_cliques(matrix: &ResultsMatrix, alpha: f64) -> Result<CliqueReport> {
    let k = matrix.classifiers.len();
    if k < 2 {
        return Err(Error::Stats("clique analysis needs at least two classifiers".into()));
    }
    let mut pairwise_p = vec![vec![1.0; k]; k];
    let mut pairs = Vec::new();
    let mut pvals = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let p = wilcoxon_unchecked(&matrix.column(a), &matrix.column(b)).p_value;
            pairwise_p[a][b] = p;
            pairwise_p[b][a] = p;
            pairs.push((a, b));
            pvals.push(p);
        }
    }
    let mut rejected = vec![vec![false; k]; k];
    for ((a, b), r) in pairs.into_iter().zip(holm_reject(&pvals, alpha)) {
        rejected[a][b] = r;
        rejected[b][a] = r;
    }
    let average_ranks = matrix.mean_ranks();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| average_ranks[a].total_cmp(&average_ranks[b]));
    let cliques = contiguous_cliques(&order, &rejected);
    Ok(CliqueReport {
        classifiers: matrix.classifiers.clone(),
        average_ranks,
        pairwise_p,
        rejected,
        cliques,
    })
}

fn contiguous_cliques(order: &[usize], rejected: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let k = order.len();
    // furthest position each run starting at i can reach
    let ends: Vec<usize> = (0..k)
        .map(|i| {
            let mut end = i;
            while end + 1 < k && (i..=end).all(|a| !rejected[order[a]][order[end + 1]]) {
                end += 1;
            }
            end
        })
        .collect();
    (0..k)
        .filter(|&i| i == 0 || ends[i] > ends[i - 1])
        .map(|i| order[i..=ends[i]].to_vec())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdDiagram {
    pub classifiers: Vec<String>,
    pub ranks: Vec<f64>,
    pub cliques: Vec<Vec<usize>>,
}

impl CdDiagram {
    pub fn from_report(report: &CliqueReport) -> Self {
        CdDiagram {
            classifiers: report.classifiers.clone(),
            ranks: report.average_ranks.clone(),
            cliques: report.cliques.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Horizontal rank axis from 1 to K, each classifier labelled at its
    /// mean rank, one bar under the axis per clique of two or more.
    pub fn to_svg(&self) -> String {
        let k = self.classifiers.len().max(2);
        let (width, left, right) = (640.0, 60.0, 580.0);
        let x_of = |r: f64| left + (r - 1.0) / (k as f64 - 1.0) * (right - left);
        let bars: Vec<&Vec<usize>> = self.cliques.iter().filter(|c| c.len() >= 2).collect();
        let label_rows = self.classifiers.len();
        let height = 80.0 + 18.0 * label_rows as f64 + 14.0 * bars.len() as f64 + 20.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<line class="axis" x1="{left}" y1="40" x2="{right}" y2="40" stroke="black"/>"#);
        for r in 1..=k {
            let x = x_of(r as f64);
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="35" x2="{x:.2}" y2="40" stroke="black"/>"#);
            let _ = writeln!(s, r#"<text x="{x:.2}" y="28" text-anchor="middle">{r}</text>"#);
        }
        let mut order: Vec<usize> = (0..self.classifiers.len()).collect();
        order.sort_by(|&a, &b| self.ranks[a].total_cmp(&self.ranks[b]));
        for (row, &c) in order.iter().enumerate() {
            let x = x_of(self.ranks[c]);
            let y = 60.0 + 18.0 * row as f64;
            let _ = writeln!(s, r#"<line x1="{x:.2}" y1="40" x2="{x:.2}" y2="{y:.2}" stroke="gray"/>"#);
            let _ = writeln!(
                s,
                r#"<text class="label" x="{:.2}" y="{:.2}">{} ({:.3})</text>"#,
                x + 4.0,
                y + 4.0,
                escape(&self.classifiers[c]),
                self.ranks[c]
            );
        }
        let base = 60.0 + 18.0 * label_rows as f64 + 10.0;
        for (i, clique) in bars.iter().enumerate() {
            let lo = clique.iter().map(|&c| self.ranks[c]).fold(f64::INFINITY, f64::min);
            let hi = clique.iter().map(|&c| self.ranks[c]).fold(f64::NEG_INFINITY, f64::max);
            let y = base + 14.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<line class="clique" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black" stroke-width="4"/>"#,
                x_of(lo) - 3.0,
                x_of(hi) + 3.0
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `<stem>.json` and `<stem>.svg` and returns the diagram data.
pub fn cd_diagram(report: &CliqueReport, out_stem: impl AsRef<Path>) -> Result<CdDiagram> {
    let stem = out_stem.as_ref();
    let diagram = CdDiagram::from_report(report);
    let json = stem.with_extension("json");
    std::fs::write(&json, diagram.to_json()?).map_err(|e| Error::io(&json, e))?;
    let svg = stem.with_extension("svg");
    std::fs::write(&svg, diagram.to_svg()).map_err(|e| Error::io(&svg, e))?;
    Ok(diagram)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn wilcoxon_examples() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let r = wilcoxon_signed_rank(&x, &x).unwrap();
        assert!(r.all_zero && r.p_value == 1.0);
        let y: Vec<f64> = x.iter().map(|v| v - 0.5 - v / 10.0).collect();
        let r = wilcoxon_signed_rank(&x, &y).unwrap();
        assert!(r.exact);
        assert!((r.p_value - 0.03125).abs() < 1e-15);
        let sym = [1.0, -1.0, 2.0, -2.0, 3.0, -3.0];
        let r = wilcoxon_signed_rank(&sym, &[0.0; 6]).unwrap();
        assert!(r.p_value > 0.9);
        assert!(wilcoxon_signed_rank(&[1.0, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn wilcoxon_normal_branch() {
        // 30 differences with tied magnitudes; reference p from an
        // independent implementation (normal approximation, tie and
        // continuity corrections)
        let mut d = vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, -2.0, -2.0, 3.0, 4.0, 5.0, -6.0];
        d.extend((7..=23).map(|v| v as f64));
        let r = wilcoxon_signed_rank(&d, &vec![0.0; d.len()]).unwrap();
        assert!(!r.exact && r.n_nonzero == 30);
        assert!((r.p_value - 2.220764545591311e-05).abs() < 1e-12, "{}", r.p_value);
    }

    #[test]
    fn paired_t_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let r = paired_t(&x, &x).unwrap();
        assert!(r.degenerate && r.p_value == 1.0);
        let r = paired_t(&[2.0, 3.0, 4.0, 5.0], &x).unwrap();
        assert!(r.degenerate && r.p_value == 0.0);
        // d = {2, -1, 3, 0}: mean 1, s² = (1 + 4 + 4 + 1)/3 = 10/3
        let r = paired_t(&[2.0, -1.0, 3.0, 0.0], &[0.0; 4]).unwrap();
        let t = 1.0 / ((10.0f64 / 3.0) / 4.0).sqrt();
        assert!((r.t - t).abs() < 1e-12);
        // t = 1.0954, 3 dof: two-sided p = 0.353387
        assert!((r.p_value - 0.353387).abs() < 1e-5, "{}", r.p_value);
    }

    fn matrix(rows: Vec<Vec<f64>>) -> ResultsMatrix {
        let k = rows[0].len();
        ResultsMatrix::new(
            (0..k).map(|c| format!("c{c}")).collect(),
            (0..rows.len()).map(|d| format!("d{d}")).collect(),
            rows,
            Orientation::LowerIsBetter,
        )
        .unwrap()
    }

    #[test]
    fn friedman_hand_table() {
        // ranks per row: [1,2,3] [1,3,2] [1,2,3] [2,1,3]; rank sums 5, 8, 11
        // 12/(4·3·4)·(25 + 64 + 121) − 3·4·4 = 52.5 − 48 = 4.5
        let m = matrix(vec![
            vec![0.10, 0.20, 0.30],
            vec![0.15, 0.35, 0.25],
            vec![0.05, 0.06, 0.07],
            vec![0.22, 0.21, 0.40],
        ]);
        let f = friedman(&m).unwrap();
        assert!((f.statistic - 4.5).abs() < 1e-9);
        assert!((f.p_value - (-2.25f64).exp()).abs() < 1e-9);
        assert_eq!(f.mean_ranks, vec![1.25, 2.0, 2.75]);
    }

    #[test]
    fn friedman_identical() {
        let m = matrix(vec![vec![0.1; 4]; 5]);
        let f = friedman(&m).unwrap();
        assert_eq!(f.statistic, 0.0);
        assert_eq!(f.p_value, 1.0);
        assert!(f.mean_ranks.iter().all(|&r| r == 2.5));
    }

    #[test]
    fn holm_examples() {
        assert_eq!(holm_reject(&[0.001, 0.02, 0.03], 0.05), vec![true, true, true]);
        assert_eq!(holm_reject(&[0.03, 0.001, 0.02], 0.05), vec![true, true, true]);
        assert_eq!(holm_reject(&[0.001, 0.03, 0.04], 0.05), vec![true, false, false]);
        // step-down stops at the first acceptance
        assert_eq!(holm_reject(&[0.02, 0.021, 0.049], 0.05), vec![false, false, false]);
    }

    #[test]
    fn cliques_two_equal() {
        let m = matrix(vec![vec![0.1, 0.1]; 6]);
        let r = holm_cliques(&m, 0.05).unwrap();
        assert_eq!(r.cliques, vec![vec![0, 1]]);
    }

    #[test]
    fn dominating_classifier_is_singleton() {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|d| {
                let base = 0.3 + 0.01 * d as f64;
                vec![base, base - 0.2, base + 0.001 * (d % 3) as f64, base + 0.0005 * ((d + 1) % 4) as f64]
            })
            .collect();
        let r = holm_cliques(&matrix(rows), 0.05).unwrap();
        assert!(r.cliques.contains(&vec![1]));
        assert!(r.cliques.iter().flatten().any(|&c| c == 0));
    }

    #[test]
    fn clique_intervals_are_maximal() {
        let mut rejected = vec![vec![false; 5]; 5];
        for (a, b) in [(0, 3), (1, 4), (0, 4)] {
            rejected[a][b] = true;
            rejected[b][a] = true;
        }
        let cliques = contiguous_cliques(&[0, 1, 2, 3, 4], &rejected);
        assert_eq!(cliques, vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4]]);
    }

    #[test]
    fn svg_bars_follow_cliques() {
        let d = CdDiagram {
            classifiers: vec!["a".into(), "b".into()],
            ranks: vec![1.5, 1.5],
            cliques: vec![vec![0, 1]],
        };
        assert_eq!(d.to_svg().matches("class=\"clique\"").count(), 1);
        assert_eq!(d.to_svg().matches("class=\"label\"").count(), 2);
    }
}
