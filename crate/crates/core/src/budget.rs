//! Build-time prediction and the contract (time-budgeted) trainer.
//!
//! The timing model is the affine regression
//! `t(n, m) = b0 + bn·n + bm·m + bmn·m·n` (optionally plus `n·log2 n`),
//! fitted by least squares on full rotation-forest builds at the reference
//! parameters (200 trees, groups of 3, half the cases). Its 95% upper
//! prediction bound decides whether a full build fits a budget; if not, the
//! contract trainer grows trees on attribute or case subsamples sized so
//! that the minimum ensemble fits.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::{class_quotas, Dataset};
use crate::error::{Error, Result};
use crate::forests::{build_member, build_rotation_forest, ForestConfig, ForestModel, Transform, MODEL_FORMAT, MODEL_VERSION};
use crate::rng::{derive_seed, SplitMix64};
use crate::synth::{oblique_dataset, ObliqueSpec};

/// Trees in the builds the timing model describes.
pub const REFERENCE_TREES: usize = 200;
pub const MIN_OBSERVATIONS: usize = 6;
/// Shortest run `calibrate` trusts before repeating the workload.
pub const MIN_TIMED_SECONDS: f64 = 0.010;

const CONTRACT_STREAM: u64 = 0xC0_47_2A_C7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnit {
    Seconds,
    Minutes,
    Hours,
}

impl TimeUnit {
    pub fn seconds(self) -> f64 {
        match self {
            TimeUnit::Seconds => 1.0,
            TimeUnit::Minutes => 60.0,
            TimeUnit::Hours => 3600.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TimeUnit::Seconds => "seconds",
            TimeUnit::Minutes => "minutes",
            TimeUnit::Hours => "hours",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingObservation {
    #[serde(default)]
    pub dataset: String,
    pub n: usize,
    pub m: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    /// `[b0, bn, bm, bmn]`, plus `bnlogn` when `include_nlogn`.
    pub coefficients: Vec<f64>,
    pub include_nlogn: bool,
    pub residual_std: f64,
    /// Row-major `(XᵀX)⁻¹`; absent for models not fitted here.
    pub xtx_inverse: Option<Vec<f64>>,
    pub dof: usize,
    pub calibration_scale: f64,
    pub time_unit: TimeUnit,
}

fn regressors(n: f64, m: f64, include_nlogn: bool) -> Vec<f64> {
    let mut x = vec![1.0, n, m, m * n];
    if include_nlogn {
        x.push(if n > 0.0 { n * n.log2() } else { 0.0 });
    }
    x
}

impl TimingModel {
    /// The published fit, in hours:
    /// `0.64 + 0.132e-3·n + 0.246e-3·m + 0.615e-6·m·n`.
    pub fn published() -> Self {
        TimingModel {
            coefficients: vec![0.64, 0.132 / 1000.0, 0.246 / 1000.0, 0.615 / 1_000_000.0],
            include_nlogn: false,
            residual_std: 0.0,
            xtx_inverse: None,
            dof: 0,
            calibration_scale: 1.0,
            time_unit: TimeUnit::Hours,
        }
    }

    /// Predicted build time in the model's unit, including calibration.
    pub fn predict_time(&self, n: f64, m: f64) -> f64 {
        self.calibration_scale * self.raw_prediction(n, m)
    }

    fn raw_prediction(&self, n: f64, m: f64) -> f64 {
        regressors(n, m, self.include_nlogn)
            .iter()
            .zip(&self.coefficients)
            .map(|(x, b)| x * b)
            .sum()
    }

    pub fn predict_seconds(&self, n: f64, m: f64) -> f64 {
        self.predict_time(n, m) * self.time_unit.seconds()
    }

    /// Two-sided `1 − alpha` prediction interval in the model's unit:
    /// `ŷ ± s·t·√(1 + x₀ᵀ(XᵀX)⁻¹x₀)`, scaled by the calibration factor.
    pub fn prediction_interval(&self, n: f64, m: f64, alpha: f64) -> Result<(f64, f64)> {
        let v = self.xtx_inverse.as_ref().ok_or(Error::Unfitted)?;
        if self.dof < 1 {
            return Err(Error::Stats("prediction interval needs at least one residual degree of freedom".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidConfig("alpha must be in (0, 1)".into()));
        }
        let x = regressors(n, m, self.include_nlogn);
        let p = x.len();
        let mut leverage = 0.0;
        for i in 0..p {
            for j in 0..p {
                leverage += x[i] * v[i * p + j] * x[j];
            }
        }
        let t = StudentsT::new(0.0, 1.0, self.dof as f64)
            .map_err(|e| Error::Stats(e.to_string()))?
            .inverse_cdf(1.0 - alpha / 2.0);
        let centre = self.raw_prediction(n, m);
        let half = self.residual_std * t * (1.0 + leverage.max(0.0)).sqrt();
        Ok((
            self.calibration_scale * (centre - half),
            self.calibration_scale * (centre + half),
        ))
    }

    /// The 95% upper prediction bound in seconds, or the point prediction
    /// for models without a design matrix.
    pub fn upper_bound_seconds(&self, n: f64, m: f64) -> f64 {
        match self.prediction_interval(n, m, 0.05) {
            Ok((_, hi)) => hi * self.time_unit.seconds(),
            Err(_) => self.predict_seconds(n, m),
        }
    }

    pub fn with_calibration(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidConfig(format!("calibration scale must be positive, found {scale}")));
        }
        self.calibration_scale = scale;
        Ok(self)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: TimingModel = serde_json::from_str(&text)?;
        let p = if model.include_nlogn { 5 } else { 4 };
        if model.coefficients.len() != p || model.xtx_inverse.as_ref().is_some_and(|v| v.len() != p * p) {
            return Err(Error::Schema("timing model has inconsistent dimensions".into()));
        }
        if !(model.calibration_scale > 0.0) {
            return Err(Error::Schema("calibration scale must be positive".into()));
        }
        Ok(model)
    }
}

/// Least-squares fit of the timing model on observed build times. The
/// response is expressed in `unit`.
pub fn fit_timing_model(obs: &[TimingObservation], include_nlogn: bool, unit: TimeUnit) -> Result<TimingModel> {
    let p = if include_nlogn { 5 } else { 4 };
    let needed = MIN_OBSERVATIONS.max(p + 1);
    if obs.len() < needed {
        return Err(Error::TooFewObservations {
            needed,
            found: obs.len(),
        });
    }
    let mut design = Vec::with_capacity(obs.len() * p);
    let mut y = Vec::with_capacity(obs.len());
    for o in obs {
        if o.n < 1 || o.m < 1 || !(o.seconds > 0.0) {
            return Err(Error::InvalidConfig(format!("invalid timing observation {o:?}")));
        }
        design.extend(regressors(o.n as f64, o.m as f64, include_nlogn));
        y.push(o.seconds / unit.seconds());
    }
    let ls = crate::linalg::least_squares(&design, obs.len(), p, &y)?;
    let dof = obs.len() - p;
    Ok(TimingModel {
        coefficients: ls.coefficients,
        include_nlogn,
        residual_std: (ls.sse / dof as f64).sqrt(),
        xtx_inverse: Some(ls.xtx_inverse),
        dof,
        calibration_scale: 1.0,
        time_unit: unit,
    })
}

/// Reads `dataset,n,m,seconds` rows.
pub fn read_observations(path: impl AsRef<Path>) -> Result<Vec<TimingObservation>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => Error::DatasetNotFound(path.to_path_buf()),
        _ => Error::Csv(e),
    })?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["dataset", "n", "m", "seconds"] {
        return Err(Error::Schema("timing observations need the header dataset,n,m,seconds".into()));
    }
    let mut out = Vec::new();
    for rec in reader.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub fn write_observations(path: impl AsRef<Path>, obs: &[TimingObservation]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for o in obs {
        w.serialize(o)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Seconds per run of `runner` relative to `reference_seconds` for the same
/// workload on the reference machine. Runs shorter than 10 ms are repeated
/// with doubling repetition counts until the total is measurable.
pub fn calibrate<F: FnMut()>(mut runner: F, reference_seconds: f64) -> Result<f64> {
    if !(reference_seconds > 0.0) {
        return Err(Error::InvalidConfig("reference time must be positive".into()));
    }
    let mut reps: u64 = 1;
    loop {
        let start = Instant::now();
        for _ in 0..reps {
            runner();
        }
        let elapsed = start.elapsed().as_secs_f64();
        if elapsed >= MIN_TIMED_SECONDS {
            return Ok(elapsed / reps as f64 / reference_seconds);
        }
        if reps >= 1 << 20 {
            return Err(Error::TimerResolution(format!(
                "{reps} repetitions took only {elapsed:.6} s"
            )));
        }
        reps *= 2;
    }
}

/// The fixed calibration workload: a 20-tree rotation forest on a synthetic
/// 2000×60 two-class dataset (seed 0). The dataset is generated once, outside
/// the timed region.
pub struct ReferenceWorkload {
    data: Dataset,
    config: ForestConfig,
}

impl ReferenceWorkload {
    pub fn new() -> Self {
        let spec = ObliqueSpec {
            n: 2000,
            m: 60,
            ..ObliqueSpec::default()
        };
        ReferenceWorkload {
            data: oblique_dataset(&spec, 0),
            config: ForestConfig::rotation_forest().with_trees(20).with_seed(0),
        }
    }

    pub fn run(&self) {
        build_rotation_forest(&self.data, &self.config).expect("reference workload builds");
    }
}

impl Default for ReferenceWorkload {
    fn default() -> Self {
        Self::new()
    }
}

pub fn required_speedup(t_hat: f64, budget: f64) -> f64 {
    t_hat / budget
}

/// Largest attribute count whose predicted build time is the full-width
/// prediction divided by the required speed-up `t_hat / budget`. Here
/// `t_hat` is the estimated time of the minimum ensemble at full width. The
/// model is affine in `m` for fixed `n`, so the solve is closed form; the
/// result is clamped to `[group_size, m]`.
pub fn estimate_max_attributes(n: usize, m: usize, group_size: usize, t_hat: f64, budget: f64, tm: &TimingModel) -> usize {
    let speedup = required_speedup(t_hat, budget);
    let lo = group_size.clamp(1, m);
    if !(speedup > 1.0) {
        return m;
    }
    let (nf, mf) = (n as f64, m as f64);
    let target = tm.predict_time(nf, mf) / speedup;
    let intercept = tm.predict_time(nf, 0.0);
    let slope = tm.predict_time(nf, 1.0) - intercept;
    if !(slope > 0.0) {
        return m;
    }
    let solved = (target - intercept) / slope;
    if !solved.is_finite() || solved <= lo as f64 {
        return lo;
    }
    (solved.floor() as usize).clamp(lo, m)
}

/// Case-count analogue of [`estimate_max_attributes`], clamped to
/// `[2·classes, n]`. Closed form for the default model, bisection when the
/// `n·log n` term is present.
pub fn estimate_max_cases(n: usize, m: usize, classes: usize, t_hat: f64, budget: f64, tm: &TimingModel) -> usize {
    if tm.include_nlogn {
        max_cases_bisection(n, m, classes, t_hat, budget, tm)
    } else {
        max_cases_closed_form(n, m, classes, t_hat, budget, tm)
    }
}

fn case_bounds(n: usize, classes: usize) -> usize {
    (2 * classes).min(n).max(1)
}

pub fn max_cases_closed_form(n: usize, m: usize, classes: usize, t_hat: f64, budget: f64, tm: &TimingModel) -> usize {
    let speedup = required_speedup(t_hat, budget);
    let lo = case_bounds(n, classes);
    if !(speedup > 1.0) {
        return n;
    }
    let mf = m as f64;
    let target = tm.predict_time(n as f64, mf) / speedup;
    let intercept = tm.predict_time(0.0, mf);
    let slope = tm.predict_time(1.0, mf) - intercept;
    if !(slope > 0.0) {
        return n;
    }
    let solved = (target - intercept) / slope;
    if !solved.is_finite() || solved <= lo as f64 {
        return lo;
    }
    (solved.floor() as usize).clamp(lo, n)
}

/// Largest `n'` in `[2·classes, n]` with `predict(n', m) ≤ predict(n, m) / σ`,
/// assuming the prediction is nondecreasing in `n'`.
pub fn max_cases_bisection(n: usize, m: usize, classes: usize, t_hat: f64, budget: f64, tm: &TimingModel) -> usize {
    let speedup = required_speedup(t_hat, budget);
    let lo_bound = case_bounds(n, classes);
    if !(speedup > 1.0) {
        return n;
    }
    let mf = m as f64;
    let target = tm.predict_time(n as f64, mf) / speedup;
    let fits = |k: usize| tm.predict_time(k as f64, mf) <= target;
    if !fits(lo_bound) {
        return lo_bound;
    }
    let (mut lo, mut hi) = (lo_bound, n);
    if fits(hi) {
        return hi;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Exponentially weighted estimate of the minimum-ensemble build time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildTimeEstimate {
    pub value: f64,
    pub alpha: f64,
}

impl BuildTimeEstimate {
    /// `t̂ ← (1 − α)·t̂ + α·(per_tree_seconds · e_min)`.
    pub fn update(&mut self, per_tree_seconds: f64, e_min: usize) -> f64 {
        self.value = (1.0 - self.alpha) * self.value + self.alpha * per_tree_seconds * e_min as f64;
        self.value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractConfig {
    pub budget_seconds: f64,
    pub e_min: usize,
    pub e_max: usize,
    pub alpha: f64,
    pub memory_limit_bytes: u64,
    pub timing: TimingModel,
}

impl ContractConfig {
    pub fn new(budget_seconds: f64, timing: TimingModel) -> Self {
        ContractConfig {
            budget_seconds,
            e_min: 50,
            e_max: 200,
            alpha: 0.1,
            memory_limit_bytes: 10 << 30,
            timing,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget_seconds > 0.0) {
            return Err(Error::InvalidConfig("budget must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig("alpha must be in [0, 1)".into()));
        }
        if self.e_min < 1 || self.e_min > self.e_max {
            return Err(Error::InvalidConfig("need 1 <= e_min <= e_max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionAxis {
    Attributes,
    Cases,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractPhase {
    /// Delegated to an ordinary full build.
    Full,
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractLogRow {
    pub index: usize,
    pub phase: ContractPhase,
    pub subsample_size: usize,
    pub seconds: f64,
    pub elapsed_seconds: f64,
    pub t_hat: f64,
}

#[derive(Debug, Clone)]
pub struct ContractOutcome {
    pub model: ForestModel,
    pub log: Vec<ContractLogRow>,
    pub delegated: bool,
    pub axis: Option<ReductionAxis>,
    /// Upper prediction bound for the full build, seconds.
    pub predicted_seconds: f64,
    pub stopped_by_memory: bool,
    pub elapsed_seconds: f64,
}

/// Stratified subsample of `k` cases.
fn stratified_subsample(train: &Dataset, k: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let by_class = train.class_indices();
    let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let quotas = class_quotas(&counts, k);
    let mut rows = Vec::with_capacity(k);
    for (mut members, q) in by_class.into_iter().zip(quotas) {
        rng.shuffle(&mut members);
        rows.extend_from_slice(&members[..q.min(members.len())]);
    }
    rows.sort_unstable();
    rows
}

/// Time-budgeted rotation forest.
///
/// If the upper prediction bound of a full build is below the budget the
/// ordinary rotation forest is returned. Otherwise trees are grown on
/// random attribute subsets (when `m ≥ n`) or stratified case subsets
/// (when `m < n`): first up to `e_min` trees with sizes drawn from
/// `[cap/2, cap]`, refining the estimate after every tree, then up to
/// `e_max` trees with sizes from `[cap, full]`. Building stops when the
/// budget is spent, when the next tree is predicted not to fit the
/// remaining time, or when the model outgrows the memory limit. The first
/// tree is always built.
pub fn contract_train(train: &Dataset, cc: &ContractConfig, forest_cfg: &ForestConfig) -> Result<ContractOutcome> {
    cc.validate()?;
    let start = Instant::now();
    let (n, m, c) = (train.n_cases(), train.n_attributes(), train.n_classes());
    let tm = &cc.timing;
    let upper = tm.upper_bound_seconds(n as f64, m as f64);

    if upper < cc.budget_seconds {
        let model = build_rotation_forest(train, forest_cfg)?;
        let mut elapsed = 0.0;
        let log = model
            .per_tree_seconds
            .iter()
            .enumerate()
            .map(|(index, &seconds)| {
                elapsed += seconds;
                ContractLogRow {
                    index,
                    phase: ContractPhase::Full,
                    subsample_size: m,
                    seconds,
                    elapsed_seconds: elapsed,
                    t_hat: upper,
                }
            })
            .collect();
        return Ok(ContractOutcome {
            model,
            log,
            delegated: true,
            axis: None,
            predicted_seconds: upper,
            stopped_by_memory: false,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
    }

    let cfg = ForestConfig {
        transform: Transform::Pca,
        max_attributes_per_tree: None,
        ..forest_cfg.clone()
    };
    cfg.validate(m)?;
    let axis = if m >= n {
        ReductionAxis::Attributes
    } else {
        ReductionAxis::Cases
    };
    let full = match axis {
        ReductionAxis::Attributes => m,
        ReductionAxis::Cases => n,
    };
    let min_size = match axis {
        ReductionAxis::Attributes => 1,
        ReductionAxis::Cases => (2 * c).min(n),
    };
    // predicted full-build time at a given subsample size, seconds
    let predicted_at = |size: usize| -> f64 {
        let p = match axis {
            ReductionAxis::Attributes => tm.predict_seconds(n as f64, size as f64),
            ReductionAxis::Cases => tm.predict_seconds(size as f64, m as f64),
        };
        p.max(f64::MIN_POSITIVE)
    };
    // share of a full-size tree's time taken by a tree of this size
    let relative = |size: usize| -> f64 {
        let r = predicted_at(size) / predicted_at(full);
        if r.is_finite() && r > 0.0 {
            r.min(1.0)
        } else {
            size as f64 / full as f64
        }
    };
    let cap_for = |t_hat: f64| -> usize {
        match axis {
            ReductionAxis::Attributes => {
                estimate_max_attributes(n, m, cfg.rotation.group_size, t_hat, cc.budget_seconds, tm)
            }
            ReductionAxis::Cases => estimate_max_cases(n, m, c, t_hat, cc.budget_seconds, tm),
        }
    };

    let mut estimate = BuildTimeEstimate {
        value: upper * cc.e_min as f64 / REFERENCE_TREES as f64,
        alpha: cc.alpha,
    };
    let mut cap = cap_for(estimate.value);
    let mut full_tree_seconds = estimate.value / cc.e_min as f64;
    let mut observed_full = Vec::new();
    let mut rng = SplitMix64::new(derive_seed(cfg.seed, CONTRACT_STREAM));

    let mut members = Vec::new();
    let mut per_tree_seconds = Vec::new();
    let mut log = Vec::new();
    let mut stopped_by_memory = false;
    let mut bytes = 0usize;

    loop {
        let elapsed = start.elapsed().as_secs_f64();
        let built = members.len();
        let phase = if built < cc.e_min {
            ContractPhase::One
        } else {
            ContractPhase::Two
        };
        if built >= cc.e_max || (built > 0 && elapsed >= cc.budget_seconds) {
            break;
        }
        let (lo, hi) = match phase {
            ContractPhase::One => ((cap / 2).max(min_size).min(cap), cap),
            _ => (cap, full),
        };
        let mut size = rng.range_inclusive(lo, hi);
        if built > 0 {
            let remaining = cc.budget_seconds - elapsed;
            let expected = |s: usize| full_tree_seconds * relative(s);
            if expected(size) > remaining {
                if expected(lo) > remaining {
                    break;
                }
                let (mut good, mut bad) = (lo, size);
                while bad - good > 1 {
                    let mid = good + (bad - good) / 2;
                    if expected(mid) <= remaining {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                size = good;
            }
        }

        let tree_start = Instant::now();
        let member = match axis {
            ReductionAxis::Attributes => build_member(train, &cfg, built, Some(size), None)?,
            ReductionAxis::Cases => {
                let rows = stratified_subsample(train, size, &mut rng);
                build_member(train, &cfg, built, None, Some(&rows))?
            }
        };
        let seconds = tree_start.elapsed().as_secs_f64();

        let as_full = seconds / relative(size);
        observed_full.push(as_full);
        full_tree_seconds = observed_full.iter().sum::<f64>() / observed_full.len() as f64;
        if phase == ContractPhase::One {
            estimate.update(as_full, cc.e_min);
            cap = cap_for(estimate.value);
        }

        bytes += member.estimated_bytes();
        members.push(member);
        per_tree_seconds.push(seconds);
        log.push(ContractLogRow {
            index: built,
            phase,
            subsample_size: size,
            seconds,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            t_hat: estimate.value,
        });
        if bytes as u64 > cc.memory_limit_bytes {
            stopped_by_memory = true;
            break;
        }
    }

    let elapsed_seconds = start.elapsed().as_secs_f64();
    let model = ForestModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        config: ForestConfig {
            trees: members.len(),
            ..cfg
        },
        class_names: train.class_names.clone(),
        n_attributes: m,
        members,
        build_seconds: elapsed_seconds,
        per_tree_seconds,
    };
    Ok(ContractOutcome {
        model,
        log,
        delegated: false,
        axis: Some(axis),
        predicted_seconds: upper,
        stopped_by_memory,
        elapsed_seconds,
    })
}
