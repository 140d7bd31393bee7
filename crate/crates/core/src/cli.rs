//! Command-line interface of the `rotforge` binary.
//!
//! Settings resolve in the order command-line flag, then the `[experiment]`
//! table of a TOML file given with `--config`, then built-in defaults. The
//! default seed comes from `ROTFORGE_SEED` when set.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::budget::{
    calibrate, contract_train, fit_timing_model, read_observations, ContractConfig, ContractLogRow, ReferenceWorkload,
    TimeUnit, TimingModel,
};
use crate::data::{load_any, stratified_resample, ColumnSelector, Dataset, ResamplePlan};
use crate::error::{Error, Result};
use crate::eval::{
    ablation_combos, forest_preset, grid_tune, predict_dataset, run_resample, sensitivity_sweep, MetricReport, MetricsRow,
    Param, ParamGrid, PredictionRecord, SweepParam, METRICS_HEADER,
};
use crate::forests::{build_hybrid, ForestConfig, ForestModel};
use crate::rng::derive_seed;
use crate::stats::{cd_diagram, friedman, holm_cliques, read_metrics_csv, Metric, ResultsMatrix};

#[derive(Debug, Parser)]
#[command(name = "rotforge", version, about = "Rotation forest experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a classifier on stratified resamples and score it.
    Train(TrainArgs),
    /// Score a saved model on a dataset.
    Predict(PredictArgs),
    /// Train under a wall-time budget.
    Contract(ContractArgs),
    /// Train several classifiers on the same resamples.
    Benchmark(BenchmarkArgs),
    /// Compare the six base-learner/transform hybrids.
    Ablation(AblationArgs),
    /// Error difference from a baseline as one parameter varies.
    Sweep(SweepArgs),
    /// Grid search by cross-validation.
    Tune(TuneArgs),
    /// Friedman test, Holm cliques and a CD diagram from metrics files.
    Compare(CompareArgs),
    /// Fit, query or calibrate the build-time model.
    Timing {
        #[command(subcommand)]
        command: TimingCommand,
    },
    /// Critical-difference diagram only.
    CdDiagram(CdArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Dataset files (.arff, or .csv with a header row).
    #[arg(long = "data", required = true, num_args = 1..)]
    pub data: Vec<PathBuf>,
    /// Class column of CSV files: index, name or `last`.
    #[arg(long, default_value = "last")]
    pub class_column: String,
    #[arg(long)]
    pub resamples: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long, env = "ROTFORGE_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write zero in place of measured times so reruns are byte-identical.
    #[arg(long)]
    pub no_timestamps: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ForestArgs {
    /// rotf, randf, rotf<k> or {rt,c45}-{bag,bagpca,pca}.
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub group_size: Option<usize>,
    #[arg(long)]
    pub proportion: Option<f64>,
    #[arg(long)]
    pub max_attributes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "last")]
    pub class_column: String,
    /// Predictions CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ContractArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Budget in seconds.
    #[arg(long)]
    pub budget: f64,
    /// Fitted timing model JSON; the published coefficients otherwise.
    #[arg(long)]
    pub timing: Option<PathBuf>,
    #[arg(long)]
    pub e_min: Option<usize>,
    #[arg(long)]
    pub e_max: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Memory limit in bytes.
    #[arg(long)]
    pub memory_limit: Option<u64>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long, value_delimiter = ',', default_value = "rotf,randf")]
    pub classifiers: Vec<String>,
    #[arg(long)]
    pub trees: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AblationArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[arg(long)]
    pub trees: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SweepParamArg {
    Trees,
    GroupSize,
    Proportion,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, value_enum)]
    pub param: SweepParamArg,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub baseline: f64,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Replace the tree-count axis of the preset grid.
    #[arg(long = "grid-trees", value_delimiter = ',')]
    pub grid_trees: Vec<usize>,
    #[arg(long = "grid-group-sizes", value_delimiter = ',')]
    pub grid_group_sizes: Vec<usize>,
    #[arg(long = "grid-proportions", value_delimiter = ',')]
    pub grid_proportions: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Metrics CSV files or directories searched for `metrics.csv`.
    #[arg(long, required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,
    #[arg(long, default_value = "error")]
    pub metric: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = "comparison")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CdArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,
    #[arg(long, default_value = "error")]
    pub metric: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Output path without extension; `.json` and `.svg` are written.
    #[arg(long, default_value = "cd")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitArg {
    Seconds,
    Minutes,
    Hours,
}

impl From<UnitArg> for TimeUnit {
    fn from(u: UnitArg) -> Self {
        match u {
            UnitArg::Seconds => TimeUnit::Seconds,
            UnitArg::Minutes => TimeUnit::Minutes,
            UnitArg::Hours => TimeUnit::Hours,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum TimingCommand {
    /// Fit the model to `dataset,n,m,seconds` observations.
    Fit {
        #[arg(long)]
        observations: PathBuf,
        #[arg(long)]
        nlogn: bool,
        #[arg(long, value_enum, default_value = "seconds")]
        unit: UnitArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predicted build time (and interval) for a dataset shape.
    Predict {
        #[arg(long, conflicts_with = "published", required_unless_present = "published")]
        model: Option<PathBuf>,
        /// Use the published coefficients.
        #[arg(long)]
        published: bool,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Time the reference workload and report the speed ratio to the
    /// reference machine.
    Calibrate {
        /// Reference machine's time for the workload, seconds.
        #[arg(long)]
        reference_seconds: f64,
        /// Timing model to rescale and rewrite.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

/// Values a `--config` file may set.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub resamples: Option<usize>,
    pub train_fraction: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub classifier: Option<String>,
    pub trees: Option<usize>,
    pub group_size: Option<usize>,
    pub proportion: Option<f64>,
    pub max_attributes: Option<usize>,
    pub budget: Option<f64>,
    pub memory_limit: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct ConfigFile {
    #[serde(default)]
    experiment: FileConfig,
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<PathBuf>,
    pub class_column: ColumnSelector,
    pub classifier: String,
    pub forest: ForestConfig,
    pub resamples: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub budget: Option<f64>,
    pub memory_limit: Option<u64>,
    pub timestamps: bool,
}

pub fn read_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed: ConfigFile = toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    Ok(parsed.experiment)
}

impl ExperimentConfig {
    pub fn resolve(exp: &ExperimentArgs, forest: &ForestArgs) -> Result<Self> {
        let file = read_file_config(exp.config.as_deref())?;
        let classifier = forest
            .classifier
            .clone()
            .or(file.classifier.clone())
            .unwrap_or_else(|| "rotf".into());
        let mut cfg = forest_preset(&classifier)?;
        if let Some(k) = forest.trees.or(file.trees) {
            cfg.trees = k;
        }
        if let Some(f) = forest.group_size.or(file.group_size) {
            cfg.rotation.group_size = f;
        }
        if let Some(p) = forest.proportion.or(file.proportion) {
            cfg.rotation.sample_proportion = p;
        }
        if let Some(a) = forest.max_attributes.or(file.max_attributes) {
            cfg.max_attributes_per_tree = Some(a);
        }
        let resamples = exp.resamples.or(file.resamples).unwrap_or(30);
        if resamples == 0 {
            return Err(Error::InvalidConfig("resample count must be at least 1".into()));
        }
        let seed = exp.seed.or(file.seed).unwrap_or(0);
        cfg.seed = seed;
        Ok(ExperimentConfig {
            datasets: exp.data.clone(),
            class_column: exp.class_column.parse().expect("infallible"),
            classifier,
            forest: cfg,
            resamples,
            train_fraction: exp.train_fraction.or(file.train_fraction).unwrap_or(0.5),
            seed,
            out: exp.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("results")),
            budget: file.budget,
            memory_limit: file.memory_limit,
            timestamps: !exp.no_timestamps,
        })
    }

    fn load_datasets(&self) -> Result<Vec<Dataset>> {
        self.datasets.iter().map(|p| load_any(p, &self.class_column)).collect()
    }

    /// Forest seed of one resample.
    fn resample_config(&self, resample: usize) -> ForestConfig {
        self.forest.clone().with_seed(derive_seed(self.seed, resample as u64))
    }

    fn resample_dir(&self, classifier: &str, dataset: &str, resample: usize) -> Result<PathBuf> {
        let dir = self.out.join(classifier).join(dataset).join(format!("resample{resample}"));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }
}

/// Parses arguments and runs the command; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DatasetNotFound(_) => 2,
        _ => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Contract(a) => cmd_contract(&a),
        Command::Benchmark(a) => cmd_benchmark(&a),
        Command::Ablation(a) => cmd_ablation(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Tune(a) => cmd_tune(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Timing { command } => cmd_timing(command),
        Command::CdDiagram(a) => cmd_cd_diagram(&a),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `true_class,pred_class,p_0..p_{c-1}` with 17 significant digits.
pub fn predictions_csv(preds: &[PredictionRecord], n_classes: usize) -> String {
    let mut s = String::from("true_class,pred_class");
    for j in 0..n_classes {
        let _ = write!(s, ",p_{j}");
    }
    s.push('\n');
    for p in preds {
        let _ = write!(s, "{},{}", p.true_class, p.predicted_class);
        for v in &p.distribution {
            let _ = write!(s, ",{v:.16e}");
        }
        s.push('\n');
    }
    s
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(METRICS_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    write_text(path, &String::from_utf8_lossy(&bytes))
}

fn save_resample(
    dir: &Path,
    model: &ForestModel,
    preds: &[PredictionRecord],
    row: &MetricsRow,
    timestamps: bool,
) -> Result<()> {
    let model = if timestamps {
        model.clone()
    } else {
        model.clone().without_timings()
    };
    model.save(dir.join("model.json"))?;
    write_text(&dir.join("predictions.csv"), &predictions_csv(preds, model.n_classes()))?;
    write_metrics_csv(&dir.join("metrics.csv"), std::slice::from_ref(row))
}

fn report_line(row: &MetricsRow) {
    println!(
        "{}\t{}\tresample {}\terror {:.4}\tbalanced {:.4}\tauc {:.4}\tnll {:.4}",
        row.classifier, row.dataset, row.resample, row.error, row.balanced_error, row.auc, row.nll
    );
}

/// Trains `cfg.forest` on every resample of every dataset, writing the
/// per-resample artifacts. Returns all metrics rows.
fn train_all(cfg: &ExperimentConfig, datasets: &[Dataset], classifier: &str) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::new();
    for d in datasets {
        for r in 0..cfg.resamples {
            let plan = ResamplePlan::fraction(r as u64, cfg.train_fraction);
            let outcome = run_resample(d, &cfg.resample_config(r), &plan)?;
            let seconds = if cfg.timestamps { outcome.build_seconds } else { 0.0 };
            let row = MetricsRow::new(&d.name, classifier, r as u64, &outcome.report, seconds);
            let dir = cfg.resample_dir(classifier, &d.name, r)?;
            save_resample(&dir, &outcome.model, &outcome.predictions, &row, cfg.timestamps)?;
            report_line(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let cfg = ExperimentConfig::resolve(&a.experiment, &a.forest)?;
    let datasets = cfg.load_datasets()?;
    train_all(&cfg, &datasets, &cfg.classifier)?;
    Ok(())
}

pub fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let model = ForestModel::load(&a.model)?;
    let data = load_any(&a.data, &a.class_column.parse().expect("infallible"))?;
    if data.class_names != model.class_names {
        return Err(Error::Schema("dataset classes differ from the model's".into()));
    }
    let preds = predict_dataset(&model, &data)?;
    let text = predictions_csv(&preds, model.n_classes());
    match &a.out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    let report = MetricReport::compute(&preds, &vec![1; model.n_classes()])?;
    eprintln!("error {:.4}\tbalanced {:.4}\tnll {:.4}", report.error, report.balanced_error, report.nll);
    Ok(())
}

pub fn contract_log_csv(log: &[ContractLogRow], timestamps: bool) -> String {
    let mut s = String::from("index,phase,subsample_size,seconds,elapsed_seconds,t_hat\n");
    for r in log {
        let phase = match r.phase {
            crate::budget::ContractPhase::Full => "full",
            crate::budget::ContractPhase::One => "one",
            crate::budget::ContractPhase::Two => "two",
        };
        let (sec, el) = if timestamps { (r.seconds, r.elapsed_seconds) } else { (0.0, 0.0) };
        let _ = writeln!(s, "{},{phase},{},{sec},{el},{}", r.index, r.subsample_size, r.t_hat);
    }
    s
}

pub fn cmd_contract(a: &ContractArgs) -> Result<()> {
    let cfg = ExperimentConfig::resolve(&a.experiment, &a.forest)?;
    let timing = match &a.timing {
        Some(path) => TimingModel::load(path)?,
        None => TimingModel::published(),
    };
    let mut cc = ContractConfig::new(a.budget, timing);
    if let Some(e) = a.e_min {
        cc.e_min = e;
    }
    if let Some(e) = a.e_max {
        cc.e_max = e;
    }
    if let Some(al) = a.alpha {
        cc.alpha = al;
    }
    if let Some(mem) = a.memory_limit.or(cfg.memory_limit) {
        cc.memory_limit_bytes = mem;
    }
    let datasets = cfg.load_datasets()?;
    let name = format!("contract-{}", cfg.classifier);
    for d in &datasets {
        for r in 0..cfg.resamples {
            let plan = ResamplePlan::fraction(r as u64, cfg.train_fraction);
            let (train, test) = stratified_resample(d, &plan)?;
            let outcome = contract_train(&train, &cc, &cfg.resample_config(r))?;
            let preds = predict_dataset(&outcome.model, &test)?;
            let report = MetricReport::compute(&preds, &train.class_counts())?;
            let seconds = if cfg.timestamps { outcome.elapsed_seconds } else { 0.0 };
            let row = MetricsRow::new(&d.name, &name, r as u64, &report, seconds);
            let dir = cfg.resample_dir(&name, &d.name, r)?;
            save_resample(&dir, &outcome.model, &preds, &row, cfg.timestamps)?;
            write_text(&dir.join("contract_log.csv"), &contract_log_csv(&outcome.log, cfg.timestamps))?;
            report_line(&row);
            println!(
                "\t{} trees, {}",
                outcome.model.members.len(),
                if outcome.delegated { "full build" } else { "reduced build" }
            );
        }
    }
    Ok(())
}

pub fn cmd_benchmark(a: &BenchmarkArgs) -> Result<()> {
    let base = ExperimentConfig::resolve(&a.experiment, &ForestArgs::default())?;
    let datasets = base.load_datasets()?;
    let mut all = Vec::new();
    for name in &a.classifiers {
        let mut cfg = base.clone();
        cfg.forest = forest_preset(name)?.with_seed(base.seed);
        if let Some(k) = a.trees {
            cfg.forest.trees = k;
        }
        all.extend(train_all(&cfg, &datasets, name)?);
    }
    write_metrics_csv(&base.out.join("benchmark.csv"), &all)
}

pub fn cmd_ablation(a: &AblationArgs) -> Result<()> {
    let cfg = ExperimentConfig::resolve(&a.experiment, &ForestArgs::default())?;
    let datasets = cfg.load_datasets()?;
    let trees = a.trees.unwrap_or(200);
    let combos = ablation_combos();
    let mut rows = Vec::new();
    let mut accuracy = vec![0.0; combos.len()];
    for d in &datasets {
        for r in 0..cfg.resamples {
            let (train, test) = stratified_resample(d, &ResamplePlan::fraction(r as u64, cfg.train_fraction))?;
            for (ci, (label, kind, transform)) in combos.iter().enumerate() {
                let fc = cfg.resample_config(r).with_trees(trees);
                let start = std::time::Instant::now();
                let model = build_hybrid(&train, *kind, *transform, &fc)?;
                let seconds = if cfg.timestamps { start.elapsed().as_secs_f64() } else { 0.0 };
                let preds = predict_dataset(&model, &test)?;
                let report = MetricReport::compute(&preds, &train.class_counts())?;
                accuracy[ci] += 1.0 - report.error;
                rows.push(MetricsRow::new(&d.name, label, r as u64, &report, seconds));
            }
        }
    }
    let runs = (datasets.len() * cfg.resamples) as f64;
    let mean: Vec<f64> = accuracy.iter().map(|a| a / runs).collect();
    let summary = ablation_summary(&combos.iter().map(|c| c.0.clone()).collect::<Vec<_>>(), &mean);
    write_metrics_csv(&cfg.out.join("ablation_metrics.csv"), &rows)?;
    write_text(&cfg.out.join("ablation.csv"), &summary)?;
    print!("{summary}");
    Ok(())
}

/// `combo,mean_accuracy,rank` with rank 1 for the highest accuracy, ties
/// ranked in table order.
pub fn ablation_summary(labels: &[String], mean_accuracy: &[f64]) -> String {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| mean_accuracy[b].total_cmp(&mean_accuracy[a]).then(a.cmp(&b)));
    let mut rank = vec![0; labels.len()];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos + 1;
    }
    let mut s = String::from("combo,mean_accuracy,rank\n");
    for i in 0..labels.len() {
        let _ = writeln!(s, "{},{:.6},{}", labels[i], mean_accuracy[i], rank[i]);
    }
    s
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let cfg = ExperimentConfig::resolve(&a.experiment, &a.forest)?;
    let datasets = cfg.load_datasets()?;
    let param = match a.param {
        SweepParamArg::Trees => SweepParam::Trees,
        SweepParamArg::GroupSize => SweepParam::GroupSize,
        SweepParamArg::Proportion => SweepParam::Proportion,
    };
    let result = sensitivity_sweep(&datasets, &cfg.forest, param, &a.values, a.baseline, cfg.resamples, cfg.train_fraction)?;
    let mut s = String::from("value,mean_diff,ci_low,ci_high\n");
    for p in &result.points {
        let (lo, hi) = p.ci.map_or((String::new(), String::new()), |(l, h)| (l.to_string(), h.to_string()));
        let _ = writeln!(s, "{},{},{lo},{hi}", p.value, p.mean_diff);
    }
    write_text(&cfg.out.join("sweep.csv"), &s)?;
    print!("{s}");
    Ok(())
}

pub fn cmd_tune(a: &TuneArgs) -> Result<()> {
    let cfg = ExperimentConfig::resolve(&a.experiment, &a.forest)?;
    let datasets = cfg.load_datasets()?;
    for d in &datasets {
        let mut grid = if cfg.forest.base == crate::trees::TreeKind::RandomTree {
            ParamGrid::random_forest(d.n_attributes())
        } else {
            ParamGrid::rotation_forest()
        };
        for axis in &mut grid.axes {
            match axis.first() {
                Some(Param::Trees(_)) if !a.grid_trees.is_empty() => {
                    *axis = a.grid_trees.iter().map(|&k| Param::Trees(k)).collect()
                }
                Some(Param::GroupSize(_)) if !a.grid_group_sizes.is_empty() => {
                    *axis = a.grid_group_sizes.iter().map(|&f| Param::GroupSize(f)).collect()
                }
                Some(Param::Proportion(_)) if !a.grid_proportions.is_empty() => {
                    *axis = a.grid_proportions.iter().map(|&p| Param::Proportion(p)).collect()
                }
                _ => {}
            }
        }
        let (train, _) = stratified_resample(d, &ResamplePlan::fraction(0, cfg.train_fraction))?;
        let result = grid_tune(&cfg.forest, &grid, &train, a.folds, cfg.seed)?;
        let mut s = String::new();
        let names: Vec<&str> = grid.axes.iter().filter_map(|ax| ax.first().map(Param::name)).collect();
        let _ = writeln!(s, "{},cv_error", names.join(","));
        for cell in &result.table {
            let vals: Vec<String> = cell.params.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "{},{}", vals.join(","), cell.cv_error);
        }
        let dir = cfg.out.join(&cfg.classifier).join(&d.name);
        write_text(&dir.join("tuning.csv"), &s)?;
        let model = if cfg.timestamps { result.model } else { result.model.without_timings() };
        model.save(dir.join("tuned_model.json"))?;
        let best: Vec<String> = result.best.iter().map(|p| format!("{}={p}", p.name())).collect();
        println!("{}\t{}\tcv_error {:.4}", d.name, best.join(" "), result.cv_error);
    }
    Ok(())
}

/// Metrics files named directly plus every `metrics.csv` below named
/// directories, sorted for a stable order.
fn collect_metrics_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let mut entries: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, out)?;
            } else if p.file_name().is_some_and(|n| n == "metrics.csv") {
                out.push(p);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            walk(p, &mut out)?;
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(Error::DatasetNotFound(p.clone()));
        }
    }
    if out.is_empty() {
        return Err(Error::Schema("no metrics files found".into()));
    }
    Ok(out)
}

fn load_matrix(paths: &[PathBuf], metric: &str) -> Result<ResultsMatrix> {
    let metric: Metric = metric.parse()?;
    let mut rows = Vec::new();
    for f in collect_metrics_files(paths)? {
        rows.extend(read_metrics_csv(&f)?);
    }
    ResultsMatrix::from_rows(&rows, metric)
}

pub fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let matrix = load_matrix(&a.results, &a.metric)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let report = holm_cliques(&matrix, a.alpha)?;
    let k = matrix.classifiers.len();
    let mut out = String::new();
    match friedman(&matrix) {
        Ok(f) => {
            let _ = writeln!(out, "friedman statistic {:.6} p {:.6}", f.statistic, f.p_value);
            write_text(&a.out.join("friedman.json"), &serde_json::to_string_pretty(&f)?)?;
        }
        Err(e) => {
            let _ = writeln!(out, "friedman unavailable: {e}");
        }
    }
    let mut pairwise = String::from("classifier_a,classifier_b,p_value,rejected\n");
    for i in 0..k {
        for j in i + 1..k {
            let _ = writeln!(
                pairwise,
                "{},{},{},{}",
                matrix.classifiers[i], matrix.classifiers[j], report.pairwise_p[i][j], report.rejected[i][j]
            );
        }
    }
    write_text(&a.out.join("pairwise.csv"), &pairwise)?;
    let diagram = cd_diagram(&report, a.out.join("cd"))?;
    for (i, name) in diagram.classifiers.iter().enumerate() {
        let _ = writeln!(out, "{name}\tmean rank {:.4}", diagram.ranks[i]);
    }
    for clique in &diagram.cliques {
        let names: Vec<&str> = clique.iter().map(|&c| diagram.classifiers[c].as_str()).collect();
        let _ = writeln!(out, "clique: {}", names.join(" "));
    }
    print!("{out}");
    Ok(())
}

pub fn cmd_cd_diagram(a: &CdArgs) -> Result<()> {
    let matrix = load_matrix(&a.results, &a.metric)?;
    let report = holm_cliques(&matrix, a.alpha)?;
    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let diagram = cd_diagram(&report, &a.out)?;
    println!("{}", diagram.to_json()?);
    Ok(())
}

/// At most six decimals, trailing zeros dropped.
pub fn format_time(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

pub fn cmd_timing(command: TimingCommand) -> Result<()> {
    match command {
        TimingCommand::Fit {
            observations,
            nlogn,
            unit,
            out,
        } => {
            let obs = read_observations(&observations)?;
            let tm = fit_timing_model(&obs, nlogn, unit.into())?;
            tm.save(&out)?;
            let coef: Vec<String> = tm.coefficients.iter().map(|c| format!("{c:e}")).collect();
            println!("coefficients {} ({}), residual sd {}", coef.join(" "), tm.time_unit.label(), tm.residual_std);
        }
        TimingCommand::Predict {
            model,
            published,
            n,
            m,
            alpha,
        } => {
            let tm = match (published, model) {
                (true, _) => TimingModel::published(),
                (false, Some(path)) => TimingModel::load(path)?,
                (false, None) => return Err(Error::InvalidConfig("give --model or --published".into())),
            };
            let unit = tm.time_unit.label();
            println!("{} {unit}", format_time(tm.predict_time(n as f64, m as f64)));
            if let Ok((lo, hi)) = tm.prediction_interval(n as f64, m as f64, alpha) {
                println!(
                    "{:.0}% interval [{}, {}] {unit}",
                    100.0 * (1.0 - alpha),
                    format_time(lo),
                    format_time(hi)
                );
            }
        }
        TimingCommand::Calibrate {
            reference_seconds,
            model,
        } => {
            let workload = ReferenceWorkload::new();
            let scale = calibrate(|| workload.run(), reference_seconds)?;
            println!("{}", format_time(scale));
            if let Some(path) = model {
                let tm = TimingModel::load(&path)?.with_calibration(scale)?;
                tm.save(&path)?;
            }
        }
    }
    std::io::stdout().flush().map_err(|e| Error::io("<stdout>", e))
}
