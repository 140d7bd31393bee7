//! Datasets, ARFF/CSV ingestion and stratified resampling.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};

/// Stream constant mixed with the resample id; makes resample streams
/// independent of every other stream in the crate.
const RESAMPLE_STREAM: u64 = 0x5245_5341_4D50_4C45;

/// Real-valued feature matrix (row-major) with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    values: Vec<f64>,
    labels: Vec<usize>,
    pub class_names: Vec<String>,
    pub provenance: String,
    n: usize,
    m: usize,
}

impl Dataset {
    /// Builds a dataset and checks every invariant: finite values, `n ≥ 2`,
    /// `m ≥ 1`, at least two classes and every class present.
    pub fn new(
        name: impl Into<String>,
        feature_names: Vec<String>,
        values: Vec<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let d = Self::from_parts(name, feature_names, values, labels, class_names)?;
        if d.n < 2 {
            return Err(Error::InvalidDataset(format!("need n >= 2, found {}", d.n)));
        }
        if d.class_names.len() < 2 {
            return Err(Error::InvalidDataset("need at least two classes".into()));
        }
        let counts = d.class_counts();
        if let Some(j) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidDataset(format!(
                "class `{}` has no cases",
                d.class_names[j]
            )));
        }
        Ok(d)
    }

    /// Shape and finiteness checks only. Derived views (bootstrap samples,
    /// folds, transformed copies) may lack some classes.
    pub fn from_parts(
        name: impl Into<String>,
        feature_names: Vec<String>,
        values: Vec<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let m = feature_names.len();
        let n = labels.len();
        if m == 0 {
            return Err(Error::InvalidDataset("need at least one attribute".into()));
        }
        if values.len() != n * m {
            return Err(Error::DimensionMismatch {
                expected: n * m,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(Dataset {
            name: name.into(),
            feature_names,
            values,
            labels,
            class_names,
            provenance: String::new(),
            n,
            m,
        })
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    pub fn n_cases(&self) -> usize {
        self.n
    }

    pub fn n_attributes(&self) -> usize {
        self.m
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Case indices per class, ascending.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// Rows at `indices` (repeats allowed), same attributes and classes.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.m);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            values,
            labels,
            class_names: self.class_names.clone(),
            provenance: self.provenance.clone(),
            n: indices.len(),
            m: self.m,
        }
    }

    /// Replaces the feature matrix, keeping labels and class names.
    pub fn with_features(&self, feature_names: Vec<String>, values: Vec<f64>) -> Result<Dataset> {
        let mut d = Dataset::from_parts(
            self.name.clone(),
            feature_names,
            values,
            self.labels.clone(),
            self.class_names.clone(),
        )?;
        d.provenance = self.provenance.clone();
        Ok(d)
    }

    /// Writes the dataset in the ARFF subset accepted by [`load_arff`].
    pub fn to_arff(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "@relation {}", quote_arff(&self.name));
        out.push('\n');
        for name in &self.feature_names {
            let _ = writeln!(out, "@attribute {} numeric", quote_arff(name));
        }
        let classes: Vec<String> = self.class_names.iter().map(|c| quote_arff(c)).collect();
        let _ = writeln!(out, "@attribute class {{{}}}", classes.join(","));
        out.push_str("\n@data\n");
        for i in 0..self.n {
            for v in self.row(i) {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{}", quote_arff(&self.class_names[self.labels[i]]));
        }
        out
    }
}

fn quote_arff(s: &str) -> String {
    if s.is_empty()
        || s.chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '\'' | '"' | '%'))
    {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    } else {
        s.to_string()
    }
}

fn read_file(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::DatasetNotFound(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Splits on commas outside single or double quotes and strips the quotes.
fn split_arff_fields(line: &str, line_no: usize) -> Result<Vec<String>> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut chars = line.chars();
    while let Some(ch) = chars.next() {
        match (quote, ch) {
            (Some(_), '\\') => {
                if let Some(next) = chars.next() {
                    cur.push(next);
                }
            }
            (Some(q), c) if c == q => quote = None,
            (Some(_), c) => cur.push(c),
            (None, '\'' | '"') => quote = Some(ch),
            (None, ',') => fields.push(std::mem::take(&mut cur).trim().to_string()),
            (None, c) => cur.push(c),
        }
    }
    if quote.is_some() {
        return Err(Error::Parse {
            line: line_no,
            message: "unterminated quote".into(),
        });
    }
    fields.push(cur.trim().to_string());
    Ok(fields)
}

/// Reads the leading (possibly quoted) token of `s`; returns it and the rest.
fn take_name(s: &str, line_no: usize) -> Result<(String, &str)> {
    let s = s.trim_start();
    if let Some(q) = s.chars().next().filter(|c| *c == '\'' || *c == '"') {
        let body = &s[1..];
        let mut name = String::new();
        let mut escaped = false;
        for (idx, ch) in body.char_indices() {
            if escaped {
                name.push(ch);
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == q {
                return Ok((name, &body[idx + 1..]));
            } else {
                name.push(ch);
            }
        }
        Err(Error::Parse {
            line: line_no,
            message: "unterminated quoted name".into(),
        })
    } else {
        let end = s.find(char::is_whitespace).unwrap_or(s.len());
        if end == 0 {
            return Err(Error::Parse {
                line: line_no,
                message: "missing name".into(),
            });
        }
        Ok((s[..end].to_string(), &s[end..]))
    }
}

enum AttributeType {
    Numeric,
    Nominal(Vec<String>),
}

/// Loads the ARFF subset: numeric attributes followed by one nominal class
/// attribute (the last one). Rows keep file order; classes keep declaration
/// order.
pub fn load_arff(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = read_file(path)?;
    parse_arff(&text, &stem(path)).map(|d| d.with_provenance(format!("{} (arff)", path.display())))
}

pub fn parse_arff(text: &str, default_name: &str) -> Result<Dataset> {
    let mut relation = default_name.to_string();
    let mut attributes: Vec<(String, AttributeType, usize)> = Vec::new();
    let mut in_data = false;
    let mut rows: Vec<(Vec<String>, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            if line.starts_with('{') {
                return Err(Error::Parse {
                    line: line_no,
                    message: "sparse rows are not supported".into(),
                });
            }
            rows.push((split_arff_fields(line, line_no)?, line_no));
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            let (name, _) = take_name(&line["@relation".len()..], line_no)?;
            relation = name;
        } else if lower.starts_with("@attribute") {
            let (name, rest) = take_name(&line["@attribute".len()..], line_no)?;
            let rest = rest.trim();
            let kind = if rest.starts_with('{') {
                let close = rest.rfind('}').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "unterminated nominal declaration".into(),
                })?;
                let values = split_arff_fields(&rest[1..close], line_no)?;
                if values.iter().any(|v| v.is_empty()) {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "empty nominal value".into(),
                    });
                }
                AttributeType::Nominal(values)
            } else {
                match rest.to_ascii_lowercase().as_str() {
                    "numeric" | "real" | "integer" => AttributeType::Numeric,
                    other => {
                        return Err(Error::UnsupportedAttribute {
                            name,
                            kind: other.to_string(),
                        })
                    }
                }
            };
            attributes.push((name, kind, line_no));
        } else if lower.starts_with("@data") {
            in_data = true;
        } else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unexpected header line `{line}`"),
            });
        }
    }

    if !in_data {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: "missing @data section".into(),
        });
    }
    let Some((class_attr, class_kind, class_line)) = attributes.pop() else {
        return Err(Error::Parse {
            line: 1,
            message: "no attributes declared".into(),
        });
    };
    let class_names = match class_kind {
        AttributeType::Nominal(values) => values,
        AttributeType::Numeric => {
            return Err(Error::UnsupportedAttribute {
                name: class_attr,
                kind: format!("numeric class attribute (line {class_line})"),
            })
        }
    };
    let mut feature_names = Vec::with_capacity(attributes.len());
    for (name, kind, _) in attributes {
        if let AttributeType::Nominal(_) = kind {
            return Err(Error::UnsupportedAttribute {
                name,
                kind: "nominal (only the class may be nominal)".into(),
            });
        }
        feature_names.push(name);
    }
    let m = feature_names.len();
    let class_index: HashMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    let mut values = Vec::with_capacity(rows.len() * m);
    let mut labels = Vec::with_capacity(rows.len());
    for (fields, line_no) in &rows {
        if fields.len() != m + 1 {
            return Err(Error::Parse {
                line: *line_no,
                message: format!("expected {} fields, found {}", m + 1, fields.len()),
            });
        }
        for (j, field) in fields[..m].iter().enumerate() {
            if field == "?" {
                return Err(Error::MissingValue {
                    line: *line_no,
                    attribute: feature_names[j].clone(),
                });
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: *line_no,
                message: format!("`{field}` is not numeric"),
            })?;
            values.push(v);
        }
        let class = &fields[m];
        if class == "?" {
            return Err(Error::MissingValue {
                line: *line_no,
                attribute: class_attr.clone(),
            });
        }
        let label = *class_index.get(class.as_str()).ok_or_else(|| Error::Parse {
            line: *line_no,
            message: format!("undeclared class value `{class}`"),
        })?;
        labels.push(label);
    }
    Dataset::new(relation, feature_names, values, labels, class_names)
}

/// Which CSV column holds the class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
    Last,
}

impl std::str::FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => ColumnSelector::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => ColumnSelector::Index(i),
                Err(_) => ColumnSelector::Name(s.to_string()),
            },
        })
    }
}

/// Loads a rectangular CSV. Every column but the class column is parsed as
/// a real; distinct class values, sorted lexicographically, become the
/// class names.
pub fn load_csv(path: impl AsRef<Path>, class_column: &ColumnSelector, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = read_file(path)?;
    parse_csv(&text, &stem(path), class_column, has_header)
        .map(|d| d.with_provenance(format!("{} (csv)", path.display())))
}

pub fn parse_csv(
    text: &str,
    name: &str,
    class_column: &ColumnSelector,
    has_header: bool,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec?);
    }
    let mut iter = records.into_iter();
    let header: Option<Vec<String>> = if has_header {
        iter.next().map(|r| r.iter().map(str::to_string).collect())
    } else {
        None
    };
    let body: Vec<csv::StringRecord> = iter.collect();
    let width = header
        .as_ref()
        .map(Vec::len)
        .or_else(|| body.first().map(|r| r.len()))
        .ok_or_else(|| Error::InvalidDataset("empty CSV".into()))?;
    let class_col = match class_column {
        ColumnSelector::Last => width.checked_sub(1).ok_or_else(|| Error::InvalidDataset("no columns".into()))?,
        ColumnSelector::Index(i) if *i < width => *i,
        ColumnSelector::Index(i) => {
            return Err(Error::InvalidConfig(format!(
                "class column {i} out of range for {width} columns"
            )))
        }
        ColumnSelector::Name(n) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == n))
            .ok_or_else(|| Error::InvalidConfig(format!("no column named `{n}`")))?,
    };
    if width < 2 {
        return Err(Error::InvalidDataset("need at least one feature column".into()));
    }
    let feature_names: Vec<String> = (0..width)
        .filter(|&j| j != class_col)
        .map(|j| {
            header
                .as_ref()
                .map(|h| h[j].clone())
                .unwrap_or_else(|| format!("att{j}"))
        })
        .collect();

    let first_row = usize::from(has_header);
    let mut values = Vec::with_capacity(body.len() * (width - 1));
    let mut raw_classes = Vec::with_capacity(body.len());
    for (r, rec) in body.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::RaggedRow {
                row: r + first_row,
                expected: width,
                found: rec.len(),
            });
        }
        for (j, cell) in rec.iter().enumerate() {
            if j == class_col {
                raw_classes.push(cell.trim().to_string());
                continue;
            }
            let v: f64 = cell.trim().parse().map_err(|_| Error::NonNumeric {
                row: r + first_row,
                column: j,
                value: cell.to_string(),
            })?;
            values.push(v);
        }
    }
    let class_names: Vec<String> = raw_classes
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if class_names.len() == 1 {
        return Err(Error::SingleClass(class_names[0].clone()));
    }
    let lookup: HashMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let labels = raw_classes.iter().map(|c| lookup[c.as_str()]).collect();
    Dataset::new(name, feature_names, values, labels, class_names)
}

/// Loads `.arff` files with the ARFF reader and anything else as CSV with
/// a header row.
pub fn load_any(path: impl AsRef<Path>, class_column: &ColumnSelector) -> Result<Dataset> {
    let path = path.as_ref();
    let is_arff = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("arff"));
    if is_arff {
        load_arff(path)
    } else {
        load_csv(path, class_column, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSize {
    Fraction(f64),
    Sizes { train_n: usize, test_n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResamplePlan {
    pub resample_id: u64,
    pub split: SplitSize,
}

impl ResamplePlan {
    pub fn fraction(resample_id: u64, train_fraction: f64) -> Self {
        ResamplePlan {
            resample_id,
            split: SplitSize::Fraction(train_fraction),
        }
    }
}

/// Per-class train quotas for a train share of `target` out of `n` cases:
/// floor of the proportional share, leftover seats handed out one per class
/// by descending fractional remainder (ties to the lower class index), then
/// every present class clamped to at least one case.
pub fn class_quotas(counts: &[usize], target: usize) -> Vec<usize> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return vec![0; counts.len()];
    }
    let share = |c: usize| c as f64 * target as f64 / n as f64;
    let mut quotas: Vec<usize> = counts.iter().map(|&c| share(c).floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).filter(|&j| counts[j] > 0).collect();
    order.sort_by(|&a, &b| {
        let ra = share(counts[a]) - share(counts[a]).floor();
        let rb = share(counts[b]) - share(counts[b]).floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    for &j in order.iter().take(target.saturating_sub(assigned)) {
        if quotas[j] < counts[j] {
            quotas[j] += 1;
        }
    }
    for (q, &c) in quotas.iter_mut().zip(counts) {
        if c > 0 && *q == 0 {
            *q = 1;
        }
    }
    quotas
}

/// Index sets of a stratified resample. Indices are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResampleIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn stratified_indices(d: &Dataset, plan: &ResamplePlan) -> Result<ResampleIndices> {
    let n = d.n_cases();
    let target = match plan.split {
        SplitSize::Fraction(f) => {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "train fraction must be in (0, 1), found {f}"
                )));
            }
            (n as f64 * f).round() as usize
        }
        SplitSize::Sizes { train_n, test_n } => {
            if train_n + test_n != n || train_n == 0 {
                return Err(Error::InvalidConfig(format!(
                    "explicit sizes {train_n}+{test_n} must be positive and sum to {n}"
                )));
            }
            train_n
        }
    };
    let by_class = d.class_indices();
    let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let quotas = class_quotas(&counts, target);
    let mut rng = SplitMix64::new(derive_seed(RESAMPLE_STREAM, plan.resample_id));
    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(n - target.min(n));
    for (class, mut members) in by_class.into_iter().enumerate() {
        if quotas[class] > members.len() {
            return Err(Error::QuotaExceedsClass {
                class,
                quota: quotas[class],
                available: members.len(),
            });
        }
        rng.shuffle(&mut members);
        train.extend_from_slice(&members[..quotas[class]]);
        test.extend_from_slice(&members[quotas[class]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(ResampleIndices { train, test })
}

/// Deterministic stratified train/test split. Identical inputs always give
/// identical outputs; the shuffle stream depends on the resample id only.
pub fn stratified_resample(d: &Dataset, plan: &ResamplePlan) -> Result<(Dataset, Dataset)> {
    let idx = stratified_indices(d, plan)?;
    Ok((d.subset(&idx.train), d.subset(&idx.test)))
}

/// Resample of a dataset that ships with a default split: resample 0 is the
/// supplied split itself, later ones reuse its train/test sizes.
pub fn resample_from_split(train: &Dataset, test: &Dataset, resample_id: u64) -> Result<(Dataset, Dataset)> {
    if resample_id == 0 {
        return Ok((train.clone(), test.clone()));
    }
    if train.n_attributes() != test.n_attributes() || train.class_names != test.class_names {
        return Err(Error::Schema("train and test splits disagree on attributes or classes".into()));
    }
    let mut values = train.values().to_vec();
    values.extend_from_slice(test.values());
    let mut labels = train.labels().to_vec();
    labels.extend_from_slice(test.labels());
    let merged = Dataset::from_parts(
        train.name.clone(),
        train.feature_names.clone(),
        values,
        labels,
        train.class_names.clone(),
    )?;
    let plan = ResamplePlan {
        resample_id,
        split: SplitSize::Sizes {
            train_n: train.n_cases(),
            test_n: test.n_cases(),
        },
    };
    stratified_resample(&merged, &plan)
}
