//! CSV datasets, min-max scaling, cross-validation fold plans and the JSON
//! model file.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GfmmError, Result};
use crate::model::{ClassId, Hyperbox, HyperparamConfig, Pattern, TrainStats, TrainedModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Which CSV column holds the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CsvOptions {
    pub header: bool,
    pub label_column: LabelColumn,
    /// Min-max scale every feature over the whole file.
    pub normalize: bool,
}

/// Raw numeric rows with dense class ids, before any scaling.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<ClassId>,
    /// Original label text, indexed by class id (ids follow first appearance).
    pub label_names: Vec<String>,
    pub feature_count: usize,
}

/// Labelled point patterns in the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub patterns: Vec<Pattern>,
    pub feature_count: usize,
    pub class_count: usize,
    pub label_names: Vec<String>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Vec<Pattern> {
        indices.iter().map(|&i| self.patterns[i].clone()).collect()
    }

    pub fn labels(&self) -> Vec<ClassId> {
        self.patterns.iter().map(Pattern::label).collect()
    }

    pub fn from_table(name: impl Into<String>, table: &Table) -> Result<Dataset> {
        let patterns = table
            .rows
            .iter()
            .zip(&table.labels)
            .map(|(r, &l)| Pattern::point(r.clone(), l))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            name: name.into(),
            patterns,
            feature_count: table.feature_count,
            class_count: table.label_names.len(),
            label_names: table.label_names.clone(),
        })
    }
}

fn parse_err(line: u64, msg: impl Into<String>) -> GfmmError {
    GfmmError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parse CSV text into a [`Table`]. Blank lines are skipped; every other row
/// must have the same number of fields.
pub fn parse_table<R: Read>(reader: R, opts: &CsvOptions) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut table = Table::default();
    let mut width: Option<usize> = None;
    if opts.header {
        let h = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?;
        if !h.is_empty() {
            width = Some(h.len());
        }
    }
    let mut ids: HashMap<String, ClassId> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let n = *width.get_or_insert(rec.len());
        if rec.len() != n {
            return Err(parse_err(
                line,
                format!("expected {n} fields, found {}", rec.len()),
            ));
        }
        if n < 2 {
            return Err(parse_err(line, "need at least one feature and a label"));
        }
        let label_at = match opts.label_column {
            LabelColumn::Last => n - 1,
            LabelColumn::Index(i) if i < n => i,
            LabelColumn::Index(i) => {
                return Err(parse_err(
                    line,
                    format!("label column {i} out of range for {n} fields"),
                ))
            }
        };
        let mut row = Vec::with_capacity(n - 1);
        for (j, field) in rec.iter().enumerate() {
            if j == label_at {
                continue;
            }
            let x: f64 = field.parse().map_err(|_| {
                parse_err(line, format!("field {} is not a number: `{field}`", j + 1))
            })?;
            if !x.is_finite() {
                return Err(parse_err(
                    line,
                    format!("field {} is not finite: `{field}`", j + 1),
                ));
            }
            row.push(x);
        }
        let name = &rec[label_at];
        let next = ids.len();
        let id = *ids.entry(name.to_string()).or_insert_with(|| {
            table.label_names.push(name.to_string());
            next
        });
        table.rows.push(row);
        table.labels.push(id);
    }
    table.feature_count = width.map_or(0, |n| n.saturating_sub(1));
    Ok(table)
}

/// Per-feature min-max scaler. Constant features map to 0; values outside
/// the fitted range are clamped into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit<'a, I>(rows: I, feature_count: usize) -> Self
    where
        I: IntoIterator<Item = &'a Vec<f64>>,
    {
        let mut min = vec![f64::INFINITY; feature_count];
        let mut max = vec![f64::NEG_INFINITY; feature_count];
        for r in rows {
            for j in 0..feature_count {
                min[j] = min[j].min(r[j]);
                max[j] = max[j].max(r[j]);
            }
        }
        MinMaxScaler { min, max }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &x)| {
                let range = self.max[j] - self.min[j];
                if range > 0.0 {
                    ((x - self.min[j]) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Scale every column of `rows` to `[0, 1]` in place.
pub fn normalize_rows(rows: &mut [Vec<f64>], feature_count: usize) {
    let scaler = MinMaxScaler::fit(rows.iter(), feature_count);
    for r in rows.iter_mut() {
        *r = scaler.transform(r);
    }
}

/// Parse CSV text into a [`Dataset`] named `name`.
pub fn parse_csv<R: Read>(reader: R, opts: &CsvOptions, name: &str) -> Result<Dataset> {
    let mut table = parse_table(reader, opts)?;
    if opts.normalize {
        normalize_rows(&mut table.rows, table.feature_count);
    } else if let Some((i, j, x)) = table.rows.iter().enumerate().find_map(|(i, r)| {
        r.iter()
            .position(|x| !(0.0..=1.0).contains(x))
            .map(|j| (i, j, r[j]))
    }) {
        return Err(GfmmError::domain(format!(
            "row {} feature {} = {x} lies outside [0, 1]; enable normalization",
            i + 1,
            j + 1
        )));
    }
    if table.label_names.len() == 1 {
        log::warn!("dataset `{name}` has a single class");
    }
    Dataset::from_table(name, &table)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn read_table(path: &Path, opts: &CsvOptions) -> Result<Table> {
    let f = File::open(path).map_err(|e| GfmmError::io(path, e))?;
    parse_table(f, opts)
}

/// Load a CSV file; the dataset is named after the file stem.
pub fn load_csv(path: &Path, opts: &CsvOptions) -> Result<Dataset> {
    let f = File::open(path).map_err(|e| GfmmError::io(path, e))?;
    parse_csv(f, opts, &stem(path))
}

/// Shuffled partitions of pattern indices for repeated k-fold validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub repeats: usize,
    pub folds: usize,
    pub seed: u64,
    /// Whether folds were balanced per class.
    pub stratified: bool,
    /// `assignments[r][f]`: ascending indices of fold `f` in repeat `r`.
    pub assignments: Vec<Vec<Vec<usize>>>,
}

impl FoldPlan {
    /// Indices of every fold of repeat `r` except `f`, ascending.
    pub fn complement(&self, r: usize, f: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.assignments[r]
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Stratified when every class has at least `folds` members: each class is
/// shuffled and dealt round-robin, continuing the deal across classes so fold
/// sizes differ by at most one.
pub fn make_fold_plan(ds: &Dataset, repeats: usize, folds: usize, seed: u64) -> Result<FoldPlan> {
    fold_plan_for_labels(&ds.labels(), repeats, folds, seed)
}

/// [`make_fold_plan`] over bare class ids.
pub fn fold_plan_for_labels(
    labels: &[ClassId],
    repeats: usize,
    folds: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if folds < 2 {
        return Err(GfmmError::Config(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if repeats == 0 {
        return Err(GfmmError::Config("need at least 1 repeat".into()));
    }
    if folds > labels.len() {
        return Err(GfmmError::domain(format!(
            "{folds} folds requested for {} patterns",
            labels.len()
        )));
    }
    let class_count = labels.iter().map(|l| l + 1).max().unwrap_or(0);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    by_class.retain(|c| !c.is_empty());
    let stratified = by_class.iter().all(|c| c.len() >= folds);
    if !stratified {
        log::warn!("some class has fewer than {folds} members; folds are not stratified");
    }
    let mut assignments = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let mut plan = vec![Vec::new(); folds];
        let groups = if stratified {
            by_class.clone()
        } else {
            vec![(0..labels.len()).collect()]
        };
        let mut deal = 0;
        for mut g in groups {
            g.shuffle(&mut rng);
            for i in g {
                plan[deal % folds].push(i);
                deal += 1;
            }
        }
        for f in plan.iter_mut() {
            f.sort_unstable();
        }
        assignments.push(plan);
    }
    Ok(FoldPlan {
        repeats,
        folds,
        seed,
        stratified,
        assignments,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxRecord {
    v: Vec<f64>,
    w: Vec<f64>,
    label: ClassId,
    cardinality: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    config: HyperparamConfig,
    boxes: Vec<BoxRecord>,
    stats: TrainStats,
    /// Original label text per class id, when the trainer knew it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    class_names: Option<Vec<String>>,
}

pub fn model_to_string(model: &TrainedModel) -> String {
    model_to_string_named(model, None)
}

/// Serialize with optional class names stored next to the boxes.
pub fn model_to_string_named(model: &TrainedModel, class_names: Option<&[String]>) -> String {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        config: model.config.clone(),
        boxes: model
            .boxes
            .iter()
            .map(|b| BoxRecord {
                v: b.vmin.clone(),
                w: b.wmax.clone(),
                label: b.label,
                cardinality: b.cardinality,
            })
            .collect(),
        stats: model.stats.clone(),
        class_names: class_names.map(<[String]>::to_vec),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

/// Parse a model file. A model without boxes loads; prediction rejects it.
pub fn model_from_str(text: &str) -> Result<TrainedModel> {
    model_from_str_named(text).map(|(m, _)| m)
}

/// Parse a model file together with its stored class names, if any.
pub fn model_from_str_named(text: &str) -> Result<(TrainedModel, Option<Vec<String>>)> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| GfmmError::Schema(e.to_string()))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| GfmmError::Schema("missing field `format_version`".into()))?
        .as_u64()
        .ok_or_else(|| GfmmError::Schema("`format_version` must be an unsigned integer".into()))?;
    if version != u64::from(MODEL_FORMAT_VERSION) {
        return Err(GfmmError::Version {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| GfmmError::Schema(e.to_string()))?;
    let boxes = file
        .boxes
        .into_iter()
        .map(|b| Hyperbox::new(b.v, b.w, b.label, b.cardinality))
        .collect::<Result<Vec<_>>>()?;
    let model = TrainedModel::new(boxes, file.config, file.stats)?;
    if let Some(names) = &file.class_names {
        if names.len() < model.class_count() {
            return Err(GfmmError::Schema(format!(
                "{} class names for {} classes",
                names.len(),
                model.class_count()
            )));
        }
    }
    Ok((model, file.class_names))
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    save_model_named(model, None, path)
}

pub fn save_model_named(
    model: &TrainedModel,
    class_names: Option<&[String]>,
    path: &Path,
) -> Result<()> {
    std::fs::write(path, model_to_string_named(model, class_names))
        .map_err(|e| GfmmError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    load_model_named(path).map(|(m, _)| m)
}

pub fn load_model_named(path: &Path) -> Result<(TrainedModel, Option<Vec<String>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| GfmmError::io(path, e))?;
    model_from_str_named(&text)
}

/// Parse `"1"` or `"1,0.5,2"` into sensitivities; every entry must be a
/// positive finite number.
pub fn parse_gamma_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let g: f64 = part
            .parse()
            .map_err(|_| GfmmError::Config(format!("gamma entry `{part}` is not a number")))?;
        if !(g.is_finite() && g > 0.0) {
            return Err(GfmmError::Config(format!(
                "gamma entry `{part}` must be > 0"
            )));
        }
        out.push(g);
    }
    Ok(out)
}

/// Expand a gamma list to `dims` entries: a single value is repeated,
/// otherwise the length must match.
pub fn broadcast_gamma(gamma: &[f64], dims: usize) -> Result<Vec<f64>> {
    match gamma.len() {
        1 => Ok(vec![gamma[0]; dims]),
        n if n == dims => Ok(gamma.to_vec()),
        n => Err(GfmmError::DimensionMismatch {
            expected: dims,
            found: n,
        }),
    }
}
