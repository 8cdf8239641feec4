//! Repeated k-fold benchmark: every learner is trained with and without
//! pruning on the same folds, the two models must agree, and timings,
//! candidate counts and accuracies are recorded per fold.

use std::io::Write;

use anyhow::{bail, Context, Result};
use gfmm::dataio::{self, broadcast_gamma, Dataset, MinMaxScaler, Table};
use gfmm::{Algorithm, HyperparamConfig, Pattern, SimilarityMeasure, TiePolicy, TrainedModel};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub theta: f64,
    /// One value for every feature, or one per feature.
    pub gamma: Vec<f64>,
    pub sigma: f64,
    pub algos: Vec<Algorithm>,
    pub measures: Vec<SimilarityMeasure>,
    pub repeats: usize,
    pub folds: usize,
    pub seed: u64,
    /// Train each cell this many times and keep the fastest.
    pub timing_repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            theta: 0.1,
            gamma: vec![1.0],
            sigma: 0.0,
            algos: Algorithm::ALL.to_vec(),
            measures: vec![SimilarityMeasure::Longest],
            repeats: 5,
            folds: 2,
            seed: 0,
            timing_repeats: 1,
        }
    }
}

/// One training run on one fold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub dataset: String,
    pub algo: String,
    /// `-` for the online learners.
    pub measure: String,
    pub accelerated: bool,
    pub repeat: usize,
    pub fold: usize,
    pub train_seconds: f64,
    pub candidates: u64,
    pub boxes: usize,
    pub accuracy: f64,
}

/// Aggregate over all folds of one (dataset, algo, measure) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub dataset: String,
    pub algo: String,
    pub measure: String,
    pub runs: usize,
    pub seconds_on: f64,
    pub seconds_off: f64,
    /// Mean over folds of time(off) / time(on).
    pub speedup: f64,
    pub candidates_on: f64,
    pub candidates_off: f64,
    /// Mean candidates(on) over mean candidates(off); 1 when both are 0.
    pub candidate_ratio: f64,
    pub accuracy: f64,
}

/// Fraction of `test` patterns classified correctly.
pub fn accuracy(model: &TrainedModel, test: &[Pattern], algo: Algorithm) -> Result<f64> {
    if test.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for x in test {
        if gfmm::predict(model, x, algo, TiePolicy::FirstClass)?.label == x.label() {
            hits += 1;
        }
    }
    Ok(hits as f64 / test.len() as f64)
}

fn timed_train(
    data: &[Pattern],
    config: &HyperparamConfig,
    algo: Algorithm,
    repeats: usize,
) -> Result<TrainedModel> {
    let mut best: Option<TrainedModel> = None;
    for _ in 0..repeats.max(1) {
        let m = gfmm::train(data, config, algo)?;
        match &best {
            Some(b) if b.stats().train_seconds <= m.stats().train_seconds => {}
            _ => best = Some(m),
        }
    }
    Ok(best.expect("at least one run"))
}

fn scaled_split(
    table: &Table,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<(Vec<Pattern>, Vec<Pattern>)> {
    let scaler = MinMaxScaler::fit(
        train_idx.iter().map(|&i| &table.rows[i]),
        table.feature_count,
    );
    let build = |idx: &[usize]| -> Result<Vec<Pattern>> {
        idx.iter()
            .map(|&i| {
                Ok(Pattern::point(
                    scaler.transform(&table.rows[i]),
                    table.labels[i],
                )?)
            })
            .collect()
    };
    Ok((build(train_idx)?, build(test_idx)?))
}

/// A dataset scaled once as a whole, or a raw table scaled per training fold.
pub enum BenchData {
    Scaled(Dataset),
    Raw { name: String, table: Table },
}

impl BenchData {
    pub fn name(&self) -> &str {
        match self {
            BenchData::Scaled(ds) => &ds.name,
            BenchData::Raw { name, .. } => name,
        }
    }

    fn labels(&self) -> Vec<usize> {
        match self {
            BenchData::Scaled(ds) => ds.labels(),
            BenchData::Raw { table, .. } => table.labels.clone(),
        }
    }

    fn feature_count(&self) -> usize {
        match self {
            BenchData::Scaled(ds) => ds.feature_count,
            BenchData::Raw { table, .. } => table.feature_count,
        }
    }

    fn split(
        &self,
        train_idx: &[usize],
        test_idx: &[usize],
    ) -> Result<(Vec<Pattern>, Vec<Pattern>)> {
        match self {
            BenchData::Scaled(ds) => Ok((ds.subset(train_idx), ds.subset(test_idx))),
            BenchData::Raw { table, .. } => scaled_split(table, train_idx, test_idx),
        }
    }
}

/// Run every configured cell on one dataset.
pub fn run_dataset(data: &BenchData, cfg: &BenchConfig) -> Result<Vec<RunRecord>> {
    let name = data.name();
    let plan = dataio::fold_plan_for_labels(&data.labels(), cfg.repeats, cfg.folds, cfg.seed)?;
    let gamma = broadcast_gamma(&cfg.gamma, data.feature_count())
        .with_context(|| format!("gamma for dataset `{name}`"))?;
    let mut records = Vec::new();
    for &algo in &cfg.algos {
        let measures: Vec<Option<SimilarityMeasure>> = if algo.is_agglomerative() {
            cfg.measures.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        for measure in measures {
            let base = HyperparamConfig {
                theta: cfg.theta,
                gamma: gamma.clone(),
                sigma: cfg.sigma,
                measure: measure.unwrap_or(SimilarityMeasure::Longest),
                accelerated: false,
                epochs: 1,
            };
            for r in 0..plan.repeats {
                for f in 0..plan.folds {
                    let test_idx = &plan.assignments[r][f];
                    let train_idx = plan.complement(r, f);
                    let (train, test) = data.split(&train_idx, test_idx)?;
                    let on = timed_train(
                        &train,
                        &base.clone().with_accelerated(true),
                        algo,
                        cfg.timing_repeats,
                    )?;
                    let off = timed_train(&train, &base, algo, cfg.timing_repeats)?;
                    if let Some(diff) = on.first_divergence(&off) {
                        bail!("{name} {algo} repeat {r} fold {f}: accelerated and plain models differ: {diff}");
                    }
                    let acc_on = accuracy(&on, &test, algo)?;
                    let acc_off = accuracy(&off, &test, algo)?;
                    if acc_on.to_bits() != acc_off.to_bits() {
                        bail!("{name} {algo} repeat {r} fold {f}: accuracy {acc_on} != {acc_off}");
                    }
                    for (model, accelerated, acc) in [(&on, true, acc_on), (&off, false, acc_off)] {
                        records.push(RunRecord {
                            dataset: name.to_string(),
                            algo: algo.name().to_string(),
                            measure: measure
                                .map_or_else(|| "-".to_string(), |m| m.name().to_string()),
                            accelerated,
                            repeat: r,
                            fold: f,
                            train_seconds: model.stats().train_seconds,
                            candidates: model.stats().candidates_considered,
                            boxes: model.boxes().len(),
                            accuracy: acc,
                        });
                    }
                }
            }
        }
    }
    Ok(records)
}

/// Group records by (dataset, algo, measure) in first-seen order.
pub fn summarize(records: &[RunRecord]) -> Vec<Summary> {
    let mut keys: Vec<(&str, &str, &str)> = Vec::new();
    for r in records {
        let k = (r.dataset.as_str(), r.algo.as_str(), r.measure.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(dataset, algo, measure)| {
            let cell: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.dataset == dataset && r.algo == algo && r.measure == measure)
                .collect();
            let side = |acc: bool| -> Vec<&RunRecord> {
                cell.iter()
                    .copied()
                    .filter(|r| r.accelerated == acc)
                    .collect()
            };
            let (on, off) = (side(true), side(false));
            let mean = |xs: &[&RunRecord], f: &dyn Fn(&RunRecord) -> f64| -> f64 {
                if xs.is_empty() {
                    0.0
                } else {
                    xs.iter().map(|r| f(r)).sum::<f64>() / xs.len() as f64
                }
            };
            let ratios: Vec<f64> = on
                .iter()
                .filter_map(|a| {
                    off.iter()
                        .find(|b| b.repeat == a.repeat && b.fold == a.fold)
                        .map(|b| b.train_seconds / a.train_seconds)
                })
                .collect();
            let speedup = if ratios.is_empty() {
                f64::NAN
            } else {
                ratios.iter().sum::<f64>() / ratios.len() as f64
            };
            let candidates_on = mean(&on, &|r| r.candidates as f64);
            let candidates_off = mean(&off, &|r| r.candidates as f64);
            Summary {
                dataset: dataset.to_string(),
                algo: algo.to_string(),
                measure: measure.to_string(),
                runs: on.len(),
                seconds_on: mean(&on, &|r| r.train_seconds),
                seconds_off: mean(&off, &|r| r.train_seconds),
                speedup,
                candidates_on,
                candidates_off,
                candidate_ratio: if candidates_off > 0.0 {
                    candidates_on / candidates_off
                } else {
                    1.0
                },
                accuracy: mean(&on, &|r| r.accuracy),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
