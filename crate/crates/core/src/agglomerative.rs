//! Batch learners that start from one box per pattern and repeatedly merge
//! same-class pairs.
//!
//! A merge requires the hull of the pair to stay within θ on every dimension
//! and to overlap no box of another class. Candidate pairs are visited in
//! descending similarity; equal similarities are ordered by the lower box
//! index, then the partner index. With `config.accelerated` the similarity
//! threshold rises from σ to `max(σ, 1 - θ·γ_max)`, which only removes pairs
//! whose hull would exceed θ.

use std::cmp::Ordering;
use std::time::Instant;

use crate::error::Result;
use crate::geometry::{hull_within, overlaps_other_class};
use crate::kernels::similarity_at_least;
use crate::model::{Hyperbox, HyperparamConfig, Pattern, TrainStats, TrainedModel};
use crate::online::validate_data;

/// Similarity threshold for pair candidates: `max(σ, 1 - θ·γ_max)`.
pub fn lemma2_bound(config: &HyperparamConfig) -> f64 {
    config.sigma.max(1.0 - config.theta * config.gamma_max())
}

fn pair_threshold(config: &HyperparamConfig, bound_shift: f64) -> f64 {
    if config.accelerated {
        config
            .sigma
            .max(1.0 - config.theta * config.gamma_max() + bound_shift)
    } else {
        config.sigma
    }
}

/// A same-class pair `(i, k)` with `i < k` and its similarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidatePair {
    pub i: usize,
    pub k: usize,
    pub s: f64,
}

fn pair_order(a: &CandidatePair, b: &CandidatePair) -> Ordering {
    b.s.total_cmp(&a.s).then(a.i.cmp(&b.i)).then(a.k.cmp(&b.k))
}

fn hull(a: &Hyperbox, b: &Hyperbox) -> (Vec<f64>, Vec<f64>) {
    let v = a.vmin.iter().zip(&b.vmin).map(|(x, y)| x.min(*y)).collect();
    let w = a.wmax.iter().zip(&b.wmax).map(|(x, y)| x.max(*y)).collect();
    (v, w)
}

fn absorb(target: &mut Hyperbox, v: Vec<f64>, w: Vec<f64>, cardinality: u64) {
    target.vmin = v;
    target.wmax = w;
    target.cardinality += cardinality;
}

fn initial_boxes(data: &[Pattern]) -> Vec<Hyperbox> {
    data.iter().map(Hyperbox::from_pattern).collect()
}

/// Agglomerative learning over the full same-class similarity matrix.
///
/// After each merge the candidate list is patched in place: pairs touching the
/// absorbed box disappear and pairs touching the merged box are recomputed.
/// Unchanged pairs keep their similarity, so this matches a full rebuild.
pub fn train_agglo_sm(data: &[Pattern], config: &HyperparamConfig) -> Result<TrainedModel> {
    train_agglo_sm_shifted(data, config, 0.0)
}

pub(crate) fn train_agglo_sm_shifted(
    data: &[Pattern],
    config: &HyperparamConfig,
    bound_shift: f64,
) -> Result<TrainedModel> {
    validate_data(data, config)?;
    let gamma = config.gamma.as_slice();
    let measure = config.measure;
    let theta = config.theta;
    let threshold = pair_threshold(config, bound_shift);

    let start = Instant::now();
    let mut stats = TrainStats {
        boxes_created: data.len() as u64,
        ..TrainStats::default()
    };
    let mut boxes = initial_boxes(data);
    let mut alive = vec![true; boxes.len()];
    let class_count = boxes.iter().map(|b| b.label + 1).max().unwrap_or(0);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
    for (id, b) in boxes.iter().enumerate() {
        by_class[b.label].push(id);
    }

    let mut pairs: Vec<CandidatePair> = Vec::new();
    for members in &by_class {
        for (a, &i) in members.iter().enumerate() {
            for &k in &members[a + 1..] {
                if let Some(s) =
                    similarity_at_least(&boxes[i], &boxes[k], gamma, measure, threshold)
                {
                    pairs.push(CandidatePair { i, k, s });
                }
            }
        }
    }
    pairs.sort_by(pair_order);

    let mut fresh: Vec<CandidatePair> = Vec::new();
    loop {
        stats.candidates_considered += pairs.len() as u64;
        let mut chosen = None;
        for p in &pairs {
            let (bi, bk) = (&boxes[p.i], &boxes[p.k]);
            if !hull_within(&bi.vmin, &bi.wmax, &bk.vmin, &bk.wmax, theta) {
                continue;
            }
            let (v, w) = hull(bi, bk);
            let others = boxes
                .iter()
                .zip(&alive)
                .filter(|(_, a)| **a)
                .map(|(b, _)| b);
            if !overlaps_other_class(&v, &w, bi.label, others) {
                chosen = Some((p.i, p.k, v, w));
                break;
            }
        }
        let Some((i, k, v, w)) = chosen else { break };

        let absorbed = boxes[k].cardinality;
        absorb(&mut boxes[i], v, w, absorbed);
        alive[k] = false;
        let label = boxes[i].label;
        by_class[label].retain(|&id| id != k);
        stats.merges_performed += 1;

        pairs.retain(|p| p.i != i && p.k != i && p.i != k && p.k != k);
        fresh.clear();
        for &j in &by_class[label] {
            if j == i {
                continue;
            }
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            if let Some(s) = similarity_at_least(&boxes[lo], &boxes[hi], gamma, measure, threshold)
            {
                fresh.push(CandidatePair { i: lo, k: hi, s });
            }
        }
        fresh.sort_by(pair_order);
        pairs = merge_sorted(std::mem::take(&mut pairs), &fresh);
    }

    let boxes = boxes
        .into_iter()
        .zip(alive)
        .filter_map(|(b, a)| a.then_some(b))
        .collect();
    stats.train_seconds = start.elapsed().as_secs_f64();
    Ok(TrainedModel {
        boxes,
        config: config.clone(),
        stats,
    })
}

fn merge_sorted(old: Vec<CandidatePair>, fresh: &[CandidatePair]) -> Vec<CandidatePair> {
    let mut out = Vec::with_capacity(old.len() + fresh.len());
    let mut a = old.into_iter().peekable();
    let mut b = fresh.iter().copied().peekable();
    loop {
        match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => {
                if pair_order(x, y) != Ordering::Greater {
                    out.push(a.next().unwrap());
                } else {
                    out.push(b.next().unwrap());
                }
            }
            (Some(_), None) => out.extend(a.by_ref()),
            (None, Some(_)) => out.extend(b.by_ref()),
            (None, None) => break,
        }
    }
    out
}

/// Agglomerative learning with a cursor over the box list: each box in turn
/// merges with its most similar admissible same-class partner.
pub fn train_agglo_2(data: &[Pattern], config: &HyperparamConfig) -> Result<TrainedModel> {
    train_agglo_2_shifted(data, config, 0.0)
}

pub(crate) fn train_agglo_2_shifted(
    data: &[Pattern],
    config: &HyperparamConfig,
    bound_shift: f64,
) -> Result<TrainedModel> {
    validate_data(data, config)?;
    let gamma = config.gamma.as_slice();
    let measure = config.measure;
    let theta = config.theta;
    let threshold = pair_threshold(config, bound_shift);

    let start = Instant::now();
    let mut stats = TrainStats {
        boxes_created: data.len() as u64,
        ..TrainStats::default()
    };
    let mut boxes = initial_boxes(data);
    let mut partners: Vec<(usize, f64)> = Vec::new();

    loop {
        let mut merged_any = false;
        let mut i = 0;
        while i < boxes.len() {
            let label = boxes[i].label;
            partners.clear();
            for (k, bk) in boxes.iter().enumerate() {
                if k == i || bk.label != label {
                    continue;
                }
                if let Some(s) = similarity_at_least(&boxes[i], bk, gamma, measure, threshold) {
                    partners.push((k, s));
                }
            }
            // stable: ties stay in ascending partner index
            partners.sort_by(|a, b| b.1.total_cmp(&a.1));
            stats.candidates_considered += partners.len() as u64;

            for &(k, _) in &partners {
                let (bi, bk) = (&boxes[i], &boxes[k]);
                if !hull_within(&bi.vmin, &bi.wmax, &bk.vmin, &bk.wmax, theta) {
                    continue;
                }
                let (v, w) = hull(bi, bk);
                if overlaps_other_class(&v, &w, label, &boxes) {
                    continue;
                }
                let absorbed = boxes[k].cardinality;
                absorb(&mut boxes[i], v, w, absorbed);
                boxes.remove(k);
                if i > k {
                    i -= 1;
                }
                stats.merges_performed += 1;
                merged_any = true;
                break;
            }
            i += 1;
        }
        if !merged_any {
            break;
        }
    }

    stats.train_seconds = start.elapsed().as_secs_f64();
    Ok(TrainedModel {
        boxes,
        config: config.clone(),
        stats,
    })
}
