//! Incremental learners: the original online algorithm (expansion followed by
//! contraction against other classes) and IOL, which vetoes any expansion that
//! would overlap another class instead of contracting.
//!
//! With `config.accelerated` set, same-class candidates whose membership falls
//! below `1 - θ·γ_max` are dropped before sorting. Such a box can never satisfy
//! the size bound after expansion, so the learned model is unchanged; only the
//! number of candidates walked shrinks.

use std::time::Instant;

use crate::error::{GfmmError, Result};
use crate::geometry::{
    contract_in_place, expand_in_place, hull_within, overlap_raw, overlaps_other_class,
};
use crate::kernels::{membership_at_least, membership_raw};
use crate::model::{Bounds, Hyperbox, HyperparamConfig, Pattern, TrainStats, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnlineVariant {
    /// Expand the best candidate, then contract against overlapping boxes of
    /// other classes.
    Original,
    /// Expand the best candidate that does not overlap another class.
    Iol,
}

/// Lower bound on the membership of any box that can still be expanded to
/// cover a pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFilterBound {
    threshold: f64,
}

impl CandidateFilterBound {
    pub fn new(theta: f64, gamma: &[f64]) -> Self {
        let gamma_max = gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        CandidateFilterBound {
            threshold: 1.0 - theta * gamma_max,
        }
    }

    pub fn from_config(config: &HyperparamConfig) -> Self {
        CandidateFilterBound::new(config.theta, &config.gamma)
    }

    /// `1 - θ·γ_max`; may be negative, in which case nothing is filtered.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub(crate) fn shifted(self, by: f64) -> Self {
        CandidateFilterBound {
            threshold: self.threshold + by,
        }
    }
}

/// Keep the candidates whose membership is at least the bound, in order.
pub fn lemma1_filter<T>(candidates: Vec<(T, f64)>, bound: &CandidateFilterBound) -> Vec<(T, f64)> {
    candidates
        .into_iter()
        .filter(|(_, b)| *b >= bound.threshold)
        .collect()
}

pub(crate) fn validate_data(data: &[Pattern], config: &HyperparamConfig) -> Result<()> {
    config.validate()?;
    if data.is_empty() {
        return Err(GfmmError::domain("training data is empty"));
    }
    let n = config.dims();
    if let Some(p) = data.iter().find(|p| p.dims() != n) {
        return Err(GfmmError::DimensionMismatch {
            expected: n,
            found: p.dims(),
        });
    }
    Ok(())
}

/// Train an online model over `data` in the given order.
///
/// Extra epochs replay the same pass; IOL then counts already-covered samples
/// again in the cardinalities.
pub fn train_online(
    data: &[Pattern],
    config: &HyperparamConfig,
    variant: OnlineVariant,
) -> Result<TrainedModel> {
    train_online_shifted(data, config, variant, 0.0)
}

/// `bound_shift` moves the pruning threshold; non-zero values exist only to
/// check that the equivalence auditor notices an unsound bound.
pub(crate) fn train_online_shifted(
    data: &[Pattern],
    config: &HyperparamConfig,
    variant: OnlineVariant,
    bound_shift: f64,
) -> Result<TrainedModel> {
    validate_data(data, config)?;
    let theta = config.theta;
    let gamma = config.gamma.as_slice();
    let bound = config.accelerated.then(|| {
        CandidateFilterBound::from_config(config)
            .shifted(bound_shift)
            .threshold()
    });

    let start = Instant::now();
    let mut stats = TrainStats::default();
    let mut boxes: Vec<Hyperbox> = Vec::new();
    let mut by_class: Vec<Vec<usize>> = Vec::new();
    let mut candidates: Vec<(usize, f64)> = Vec::new();

    for _ in 0..config.epochs {
        for p in data {
            let label = p.label();
            if by_class.len() <= label {
                by_class.resize_with(label + 1, Vec::new);
            }
            let (xl, xu) = (p.lower(), p.upper());

            // A pattern wider than θ can never join an existing box of size <= θ.
            let mut placed = false;
            if p.max_width() <= theta {
                candidates.clear();
                for &bi in &by_class[label] {
                    let h = &boxes[bi];
                    match bound {
                        Some(t) => {
                            if let Some(b) = membership_at_least(xl, xu, h, gamma, t) {
                                candidates.push((bi, b));
                            }
                        }
                        None => candidates.push((bi, membership_raw(xl, xu, h, gamma))),
                    }
                }
                // stable: equal memberships keep box creation order
                candidates.sort_by(|a, b| b.1.total_cmp(&a.1));
                stats.candidates_considered += candidates.len() as u64;

                for &(bi, b) in &candidates {
                    if b == 1.0 {
                        if variant == OnlineVariant::Iol {
                            boxes[bi].cardinality += 1;
                        }
                        placed = true;
                        break;
                    }
                    if !hull_within(&boxes[bi].vmin, &boxes[bi].wmax, xl, xu, theta) {
                        continue;
                    }
                    match variant {
                        OnlineVariant::Original => {
                            expand_in_place(&mut boxes[bi], xl, xu);
                            boxes[bi].cardinality += 1;
                            contract_against_other_classes(&mut boxes, bi);
                            placed = true;
                            break;
                        }
                        OnlineVariant::Iol => {
                            let mut trial = boxes[bi].clone();
                            expand_in_place(&mut trial, xl, xu);
                            if !overlaps_other_class(&trial.vmin, &trial.wmax, label, &boxes) {
                                trial.cardinality += 1;
                                boxes[bi] = trial;
                                placed = true;
                                break;
                            }
                        }
                    }
                }
            }

            if !placed {
                by_class[label].push(boxes.len());
                boxes.push(Hyperbox::from_pattern(p));
                stats.boxes_created += 1;
            }
        }
    }

    stats.train_seconds = start.elapsed().as_secs_f64();
    Ok(TrainedModel {
        boxes,
        config: config.clone(),
        stats,
    })
}

fn contract_against_other_classes(boxes: &mut [Hyperbox], bi: usize) {
    let label = boxes[bi].label;
    for k in 0..boxes.len() {
        if k == bi || boxes[k].label == label {
            continue;
        }
        let (a, b) = pair_mut(boxes, bi, k);
        if let Some(dim) = overlap_raw(&a.vmin, &a.wmax, &b.vmin, &b.wmax).dim {
            contract_in_place(a, b, dim).expect("overlap test reported a matching case");
        }
    }
}

fn pair_mut<T>(xs: &mut [T], i: usize, k: usize) -> (&mut T, &mut T) {
    debug_assert_ne!(i, k);
    if i < k {
        let (lo, hi) = xs.split_at_mut(k);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = xs.split_at_mut(i);
        (&mut hi[0], &mut lo[k])
    }
}
