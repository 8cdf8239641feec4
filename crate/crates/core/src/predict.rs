//! Classification: per-class fuzzy scores and crisp decisions with the two
//! tie policies (seeded random / lowest class for the original online model,
//! cardinality-weighted for IOL and the agglomerative models).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GfmmError, Result};
use crate::kernels::membership_raw;
use crate::model::{Bounds, ClassId, TrainedModel};

/// Per-class scores: the best membership among each class's boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    /// Indexed by class id; classes without boxes score 0.
    pub scores: Vec<f64>,
    /// Lowest class id attaining the maximal score.
    pub winner: ClassId,
    /// More than one class attains the maximal score.
    pub tie_broken: bool,
}

/// A crisp decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: ClassId,
    /// Membership of the winning box.
    pub score: f64,
    pub tie_broken: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiePolicy {
    /// Lowest class id among the tied classes.
    FirstClass,
    /// Uniform draw among the tied classes from a generator seeded with the value.
    Random(u64),
}

fn check_query<X: Bounds + ?Sized>(model: &TrainedModel, x: &X) -> Result<()> {
    if model.boxes.is_empty() {
        return Err(GfmmError::EmptyModel);
    }
    if x.dims() != model.dims() {
        return Err(GfmmError::DimensionMismatch {
            expected: model.dims(),
            found: x.dims(),
        });
    }
    Ok(())
}

fn memberships<X: Bounds + ?Sized>(model: &TrainedModel, x: &X) -> Vec<f64> {
    let gamma = &model.config.gamma;
    model
        .boxes
        .iter()
        .map(|h| membership_raw(x.lower(), x.upper(), h, gamma))
        .collect()
}

pub fn class_scores<X: Bounds + ?Sized>(model: &TrainedModel, x: &X) -> Result<ClassScores> {
    check_query(model, x)?;
    let mut scores = vec![0.0; model.class_count()];
    for (h, b) in model.boxes.iter().zip(memberships(model, x)) {
        scores[h.label] = f64::max(scores[h.label], b);
    }
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut tied = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == best)
        .map(|(c, _)| c);
    let winner = tied.next().expect("at least one class");
    let tie_broken = tied.next().is_some();
    Ok(ClassScores {
        scores,
        winner,
        tie_broken,
    })
}

/// Argmax class; exact ties are resolved by `tie`.
pub fn predict_online_original<X: Bounds + ?Sized>(
    model: &TrainedModel,
    x: &X,
    tie: TiePolicy,
) -> Result<Prediction> {
    let cs = class_scores(model, x)?;
    let score = cs.scores[cs.winner];
    let label = match (tie, cs.tie_broken) {
        (_, false) | (TiePolicy::FirstClass, true) => cs.winner,
        (TiePolicy::Random(seed), true) => {
            let tied: Vec<ClassId> = (0..cs.scores.len())
                .filter(|&c| cs.scores[c] == score)
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            tied[rng.gen_range(0..tied.len())]
        }
    };
    Ok(Prediction {
        label,
        score,
        tie_broken: cs.tie_broken,
    })
}

/// Boxes sharing the maximal membership, with that membership.
#[derive(Debug, Clone, PartialEq)]
pub struct WinningSet {
    pub b_win: f64,
    /// Model indices of the boxes attaining `b_win`, in model order.
    pub boxes: Vec<usize>,
}

pub fn winning_set<X: Bounds + ?Sized>(model: &TrainedModel, x: &X) -> Result<WinningSet> {
    check_query(model, x)?;
    let m = memberships(model, x);
    let b_win = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let boxes = (0..m.len()).filter(|&i| m[i] == b_win).collect();
    Ok(WinningSet { b_win, boxes })
}

/// Cardinality-weighted class probabilities over the winning boxes:
/// `P(c) = Σ_{j ∈ win, class c} n_j·b_j / Σ_{i ∈ win} n_i·b_i`, sorted by class.
///
/// When `b_win` is 0 the weights are all zero and the ratio degenerates to
/// 0/0; the membership factors then drop out and plain cardinalities are used,
/// which is the limit of the formula for equal positive `b`.
pub fn tie_probabilities(model: &TrainedModel, win: &WinningSet) -> Vec<(ClassId, f64)> {
    let weight = |i: usize| {
        let n = model.boxes[i].cardinality as f64;
        if win.b_win > 0.0 {
            n * win.b_win
        } else {
            n
        }
    };
    let total: f64 = win.boxes.iter().map(|&i| weight(i)).sum();
    let mut per_class: Vec<(ClassId, f64)> = Vec::new();
    for &i in &win.boxes {
        let label = model.boxes[i].label;
        match per_class.iter_mut().find(|(c, _)| *c == label) {
            Some((_, acc)) => *acc += weight(i),
            None => per_class.push((label, weight(i))),
        }
    }
    per_class.sort_by_key(|(c, _)| *c);
    for (_, p) in per_class.iter_mut() {
        *p /= total;
    }
    per_class
}

/// Decision rule for cardinality-tracking models.
///
/// A single winning class wins outright. Otherwise a fully-containing box
/// holding a single sample decides (first such box in model order), and
/// failing that the class with the largest cardinality-weighted probability
/// wins, lowest class id first on exact ties.
pub fn predict_iol<X: Bounds + ?Sized>(model: &TrainedModel, x: &X) -> Result<Prediction> {
    let win = winning_set(model, x)?;
    let first = model.boxes[win.boxes[0]].label;
    let single_class = win.boxes.iter().all(|&i| model.boxes[i].label == first);
    if single_class {
        return Ok(Prediction {
            label: first,
            score: win.b_win,
            tie_broken: false,
        });
    }
    if win.b_win == 1.0 {
        if let Some(&i) = win.boxes.iter().find(|&&i| model.boxes[i].cardinality == 1) {
            return Ok(Prediction {
                label: model.boxes[i].label,
                score: 1.0,
                tie_broken: true,
            });
        }
    }
    let probs = tie_probabilities(model, &win);
    let mut best = probs[0];
    for &(c, p) in &probs[1..] {
        if p > best.1 {
            best = (c, p);
        }
    }
    Ok(Prediction {
        label: best.0,
        score: win.b_win,
        tie_broken: true,
    })
}
