//! Domain types shared by every learner: input patterns, hyperboxes,
//! hyperparameters and trained models.

use serde::{Deserialize, Serialize};

use crate::error::{GfmmError, Result};
use crate::kernels::SimilarityMeasure;

/// Dense class identifier, assigned by first appearance in the training data.
pub type ClassId = usize;

/// Anything with a lower and an upper corner in the unit hypercube.
pub trait Bounds {
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];

    fn dims(&self) -> usize {
        self.lower().len()
    }
}

fn check_corners(lower: &[f64], upper: &[f64], what: &str) -> Result<()> {
    if lower.is_empty() {
        return Err(GfmmError::domain(format!(
            "{what} must have at least one dimension"
        )));
    }
    if lower.len() != upper.len() {
        return Err(GfmmError::DimensionMismatch {
            expected: lower.len(),
            found: upper.len(),
        });
    }
    for (j, (&lo, &hi)) in lower.iter().zip(upper).enumerate() {
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
            return Err(GfmmError::domain(format!(
                "{what} coordinate {j} = [{lo}, {hi}] lies outside [0, 1]"
            )));
        }
        if lo > hi {
            return Err(GfmmError::domain(format!(
                "{what} lower bound {lo} exceeds upper bound {hi} on dimension {j}"
            )));
        }
    }
    Ok(())
}

/// A labelled input `[X^l, X^u, l_X]`. Crisp points have `lower == upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    lower: Vec<f64>,
    upper: Vec<f64>,
    label: ClassId,
}

impl Pattern {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, label: ClassId) -> Result<Self> {
        check_corners(&lower, &upper, "pattern")?;
        Ok(Pattern {
            lower,
            upper,
            label,
        })
    }

    /// Degenerate pattern with both corners at `coords`.
    pub fn point(coords: Vec<f64>, label: ClassId) -> Result<Self> {
        let upper = coords.clone();
        Pattern::new(coords, upper, label)
    }

    pub fn label(&self) -> ClassId {
        self.label
    }

    /// Largest per-dimension width `x^u_j - x^l_j`.
    pub fn max_width(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .fold(0.0, f64::max)
    }
}

impl Bounds for Pattern {
    fn lower(&self) -> &[f64] {
        &self.lower
    }
    fn upper(&self) -> &[f64] {
        &self.upper
    }
}

/// Convenience constructor for a crisp point pattern.
pub fn make_point_pattern(coords: &[f64], label: ClassId) -> Result<Pattern> {
    Pattern::point(coords.to_vec(), label)
}

/// Axis-aligned box `[V, W]` representing a region of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperbox {
    pub(crate) vmin: Vec<f64>,
    pub(crate) wmax: Vec<f64>,
    pub(crate) label: ClassId,
    pub(crate) cardinality: u64,
}

impl Hyperbox {
    pub fn new(vmin: Vec<f64>, wmax: Vec<f64>, label: ClassId, cardinality: u64) -> Result<Self> {
        check_corners(&vmin, &wmax, "hyperbox")?;
        if cardinality == 0 {
            return Err(GfmmError::domain("hyperbox cardinality must be at least 1"));
        }
        Ok(Hyperbox {
            vmin,
            wmax,
            label,
            cardinality,
        })
    }

    pub fn from_pattern(p: &Pattern) -> Self {
        Hyperbox {
            vmin: p.lower.clone(),
            wmax: p.upper.clone(),
            label: p.label,
            cardinality: 1,
        }
    }

    pub fn vmin(&self) -> &[f64] {
        &self.vmin
    }

    pub fn wmax(&self) -> &[f64] {
        &self.wmax
    }

    pub fn label(&self) -> ClassId {
        self.label
    }

    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    pub fn max_width(&self) -> f64 {
        self.vmin
            .iter()
            .zip(&self.wmax)
            .map(|(v, w)| w - v)
            .fold(0.0, f64::max)
    }

    /// Bitwise equality of coordinates, label and cardinality.
    pub fn bit_eq(&self, other: &Hyperbox) -> bool {
        fn same(a: &[f64], b: &[f64]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        }
        self.label == other.label
            && self.cardinality == other.cardinality
            && same(&self.vmin, &other.vmin)
            && same(&self.wmax, &other.wmax)
    }
}

impl Bounds for Hyperbox {
    fn lower(&self) -> &[f64] {
        &self.vmin
    }
    fn upper(&self) -> &[f64] {
        &self.wmax
    }
}

/// New single-sample box with the pattern's corners and label.
pub fn box_from_pattern(p: &Pattern) -> Hyperbox {
    Hyperbox::from_pattern(p)
}

/// Learning algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Original online learner with contraction.
    Onln,
    /// Improved online learner: overlap veto instead of contraction.
    Iol,
    /// Agglomerative learner over the full pairwise similarity matrix.
    AggloSm,
    /// Agglomerative learner with a per-box partner scan.
    Agglo2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Onln,
        Algorithm::Iol,
        Algorithm::AggloSm,
        Algorithm::Agglo2,
    ];

    pub fn is_agglomerative(self) -> bool {
        matches!(self, Algorithm::AggloSm | Algorithm::Agglo2)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Onln => "onln",
            Algorithm::Iol => "iol",
            Algorithm::AggloSm => "agglo-sm",
            Algorithm::Agglo2 => "agglo-2",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = GfmmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "onln" => Ok(Algorithm::Onln),
            "iol" => Ok(Algorithm::Iol),
            "agglo-sm" => Ok(Algorithm::AggloSm),
            "agglo-2" => Ok(Algorithm::Agglo2),
            other => Err(GfmmError::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Hyperparameters shared by all learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparamConfig {
    /// Maximum hyperbox size per dimension.
    pub theta: f64,
    /// Per-dimension sensitivity of the membership decay.
    pub gamma: Vec<f64>,
    /// Minimum similarity for agglomerative merging.
    pub sigma: f64,
    pub measure: SimilarityMeasure,
    /// Prune candidates with the membership / similarity lower bound.
    pub accelerated: bool,
    pub epochs: u32,
}

impl HyperparamConfig {
    /// Config with uniform sensitivity `gamma` over `dims` dimensions and the
    /// remaining fields at their defaults (σ = 0, longest measure, unaccelerated,
    /// one epoch).
    pub fn uniform(theta: f64, gamma: f64, dims: usize) -> Self {
        HyperparamConfig {
            theta,
            gamma: vec![gamma; dims],
            sigma: 0.0,
            measure: SimilarityMeasure::Longest,
            accelerated: false,
            epochs: 1,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_measure(mut self, measure: SimilarityMeasure) -> Self {
        self.measure = measure;
        self
    }

    pub fn with_accelerated(mut self, accelerated: bool) -> Self {
        self.accelerated = accelerated;
        self
    }

    pub fn with_epochs(mut self, epochs: u32) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn dims(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(GfmmError::Config(format!(
                "theta must be > 0, got {}",
                self.theta
            )));
        }
        if self.gamma.is_empty() {
            return Err(GfmmError::Config(
                "gamma must have at least one entry".into(),
            ));
        }
        if let Some(g) = self.gamma.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(GfmmError::Config(format!(
                "every gamma must be > 0, got {g}"
            )));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(GfmmError::Config(format!(
                "sigma must lie in [0, 1], got {}",
                self.sigma
            )));
        }
        if self.epochs == 0 {
            return Err(GfmmError::Config("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Counters collected while training.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Hyperboxes (online) or pairs (agglomerative) that entered the
    /// expansion / merge scan, summed over the whole run.
    pub candidates_considered: u64,
    pub train_seconds: f64,
    pub boxes_created: u64,
    pub merges_performed: u64,
}

/// Ordered hyperbox collection plus the config and statistics that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub(crate) boxes: Vec<Hyperbox>,
    pub(crate) config: HyperparamConfig,
    pub(crate) stats: TrainStats,
}

impl TrainedModel {
    pub fn new(boxes: Vec<Hyperbox>, config: HyperparamConfig, stats: TrainStats) -> Result<Self> {
        config.validate()?;
        let n = config.dims();
        for b in &boxes {
            if b.vmin.len() != n {
                return Err(GfmmError::DimensionMismatch {
                    expected: n,
                    found: b.vmin.len(),
                });
            }
            check_corners(&b.vmin, &b.wmax, "hyperbox")?;
            if b.cardinality == 0 {
                return Err(GfmmError::domain("hyperbox cardinality must be at least 1"));
            }
        }
        Ok(TrainedModel {
            boxes,
            config,
            stats,
        })
    }

    pub fn boxes(&self) -> &[Hyperbox] {
        &self.boxes
    }

    pub fn config(&self) -> &HyperparamConfig {
        &self.config
    }

    pub fn stats(&self) -> &TrainStats {
        &self.stats
    }

    pub fn dims(&self) -> usize {
        self.config.dims()
    }

    /// One past the largest class id present in the model.
    pub fn class_count(&self) -> usize {
        self.boxes.iter().map(|b| b.label + 1).max().unwrap_or(0)
    }

    /// Index and description of the first box where `self` and `other` differ.
    pub fn first_divergence(&self, other: &TrainedModel) -> Option<String> {
        for (i, (a, b)) in self.boxes.iter().zip(&other.boxes).enumerate() {
            if !a.bit_eq(b) {
                return Some(format!("box {i}: {a:?} != {b:?}"));
            }
        }
        if self.boxes.len() != other.boxes.len() {
            return Some(format!(
                "box count {} != {}",
                self.boxes.len(),
                other.boxes.len()
            ));
        }
        None
    }
}
