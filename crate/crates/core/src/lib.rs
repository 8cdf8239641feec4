//! General fuzzy min-max (GFMM) hyperbox classifiers.
//!
//! Four learners build a model of class-labelled hyperboxes: the original
//! online learner with contraction, the improved online learner that refuses
//! cross-class overlap, and two agglomerative learners. Each can prune its
//! candidate scan with a lower bound on membership or similarity derived from
//! the maximum box size; pruning never changes the trained model.
//!
//! ```
//! use gfmm::{train, Algorithm, HyperparamConfig, Pattern};
//!
//! let data = vec![
//!     Pattern::point(vec![0.10, 0.20], 0).unwrap(),
//!     Pattern::point(vec![0.15, 0.22], 0).unwrap(),
//!     Pattern::point(vec![0.80, 0.90], 1).unwrap(),
//! ];
//! let config = HyperparamConfig::uniform(0.1, 1.0, 2).with_accelerated(true);
//! let model = train(&data, &config, Algorithm::Iol).unwrap();
//! assert_eq!(model.boxes().len(), 2);
//! ```

pub mod agglomerative;
pub mod dataio;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod model;
pub mod online;
pub mod predict;
pub mod verify;

pub use error::{GfmmError, Result};
pub use kernels::SimilarityMeasure;
pub use model::{
    Algorithm, Bounds, ClassId, Hyperbox, HyperparamConfig, Pattern, TrainStats, TrainedModel,
};
pub use online::OnlineVariant;
pub use predict::{Prediction, TiePolicy};

/// Train `algo` on `data` in the given order.
pub fn train(data: &[Pattern], config: &HyperparamConfig, algo: Algorithm) -> Result<TrainedModel> {
    train_with_bound_shift(data, config, algo, 0.0)
}

pub(crate) fn train_with_bound_shift(
    data: &[Pattern],
    config: &HyperparamConfig,
    algo: Algorithm,
    shift: f64,
) -> Result<TrainedModel> {
    match algo {
        Algorithm::Onln => {
            online::train_online_shifted(data, config, OnlineVariant::Original, shift)
        }
        Algorithm::Iol => online::train_online_shifted(data, config, OnlineVariant::Iol, shift),
        Algorithm::AggloSm => agglomerative::train_agglo_sm_shifted(data, config, shift),
        Algorithm::Agglo2 => agglomerative::train_agglo_2_shifted(data, config, shift),
    }
}

/// Crisp decision with the rule that fits the algorithm: cardinality-weighted
/// tie-breaking for everything except the original online learner, which
/// uses `tie`.
pub fn predict(
    model: &TrainedModel,
    x: &Pattern,
    algo: Algorithm,
    tie: TiePolicy,
) -> Result<Prediction> {
    match algo {
        Algorithm::Onln => predict::predict_online_original(model, x, tie),
        _ => predict::predict_iol(model, x),
    }
}
