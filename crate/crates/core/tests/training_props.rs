mod common;

use gfmm::predict::{tie_probabilities, WinningSet};
use gfmm::verify::{audit_equivalence, audit_with_bound_shift, cross_class_overlaps};
use gfmm::{
    train, Algorithm, Bounds, Hyperbox, HyperparamConfig, Pattern, SimilarityMeasure, TrainStats,
    TrainedModel,
};
use proptest::prelude::*;

fn points(dims: usize) -> impl Strategy<Value = Vec<Pattern>> {
    // coarse grid so that duplicates and near neighbours are common
    proptest::collection::vec(
        (proptest::collection::vec(0u8..=20, dims), 0usize..3),
        2..50,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .map(|(x, l)| {
                Pattern::point(x.into_iter().map(|c| c as f64 / 20.0).collect(), l).unwrap()
            })
            .collect()
    })
}

fn settings() -> impl Strategy<Value = (Algorithm, SimilarityMeasure, f64, f64, f64)> {
    (
        proptest::sample::select(Algorithm::ALL.to_vec()),
        proptest::sample::select(SimilarityMeasure::ALL.to_vec()),
        proptest::sample::select(vec![0.05, 0.1, 0.2, 0.4]),
        proptest::sample::select(vec![0.5, 1.0, 4.0]),
        proptest::sample::select(vec![0.0, 0.3, 0.8]),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn pruning_never_changes_the_model(data in points(3), (algo, measure, theta, gamma, sigma) in settings()) {
        let config = HyperparamConfig::uniform(theta, gamma, 3).with_measure(measure).with_sigma(sigma);
        let r = audit_equivalence(&data, &config, algo).unwrap();
        prop_assert!(r.passed, "{:?}", r.first_divergence);
        prop_assert!(r.candidates_on <= r.candidates_off);
    }

    #[test]
    fn training_is_deterministic(data in points(2), (algo, measure, theta, gamma, sigma) in settings()) {
        let config = HyperparamConfig::uniform(theta, gamma, 2).with_measure(measure).with_sigma(sigma);
        let a = train(&data, &config, algo).unwrap();
        let b = train(&data, &config, algo).unwrap();
        prop_assert_eq!(a.first_divergence(&b), None);
    }

    #[test]
    fn boxes_respect_theta_and_keep_every_sample(data in points(3), (algo, measure, theta, _g, sigma) in settings()) {
        let config = HyperparamConfig::uniform(theta, 1.0, 3).with_measure(measure).with_sigma(sigma);
        let m = train(&data, &config, algo).unwrap();
        for b in m.boxes() {
            prop_assert!(b.max_width() <= theta || b.cardinality() == 1);
        }
        if algo == Algorithm::Onln {
            return Ok(());
        }
        let total: u64 = m.boxes().iter().map(|b| b.cardinality()).sum();
        prop_assert_eq!(total, data.len() as u64);
        let scan = cross_class_overlaps(&m);
        if algo.is_agglomerative() {
            prop_assert!(scan.overlapping.is_empty());
        } else {
            // IOL cannot stop a sample from landing inside another class's
            // box; the new point box it then creates is the only overlap.
            let point = |b: &Hyperbox| b.max_width() == 0.0;
            for &(i, j, _) in &scan.overlapping {
                prop_assert!(point(&m.boxes()[i]) || point(&m.boxes()[j]));
            }
        }
    }

    #[test]
    fn tie_weights_reduce_to_cardinalities(
        boxes in proptest::collection::vec((0usize..4, 1u64..1000), 2..12),
        b_win in 0.001..=1.0f64,
    ) {
        let hs: Vec<Hyperbox> = boxes
            .iter()
            .map(|&(l, n)| Hyperbox::new(vec![0.5], vec![0.5], l, n).unwrap())
            .collect();
        let model = TrainedModel::new(hs, HyperparamConfig::uniform(0.1, 1.0, 1), TrainStats::default()).unwrap();
        let win = WinningSet { b_win, boxes: (0..boxes.len()).collect() };
        let total: u64 = boxes.iter().map(|b| b.1).sum();
        for (class, p) in tie_probabilities(&model, &win) {
            let n: u64 = boxes.iter().filter(|b| b.0 == class).map(|b| b.1).sum();
            let expected = n as f64 / total as f64;
            prop_assert!(((p - expected) / expected).abs() < 1e-12, "class {} {} vs {}", class, p, expected);
        }
    }
}

#[test]
fn raised_bound_is_caught_by_the_audit() {
    for algo in Algorithm::ALL {
        let caught = (0..50).any(|seed| {
            let data = common::synthetic(seed);
            let config = HyperparamConfig::uniform(0.1, 1.0, data[0].lower().len());
            !audit_with_bound_shift(&data, &config, algo, 0.01)
                .unwrap()
                .passed
        });
        assert!(caught, "{algo}: shifted bound went unnoticed");
    }
}
