use gfmm::dataio::{
    fold_plan_for_labels, model_from_str, model_to_string, parse_csv, CsvOptions, MinMaxScaler,
};
use gfmm::{train, Algorithm, HyperparamConfig, Pattern};
use proptest::prelude::*;

fn points(dims: usize) -> impl Strategy<Value = Vec<Pattern>> {
    proptest::collection::vec(
        (proptest::collection::vec(0.0..=1.0f64, dims), 0usize..3),
        3..40,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .map(|(x, l)| Pattern::point(x, l).unwrap())
            .collect()
    })
}

proptest! {
    #[test]
    fn model_text_round_trips(data in points(3), algo in proptest::sample::select(Algorithm::ALL.to_vec())) {
        let model = train(&data, &HyperparamConfig::uniform(0.2, 1.0, 3), algo).unwrap();
        let back = model_from_str(&model_to_string(&model)).unwrap();
        prop_assert_eq!(back, model);
    }

    #[test]
    fn scaling_twice_changes_nothing(rows in proptest::collection::vec(proptest::collection::vec(-50.0..50.0f64, 4), 1..30)) {
        let first = MinMaxScaler::fit(rows.iter(), 4);
        let once: Vec<Vec<f64>> = rows.iter().map(|r| first.transform(r)).collect();
        let second = MinMaxScaler::fit(once.iter(), 4);
        let twice: Vec<Vec<f64>> = once.iter().map(|r| second.transform(r)).collect();
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.iter().flatten().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn csv_values_survive_parsing(rows in proptest::collection::vec((proptest::collection::vec(0.0..=1.0f64, 2), 0usize..3), 1..20)) {
        let mut text = String::from("a,b,class\n");
        for (x, l) in &rows {
            text.push_str(&format!("{},{},c{}\n", x[0], x[1], l));
        }
        let opts = CsvOptions { header: true, ..CsvOptions::default() };
        let ds = parse_csv(text.as_bytes(), &opts, "t").unwrap();
        prop_assert_eq!(ds.len(), rows.len());
        for (p, (x, _)) in ds.patterns.iter().zip(&rows) {
            prop_assert_eq!(gfmm::Bounds::lower(p), x.as_slice());
        }
    }

    #[test]
    fn folds_partition_and_stratify(
        labels in proptest::collection::vec(0usize..4, 10..80),
        folds in 2usize..5,
        seed in any::<u64>(),
    ) {
        prop_assume!(labels.len() >= folds);
        let plan = fold_plan_for_labels(&labels, 2, folds, seed).unwrap();
        let classes = labels.iter().max().unwrap() + 1;
        for r in 0..2 {
            let mut seen: Vec<usize> = plan.assignments[r].iter().flatten().copied().collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..labels.len()).collect::<Vec<_>>());
            if !plan.stratified {
                continue;
            }
            for c in 0..classes {
                let per_fold: Vec<usize> = plan.assignments[r]
                    .iter()
                    .map(|f| f.iter().filter(|&&i| labels[i] == c).count())
                    .collect();
                let (lo, hi) = (per_fold.iter().min().unwrap(), per_fold.iter().max().unwrap());
                prop_assert!(hi - lo <= 1, "class {} spread {:?}", c, per_fold);
            }
        }
    }

    #[test]
    fn fold_plans_are_reproducible(labels in proptest::collection::vec(0usize..3, 6..50), seed in any::<u64>()) {
        let a = fold_plan_for_labels(&labels, 3, 2, seed).unwrap();
        let b = fold_plan_for_labels(&labels, 3, 2, seed).unwrap();
        prop_assert_eq!(a.assignments, b.assignments);
    }
}
