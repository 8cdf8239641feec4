#![allow(dead_code)]

use std::path::PathBuf;

use gfmm::dataio::{load_csv, CsvOptions, Dataset};
use gfmm::{ClassId, Pattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Every CSV under the shared data directory, sorted by name.
pub fn bundled() -> Vec<Dataset> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(data_dir())
        .expect("data directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            load_csv(
                p,
                &CsvOptions {
                    header: true,
                    normalize: true,
                    ..CsvOptions::default()
                },
            )
            .expect("bundled csv")
        })
        .collect()
}

/// Clustered points in the unit cube; close enough that many boxes grow
/// and merge at theta = 0.1, with some classes sharing clusters.
pub fn synthetic(seed: u64) -> Vec<Pattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(30..120);
    let dims = rng.gen_range(2..6);
    let classes = rng.gen_range(2..5);
    let clusters = rng.gen_range(2..7);
    let centres: Vec<(Vec<f64>, ClassId)> = (0..clusters)
        .map(|_| {
            (
                (0..dims).map(|_| rng.gen::<f64>()).collect(),
                rng.gen_range(0..classes),
            )
        })
        .collect();
    let spread = rng.gen_range(0.02..0.2);
    (0..n)
        .map(|i| {
            let (c, label) = &centres[rng.gen_range(0..clusters)];
            let label = if i < classes { i } else { *label };
            let x: Vec<f64> = c
                .iter()
                .map(|&m| (m + rng.gen_range(-spread..spread)).clamp(0.0, 1.0))
                .collect();
            Pattern::point(x, label).unwrap()
        })
        .collect()
}

/// Uniform points in `[0,1]^dims` with random labels.
pub fn uniform(seed: u64, n: usize, dims: usize, classes: usize) -> Vec<Pattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
            Pattern::point(x, rng.gen_range(0..classes)).unwrap()
        })
        .collect()
}
