//! Brute-force checks of the two pruning bounds, the accelerated-vs-plain
//! equivalence auditor and a cross-class overlap scan.
//!
//! The oracles draw (box, pattern) or (box, box) pairs one dimension at a
//! time: each dimension first picks one of the six relative positions of the
//! two intervals and then samples coordinates consistent with it. Gaps between
//! disjoint intervals are concentrated around `theta`, where the bound is
//! tight, with a tail long enough to saturate the ramp when `theta * gamma > 1`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GfmmError, Result};
use crate::geometry::{hull_within, overlap_test};
use crate::kernels::{membership_raw, similarity_raw, SimilarityMeasure};
use crate::model::{Algorithm, Hyperbox, HyperparamConfig, Pattern, TrainedModel};

const MAX_SAMPLES: usize = 16;

/// One filtered pair that could nevertheless be merged or expanded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleViolation {
    pub trial: u64,
    pub first_lower: Vec<f64>,
    pub first_upper: Vec<f64>,
    pub second_lower: Vec<f64>,
    pub second_upper: Vec<f64>,
    pub score: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// `lemma1` or `lemma2`.
    pub oracle: String,
    pub measure: Option<SimilarityMeasure>,
    pub trials: u64,
    pub seed: u64,
    pub theta: f64,
    pub gamma: Vec<f64>,
    pub threshold: f64,
    /// Trials whose score fell below the threshold.
    pub filtered: u64,
    pub violations: u64,
    /// Positional case (1 to 6) to number of sampled dimensions.
    pub case_coverage: BTreeMap<u8, u64>,
    /// Saturated (`.1`) and linear (`.2`) branches of the two disjoint cases.
    pub subcase_coverage: BTreeMap<String, u64>,
    /// Up to 16 violating trials, with everything needed to replay them.
    pub violation_samples: Vec<OracleViolation>,
}

impl OracleReport {
    fn new(
        oracle: &str,
        measure: Option<SimilarityMeasure>,
        seed: u64,
        theta: f64,
        gamma: &[f64],
    ) -> Self {
        let threshold = 1.0 - theta * gamma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        OracleReport {
            oracle: oracle.to_string(),
            measure,
            trials: 0,
            seed,
            theta,
            gamma: gamma.to_vec(),
            threshold,
            filtered: 0,
            violations: 0,
            case_coverage: (1..=6).map(|c| (c, 0)).collect(),
            subcase_coverage: ["5.1", "5.2", "6.1", "6.2"]
                .iter()
                .map(|s| (s.to_string(), 0))
                .collect(),
            violation_samples: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Whether every positional case was sampled at least once.
    pub fn all_cases_covered(&self) -> bool {
        self.case_coverage.values().all(|&n| n > 0)
    }

    fn record(
        &mut self,
        trial: u64,
        first: (&[f64], &[f64]),
        second: (&[f64], &[f64]),
        score: f64,
        admissible: bool,
    ) {
        if score >= self.threshold {
            return;
        }
        self.filtered += 1;
        if admissible {
            self.violations += 1;
            if self.violation_samples.len() < MAX_SAMPLES {
                self.violation_samples.push(OracleViolation {
                    trial,
                    first_lower: first.0.to_vec(),
                    first_upper: first.1.to_vec(),
                    second_lower: second.0.to_vec(),
                    second_upper: second.1.to_vec(),
                    score,
                    threshold: self.threshold,
                });
            }
        }
    }
}

fn check_oracle_args(trials: u64, theta: f64, gamma: &[f64]) -> Result<()> {
    if trials == 0 {
        return Err(GfmmError::Config("trials must be positive".into()));
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(GfmmError::Config(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if gamma.is_empty() || gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(GfmmError::Config("gamma entries must be positive".into()));
    }
    Ok(())
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Width of an interval that must stay within `theta`.
fn small_width(rng: &mut ChaCha8Rng, theta: f64) -> f64 {
    let cap = theta.min(1.0);
    match rng.gen_range(0..8) {
        0 => 0.0,
        1 => cap,
        _ => rng.gen_range(0.0..=cap),
    }
}

/// Gap between two disjoint intervals.
fn gap(rng: &mut ChaCha8Rng, theta: f64, gamma: f64) -> f64 {
    match rng.gen_range(0..10) {
        0 => theta,
        1..=4 => theta * rng.gen_range(0.8..1.2),
        5..=7 => rng.gen_range(0.0..=(1.0 / gamma + theta)),
        _ => rng.gen_range(0.0..=1.0),
    }
}

/// Left-to-right layout of interval endpoints, shifted to a random offset
/// and rescaled when the total span exceeds the unit interval.
fn place(rng: &mut ChaCha8Rng, steps: &[f64]) -> Vec<f64> {
    let span: f64 = steps.iter().sum();
    let scale = if span > 1.0 { 1.0 / span } else { 1.0 };
    let room = (1.0 - span * scale).max(0.0);
    let mut at = rng.gen_range(0.0..=room);
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(at);
    for s in steps {
        at = (at + s * scale).min(1.0);
        out.push(at);
    }
    out
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// One dimension of a (box, pattern) pair in positional case `case`;
/// returns `(v, w, xl, xu)`. The pattern never exceeds `theta`; the box may.
fn pattern_dim(rng: &mut ChaCha8Rng, case: u8, theta: f64, gamma: f64) -> (f64, f64, f64, f64) {
    // rounding in the layout can push a width just past theta; redraw then
    loop {
        let d = pattern_dim_once(rng, case, theta, gamma);
        if d.3 - d.2 <= theta {
            return d;
        }
    }
}

fn pattern_dim_once(
    rng: &mut ChaCha8Rng,
    case: u8,
    theta: f64,
    gamma: f64,
) -> (f64, f64, f64, f64) {
    let wx = small_width(rng, theta);
    let wb = rng.gen_range(0.0..=(1.5 * theta).min(1.0));
    match case {
        // x^l <= v <= x^u <= w
        1 => {
            let t = rng.gen_range(0.0..=1.0);
            let p = place(rng, &[wx * t, wx * (1.0 - t), wb]);
            (p[1], p[3], p[0], p[2])
        }
        // v <= x^l <= w <= x^u
        2 => {
            let t = rng.gen_range(0.0..=1.0);
            let p = place(rng, &[wb, wx * t, wx * (1.0 - t)]);
            (p[0], p[2], p[1], p[3])
        }
        // x^l <= v <= w <= x^u
        3 => {
            let inner = rng.gen_range(0.0..=wx);
            let t = rng.gen_range(0.0..=1.0);
            let p = place(rng, &[(wx - inner) * t, inner, (wx - inner) * (1.0 - t)]);
            (p[1], p[2], p[0], p[3])
        }
        // v <= x^l <= x^u <= w
        4 => {
            let pad = rng.gen_range(0.0..=wb);
            let p = place(rng, &[pad, wx, wb - pad]);
            (p[0], p[3], p[1], p[2])
        }
        // v <= w <= x^l <= x^u
        5 => {
            let g = gap(rng, theta, gamma);
            let p = place(rng, &[wb, g, wx]);
            (p[0], p[1], p[2], p[3])
        }
        // x^l <= x^u <= v <= w
        _ => {
            let g = gap(rng, theta, gamma);
            let p = place(rng, &[wx, g, wb]);
            (p[2], p[3], p[0], p[1])
        }
    }
}

/// One dimension of a box pair `(i, k)` in positional case `case`; returns
/// `(v_i, w_i, v_k, w_k)`, both widths within `theta`.
fn pair_dim(rng: &mut ChaCha8Rng, case: u8, theta: f64, gamma: f64) -> (f64, f64, f64, f64) {
    loop {
        let d = pair_dim_once(rng, case, theta, gamma);
        if d.1 - d.0 <= theta && d.3 - d.2 <= theta {
            return d;
        }
    }
}

fn pair_dim_once(rng: &mut ChaCha8Rng, case: u8, theta: f64, gamma: f64) -> (f64, f64, f64, f64) {
    let wi = small_width(rng, theta);
    let wk = small_width(rng, theta);
    match case {
        // v_i <= v_k <= w_i <= w_k
        1 => {
            let shared = rng.gen_range(0.0..=wi.min(wk));
            let p = place(rng, &[wi - shared, shared, wk - shared]);
            (p[0], p[2], p[1], p[3])
        }
        // v_k <= v_i <= w_k <= w_i
        2 => {
            let shared = rng.gen_range(0.0..=wi.min(wk));
            let p = place(rng, &[wk - shared, shared, wi - shared]);
            (p[1], p[3], p[0], p[2])
        }
        // v_k <= w_k <= v_i <= w_i
        3 => {
            let g = gap(rng, theta, gamma);
            let p = place(rng, &[wk, g, wi]);
            (p[2], p[3], p[0], p[1])
        }
        // v_i <= w_i <= v_k <= w_k
        4 => {
            let g = gap(rng, theta, gamma);
            let p = place(rng, &[wi, g, wk]);
            (p[0], p[1], p[2], p[3])
        }
        // v_k <= v_i <= w_i <= w_k
        5 => {
            let (inner, outer) = ordered(wi, wk);
            let pad = rng.gen_range(0.0..=(outer - inner));
            let p = place(rng, &[pad, inner, outer - inner - pad]);
            (p[1], p[2], p[0], p[3])
        }
        // v_i <= v_k <= w_k <= w_i
        _ => {
            let (inner, outer) = ordered(wi, wk);
            let pad = rng.gen_range(0.0..=(outer - inner));
            let p = place(rng, &[pad, inner, outer - inner - pad]);
            (p[0], p[3], p[1], p[2])
        }
    }
}

/// Case for dimension `j` of a trial: the trial's focus dimension cycles
/// through the six cases in order, the others are drawn at random.
fn pick_case(rng: &mut ChaCha8Rng, trial: u64, j: usize, focus: usize) -> u8 {
    if j == focus {
        (trial % 6) as u8 + 1
    } else {
        rng.gen_range(1..=6)
    }
}

/// Checks that no (box, pattern) pair whose membership falls below
/// `1 - theta * max(gamma)` can be expanded within `theta`.
///
/// Patterns have width at most `theta`; the dimension count is `gamma.len()`.
pub fn oracle_lemma1(trials: u64, seed: u64, theta: f64, gamma: &[f64]) -> Result<OracleReport> {
    check_oracle_args(trials, theta, gamma)?;
    let n = gamma.len();
    let mut report = OracleReport::new("lemma1", None, seed, theta, gamma);
    let (mut v, mut w, mut xl, mut xu) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let focus = rng.gen_range(0..n);
        for j in 0..n {
            let case = pick_case(&mut rng, trial, j, focus);
            let (a, b, c, d) = pattern_dim(&mut rng, case, theta, gamma[j]);
            (v[j], w[j], xl[j], xu[j]) = (a, b, c, d);
            *report.case_coverage.entry(case).or_default() += 1;
            let sub = match case {
                5 => Some(if (d - b) * gamma[j] > 1.0 {
                    "5.1"
                } else {
                    "5.2"
                }),
                6 => Some(if (a - c) * gamma[j] > 1.0 {
                    "6.1"
                } else {
                    "6.2"
                }),
                _ => None,
            };
            if let Some(s) = sub {
                *report.subcase_coverage.entry(s.to_string()).or_default() += 1;
            }
        }
        let h = Hyperbox {
            vmin: v.clone(),
            wmax: w.clone(),
            label: 0,
            cardinality: 1,
        };
        let b = membership_raw(&xl, &xu, &h, gamma);
        let admissible = hull_within(&v, &w, &xl, &xu, theta);
        report.record(trial, (&v, &w), (&xl, &xu), b, admissible);
    }
    report.trials = trials;
    Ok(report)
}

/// Checks that no pair of boxes (each within `theta`) whose similarity falls
/// below `1 - theta * max(gamma)` can be merged within `theta`.
pub fn oracle_lemma2(
    trials: u64,
    seed: u64,
    theta: f64,
    gamma: &[f64],
    measure: SimilarityMeasure,
) -> Result<OracleReport> {
    check_oracle_args(trials, theta, gamma)?;
    let n = gamma.len();
    let mut report = OracleReport::new("lemma2", Some(measure), seed, theta, gamma);
    report.subcase_coverage.clear();
    let mut bi = Hyperbox {
        vmin: vec![0.0; n],
        wmax: vec![0.0; n],
        label: 0,
        cardinality: 1,
    };
    let mut bk = bi.clone();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let focus = rng.gen_range(0..n);
        for j in 0..n {
            let case = pick_case(&mut rng, trial, j, focus);
            let (a, b, c, d) = pair_dim(&mut rng, case, theta, gamma[j]);
            (bi.vmin[j], bi.wmax[j], bk.vmin[j], bk.wmax[j]) = (a, b, c, d);
            *report.case_coverage.entry(case).or_default() += 1;
        }
        let s = similarity_raw(&bi, &bk, gamma, measure);
        let admissible = hull_within(&bi.vmin, &bi.wmax, &bk.vmin, &bk.wmax, theta);
        report.record(
            trial,
            (&bi.vmin, &bi.wmax),
            (&bk.vmin, &bk.wmax),
            s,
            admissible,
        );
    }
    report.trials = trials;
    Ok(report)
}

/// Outcome of training the same data with pruning on and off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub passed: bool,
    pub first_divergence: Option<String>,
    pub candidates_on: u64,
    pub candidates_off: u64,
}

/// Trains `algo` twice, with and without pruning, and compares the models
/// box by box. Passing also requires the pruned run to look at no more
/// candidates than the plain one.
pub fn audit_equivalence(
    data: &[Pattern],
    config: &HyperparamConfig,
    algo: Algorithm,
) -> Result<AuditReport> {
    audit_with_bound_shift(data, config, algo, 0.0)
}

/// Same as [`audit_equivalence`] with the pruning threshold of the accelerated
/// run moved by `shift`. Only meaningful for testing the auditor itself.
#[doc(hidden)]
pub fn audit_with_bound_shift(
    data: &[Pattern],
    config: &HyperparamConfig,
    algo: Algorithm,
    shift: f64,
) -> Result<AuditReport> {
    let on =
        crate::train_with_bound_shift(data, &config.clone().with_accelerated(true), algo, shift)?;
    let off = crate::train(data, &config.clone().with_accelerated(false), algo)?;
    Ok(compare(&on, &off))
}

fn compare(on: &TrainedModel, off: &TrainedModel) -> AuditReport {
    let candidates_on = on.stats.candidates_considered;
    let candidates_off = off.stats.candidates_considered;
    let mut first_divergence = on.first_divergence(off);
    if first_divergence.is_none() && candidates_on > candidates_off {
        first_divergence = Some(format!(
            "accelerated run considered {candidates_on} candidates, more than {candidates_off}"
        ));
    }
    AuditReport {
        passed: first_divergence.is_none(),
        first_divergence,
        candidates_on,
        candidates_off,
    }
}

/// Cross-class box pairs found by an exhaustive overlap scan.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OverlapAudit {
    /// `(i, j, dim)`: boxes `i < j` of different classes overlapping, with
    /// the minimum-overlap dimension.
    pub overlapping: Vec<(usize, usize, usize)>,
    /// Boxes of different classes with identical corners. Duplicate points
    /// with conflicting labels end up here; the overlap test does not flag them.
    pub coincident: Vec<(usize, usize)>,
}

impl OverlapAudit {
    pub fn is_clean(&self) -> bool {
        self.overlapping.is_empty() && self.coincident.is_empty()
    }
}

pub fn cross_class_overlaps(model: &TrainedModel) -> OverlapAudit {
    let mut audit = OverlapAudit::default();
    let boxes = &model.boxes;
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            let (a, b) = (&boxes[i], &boxes[j]);
            if a.label == b.label {
                continue;
            }
            if let Some(dim) = overlap_test(a, b).dim {
                audit.overlapping.push((i, j, dim));
            } else if a.vmin == b.vmin && a.wmax == b.wmax {
                audit.coincident.push((i, j));
            }
        }
    }
    audit
}
