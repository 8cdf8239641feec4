//! Ramp, membership and hyperbox similarity kernels.
//!
//! Inputs are assumed finite; NaN is rejected when patterns are built, so the
//! hot loops carry no NaN checks. The `*_at_least` variants stop scanning
//! dimensions as soon as the running minimum drops below a bound and report
//! `None`; when they return `Some(v)`, `v` is bit-identical to the full kernel.

use serde::{Deserialize, Serialize};

use crate::error::{GfmmError, Result};
use crate::model::{Bounds, Hyperbox};

/// How two hyperboxes are compared during agglomeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityMeasure {
    /// Farthest extents of the two boxes.
    Longest,
    /// Smallest gap between the two boxes.
    Shortest,
    /// Larger of the two asymmetric max-point / min-point scores.
    MidMax,
    /// Smaller of the two asymmetric max-point / min-point scores.
    MidMin,
}

impl SimilarityMeasure {
    pub const ALL: [SimilarityMeasure; 4] = [
        SimilarityMeasure::Longest,
        SimilarityMeasure::Shortest,
        SimilarityMeasure::MidMax,
        SimilarityMeasure::MidMin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimilarityMeasure::Longest => "longest",
            SimilarityMeasure::Shortest => "shortest",
            SimilarityMeasure::MidMax => "mid-max",
            SimilarityMeasure::MidMin => "mid-min",
        }
    }
}

impl std::fmt::Display for SimilarityMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SimilarityMeasure {
    type Err = GfmmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "longest" => Ok(SimilarityMeasure::Longest),
            "shortest" => Ok(SimilarityMeasure::Shortest),
            "mid-max" => Ok(SimilarityMeasure::MidMax),
            "mid-min" => Ok(SimilarityMeasure::MidMin),
            other => Err(GfmmError::Config(format!(
                "unknown similarity measure `{other}`"
            ))),
        }
    }
}

/// Clamped linear decay: `z·g` limited to `[0, 1]`. Both `z·g == 0` and
/// `z·g == 1` take the linear branch.
#[inline]
pub fn ramp(z: f64, g: f64) -> f64 {
    let zg = z * g;
    if zg > 1.0 {
        1.0
    } else if zg < 0.0 {
        0.0
    } else {
        zg
    }
}

#[inline]
fn decay(z: f64, g: f64) -> f64 {
    1.0 - ramp(z, g)
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(GfmmError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Fuzzy membership of the input bounds `x` in hyperbox `h`.
pub fn membership<X: Bounds + ?Sized>(x: &X, h: &Hyperbox, gamma: &[f64]) -> Result<f64> {
    check_dims(h.dims(), x.dims())?;
    check_dims(h.dims(), gamma.len())?;
    Ok(membership_raw(x.lower(), x.upper(), h, gamma))
}

#[inline]
pub(crate) fn membership_raw(xl: &[f64], xu: &[f64], h: &Hyperbox, gamma: &[f64]) -> f64 {
    let mut b = 1.0f64;
    for j in 0..gamma.len() {
        let g = gamma[j];
        let d = decay(xu[j] - h.wmax[j], g).min(decay(h.vmin[j] - xl[j], g));
        b = b.min(d);
    }
    b
}

/// Membership if it is `>= bound`, otherwise `None` (computed with early exit).
#[inline]
pub(crate) fn membership_at_least(
    xl: &[f64],
    xu: &[f64],
    h: &Hyperbox,
    gamma: &[f64],
    bound: f64,
) -> Option<f64> {
    let mut b = 1.0f64;
    for j in 0..gamma.len() {
        let g = gamma[j];
        let d = decay(xu[j] - h.wmax[j], g).min(decay(h.vmin[j] - xl[j], g));
        b = b.min(d);
        if b < bound {
            return None;
        }
    }
    Some(b)
}

/// Asymmetric middle-distance score `s_ab`: membership of `b` in `a`.
#[inline]
fn middle_at_least(a: &Hyperbox, b: &Hyperbox, gamma: &[f64], bound: f64) -> Option<f64> {
    membership_at_least(&b.vmin, &b.wmax, a, gamma, bound)
}

#[inline]
fn longest_at_least(a: &Hyperbox, b: &Hyperbox, gamma: &[f64], bound: f64) -> Option<f64> {
    let mut s = 1.0f64;
    for j in 0..gamma.len() {
        let g = gamma[j];
        let d = decay(b.wmax[j] - a.vmin[j], g).min(decay(a.wmax[j] - b.vmin[j], g));
        s = s.min(d);
        if s < bound {
            return None;
        }
    }
    Some(s)
}

#[inline]
fn shortest_at_least(a: &Hyperbox, b: &Hyperbox, gamma: &[f64], bound: f64) -> Option<f64> {
    let mut s = 1.0f64;
    for j in 0..gamma.len() {
        let g = gamma[j];
        let d = decay(b.vmin[j] - a.wmax[j], g).min(decay(a.vmin[j] - b.wmax[j], g));
        s = s.min(d);
        if s < bound {
            return None;
        }
    }
    Some(s)
}

/// Similarity if it is `>= bound`, otherwise `None`.
///
/// For the middle measures both directions are scanned with the bound: when
/// exactly one direction survives, it is the maximum, so `MidMax` stays exact.
#[inline]
pub(crate) fn similarity_at_least(
    a: &Hyperbox,
    b: &Hyperbox,
    gamma: &[f64],
    measure: SimilarityMeasure,
    bound: f64,
) -> Option<f64> {
    match measure {
        SimilarityMeasure::Longest => longest_at_least(a, b, gamma, bound),
        SimilarityMeasure::Shortest => shortest_at_least(a, b, gamma, bound),
        SimilarityMeasure::MidMax => {
            match (
                middle_at_least(a, b, gamma, bound),
                middle_at_least(b, a, gamma, bound),
            ) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (Some(x), None) | (None, Some(x)) => Some(x),
                (None, None) => None,
            }
        }
        SimilarityMeasure::MidMin => {
            let x = middle_at_least(a, b, gamma, bound)?;
            let y = middle_at_least(b, a, gamma, bound)?;
            Some(x.min(y))
        }
    }
}

#[inline]
pub(crate) fn similarity_raw(
    a: &Hyperbox,
    b: &Hyperbox,
    gamma: &[f64],
    measure: SimilarityMeasure,
) -> f64 {
    // Every kernel value is >= 0, so a bound of -inf never triggers.
    similarity_at_least(a, b, gamma, measure, f64::NEG_INFINITY)
        .expect("similarity is never below -inf")
}

/// Similarity of two hyperboxes under `measure`, in `[0, 1]`.
pub fn similarity(
    a: &Hyperbox,
    b: &Hyperbox,
    gamma: &[f64],
    measure: SimilarityMeasure,
) -> Result<f64> {
    check_dims(a.dims(), b.dims())?;
    check_dims(a.dims(), gamma.len())?;
    Ok(similarity_raw(a, b, gamma, measure))
}

/// The asymmetric middle-distance score `s_ab` on its own.
pub fn middle_similarity(a: &Hyperbox, b: &Hyperbox, gamma: &[f64]) -> Result<f64> {
    check_dims(a.dims(), b.dims())?;
    check_dims(a.dims(), gamma.len())?;
    Ok(membership_raw(&b.vmin, &b.wmax, a, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_point_pattern, Pattern};

    fn hbox(v: &[f64], w: &[f64]) -> Hyperbox {
        Hyperbox::new(v.to_vec(), w.to_vec(), 0, 1).unwrap()
    }

    #[test]
    fn ramp_branches() {
        assert_eq!(ramp(-0.2, 1.0), 0.0);
        assert_eq!(ramp(0.1, 1.0), 0.1);
        assert_eq!(ramp(0.15, 10.0), 1.0);
        // closed middle branch at both ends
        assert_eq!(ramp(0.0, 3.0), 0.0);
        assert_eq!(ramp(0.5, 2.0), 1.0);
    }

    #[test]
    fn membership_inside_and_outside() {
        let h = hbox(&[0.2, 0.2], &[0.3, 0.3]);
        let inside = make_point_pattern(&[0.25, 0.25], 0).unwrap();
        assert_eq!(membership(&inside, &h, &[1.0, 1.0]).unwrap(), 1.0);

        let outside = make_point_pattern(&[0.4, 0.4], 0).unwrap();
        let b = membership(&outside, &h, &[1.0, 1.0]).unwrap();
        assert_eq!(b.to_bits(), (1.0_f64 - (0.4 - 0.3)).to_bits());

        let far = make_point_pattern(&[0.45, 0.3], 0).unwrap();
        assert_eq!(membership(&far, &h, &[10.0, 10.0]).unwrap(), 0.0);
    }

    #[test]
    fn membership_dimension_mismatch() {
        let h = hbox(&[0.2, 0.2], &[0.3, 0.3]);
        let p = make_point_pattern(&[0.25], 0).unwrap();
        assert!(matches!(
            membership(&p, &h, &[1.0, 1.0]),
            Err(GfmmError::DimensionMismatch { .. })
        ));
        let p = make_point_pattern(&[0.25, 0.25], 0).unwrap();
        assert!(membership(&p, &h, &[1.0]).is_err());
    }

    #[test]
    fn hyperbox_pattern_membership() {
        let h = hbox(&[0.2], &[0.3]);
        let x = Pattern::new(vec![0.1], vec![0.35], 0).unwrap();
        let b = membership(&x, &h, &[1.0]).unwrap();
        assert_eq!(
            b.to_bits(),
            (1.0_f64 - (0.2 - 0.1))
                .min(1.0_f64 - (0.35 - 0.3))
                .to_bits()
        );
    }

    #[test]
    fn similarity_examples() {
        let a = hbox(&[0.1], &[0.2]);
        let b = hbox(&[0.5], &[0.6]);
        let g = [1.0];
        assert_eq!(
            similarity(&a, &b, &g, SimilarityMeasure::Shortest).unwrap(),
            0.7
        );
        assert_eq!(
            similarity(&a, &b, &g, SimilarityMeasure::Longest).unwrap(),
            0.5
        );
        for m in [
            SimilarityMeasure::Shortest,
            SimilarityMeasure::MidMax,
            SimilarityMeasure::MidMin,
        ] {
            assert_eq!(similarity(&a, &a, &g, m).unwrap(), 1.0);
        }
        // the longest distance of a box to itself is its own width
        assert_eq!(
            similarity(&a, &a, &g, SimilarityMeasure::Longest).unwrap(),
            1.0_f64 - (0.2 - 0.1)
        );
        let p = hbox(&[0.3], &[0.3]);
        assert_eq!(
            similarity(&p, &p, &g, SimilarityMeasure::Longest).unwrap(),
            1.0
        );
    }

    #[test]
    fn middle_is_asymmetric() {
        let a = hbox(&[0.1], &[0.2]);
        let b = hbox(&[0.1], &[0.5]);
        let g = [1.0];
        let ab = middle_similarity(&a, &b, &g).unwrap();
        let ba = middle_similarity(&b, &a, &g).unwrap();
        assert_ne!(ab, ba);
        assert_eq!(
            similarity(&a, &b, &g, SimilarityMeasure::MidMax).unwrap(),
            ab.max(ba)
        );
        assert_eq!(
            similarity(&a, &b, &g, SimilarityMeasure::MidMin).unwrap(),
            ab.min(ba)
        );
    }

    #[test]
    fn early_exit_agrees_with_full_kernel() {
        let a = hbox(&[0.1, 0.3], &[0.2, 0.35]);
        let b = hbox(&[0.15, 0.6], &[0.25, 0.65]);
        let g = [1.0, 2.0];
        for m in SimilarityMeasure::ALL {
            let full = similarity(&a, &b, &g, m).unwrap();
            for bound in [0.0, 0.3, full, full + 1e-12, 0.95] {
                let early = similarity_at_least(&a, &b, &g, m, bound);
                if full >= bound {
                    assert_eq!(early.map(f64::to_bits), Some(full.to_bits()), "{m} {bound}");
                } else {
                    assert_eq!(early, None, "{m} {bound}");
                }
            }
        }
    }

    #[test]
    fn measure_names_round_trip() {
        for m in SimilarityMeasure::ALL {
            assert_eq!(m.name().parse::<SimilarityMeasure>().unwrap(), m);
        }
        assert!("middle".parse::<SimilarityMeasure>().is_err());
    }
}
