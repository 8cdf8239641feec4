//! Expansion, overlap test and contraction of hyperboxes.
//!
//! All comparisons are exact IEEE comparisons. The four overlap cases use
//! strict inequalities (with `<=` only in the two containment cases), so
//! boxes that merely share a face do not overlap.

use crate::error::{GfmmError, Result};
use crate::model::{Bounds, Hyperbox};

/// Outcome of the overlap test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapResult {
    /// Minimum-overlap dimension, or `None` when the boxes do not overlap.
    pub dim: Option<usize>,
    /// Smallest overlap width; meaningful only when `dim` is `Some`.
    pub delta: f64,
}

impl OverlapResult {
    pub const NONE: OverlapResult = OverlapResult {
        dim: None,
        delta: 1.0,
    };

    pub fn overlaps(&self) -> bool {
        self.dim.is_some()
    }

    /// `-1` for no overlap, otherwise the 0-based dimension index.
    pub fn dim_code(&self) -> i64 {
        self.dim.map_or(-1, |d| d as i64)
    }
}

/// Whether the hull of `h` and `x` stays within `theta` on every dimension.
pub fn can_expand<X: Bounds + ?Sized>(h: &Hyperbox, x: &X, theta: f64) -> bool {
    hull_within(&h.vmin, &h.wmax, x.lower(), x.upper(), theta)
}

#[inline]
pub(crate) fn hull_within(v: &[f64], w: &[f64], xl: &[f64], xu: &[f64], theta: f64) -> bool {
    for j in 0..v.len() {
        if w[j].max(xu[j]) - v[j].min(xl[j]) > theta {
            return false;
        }
    }
    true
}

/// Componentwise hull of `h` and `x`; the cardinality grows by one.
pub fn expand<X: Bounds + ?Sized>(h: &Hyperbox, x: &X) -> Hyperbox {
    let mut out = h.clone();
    expand_in_place(&mut out, x.lower(), x.upper());
    out.cardinality += 1;
    out
}

#[inline]
pub(crate) fn expand_in_place(h: &mut Hyperbox, xl: &[f64], xu: &[f64]) {
    for j in 0..h.vmin.len() {
        h.vmin[j] = h.vmin[j].min(xl[j]);
        h.wmax[j] = h.wmax[j].max(xu[j]);
    }
}

/// Which of the four overlap cases holds on one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Case {
    /// `v_a < v_b < w_a < w_b`
    LeftPartial,
    /// `v_b < v_a < w_b < w_a`
    RightPartial,
    /// `v_a < v_b <= w_b < w_a`
    AContainsB,
    /// `v_b < v_a <= w_a < w_b`
    BContainsA,
}

#[inline]
fn case_at(va: f64, wa: f64, vb: f64, wb: f64) -> Option<Case> {
    if va < vb && vb < wa && wa < wb {
        Some(Case::LeftPartial)
    } else if vb < va && va < wb && wb < wa {
        Some(Case::RightPartial)
    } else if va < vb && vb <= wb && wb < wa {
        Some(Case::AContainsB)
    } else if vb < va && va <= wa && wa < wb {
        Some(Case::BContainsA)
    } else {
        None
    }
}

/// Scan every dimension for the four overlap cases and report the dimension
/// with the smallest overlap. Ties keep the earlier dimension.
pub fn overlap_test(a: &Hyperbox, b: &Hyperbox) -> OverlapResult {
    overlap_raw(&a.vmin, &a.wmax, &b.vmin, &b.wmax)
}

#[inline]
pub(crate) fn overlap_raw(va: &[f64], wa: &[f64], vb: &[f64], wb: &[f64]) -> OverlapResult {
    let mut delta_old = 1.0f64;
    let mut dim = None;
    for j in 0..va.len() {
        let (v_a, w_a, v_b, w_b) = (va[j], wa[j], vb[j], wb[j]);
        let candidate = match case_at(v_a, w_a, v_b, w_b) {
            Some(Case::LeftPartial) => w_a - v_b,
            Some(Case::RightPartial) => w_b - v_a,
            Some(Case::AContainsB) | Some(Case::BContainsA) => (w_b - v_a).min(w_a - v_b),
            None => return OverlapResult::NONE,
        };
        let delta_new = candidate.min(delta_old);
        if delta_new < delta_old {
            dim = Some(j);
            delta_old = delta_new;
        }
    }
    match dim {
        Some(_) => OverlapResult {
            dim,
            delta: delta_old,
        },
        // Every dimension overlapped but none by less than the initial width.
        None => OverlapResult::NONE,
    }
}

/// Whether the box `[v, w]` overlaps any box in `others` other than those
/// with label `label`.
pub(crate) fn overlaps_other_class<'a, I>(v: &[f64], w: &[f64], label: usize, others: I) -> bool
where
    I: IntoIterator<Item = &'a Hyperbox>,
{
    others
        .into_iter()
        .filter(|o| o.label != label)
        .any(|o| overlap_raw(v, w, &o.vmin, &o.wmax).overlaps())
}

/// Remove the overlap between `a` and `b` on dimension `dim`.
///
/// Partial overlaps are split at the midpoint; containment snaps the boundary
/// that cuts off the smaller piece.
pub fn contract(a: &Hyperbox, b: &Hyperbox, dim: usize) -> Result<(Hyperbox, Hyperbox)> {
    let mut a = a.clone();
    let mut b = b.clone();
    contract_in_place(&mut a, &mut b, dim)?;
    Ok((a, b))
}

pub(crate) fn contract_in_place(a: &mut Hyperbox, b: &mut Hyperbox, dim: usize) -> Result<()> {
    let len = a.vmin.len();
    if dim >= len || b.vmin.len() != len {
        return Err(GfmmError::DimensionOutOfRange { dim, len });
    }
    let (va, wa, vb, wb) = (a.vmin[dim], a.wmax[dim], b.vmin[dim], b.wmax[dim]);
    match case_at(va, wa, vb, wb) {
        Some(Case::LeftPartial) => {
            let mid = (wa + vb) / 2.0;
            a.wmax[dim] = mid;
            b.vmin[dim] = mid;
        }
        Some(Case::RightPartial) => {
            let mid = (wb + va) / 2.0;
            b.wmax[dim] = mid;
            a.vmin[dim] = mid;
        }
        Some(Case::AContainsB) => {
            if wb - va <= wa - vb {
                a.vmin[dim] = wb;
            } else {
                a.wmax[dim] = vb;
            }
        }
        Some(Case::BContainsA) => {
            if wb - va <= wa - vb {
                b.wmax[dim] = va;
            } else {
                b.vmin[dim] = wa;
            }
        }
        None => return Err(GfmmError::NoOverlapCase { dim }),
    }
    Ok(())
}
