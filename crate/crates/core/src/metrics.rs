//! Contrast and localization scores of indicator fields against ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, strip_membership, AnnulusRadii, DirectionalExtent};
use crate::indicator::IndicatorField;

/// Median indicator inside the target set versus well outside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub inside_median: f64,
    pub outside_median: f64,
    pub ratio: f64,
    pub inside_count: usize,
    pub outside_count: usize,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) { 0.5 * (v[mid - 1] + v[mid]) } else { v[mid] })
}

/// Scores a field given a classifier returning `Some(true)` inside,
/// `Some(false)` outside and `None` in the margin band.
pub fn contrast_by(field: &IndicatorField, classify: impl Fn(&[f64]) -> Option<bool>) -> Result<Contrast> {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (i, w) in field.values.iter().enumerate() {
        match classify(&field.lattice.point(i)) {
            Some(true) => inside.push(*w),
            Some(false) => outside.push(*w),
            None => {}
        }
    }
    let (Some(inside_median), Some(outside_median)) = (median(&inside), median(&outside)) else {
        return Err(Error::Degenerate("contrast needs lattice points both inside and outside".into()));
    };
    let ratio = if outside_median > 0.0 { inside_median / outside_median } else { f64::INFINITY };
    Ok(Contrast { inside_median, outside_median, ratio, inside_count: inside.len(), outside_count: outside.len() })
}

/// Inside the open strip versus points whose projection is more than `margin` from it.
pub fn strip_contrast(field: &IndicatorField, extent: &DirectionalExtent, margin: f64) -> Result<Contrast> {
    contrast_by(field, |y| {
        if strip_membership(extent, y) {
            Some(true)
        } else if extent.gap(y) > margin {
            Some(false)
        } else {
            None
        }
    })
}

/// Inside every strip versus outside at least one strip widened by `margin`.
pub fn hull_contrast(field: &IndicatorField, extents: &[DirectionalExtent], margin: f64) -> Result<Contrast> {
    if extents.is_empty() {
        return Err(Error::InvalidArgument("hull contrast needs at least one extent".into()));
    }
    contrast_by(field, |y| {
        if extents.iter().all(|e| strip_membership(e, y)) {
            Some(true)
        } else if extents.iter().any(|e| e.gap(y) > margin) {
            Some(false)
        } else {
            None
        }
    })
}

/// Inside the open annulus versus more than `margin` from it radially.
pub fn annulus_contrast(field: &IndicatorField, sensor: &[f64], radii: &AnnulusRadii, margin: f64) -> Result<Contrast> {
    contrast_by(field, |y| {
        let d = distance(sensor, y);
        if radii.inner < d && d < radii.outer {
            Some(true)
        } else if d < radii.inner - margin || d > radii.outer + margin {
            Some(false)
        } else {
            None
        }
    })
}

/// Centroid of lattice points with `W ≥ fraction · max W`.
pub fn peak_centroid(field: &IndicatorField, fraction: f64) -> Result<Vec<f64>> {
    let top = field.max();
    if !(top > 0.0) {
        return Err(Error::Degenerate("indicator field is identically zero".into()));
    }
    let dim = field.lattice.dim();
    let mut sum = vec![0.0; dim];
    let mut count = 0usize;
    for (i, w) in field.values.iter().enumerate() {
        if *w >= fraction * top {
            for (s, c) in sum.iter_mut().zip(field.lattice.point(i)) {
                *s += c;
            }
            count += 1;
        }
    }
    Ok(sum.into_iter().map(|s| s / count as f64).collect())
}

/// Largest relative spread of `W` among lattice points that share a key
/// (projection or distance), grouped by the key rounded to `resolution`.
pub fn max_group_spread(field: &IndicatorField, key: impl Fn(&[f64]) -> f64, resolution: f64) -> f64 {
    use std::collections::HashMap;
    let mut groups: HashMap<i64, (f64, f64)> = HashMap::new();
    for (i, w) in field.values.iter().enumerate() {
        let k = (key(&field.lattice.point(i)) / resolution).round() as i64;
        let e = groups.entry(k).or_insert((*w, *w));
        e.0 = e.0.min(*w);
        e.1 = e.1.max(*w);
    }
    groups.values().filter(|(_, hi)| *hi > 0.0).map(|(lo, hi)| (hi - lo) / hi).fold(0.0, f64::max)
}
