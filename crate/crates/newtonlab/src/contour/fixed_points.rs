//! Locating and classifying fixed points by argument-principle bisection.
//!
//! The count from [`fixed_point_defect`](super::fixed_point_defect) turns a
//! rectangle into a certificate: "this box holds k fixed points counted
//! with multiplicity". Quadtree subdivision keeps splitting boxes with a
//! nonzero count until they are smaller than the requested tolerance, then
//! a damped Newton iteration on `h(z) = N(z) − z` polishes the box center
//! into the actual fixed point. Split lines are nudged (within 1% of the
//! box) whenever a fixed point or pole sits too close to them, so children
//! always tile their parent exactly and counts stay conserved.

use super::{fixed_point_defect_with, ContourError, Curve};
use crate::map::{ComplexMap, Pole, Rect};
use num_complex::Complex64;

/// Local behavior of a fixed point, decided from |N′| with a 1e−6 band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// |N′| < 1e−6.
    Superattracting,
    /// |N′| < 1 (outside the superattracting band).
    Attracting,
    /// |N′| > 1.
    Repelling,
    /// N′ within 1e−6 of 1 exactly.
    ParabolicDerivativeOne,
    /// |N′| within 1e−6 of 1 but N′ ≠ 1.
    IndifferentOther,
}

impl Stability {
    /// Repelling or parabolic-with-derivative-one: the class that Newton
    /// maps of entire functions never produce at a finite fixed point.
    pub fn weakly_repelling(self) -> bool {
        matches!(self, Stability::Repelling | Stability::ParabolicDerivativeOne)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Superattracting => "superattracting",
            Stability::Attracting => "attracting",
            Stability::Repelling => "repelling",
            Stability::ParabolicDerivativeOne => "parabolic-derivative-1",
            Stability::IndifferentOther => "indifferent-other",
        }
    }
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A located fixed point with its local data.
#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    pub location: Complex64,
    /// Argument-principle count of the isolating box (1 when classified
    /// directly from a point).
    pub multiplicity: u32,
    pub stability: Stability,
    /// N′ at the fixed point.
    pub derivative: Complex64,
}

const CLASSIFY_BAND: f64 = 1e-6;

/// Classify a point that is already known (to 1e−8·(1+|z0|)) to be fixed.
pub fn classify_fixed_point(
    map: &dyn ComplexMap,
    z0: Complex64,
) -> Result<FixedPoint, ContourError> {
    let residual = match map.eval(z0) {
        crate::extended::Finite(w) => (w - z0).norm(),
        crate::extended::Infinity => f64::INFINITY,
    };
    if residual >= 1e-8 * (1.0 + z0.norm()) {
        return Err(ContourError::FixedPointOnCurve { index: 0, dist: residual });
    }
    let derivative = match map.derivative_at(z0) {
        crate::extended::Finite(d) => d,
        crate::extended::Infinity => {
            return Err(ContourError::WindowPerturbationFailed);
        }
    };
    let modulus = derivative.norm();
    let stability = if modulus < CLASSIFY_BAND {
        Stability::Superattracting
    } else if (modulus - 1.0).abs() <= CLASSIFY_BAND {
        if (derivative - Complex64::new(1.0, 0.0)).norm() <= CLASSIFY_BAND {
            Stability::ParabolicDerivativeOne
        } else {
            Stability::IndifferentOther
        }
    } else if modulus < 1.0 {
        Stability::Attracting
    } else {
        Stability::Repelling
    };
    Ok(FixedPoint { location: z0, multiplicity: 1, stability, derivative })
}

/// Samples per rectangle side when counting a box.
const BOX_SAMPLES_PER_SIDE: usize = 16;
/// Relative nudges tried when a box boundary hits a fixed point or pole.
const PERTURB_SCALES: [f64; 5] = [1.0, 1.004, 0.9965, 1.0085, 0.992];

fn count_box(
    map: &dyn ComplexMap,
    rect: &Rect,
    poles: &[Pole],
) -> Result<i64, ContourError> {
    let curve = Curve::rectangle(rect, BOX_SAMPLES_PER_SIDE);
    let report = fixed_point_defect_with(map, &curve, poles)?;
    Ok(report.fixed_points_inside)
}

// Count with boundary perturbation: scale the rectangle about its center by
// up to 1% until its boundary is clear. The returned rect is the one that
// was actually counted.
fn count_box_perturbed(
    map: &dyn ComplexMap,
    rect: &Rect,
    poles: &[Pole],
) -> Result<(Rect, i64), ContourError> {
    for &scale in &PERTURB_SCALES {
        let candidate = if scale == 1.0 { *rect } else { rect.inflate(scale) };
        match count_box(map, &candidate, poles) {
            Ok(count) => return Ok((candidate, count)),
            Err(
                ContourError::FixedPointOnCurve { .. }
                | ContourError::PoleOnCurve { .. }
                | ContourError::CurveThroughPole(_),
            ) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(ContourError::WindowPerturbationFailed)
}

// Split a rectangle into four children that tile it exactly, nudging the
// split lines (within 1% of the box size) until all four children count
// cleanly. Exact tiling keeps the counts conserved: every interior fixed
// point belongs to exactly one child.
fn split_clean(
    map: &dyn ComplexMap,
    rect: &Rect,
    poles: &[Pole],
) -> Result<Vec<(Rect, i64)>, ContourError> {
    let center = rect.center();
    let (w, h) = (rect.width(), rect.height());
    let offsets = [
        (0.0, 0.0),
        (0.004, 0.0),
        (0.0, 0.004),
        (-0.0035, 0.0),
        (0.0, -0.0035),
        (0.006, 0.006),
        (-0.008, 0.003),
        (0.003, -0.008),
    ];
    'offsets: for &(dx, dy) in &offsets {
        let cx = center.re + dx * w;
        let cy = center.im + dy * h;
        let children = [
            Rect::new(rect.re_min, cx, rect.im_min, cy),
            Rect::new(cx, rect.re_max, rect.im_min, cy),
            Rect::new(rect.re_min, cx, cy, rect.im_max),
            Rect::new(cx, rect.re_max, cy, rect.im_max),
        ];
        let mut counted = Vec::with_capacity(4);
        for child in &children {
            match count_box(map, child, poles) {
                Ok(count) => counted.push((*child, count)),
                Err(
                    ContourError::FixedPointOnCurve { .. }
                    | ContourError::PoleOnCurve { .. }
                    | ContourError::CurveThroughPole(_),
                ) => continue 'offsets,
                Err(e) => return Err(e),
            }
        }
        return Ok(counted);
    }
    Err(ContourError::WindowPerturbationFailed)
}

// Damped Newton iteration on h(z) = N(z) − z from a box center. Half steps
// first (robust near multiple fixed points), then full steps to finish.
fn polish(map: &dyn ComplexMap, start: Complex64) -> Option<Complex64> {
    let mut z = start;
    for step in 0..60 {
        let h = match map.eval(z) {
            crate::extended::Finite(w) => w - z,
            crate::extended::Infinity => return None,
        };
        if h.norm() < 1e-14 * (1.0 + z.norm()) {
            return Some(z);
        }
        let dh = match map.derivative_at(z) {
            crate::extended::Finite(d) => d - Complex64::new(1.0, 0.0),
            crate::extended::Infinity => return None,
        };
        if dh.norm() < 1e-300 {
            return None;
        }
        let damping = if step < 8 { 0.5 } else { 1.0 };
        let next = z - h / dh * damping;
        if !next.re.is_finite() || !next.im.is_finite() {
            return None;
        }
        z = next;
    }
    Some(z)
}

/// Find every fixed point of the map in `window`, each isolated to within
/// `tol` and polished to high accuracy, with multiplicities from the
/// argument-principle counts of the isolating boxes. Results are sorted by
/// (re, im).
pub fn isolate_fixed_points(
    map: &dyn ComplexMap,
    window: &Rect,
    tol: f64,
) -> Result<Vec<FixedPoint>, ContourError> {
    assert!(tol > 0.0);
    let poles = map.poles_in(&window.inflate(1.6));
    let (outer, outer_count) = count_box_perturbed(map, window, &poles)?;

    let mut stack: Vec<(Rect, i64)> = vec![(outer, outer_count)];
    let mut located: Vec<(Complex64, i64)> = Vec::new();
    let mut unresolved: Vec<Rect> = Vec::new();

    while let Some((rect, count)) = stack.pop() {
        if count == 0 {
            continue;
        }
        if count < 0 {
            // Counts are nonnegative for positively-oriented boxes; a
            // negative value means the sampling lied. Treat as unresolved.
            unresolved.push(rect);
            continue;
        }
        if rect.max_dim() <= tol {
            match polish(map, rect.center()) {
                Some(z) => {
                    let residual = match map.eval(z) {
                        crate::extended::Finite(w) => (w - z).norm(),
                        crate::extended::Infinity => f64::INFINITY,
                    };
                    let in_reach = rect.inflate(4.0).contains(z);
                    if residual < 1e-9 * (1.0 + z.norm()) && in_reach {
                        located.push((z, count));
                    } else {
                        unresolved.push(rect);
                    }
                }
                None => unresolved.push(rect),
            }
            continue;
        }
        match split_clean(map, &rect, &poles) {
            Ok(children) => {
                for (child, child_count) in children {
                    if child_count != 0 {
                        stack.push((child, child_count));
                    }
                }
            }
            Err(ContourError::WindowPerturbationFailed) => unresolved.push(rect),
            Err(e) => return Err(e),
        }
    }

    if !unresolved.is_empty() {
        let size = unresolved.iter().map(Rect::max_dim).fold(0.0, f64::max);
        return Err(ContourError::IsolationIncomplete {
            unresolved: unresolved.len(),
            size,
        });
    }

    // Merge coincident finds (same point polished out of adjacent boxes).
    located.sort_by(|a, b| {
        a.0.re.partial_cmp(&b.0.re).unwrap().then(a.0.im.partial_cmp(&b.0.im).unwrap())
    });
    let mut merged: Vec<(Complex64, i64)> = Vec::new();
    for (z, count) in located {
        match merged.last_mut() {
            Some((prev, prev_count)) if (*prev - z).norm() < tol => *prev_count += count,
            _ => merged.push((z, count)),
        }
    }

    let mut out = Vec::with_capacity(merged.len());
    for (z, count) in merged {
        let mut fp = classify_fixed_point(map, z)?;
        fp.multiplicity = count.max(1) as u32;
        out.push(fp);
    }
    Ok(out)
}
