//! Closed sampled curves and argument-principle counting.
//!
//! Curves are closed polylines: the sample list is implicitly closed by the
//! segment from the last point back to the first, and orientation is the
//! sample order. All winding quantities are *exact for the sampled polygon*:
//! they are computed as sums of signed turning angles, each strictly inside
//! (−π, π), then rounded to the nearest integer — so the only approximation
//! in the whole contour layer is the polygon itself standing in for a
//! smooth curve.
//!
//! Soundness gap, documented: the counting identities need `f(z) ≠ z, ∞`
//! on the whole curve, while finite sampling can only check the samples. The
//! defect computation refines until consecutive difference vectors turn by
//! less than π/2, which suppresses aliasing but cannot certify the gaps
//! between samples.

mod fixed_points;
mod raster;

pub mod checks;

pub use fixed_points::{
    classify_fixed_point, isolate_fixed_points, FixedPoint, Stability,
};
pub use raster::{
    filled_set_contains, filled_set_contains_retrying, FilledRaster, DEFAULT_RASTER,
    RETRY_RASTER,
};

use crate::map::{ComplexMap, Pole, Rect};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("curve needs at least 8 samples, got {0}")]
    TooFewSamples(usize),
    #[error("consecutive curve samples coincide at index {0}")]
    CoincidentAdjacentSamples(usize),
    #[error("curve JSON is malformed: {0}")]
    MalformedCurve(String),
    #[error("point lies on the curve (distance {dist:.3e} at segment {segment})")]
    PointOnCurve { segment: usize, dist: f64 },
    #[error("sample counts differ: {0} vs {1}")]
    SampleCountMismatch(usize, usize),
    #[error("matched samples coincide at index {0}")]
    CoincidentSamples(usize),
    #[error("curves are not disjoint (closest approach {0:.3e})")]
    CurvesIntersect(f64),
    #[error("curve passes through a pole: the map is infinite at sample {0}")]
    CurveThroughPole(usize),
    #[error("push_forward exceeded {max_points} points (worst image gap {gap:.3e})")]
    MaxPointsExceeded { max_points: usize, gap: f64 },
    #[error("a pole lies within {dist:.3e} of the curve")]
    PoleOnCurve { dist: f64 },
    #[error("a fixed point lies on the curve: |N(p)-p| = {dist:.3e} at sample {index}")]
    FixedPointOnCurve { index: usize, dist: f64 },
    #[error("defect refinement exceeded {0} samples without meeting the turn bound")]
    RefinementCap(usize),
    #[error("query point falls in a wall cell at raster {raster}; retry finer")]
    Undecidable { raster: usize },
    #[error("fixed-point isolation left {unresolved} unresolved boxes near size {size:.3e}")]
    IsolationIncomplete { unresolved: usize, size: f64 },
    #[error("could not perturb the window boundary clear of fixed points and poles")]
    WindowPerturbationFailed,
}

/// A closed sampled curve (polyline, implicitly closed).
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    points: Vec<Complex64>,
}

impl Curve {
    /// Validate and wrap a sample list: at least 8 samples, consecutive
    /// samples (including the closing pair) distinct.
    pub fn new(points: Vec<Complex64>) -> Result<Curve, ContourError> {
        if points.len() < 8 {
            return Err(ContourError::TooFewSamples(points.len()));
        }
        let n = points.len();
        for k in 0..n {
            let d = points[(k + 1) % n] - points[k];
            if d.re == 0.0 && d.im == 0.0 {
                return Err(ContourError::CoincidentAdjacentSamples(k));
            }
        }
        Ok(Curve { points })
    }

    /// Counterclockwise circle with `n` samples.
    pub fn circle(center: Complex64, radius: f64, n: usize) -> Curve {
        assert!(radius > 0.0 && n >= 8);
        let points = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                center + Complex64::from_polar(radius, t)
            })
            .collect();
        Curve { points }
    }

    /// Counterclockwise axis-aligned ellipse, optionally rotated.
    pub fn ellipse(center: Complex64, a: f64, b: f64, rotation: f64, n: usize) -> Curve {
        assert!(a > 0.0 && b > 0.0 && n >= 8);
        let rot = Complex64::from_polar(1.0, rotation);
        let points = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                center + rot * Complex64::new(a * t.cos(), b * t.sin())
            })
            .collect();
        Curve { points }
    }

    /// Counterclockwise rectangle boundary with `per_side` samples per side.
    pub fn rectangle(rect: &Rect, per_side: usize) -> Curve {
        assert!(per_side >= 2);
        let mut points = Vec::with_capacity(4 * per_side);
        let (w, h) = (rect.width(), rect.height());
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            points.push(Complex64::new(rect.re_min + t * w, rect.im_min));
        }
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            points.push(Complex64::new(rect.re_max, rect.im_min + t * h));
        }
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            points.push(Complex64::new(rect.re_max - t * w, rect.im_max));
        }
        for k in 0..per_side {
            let t = k as f64 / per_side as f64;
            points.push(Complex64::new(rect.re_min, rect.im_max - t * h));
        }
        Curve { points }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounding_box(&self) -> Rect {
        let mut re_min = f64::INFINITY;
        let mut re_max = f64::NEG_INFINITY;
        let mut im_min = f64::INFINITY;
        let mut im_max = f64::NEG_INFINITY;
        for p in &self.points {
            re_min = re_min.min(p.re);
            re_max = re_max.max(p.re);
            im_min = im_min.min(p.im);
            im_max = im_max.max(p.im);
        }
        Rect::new(re_min, re_max, im_min, im_max)
    }

    /// Distance from `p` to the closed polyline.
    pub fn distance_to_point(&self, p: Complex64) -> f64 {
        let n = self.points.len();
        let mut best = f64::INFINITY;
        for k in 0..n {
            let d = segment_point_distance(self.points[k], self.points[(k + 1) % n], p);
            best = best.min(d);
        }
        best
    }

    /// Minimum distance between this polyline and another.
    pub fn distance_to_curve(&self, other: &Curve) -> f64 {
        let n = self.points.len();
        let m = other.points.len();
        let mut best = f64::INFINITY;
        for k in 0..n {
            let (a1, a2) = (self.points[k], self.points[(k + 1) % n]);
            for l in 0..m {
                let (b1, b2) = (other.points[l], other.points[(l + 1) % m]);
                best = best.min(segment_segment_distance(a1, a2, b1, b2));
            }
        }
        best
    }

    /// Interchange format: JSON array of `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.points
                .iter()
                .map(|p| serde_json::json!([p.re, p.im]))
                .collect(),
        )
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Curve, ContourError> {
        let pairs: Vec<[f64; 2]> = serde_json::from_value(value.clone())
            .map_err(|e| ContourError::MalformedCurve(e.to_string()))?;
        Curve::new(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }
}

/// A push-forward tolerance proportionate to the curve's extent: fine
/// enough for dense image sampling, coarse enough to keep refinement
/// budgets sane.
pub fn suggested_push_tolerance(c: &Curve) -> f64 {
    let b = c.bounding_box();
    (0.005 * b.width().hypot(b.height())).max(1e-9)
}

fn segment_point_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let ab = b - a;
    let len_sqr = ab.norm_sqr();
    if len_sqr == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len_sqr;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn segment_segment_distance(a1: Complex64, a2: Complex64, b1: Complex64, b2: Complex64) -> f64 {
    // Proper crossing means distance zero; otherwise the minimum is attained
    // at an endpoint against the other segment.
    let d1 = cross(a2 - a1, b1 - a1);
    let d2 = cross(a2 - a1, b2 - a1);
    let d3 = cross(b2 - b1, a1 - b1);
    let d4 = cross(b2 - b1, a2 - b1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return 0.0;
    }
    segment_point_distance(a1, a2, b1)
        .min(segment_point_distance(a1, a2, b2))
        .min(segment_point_distance(b1, b2, a1))
        .min(segment_point_distance(b1, b2, a2))
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

// Signed turning-angle sum of a cyclic vector list around 0, in turns.
// Each term is the principal argument of v_{k+1}/v_k, so it is exact for
// the polygon as long as no v_k vanishes.
fn turn_sum(vectors: &[Complex64]) -> f64 {
    let n = vectors.len();
    let mut total = 0.0;
    for k in 0..n {
        total += (vectors[(k + 1) % n] / vectors[k]).arg();
    }
    total / (2.0 * std::f64::consts::PI)
}

/// Winding number of the curve around `P`: the number of signed turns the
/// vector from `P` to the curve makes. Exact for the sampled polygon.
pub fn winding_number(c: &Curve, p: Complex64) -> Result<i32, ContourError> {
    let n = c.points.len();
    for k in 0..n {
        let d = segment_point_distance(c.points[k], c.points[(k + 1) % n], p);
        if d < 1e-12 {
            return Err(ContourError::PointOnCurve { segment: k, dist: d });
        }
    }
    let vectors: Vec<Complex64> = c.points.iter().map(|&q| q - p).collect();
    Ok(turn_sum(&vectors).round() as i32)
}

/// Winding number of the parameter-matched difference curve `σ(t) − γ(t)`
/// around 0. For disjoint curves this equals [`disjoint_winding_sum`].
pub fn relative_winding(sigma: &Curve, gamma: &Curve) -> Result<i32, ContourError> {
    if sigma.len() != gamma.len() {
        return Err(ContourError::SampleCountMismatch(sigma.len(), gamma.len()));
    }
    let diffs: Vec<Complex64> = sigma
        .points
        .iter()
        .zip(&gamma.points)
        .map(|(&s, &g)| s - g)
        .collect();
    for (k, d) in diffs.iter().enumerate() {
        if d.norm() < 1e-12 {
            return Err(ContourError::CoincidentSamples(k));
        }
    }
    Ok(turn_sum(&diffs).round() as i32)
}

/// For disjoint closed curves, `wind(σ−γ, 0)` can be assembled from plain
/// winding numbers: `wind(γ, Q) + wind(σ, P)` with `Q` any point of σ and
/// `P` any point of γ. (Contracting one curve to a constant shows the
/// identity; the property tests exercise it against [`relative_winding`].)
pub fn disjoint_winding_sum(sigma: &Curve, gamma: &Curve) -> Result<i32, ContourError> {
    let d = sigma.distance_to_curve(gamma);
    if d < 1e-12 {
        return Err(ContourError::CurvesIntersect(d));
    }
    let a = winding_number(gamma, sigma.points[0])?;
    let b = winding_number(sigma, gamma.points[0])?;
    Ok(a + b)
}

/// Image of a curve under a map, with adaptive subdivision: source chord
/// midpoints are inserted until every adjacent pair of image points is
/// closer than `tol` (or the sample budget runs out).
pub fn push_forward(
    map: &dyn ComplexMap,
    c: &Curve,
    tol: f64,
    max_points: usize,
) -> Result<Curve, ContourError> {
    assert!(tol > 0.0, "push_forward tolerance must be positive");
    let mut pts = c.points.clone();
    let mut imgs = eval_all(map, &pts)?;
    loop {
        let n = pts.len();
        let mut split = Vec::new();
        let mut worst = 0.0f64;
        for k in 0..n {
            let gap = (imgs[(k + 1) % n] - imgs[k]).norm();
            worst = worst.max(gap);
            if gap >= tol {
                split.push(k);
            }
        }
        if split.is_empty() {
            break;
        }
        if n + split.len() > max_points {
            return Err(ContourError::MaxPointsExceeded { max_points, gap: worst });
        }
        // Insert chord midpoints after each marked index, back to front so
        // earlier indices stay valid.
        for &k in split.iter().rev() {
            let mid = (pts[k] + pts[(k + 1) % n]) * 0.5;
            let img = match map.eval(mid) {
                crate::extended::Finite(w) => w,
                crate::extended::Infinity => {
                    return Err(ContourError::CurveThroughPole(k));
                }
            };
            pts.insert(k + 1, mid);
            imgs.insert(k + 1, img);
        }
    }
    // Distinct adjacent image samples: exact duplicates (e.g. symmetric
    // sources with equal images) are collapsed.
    let mut out: Vec<Complex64> = Vec::with_capacity(imgs.len());
    for &w in &imgs {
        if out.last().map_or(true, |&last| last != w) {
            out.push(w);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    Curve::new(out)
}

fn eval_all(map: &dyn ComplexMap, pts: &[Complex64]) -> Result<Vec<Complex64>, ContourError> {
    pts.iter()
        .enumerate()
        .map(|(k, &p)| match map.eval(p) {
            crate::extended::Finite(w) => Ok(w),
            crate::extended::Infinity => Err(ContourError::CurveThroughPole(k)),
        })
        .collect()
}

/// Sum of multiplicities of the map's poles strictly enclosed by the curve
/// (winding number ≠ 0). Errors when a pole sits on the curve itself.
pub fn enclosed_poles(map: &dyn ComplexMap, c: &Curve) -> Result<u32, ContourError> {
    let inventory = map.poles_in(&c.bounding_box().inflate(1.25));
    enclosed_poles_with(&inventory, c)
}

pub(crate) fn enclosed_poles_with(poles: &[Pole], c: &Curve) -> Result<u32, ContourError> {
    let mut total = 0u32;
    for pole in poles {
        let d = c.distance_to_point(pole.location);
        if d < 1e-9 {
            return Err(ContourError::PoleOnCurve { dist: d });
        }
        if winding_number(c, pole.location)? != 0 {
            total += pole.multiplicity;
        }
    }
    Ok(total)
}

/// Argument-principle count along a curve.
#[derive(Debug, Clone)]
pub struct CountReport {
    /// `wind(N(γ(t)) − γ(t), 0)`: fixed points minus poles inside.
    pub defect: i64,
    /// Sum of multiplicities of enclosed poles.
    pub poles_inside: u32,
    /// `defect + poles_inside`.
    pub fixed_points_inside: i64,
    /// The refined curve the count was evaluated on.
    pub curve: Curve,
}

const DEFECT_SAMPLE_CAP: usize = 1 << 16;

/// Count fixed points minus poles inside a curve by winding the
/// displacement field `N(p) − p` along it, pre-refining segments that
/// subtend a wide angle at a known pole and then refining further until
/// consecutive displacement vectors turn by less than π/2.
///
/// Sampling caveat: the preconditions (`N(p) ≠ p, ∞`) are checked at the
/// samples; a violation strictly between samples is invisible. The turn
/// bound makes such aliasing loud in practice but is not a proof.
pub fn fixed_point_defect(
    map: &dyn ComplexMap,
    c: &Curve,
) -> Result<CountReport, ContourError> {
    let inventory = map.poles_in(&c.bounding_box().inflate(1.25));
    fixed_point_defect_with(map, c, &inventory)
}

pub(crate) fn fixed_point_defect_with(
    map: &dyn ComplexMap,
    c: &Curve,
    poles: &[Pole],
) -> Result<CountReport, ContourError> {
    for pole in poles {
        let d = c.distance_to_point(pole.location);
        if d < 1e-9 {
            return Err(ContourError::PoleOnCurve { dist: d });
        }
    }

    let mut pts = c.points.clone();
    // Geometric pre-refinement. Near a pole of multiplicity m the
    // displacement argument spins m times as fast as arg(z − p), so a
    // coarse polygon can wrap a whole turn between samples while the
    // measured turn looks small (aliasing the π/2 check below). A straight
    // segment subtends < π from any off-segment point and the bearing
    // sweeps monotonically, so bounding the pole-weighted subtended angle
    // per segment makes the image turns faithful.
    if !poles.is_empty() {
        loop {
            let n = pts.len();
            let mut split = Vec::new();
            for k in 0..n {
                let a = pts[k];
                let b = pts[(k + 1) % n];
                let sweep: f64 = poles
                    .iter()
                    .map(|p| {
                        let u = a - p.location;
                        let v = b - p.location;
                        p.multiplicity as f64 * (v / u).arg().abs()
                    })
                    .sum();
                if sweep > std::f64::consts::FRAC_PI_4 {
                    split.push(k);
                }
            }
            if split.is_empty() {
                break;
            }
            if n + split.len() > DEFECT_SAMPLE_CAP {
                return Err(ContourError::RefinementCap(DEFECT_SAMPLE_CAP));
            }
            for &k in split.iter().rev() {
                let mid = (pts[k] + pts[(k + 1) % n]) * 0.5;
                pts.insert(k + 1, mid);
            }
        }
    }
    let mut diffs = displacement(map, &pts)?;
    loop {
        let n = pts.len();
        let mut split = Vec::new();
        for k in 0..n {
            let turn = (diffs[(k + 1) % n] / diffs[k]).arg().abs();
            if turn > std::f64::consts::FRAC_PI_2 {
                split.push(k);
            }
        }
        if split.is_empty() {
            break;
        }
        if n + split.len() > DEFECT_SAMPLE_CAP {
            return Err(ContourError::RefinementCap(DEFECT_SAMPLE_CAP));
        }
        for &k in split.iter().rev() {
            let mid = (pts[k] + pts[(k + 1) % n]) * 0.5;
            let d = displacement_at(map, mid, k)?;
            pts.insert(k + 1, mid);
            diffs.insert(k + 1, d);
        }
    }

    let defect = turn_sum(&diffs).round() as i64;
    let refined = Curve { points: pts };
    let poles_inside = enclosed_poles_with(poles, &refined)?;
    Ok(CountReport {
        defect,
        poles_inside,
        fixed_points_inside: defect + poles_inside as i64,
        curve: refined,
    })
}

fn displacement(map: &dyn ComplexMap, pts: &[Complex64]) -> Result<Vec<Complex64>, ContourError> {
    pts.iter()
        .enumerate()
        .map(|(k, &p)| displacement_at(map, p, k))
        .collect()
}

fn displacement_at(
    map: &dyn ComplexMap,
    p: Complex64,
    index: usize,
) -> Result<Complex64, ContourError> {
    match map.eval(p) {
        crate::extended::Infinity => Err(ContourError::CurveThroughPole(index)),
        crate::extended::Finite(w) => {
            let d = w - p;
            if d.norm() < 1e-9 {
                Err(ContourError::FixedPointOnCurve { index, dist: d.norm() })
            } else {
                Ok(d)
            }
        }
    }
}
