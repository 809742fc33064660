//! Numerical verification of the counting statements this library is
//! organized around.
//!
//! Each procedure takes a map and a curve, evaluates the hypotheses of one
//! counting statement at finite resolution, and reports every hypothesis
//! with a verdict plus an overall conclusion. The verdicts are sampled
//! evidence, not proofs: membership tests run on rasters and curve
//! conditions are checked at (refined) samples. Failure of a hypothesis
//! yields "no conclusion" rather than a counterexample claim.
//!
//! The boundary-maps-outward variant of the index count (image strictly
//! outside a region) is deliberately not implemented; only the
//! image-strictly-inside form is. Rasters cannot distinguish "slow escape"
//! from genuinely unbounded image arcs without extra analysis, so the
//! procedures here stick to the statements that finite sampling supports.

use super::raster::{FilledRaster, DEFAULT_RASTER, RETRY_RASTER};
use super::{
    enclosed_poles_with, fixed_point_defect_with, isolate_fixed_points, push_forward,
    ContourError, Curve,
};
use crate::map::ComplexMap;
use crate::report::{CheckReport, FixedPointRecord, Hypothesis};
use num_complex::Complex64;

/// Budget for push-forward refinement inside the checks.
const PUSH_MAX_POINTS: usize = 1 << 15;
/// Minimum clearance between a pole and a curve for the "no poles on X"
/// hypotheses.
const POLE_CLEARANCE: f64 = 1e-6;

fn image_tol(c: &Curve) -> f64 {
    super::suggested_push_tolerance(c)
}

// Membership oracle that retries once at the fine raster when a query
// lands in a wall cell. The fine raster is built lazily and reused.
struct Membership<'c> {
    curve: &'c Curve,
    coarse: FilledRaster,
    fine: Option<FilledRaster>,
}

impl<'c> Membership<'c> {
    fn new(curve: &'c Curve) -> Membership<'c> {
        Membership { curve, coarse: FilledRaster::build(curve, DEFAULT_RASTER), fine: None }
    }

    fn contains(&mut self, p: Complex64) -> Result<bool, ContourError> {
        match self.coarse.contains(p) {
            Err(ContourError::Undecidable { .. }) => {
                if self.fine.is_none() {
                    self.fine = Some(FilledRaster::build(self.curve, RETRY_RASTER));
                }
                self.fine.as_ref().unwrap().contains(p)
            }
            other => other,
        }
    }
}

fn fixed_points_inside(
    map: &dyn ComplexMap,
    region: &Curve,
    membership: &mut Membership<'_>,
) -> Result<Vec<FixedPointRecord>, ContourError> {
    let window = region.bounding_box().inflate(1.02);
    let fps = isolate_fixed_points(map, &window, 1e-6)?;
    let mut records = Vec::new();
    for fp in &fps {
        if matches!(membership.contains(fp.location), Ok(true)) {
            records.push(FixedPointRecord::from(fp));
        }
    }
    Ok(records)
}

/// Verify the index statement on a region: if the image of the boundary
/// lies strictly inside the region, the region contains exactly m + 1
/// fixed points, where m counts enclosed poles with multiplicity.
///
/// Hypothesis checked: every refined sample of `N(boundary)` is in the
/// filled set of `boundary`. Conclusion checked: the argument-principle
/// count along `boundary` equals m + 1.
pub fn check_index_hypotheses(
    map: &dyn ComplexMap,
    boundary: &Curve,
) -> Result<CheckReport, ContourError> {
    let mut membership = Membership::new(boundary);
    let image = push_forward(map, boundary, image_tol(boundary), PUSH_MAX_POINTS)?;

    let mut inside = 0usize;
    let mut first_violation: Option<(usize, Complex64, &str)> = None;
    for (k, &w) in image.points().iter().enumerate() {
        match membership.contains(w) {
            Ok(true) => inside += 1,
            Ok(false) => {
                first_violation.get_or_insert((k, w, "leaves the filled set"));
            }
            Err(ContourError::Undecidable { .. }) => {
                first_violation.get_or_insert((k, w, "is undecidable at the fine raster"));
            }
            Err(e) => return Err(e),
        }
    }
    let image_inside = Hypothesis::new(
        "image-in-filled-set",
        first_violation.is_none(),
        match first_violation {
            None => format!(
                "all {} refined image samples lie in the filled set of the boundary",
                image.len()
            ),
            Some((k, w, why)) => format!(
                "image sample {k} at ({:.6}, {:.6}) {why} ({inside}/{} inside)",
                w.re,
                w.im,
                image.len()
            ),
        },
    );

    let poles = map.poles_in(&boundary.bounding_box().inflate(1.25));
    let m = enclosed_poles_with(&poles, boundary)? as i64;
    let report = fixed_point_defect_with(map, boundary, &poles)?;
    let counted = report.fixed_points_inside;
    let count_matches = Hypothesis::new(
        "count-equals-poles-plus-one",
        counted == m + 1,
        format!(
            "enclosed pole multiplicity m = {m}; expected m + 1 = {}; argument-principle count = {counted}",
            m + 1
        ),
    );

    let all = image_inside.pass && count_matches.pass;
    let fixed_points = if all {
        fixed_points_inside(map, boundary, &mut membership)?
    } else {
        Vec::new()
    };
    let conclusion = if all {
        format!(
            "confirmed: the boundary traps its image and the region contains exactly {} fixed points",
            m + 1
        )
    } else {
        "not confirmed: a hypothesis failed, no conclusion follows".to_string()
    };

    Ok(CheckReport {
        hypotheses: vec![image_inside, count_matches],
        conclusion,
        poles_inside: Some(m as u32),
        expected_fixed_points: Some(m + 1),
        counted_fixed_points: Some(counted),
        fixed_points,
    })
}

/// Verify the surround-and-map-out statement on a curve X: if X keeps
/// clear of poles, encloses at least one, and its image avoids the filled
/// set K(X) entirely — every image sample outside K(X) and every interior
/// raster cell of K(X) in the flood-fill exterior of the image curve —
/// then the interior of K(X) holds a weakly repelling fixed point.
pub fn check_surround_and_map_out(
    map: &dyn ComplexMap,
    x: &Curve,
) -> Result<CheckReport, ContourError> {
    let poles = map.poles_in(&x.bounding_box().inflate(1.5));
    let mut min_dist = f64::INFINITY;
    for pole in &poles {
        min_dist = min_dist.min(x.distance_to_point(pole.location));
    }
    let clear = Hypothesis::new(
        "poles-clear-of-curve",
        min_dist > POLE_CLEARANCE,
        if poles.is_empty() {
            "no poles near the curve".to_string()
        } else {
            format!("closest pole is {min_dist:.3e} from the curve")
        },
    );

    let mut x_membership = Membership::new(x);
    let mut surrounded = None;
    for pole in &poles {
        if matches!(x_membership.contains(pole.location), Ok(true)) {
            surrounded = Some(pole.location);
            break;
        }
    }
    let surrounds = Hypothesis::new(
        "pole-inside",
        surrounded.is_some(),
        match surrounded {
            Some(p) => format!("pole at ({:.6}, {:.6}) lies in the filled set", p.re, p.im),
            None => "no pole lies in the filled set of the curve".to_string(),
        },
    );

    // Image clear of K(X), in both directions.
    let image = push_forward(map, x, image_tol(x), PUSH_MAX_POINTS)?;
    let mut image_out = true;
    let mut detail = format!(
        "all {} image samples avoid the filled set and it lies in the image's exterior",
        image.len()
    );
    for (k, &w) in image.points().iter().enumerate() {
        match x_membership.contains(w) {
            Ok(false) => {}
            Ok(true) => {
                image_out = false;
                detail = format!(
                    "image sample {k} at ({:.6}, {:.6}) lands inside the filled set",
                    w.re, w.im
                );
                break;
            }
            Err(ContourError::Undecidable { .. }) => {
                image_out = false;
                detail = format!("image sample {k} is undecidable against the filled set");
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if image_out {
        // Every interior cell of K(X) must sit in the unbounded complement
        // component of the image curve.
        let mut image_membership = Membership::new(&image);
        let x_raster = FilledRaster::build(x, DEFAULT_RASTER);
        'cells: for q in x_raster.interior_cell_centers() {
            match image_membership.contains(q) {
                Ok(false) => {}
                Ok(true) => {
                    image_out = false;
                    detail = format!(
                        "filled-set cell at ({:.6}, {:.6}) is enclosed by the image curve",
                        q.re, q.im
                    );
                    break 'cells;
                }
                Err(ContourError::Undecidable { .. }) => {
                    image_out = false;
                    detail = format!(
                        "filled-set cell at ({:.6}, {:.6}) is undecidable against the image",
                        q.re, q.im
                    );
                    break 'cells;
                }
                Err(e) => return Err(e),
            }
        }
    }
    let maps_out = Hypothesis::new("image-avoids-filled-set", image_out, detail);

    let all = clear.pass && surrounds.pass && maps_out.pass;
    let fixed_points = if all {
        fixed_points_inside(map, x, &mut x_membership)?
    } else {
        Vec::new()
    };
    let weakly = fixed_points
        .iter()
        .filter(|fp| fp.stability == "repelling" || fp.stability == "parabolic-derivative-1")
        .count();
    let conclusion = if all {
        format!(
            "confirmed: the filled set must contain a weakly repelling fixed point; \
             isolation found {} fixed point(s) inside, {} weakly repelling",
            fixed_points.len(),
            weakly
        )
    } else {
        "not confirmed: a hypothesis failed, no conclusion follows".to_string()
    };

    Ok(CheckReport {
        hypotheses: vec![clear, surrounds, maps_out],
        conclusion,
        poles_inside: None,
        expected_fixed_points: None,
        counted_fixed_points: None,
        fixed_points,
    })
}

/// Verify the map-out-twice statement on a curve X: if X keeps clear of
/// poles, lies inside the filled set of its image K(f(X)), and the second
/// image f²(X) lies in the flood-fill exterior of f(X), then the interior
/// of K(f(X)) holds a weakly repelling fixed point.
pub fn check_map_out_twice(
    map: &dyn ComplexMap,
    x: &Curve,
) -> Result<CheckReport, ContourError> {
    let poles = map.poles_in(&x.bounding_box().inflate(1.5));
    let mut min_dist = f64::INFINITY;
    for pole in &poles {
        min_dist = min_dist.min(x.distance_to_point(pole.location));
    }
    let clear = Hypothesis::new(
        "poles-clear-of-curve",
        min_dist > POLE_CLEARANCE,
        if poles.is_empty() {
            "no poles near the curve".to_string()
        } else {
            format!("closest pole is {min_dist:.3e} from the curve")
        },
    );

    let image = push_forward(map, x, image_tol(x), PUSH_MAX_POINTS)?;
    let mut image_membership = Membership::new(&image);

    let mut x_inside = true;
    let mut detail = format!(
        "all {} curve samples lie in the filled set of the image",
        x.len()
    );
    for (k, &p) in x.points().iter().enumerate() {
        match image_membership.contains(p) {
            Ok(true) => {}
            Ok(false) => {
                x_inside = false;
                detail = format!(
                    "curve sample {k} at ({:.6}, {:.6}) is outside the filled set of the image",
                    p.re, p.im
                );
                break;
            }
            Err(ContourError::Undecidable { .. }) => {
                x_inside = false;
                detail = format!("curve sample {k} is undecidable against the image");
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let contained = Hypothesis::new("curve-inside-image-filled-set", x_inside, detail);

    let second = push_forward(map, &image, image_tol(&image), PUSH_MAX_POINTS)?;
    let mut second_out = true;
    let mut detail = format!(
        "all {} second-image samples lie in the exterior of the first image",
        second.len()
    );
    for (k, &w) in second.points().iter().enumerate() {
        match image_membership.contains(w) {
            Ok(false) => {}
            Ok(true) => {
                second_out = false;
                detail = format!(
                    "second-image sample {k} at ({:.6}, {:.6}) stays inside the first image",
                    w.re, w.im
                );
                break;
            }
            Err(ContourError::Undecidable { .. }) => {
                second_out = false;
                detail = format!("second-image sample {k} is undecidable against the first image");
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let exits = Hypothesis::new("second-image-outside", second_out, detail);

    let all = clear.pass && contained.pass && exits.pass;
    let fixed_points = if all {
        fixed_points_inside(map, &image, &mut image_membership)?
    } else {
        Vec::new()
    };
    let weakly = fixed_points
        .iter()
        .filter(|fp| fp.stability == "repelling" || fp.stability == "parabolic-derivative-1")
        .count();
    let conclusion = if all {
        format!(
            "confirmed: the filled set of the image must contain a weakly repelling fixed \
             point; isolation found {} fixed point(s) inside, {} weakly repelling",
            fixed_points.len(),
            weakly
        )
    } else {
        "not confirmed: a hypothesis failed, no conclusion follows".to_string()
    };

    Ok(CheckReport {
        hypotheses: vec![clear, contained, exits],
        conclusion,
        poles_inside: None,
        expected_fixed_points: None,
        counted_fixed_points: None,
        fixed_points,
    })
}

/// Outcome of the pole-in-iterated-loops search.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PoleLoopResult {
    /// Smallest n with a pole in the filled set of the n-th image curve,
    /// if one was found within the budget.
    pub found_at: Option<u32>,
    /// True when the search ended because an image curve passed through a
    /// pole exactly — itself a witness, reported as success at that n.
    pub hit_pole_exactly: bool,
    /// Image curves actually computed.
    pub steps_computed: u32,
}

/// Search for the smallest n ≤ `n_max` such that the filled set of the
/// n-th image of the curve contains a pole of the map (n = 0 is the curve
/// itself).
pub fn poles_in_loops_search(
    map: &dyn ComplexMap,
    c: &Curve,
    n_max: u32,
) -> Result<PoleLoopResult, ContourError> {
    let mut current = c.clone();
    for n in 0..=n_max {
        let poles = map.poles_in(&current.bounding_box().inflate(1.25));
        if !poles.is_empty() {
            let mut membership = Membership::new(&current);
            for pole in &poles {
                match membership.contains(pole.location) {
                    Ok(true) => {
                        return Ok(PoleLoopResult {
                            found_at: Some(n),
                            hit_pole_exactly: false,
                            steps_computed: n,
                        });
                    }
                    // A pole pinned in a wall cell even at the fine raster
                    // is skipped rather than guessed; if the curve truly
                    // passes through it the next push will say so.
                    Ok(false) | Err(ContourError::Undecidable { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        if n == n_max {
            break;
        }
        match push_forward(map, &current, image_tol(&current), PUSH_MAX_POINTS) {
            Ok(next) => current = next,
            Err(ContourError::CurveThroughPole(_)) => {
                return Ok(PoleLoopResult {
                    found_at: Some(n),
                    hit_pole_exactly: true,
                    steps_computed: n,
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(PoleLoopResult { found_at: None, hit_pole_exactly: false, steps_computed: n_max })
}
