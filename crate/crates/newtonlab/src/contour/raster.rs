//! Raster test for membership in the filled set of a closed curve.
//!
//! The filled set K(γ) — the curve together with every bounded complement
//! component — is approximated on a grid: cells touched by the polyline
//! become walls, the unbounded outside is recovered by a flood fill from
//! the frame, and everything else is inside. Wall marking is conservative
//! (every cell the polyline visits is marked, stepping at quarter-cell
//! resolution), so the marked cells form an 8-connected chain that a
//! 4-connected flood cannot leak through. Queries landing in a wall cell
//! are reported as undecidable rather than guessed; callers retry with a
//! finer raster.

use super::{ContourError, Curve};
use crate::map::Rect;
use num_complex::Complex64;

/// Default raster resolution for one-shot queries.
pub const DEFAULT_RASTER: usize = 512;
/// Retry resolution when a query lands in a wall cell.
pub const RETRY_RASTER: usize = 2048;

/// A rasterized filled set, built once per curve and queried many times.
pub struct FilledRaster {
    re0: f64,
    im0: f64,
    cell_w: f64,
    cell_h: f64,
    n: usize,
    wall: Vec<bool>,
    outside: Vec<bool>,
}

impl FilledRaster {
    /// Rasterize `curve` on an `n × n` grid over 1.2× its bounding box.
    pub fn build(curve: &Curve, n: usize) -> FilledRaster {
        assert!(n >= 16, "raster resolution too small");
        let bbox = curve.bounding_box();
        let pad_w = (0.1 * bbox.width()).max(1e-9 * (1.0 + bbox.max_dim()));
        let pad_h = (0.1 * bbox.height()).max(1e-9 * (1.0 + bbox.max_dim()));
        let re0 = bbox.re_min - pad_w;
        let re1 = bbox.re_max + pad_w;
        let im0 = bbox.im_min - pad_h;
        let im1 = bbox.im_max + pad_h;
        let cell_w = (re1 - re0) / n as f64;
        let cell_h = (im1 - im0) / n as f64;

        let mut wall = vec![false; n * n];
        let clamp_cell = |x: f64, origin: f64, cell: f64| -> usize {
            (((x - origin) / cell).floor() as isize).clamp(0, n as isize - 1) as usize
        };
        let mut mark = |p: Complex64| {
            let i = clamp_cell(p.re, re0, cell_w);
            let j = clamp_cell(p.im, im0, cell_h);
            wall[j * n + i] = true;
        };
        let pts = curve.points();
        let m = pts.len();
        let step = cell_w.min(cell_h) * 0.25;
        for k in 0..m {
            let a = pts[k];
            let b = pts[(k + 1) % m];
            let len = (b - a).norm();
            let substeps = (len / step).ceil().max(1.0) as usize;
            for s in 0..=substeps {
                mark(a + (b - a) * (s as f64 / substeps as f64));
            }
        }

        // Flood the outside from the frame, 4-connected.
        let mut outside = vec![false; n * n];
        let mut queue: Vec<usize> = Vec::new();
        for i in 0..n {
            for idx in [i, (n - 1) * n + i, i * n, i * n + (n - 1)] {
                if !wall[idx] && !outside[idx] {
                    outside[idx] = true;
                    queue.push(idx);
                }
            }
        }
        while let Some(idx) = queue.pop() {
            let (j, i) = (idx / n, idx % n);
            let mut visit = |idx2: usize| {
                if !wall[idx2] && !outside[idx2] {
                    outside[idx2] = true;
                    queue.push(idx2);
                }
            };
            if i > 0 {
                visit(idx - 1);
            }
            if i + 1 < n {
                visit(idx + 1);
            }
            if j > 0 {
                visit(idx - n);
            }
            if j + 1 < n {
                visit(idx + n);
            }
        }

        FilledRaster { re0, im0, cell_w, cell_h, n, wall, outside }
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    fn cell_of(&self, p: Complex64) -> Option<usize> {
        let i = ((p.re - self.re0) / self.cell_w).floor();
        let j = ((p.im - self.im0) / self.cell_h).floor();
        if i < 0.0 || j < 0.0 || i >= self.n as f64 || j >= self.n as f64 {
            return None;
        }
        Some(j as usize * self.n + i as usize)
    }

    /// Is `p` in the filled set? Points beyond the raster box are outside
    /// by construction; points in a wall cell are undecidable.
    pub fn contains(&self, p: Complex64) -> Result<bool, ContourError> {
        match self.cell_of(p) {
            None => Ok(false),
            Some(idx) => {
                if self.wall[idx] {
                    Err(ContourError::Undecidable { raster: self.n })
                } else {
                    Ok(!self.outside[idx])
                }
            }
        }
    }

    /// Centers of the strictly interior cells (neither wall nor outside).
    pub fn interior_cell_centers(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for j in 0..self.n {
            for i in 0..self.n {
                let idx = j * self.n + i;
                if !self.wall[idx] && !self.outside[idx] {
                    out.push(Complex64::new(
                        self.re0 + (i as f64 + 0.5) * self.cell_w,
                        self.im0 + (j as f64 + 0.5) * self.cell_h,
                    ));
                }
            }
        }
        out
    }

    /// The rectangle the raster covers.
    pub fn coverage(&self) -> Rect {
        Rect::new(
            self.re0,
            self.re0 + self.n as f64 * self.cell_w,
            self.im0,
            self.im0 + self.n as f64 * self.cell_h,
        )
    }
}

/// One-shot filled-set membership test at a given raster resolution.
///
/// A wall-cell hit comes back as [`ContourError::Undecidable`]; callers are
/// expected to retry with a finer raster (the conventional escalation is
/// [`DEFAULT_RASTER`] → [`RETRY_RASTER`]).
pub fn filled_set_contains(
    c: &Curve,
    p: Complex64,
    raster_n: usize,
) -> Result<bool, ContourError> {
    FilledRaster::build(c, raster_n).contains(p)
}

/// Membership with the standard resolution escalation built in.
pub fn filled_set_contains_retrying(c: &Curve, p: Complex64) -> Result<bool, ContourError> {
    match filled_set_contains(c, p, DEFAULT_RASTER) {
        Err(ContourError::Undecidable { .. }) => filled_set_contains(c, p, RETRY_RASTER),
        other => other,
    }
}
